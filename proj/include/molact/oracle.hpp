// SPDX-License-Identifier: Apache-2.0
//
// Property oracles p(.) with their normalization thresholds, a name-keyed
// registry, and the out-of-process oracle client.
//
// Subprocess protocol (newline-delimited text, one request in flight):
//   client: HELLO molact-oracle 1        server: READY <name>,<name>,...
//   client: PROP <name> <canonical-smiles>
//   server: OK <float>   |   ERR <message>

#ifndef MOLACT_ORACLE_HPP_
#define MOLACT_ORACLE_HPP_

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cmath>
#include <csignal>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "molact/canonical.hpp"
#include "molact/error.hpp"
#include "molact/molecule.hpp"
#include "molact/properties.hpp"

namespace molact {

enum class OracleSource { Builtin, External };

struct OracleSpec {
  std::string name;
  double delta = 0.5;
  OracleSource source = OracleSource::Builtin;
};

inline bool is_bioactivity(std::string_view name) { return name == "drd2" || name == "jnk3" || name == "gsk3b"; }

/// 0.3 for the bioactivity targets, 0.5 otherwise.
inline double default_delta(std::string_view name) { return is_bioactivity(name) ? 0.3 : 0.5; }

class PropertyOracle {
 public:
  explicit PropertyOracle(OracleSpec spec) : spec_(std::move(spec)) {
    if (!(spec_.delta > 0.0)) throw ConfigError("oracle '" + spec_.name + "' needs a positive delta");
  }
  virtual ~PropertyOracle() = default;
  PropertyOracle(const PropertyOracle&) = delete;
  PropertyOracle& operator=(const PropertyOracle&) = delete;

  const OracleSpec& spec() const noexcept { return spec_; }
  const std::string& name() const noexcept { return spec_.name; }

  /// Throws OracleError subclasses for external failures and
  /// UnsupportedAtomClass for molecules a built-in model cannot score.
  virtual double evaluate(const Molecule& m) = 0;

 private:
  OracleSpec spec_;
};

class FunctionOracle : public PropertyOracle {
 public:
  FunctionOracle(OracleSpec spec, std::function<double(const Molecule&)> fn)
      : PropertyOracle(std::move(spec)), fn_(std::move(fn)) {}
  double evaluate(const Molecule& m) override { return fn_(m); }

 private:
  std::function<double(const Molecule&)> fn_;
};

/// FNV-1a over "<name> <smiles>", top 53 bits scaled into [0,1).
inline double stub_score(std::string_view name, std::string_view smiles) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  };
  feed(name);
  feed(" ");
  feed(smiles);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

/// In-process stand-in for a bioactivity model: stub_score of the canonical
/// SMILES.
class HashOracle : public PropertyOracle {
 public:
  explicit HashOracle(std::string name) : PropertyOracle({name, default_delta(name), OracleSource::Builtin}) {}
  double evaluate(const Molecule& m) override { return stub_score(name(), canonical_smiles(m)); }
};

// ---------------------------------------------------------------------------
// Subprocess client

class OracleProcess {
 public:
  /// Runs `command` through /bin/sh and performs the handshake. SIGPIPE is
  /// set to ignored for the calling process so a dead child surfaces as an
  /// OracleUnavailable instead of a signal.
  explicit OracleProcess(const std::string& command,
                         std::chrono::milliseconds timeout = std::chrono::milliseconds(5000))
      : timeout_(timeout) {
    std::signal(SIGPIPE, SIG_IGN);
    int in_pipe[2];
    int out_pipe[2];
    if (::pipe2(in_pipe, O_CLOEXEC) != 0) throw OracleUnavailable("cannot create pipe");
    if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
      ::close(in_pipe[0]);
      ::close(in_pipe[1]);
      throw OracleUnavailable("cannot create pipe");
    }
    pid_ = ::fork();
    if (pid_ < 0) {
      for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) ::close(fd);
      throw OracleUnavailable("cannot fork oracle process");
    }
    if (pid_ == 0) {
      ::dup2(in_pipe[0], STDIN_FILENO);
      ::dup2(out_pipe[1], STDOUT_FILENO);
      ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
      ::_exit(127);
    }
    ::close(in_pipe[0]);
    ::close(out_pipe[1]);
    to_child_ = in_pipe[1];
    from_child_ = out_pipe[0];

    try {
      write_line("HELLO molact-oracle 1");
      std::string reply = read_line();
      if (reply.rfind("READY ", 0) != 0) throw OracleMalformedReply("bad handshake reply '" + reply + "'");
      std::stringstream names(reply.substr(6));
      std::string n;
      while (std::getline(names, n, ',')) {
        if (!n.empty()) names_.push_back(n);
      }
    } catch (...) {
      shutdown();
      throw;
    }
  }

  ~OracleProcess() { shutdown(); }
  OracleProcess(const OracleProcess&) = delete;
  OracleProcess& operator=(const OracleProcess&) = delete;

  const std::vector<std::string>& names() const noexcept { return names_; }

  /// One request/reply exchange. After a timeout the connection is out of
  /// sync and every later call throws OracleUnavailable.
  double query(std::string_view name, std::string_view smiles) {
    if (broken_) throw OracleUnavailable("oracle connection is no longer usable");
    write_line("PROP " + std::string(name) + " " + std::string(smiles));
    std::string reply = read_line();
    if (reply.rfind("ERR", 0) == 0) {
      throw OracleMalformedReply("oracle error: " + (reply.size() > 4 ? reply.substr(4) : std::string()));
    }
    if (reply.rfind("OK ", 0) != 0) throw OracleMalformedReply("unexpected reply '" + reply + "'");
    std::string num = reply.substr(3);
    char* end = nullptr;
    errno = 0;
    double v = std::strtod(num.c_str(), &end);
    if (num.empty() || end != num.c_str() + num.size() || errno == ERANGE || !std::isfinite(v)) {
      throw OracleMalformedReply("non-numeric value '" + num + "'");
    }
    return v;
  }

 private:
  void write_line(const std::string& line) {
    std::string data = line + "\n";
    std::size_t off = 0;
    while (off < data.size()) {
      ssize_t n = ::write(to_child_, data.data() + off, data.size() - off);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) {
        broken_ = true;
        throw OracleUnavailable("oracle process closed its input");
      }
      off += static_cast<std::size_t>(n);
    }
  }

  std::string read_line() {
    auto deadline = std::chrono::steady_clock::now() + timeout_;
    for (;;) {
      auto nl = buffer_.find('\n');
      if (nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
      }
      auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) {
        broken_ = true;
        throw OracleTimeout("no reply within " + std::to_string(timeout_.count()) + " ms");
      }
      pollfd p{from_child_, POLLIN, 0};
      int r = ::poll(&p, 1, static_cast<int>(left.count()));
      if (r < 0 && errno == EINTR) continue;
      if (r < 0) {
        broken_ = true;
        throw OracleUnavailable("poll failed on oracle pipe");
      }
      if (r == 0) continue;
      char chunk[4096];
      ssize_t n = ::read(from_child_, chunk, sizeof chunk);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) {
        broken_ = true;
        throw OracleUnavailable("oracle process exited");
      }
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

  void shutdown() noexcept {
    if (to_child_ >= 0) ::close(to_child_);
    if (from_child_ >= 0) ::close(from_child_);
    to_child_ = from_child_ = -1;
    if (pid_ > 0) {
      ::kill(pid_, SIGKILL);
      ::waitpid(pid_, nullptr, 0);
      pid_ = -1;
    }
  }

  std::chrono::milliseconds timeout_;
  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
  std::vector<std::string> names_;
  bool broken_ = false;
};

/// One property served by a shared OracleProcess. Molecules are sent as
/// canonical SMILES; bioactivity replies must lie in [0,1].
class ExternalOracle : public PropertyOracle {
 public:
  ExternalOracle(OracleSpec spec, std::shared_ptr<OracleProcess> process)
      : PropertyOracle(std::move(spec)), process_(std::move(process)) {}

  double evaluate(const Molecule& m) override {
    double v = process_->query(name(), canonical_smiles(m));
    if (is_bioactivity(name()) && (v < 0.0 || v > 1.0)) {
      throw OracleMalformedReply("bioactivity value " + std::to_string(v) + " outside [0,1]");
    }
    return v;
  }

 private:
  std::shared_ptr<OracleProcess> process_;
};

// ---------------------------------------------------------------------------
// Registry

class OracleRegistry {
 public:
  void add(std::unique_ptr<PropertyOracle> oracle) {
    const std::string& n = oracle->name();
    if (oracles_.count(n)) throw ConfigError("duplicate oracle '" + n + "'");
    oracles_.emplace(n, std::move(oracle));
  }

  bool contains(std::string_view name) const { return oracles_.count(std::string(name)) > 0; }

  PropertyOracle& at(std::string_view name) const {
    auto it = oracles_.find(std::string(name));
    if (it == oracles_.end()) throw ConfigError("unknown oracle '" + std::string(name) + "'");
    return *it->second;
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& [n, o] : oracles_) out.push_back(n);
    return out;
  }

 private:
  std::map<std::string, std::unique_ptr<PropertyOracle>> oracles_;
};

/// logp, solubility and qed.
inline OracleRegistry builtin_registry() {
  OracleRegistry r;
  r.add(std::make_unique<FunctionOracle>(OracleSpec{"logp", 0.5, OracleSource::Builtin},
                                         [](const Molecule& m) { return logp(m); }));
  r.add(std::make_unique<FunctionOracle>(OracleSpec{"solubility", 0.5, OracleSource::Builtin},
                                         [](const Molecule& m) { return solubility(m); }));
  r.add(std::make_unique<FunctionOracle>(OracleSpec{"qed", 0.5, OracleSource::Builtin},
                                         [](const Molecule& m) { return qed(m); }));
  return r;
}

/// Registers drd2, jnk3 and gsk3b as in-process hash stubs.
inline void add_stub_bioactivity(OracleRegistry& r) {
  for (const char* n : {"drd2", "jnk3", "gsk3b"}) {
    if (!r.contains(n)) r.add(std::make_unique<HashOracle>(n));
  }
}

/// Launches `command` and registers every property it announces that the
/// registry does not already hold.
inline void add_external_oracles(OracleRegistry& r, const std::string& command,
                                 std::chrono::milliseconds timeout = std::chrono::milliseconds(5000)) {
  auto process = std::make_shared<OracleProcess>(command, timeout);
  for (const auto& n : process->names()) {
    if (r.contains(n)) continue;
    r.add(std::make_unique<ExternalOracle>(OracleSpec{n, default_delta(n), OracleSource::External}, process));
  }
}

}  // namespace molact

#endif  // MOLACT_ORACLE_HPP_
