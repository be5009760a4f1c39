// SPDX-License-Identifier: Apache-2.0
//
// Circular fingerprints, Tanimoto similarity and Murcko scaffolds.
//
// Fingerprint identifiers follow the extended-connectivity scheme:
//   radius 0:  id = H(seed, atomic number, heavy degree, charge, total H,
//                     ring flag, aromatic flag)
//   radius r:  id = H(id_{r-1}, r, sorted (bond order, neighbour id_{r-1}) pairs)
// for r = 1..2. H chains `mix64`, a SplitMix64 finalizer over a running
// 64-bit state, so identifiers are identical on every platform. Each
// identifier sets bit (id mod width).

#ifndef MOLACT_DESCRIPTORS_HPP_
#define MOLACT_DESCRIPTORS_HPP_

#include <algorithm>
#include <bit>
#include <cstdint>
#include <optional>
#include <set>
#include <vector>

#include "molact/canonical.hpp"
#include "molact/error.hpp"
#include "molact/molecule.hpp"

namespace molact {

inline constexpr std::size_t kFingerprintBits = 2048;
inline constexpr int kFingerprintRadius = 2;
inline constexpr std::uint64_t kFingerprintSeed = 0x6d6f6c6163742d31ULL;  // "molact-1"

/// SplitMix64 finalizer.
inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Folds `value` into the running hash `state`.
inline constexpr std::uint64_t mix64(std::uint64_t state, std::uint64_t value) {
  return splitmix64(state ^ splitmix64(value));
}

class Fingerprint {
 public:
  explicit Fingerprint(std::size_t width = kFingerprintBits) : width_(width), words_((width + 63) / 64, 0) {
    if (width == 0) throw Error("fingerprint width must be positive");
  }

  void set(std::size_t bit) {
    std::uint64_t& w = words_[bit / 64];
    std::uint64_t mask = std::uint64_t{1} << (bit % 64);
    if (!(w & mask)) {
      w |= mask;
      ++n_set_;
    }
  }
  bool test(std::size_t bit) const { return (words_[bit / 64] >> (bit % 64)) & 1U; }

  std::size_t width() const noexcept { return width_; }
  std::size_t n_set() const noexcept { return n_set_; }
  const std::vector<std::uint64_t>& words() const noexcept { return words_; }

  friend bool operator==(const Fingerprint&, const Fingerprint&) = default;

 private:
  std::size_t width_;
  std::vector<std::uint64_t> words_;
  std::size_t n_set_ = 0;
};

/// All circular identifiers (radii 0..radius), deduplicated and sorted.
inline std::vector<std::uint64_t> circular_identifiers(const Molecule& m, int radius = kFingerprintRadius) {
  const auto n = static_cast<std::size_t>(m.atom_count());
  std::vector<std::uint64_t> ids(n);
  for (int i = 0; i < m.atom_count(); ++i) {
    const Atom& a = m.atom(i);
    std::uint64_t h = kFingerprintSeed;
    h = mix64(h, static_cast<std::uint64_t>(atomic_number(a.element)));
    h = mix64(h, static_cast<std::uint64_t>(m.degree(i)));
    h = mix64(h, static_cast<std::uint64_t>(static_cast<std::int64_t>(a.formal_charge)));
    h = mix64(h, static_cast<std::uint64_t>(m.total_h(i)));
    h = mix64(h, m.atom_in_ring(i) ? 1U : 0U);
    h = mix64(h, a.aromatic ? 1U : 0U);
    ids[static_cast<std::size_t>(i)] = h;
  }
  std::vector<std::uint64_t> all(ids);
  for (int r = 1; r <= radius; ++r) {
    std::vector<std::uint64_t> next(n);
    for (int i = 0; i < m.atom_count(); ++i) {
      std::vector<std::pair<std::uint64_t, std::uint64_t>> env;
      for (const auto& nb : m.neighbors(i)) {
        env.emplace_back(static_cast<std::uint64_t>(m.bond(nb.bond).order), ids[static_cast<std::size_t>(nb.atom)]);
      }
      std::sort(env.begin(), env.end());
      std::uint64_t h = mix64(ids[static_cast<std::size_t>(i)], static_cast<std::uint64_t>(r));
      for (const auto& [order, id] : env) h = mix64(mix64(h, order), id);
      next[static_cast<std::size_t>(i)] = h;
    }
    ids = std::move(next);
    all.insert(all.end(), ids.begin(), ids.end());
  }
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  return all;
}

inline Fingerprint fingerprint(const Molecule& m, std::size_t width = kFingerprintBits) {
  Fingerprint fp(width);
  for (std::uint64_t id : circular_identifiers(m)) fp.set(static_cast<std::size_t>(id % width));
  return fp;
}

/// |A and B| / |A or B|; 1.0 when both are empty. Throws on width mismatch.
inline double tanimoto(const Fingerprint& a, const Fingerprint& b) {
  if (a.width() != b.width()) throw Error("fingerprint width mismatch");
  std::size_t both = 0;
  std::size_t either = 0;
  for (std::size_t w = 0; w < a.words().size(); ++w) {
    both += static_cast<std::size_t>(std::popcount(a.words()[w] & b.words()[w]));
    either += static_cast<std::size_t>(std::popcount(a.words()[w] | b.words()[w]));
  }
  if (either == 0) return 1.0;
  return static_cast<double>(both) / static_cast<double>(either);
}

inline double tanimoto(const Molecule& a, const Molecule& b) { return tanimoto(fingerprint(a), fingerprint(b)); }

struct Scaffold {
  std::optional<Molecule> molecule;

  bool empty() const noexcept { return !molecule.has_value(); }
};

/// Ring systems plus the linkers joining them. Side chains are pruned leaf by
/// leaf; an atom double-bonded to a ring atom is kept. Atoms that lose a
/// neighbour keep their hydrogen count (bracket and aromatic hetero atoms get
/// explicit hydrogens).
inline Scaffold murcko_scaffold(const Molecule& m) {
  const int n = m.atom_count();
  bool has_ring = false;
  for (int i = 0; i < n && !has_ring; ++i) has_ring = m.atom_in_ring(i);
  if (!has_ring) return {};

  std::vector<bool> keep(static_cast<std::size_t>(n), true);
  bool changed = true;
  while (changed) {
    changed = false;
    for (int i = 0; i < n; ++i) {
      if (!keep[static_cast<std::size_t>(i)] || m.atom_in_ring(i)) continue;
      int kept_degree = 0;
      Neighbor last{-1, -1};
      for (const auto& nb : m.neighbors(i)) {
        if (keep[static_cast<std::size_t>(nb.atom)]) {
          ++kept_degree;
          last = nb;
        }
      }
      if (kept_degree > 1) continue;
      if (kept_degree == 1 && m.atom_in_ring(last.atom) && m.bond(last.bond).order == BondOrder::Double) continue;
      keep[static_cast<std::size_t>(i)] = false;
      changed = true;
    }
  }

  std::vector<int> remap(static_cast<std::size_t>(n), -1);
  std::vector<Atom> atoms;
  for (int i = 0; i < n; ++i) {
    if (!keep[static_cast<std::size_t>(i)]) continue;
    remap[static_cast<std::size_t>(i)] = static_cast<int>(atoms.size());
    Atom a = m.atom(i);
    int lost = 0;
    for (const auto& nb : m.neighbors(i)) {
      if (!keep[static_cast<std::size_t>(nb.atom)]) lost += valence_contribution(m.bond(nb.bond).order);
    }
    if (lost > 0 && (a.bracket || (a.aromatic && a.element != Element::C))) {
      a.explicit_h = m.total_h(i) + lost;
      a.bracket = true;
    }
    atoms.push_back(a);
  }
  std::vector<Bond> bonds;
  for (const Bond& b : m.bonds()) {
    int x = remap[static_cast<std::size_t>(b.begin)];
    int y = remap[static_cast<std::size_t>(b.end)];
    if (x >= 0 && y >= 0) bonds.push_back({x, y, b.order});
  }
  return {Molecule(std::move(atoms), std::move(bonds))};
}

/// Tanimoto between scaffold fingerprints; 1.0 when both scaffolds are
/// empty, 0.0 when exactly one is.
inline double scaffold_similarity(const Molecule& a, const Molecule& b) {
  Scaffold sa = murcko_scaffold(a);
  Scaffold sb = murcko_scaffold(b);
  if (sa.empty() && sb.empty()) return 1.0;
  if (sa.empty() || sb.empty()) return 0.0;
  return tanimoto(fingerprint(*sa.molecule), fingerprint(*sb.molecule));
}

}  // namespace molact

#endif  // MOLACT_DESCRIPTORS_HPP_
