// SPDX-License-Identifier: Apache-2.0
//
// Deterministic stand-in for an external property model. Speaks the oracle
// subprocess protocol on stdin/stdout and scores each SMILES by hash. The
// misbehaviour switches exist for exercising client error paths.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "molact/oracle.hpp"

int main(int argc, char** argv) {
  CLI::App app{"hash-scored property oracle"};
  std::string names = "drd2,jnk3,gsk3b";
  int sleep_ms = 0;
  std::string mode = "ok";
  app.add_option("--names", names, "comma-separated property names to announce");
  app.add_option("--sleep-ms", sleep_ms, "delay before each reply")->check(CLI::NonNegativeNumber);
  app.add_option("--mode", mode, "ok | err | garbage | silent | exit")
      ->check(CLI::IsMember({"ok", "err", "garbage", "silent", "exit"}));
  CLI11_PARSE(app, argc, argv);

  std::vector<std::string> served;
  {
    std::stringstream ss(names);
    std::string n;
    while (std::getline(ss, n, ',')) served.push_back(n);
  }

  std::string line;
  if (!std::getline(std::cin, line) || line != "HELLO molact-oracle 1") return 1;
  std::cout << "READY " << names << std::endl;

  while (std::getline(std::cin, line)) {
    std::istringstream req(line);
    std::string verb, name, smiles;
    req >> verb >> name >> smiles;
    if (sleep_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(sleep_ms));
    if (mode == "silent") continue;
    if (mode == "exit") return 0;
    if (mode == "garbage") {
      std::cout << "OK not-a-number" << std::endl;
      continue;
    }
    if (mode == "err" || verb != "PROP" || smiles.empty()) {
      std::cout << "ERR bad input" << std::endl;
      continue;
    }
    bool known = false;
    for (const auto& s : served) known = known || s == name;
    if (!known) {
      std::cout << "ERR unknown property " << name << std::endl;
      continue;
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", molact::stub_score(name, smiles));
    std::cout << "OK " << buf << std::endl;
  }
  return 0;
}
