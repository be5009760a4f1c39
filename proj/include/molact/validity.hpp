// SPDX-License-Identifier: Apache-2.0

#ifndef MOLACT_VALIDITY_HPP_
#define MOLACT_VALIDITY_HPP_

#include <string>
#include <vector>

#include "molact/molecule.hpp"

namespace molact {

struct ValidityReport {
  bool valid = true;
  std::vector<std::string> violations;

  friend bool operator==(const ValidityReport&, const ValidityReport&) = default;
};

/// Valence used by atom `i`: bond valence, all hydrogens and, for a neutral
/// aromatic carbon, the slot taken by its pi bond.
inline int used_valence(const Molecule& m, int i) {
  const Atom& a = m.atom(i);
  int used = m.bond_valence(i) + m.total_h(i);
  if (a.aromatic && a.element == Element::C && a.formal_charge == 0) used += 1;
  return used;
}

/// Valence gate: per-atom valence against the table, single connected
/// fragment, ring-consistent aromatic flags. Violation messages are stable
/// strings keyed by atom/bond index.
inline ValidityReport check_validity(const Molecule& m) {
  ValidityReport report;
  auto fail = [&](std::string msg) {
    report.valid = false;
    report.violations.push_back(std::move(msg));
  };
  if (m.empty()) {
    fail("empty molecule");
    return report;
  }
  for (int i = 0; i < m.atom_count(); ++i) {
    const Atom& a = m.atom(i);
    int cap = max_valence(a.element, a.formal_charge);
    if (used_valence(m, i) > cap) fail("valence exceeded at atom " + std::to_string(i));
    if (a.aromatic && !m.atom_in_ring(i)) fail("aromatic atom " + std::to_string(i) + " not in ring");
  }
  for (int b = 0; b < m.bond_count(); ++b) {
    const Bond& bond = m.bond(b);
    if (bond.order != BondOrder::Aromatic) continue;
    if (!m.atom(bond.begin).aromatic || !m.atom(bond.end).aromatic) {
      fail("aromatic bond " + std::to_string(b) + " joins a non-aromatic atom");
    }
    if (!m.bond_in_ring(b)) fail("aromatic bond " + std::to_string(b) + " not in ring");
  }
  if (m.fragment_count() > 1) fail("disconnected");
  return report;
}

inline bool is_valid(const Molecule& m) { return check_validity(m).valid; }

}  // namespace molact

#endif  // MOLACT_VALIDITY_HPP_
