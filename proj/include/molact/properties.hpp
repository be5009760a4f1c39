// SPDX-License-Identifier: Apache-2.0
//
// Built-in property models: atom-class LogP, ESOL-style solubility and a
// piecewise-linear QED variant. Every constant lives in this file.

#ifndef MOLACT_PROPERTIES_HPP_
#define MOLACT_PROPERTIES_HPP_

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <utility>

#include "molact/element.hpp"
#include "molact/error.hpp"
#include "molact/molecule.hpp"

namespace molact {

// ---------------------------------------------------------------------------
// LogP
//
// Each heavy atom falls in one class; its contribution is the class value
// plus a per-hydrogen value for each attached H. Values follow the
// Wildman-Crippen atom types, merged where this model's element set makes
// finer types indistinguishable.

enum class LogPClass {
  CAliphatic,         // sp3 C, carbon neighbours only
  CAliphaticHetero,   // sp3 C with a heteroatom neighbour
  CAlkene,            // C=C, no double bond to a heteroatom
  CCarbonyl,          // C double-bonded to N, O or S
  CAlkyne,            // C with a triple bond or two double bonds
  CAromatic,          // aromatic c, carbon neighbours only
  CAromaticHetero,    // aromatic c with a heteroatom neighbour
  NAmine1,            // neutral sp3 N, one heavy neighbour
  NAmine2,            // two heavy neighbours
  NAmine3,            // three heavy neighbours
  NImine,             // neutral N with a double bond
  NNitrile,           // neutral N with a triple bond
  NAromatic,          // aromatic n
  NCation,            // N+ (nitro, ammonium)
  OHydroxyl,          // O with at least one H
  OEther,             // O with two heavy neighbours
  OCarbonyl,          // O with a double bond
  OAnion,             // O-
  OAromatic,          // aromatic o
  SAliphatic,         // neutral S, single bonds only
  SOxidised,          // S with a double bond
  SAromatic,          // aromatic s
  Phosphorus,
  Boron,
  Fluorine,
  Chlorine,
  Bromine,
  Iodine,
};

struct LogPEntry {
  const char* name;
  double value;
  double per_h;
};

inline constexpr std::array<LogPEntry, 28> kLogPTable{{
    {"C sp3 (C neighbours)", 0.1441, 0.1230},
    {"C sp3 (hetero neighbour)", -0.2035, 0.1230},
    {"C=C", 0.1551, 0.1230},
    {"C=X", -0.2783, 0.1230},
    {"C sp", 0.0017, 0.1230},
    {"aromatic c", 0.1581, 0.1230},
    {"aromatic c (hetero neighbour)", 0.1360, 0.1230},
    {"N primary", -1.0190, 0.2142},
    {"N secondary", -0.7096, 0.2142},
    {"N tertiary", -0.3187, 0.2142},
    {"N=", -0.4806, 0.2142},
    {"N#", -0.2394, 0.2142},
    {"aromatic n", -0.4806, 0.2142},
    {"N+", -0.3396, 0.2142},
    {"O hydroxyl", -0.2893, -0.2677},
    {"O ether", -0.0684, -0.2677},
    {"O=", -0.1526, -0.2677},
    {"O-", -1.3260, -0.2677},
    {"aromatic o", 0.1552, -0.2677},
    {"S", 0.6482, 0.1125},
    {"S oxidised", -0.0024, 0.1125},
    {"aromatic s", 0.6237, 0.1125},
    {"P", 0.8612, 0.1125},
    {"B", 0.1032, 0.1230},
    {"F", 0.4202, 0.0},
    {"Cl", 0.6895, 0.0},
    {"Br", 0.8456, 0.0},
    {"I", 0.8857, 0.0},
}};

inline const LogPEntry& logp_entry(LogPClass c) { return kLogPTable[static_cast<std::size_t>(c)]; }

namespace detail {

inline bool is_hetero(Element e) { return e != Element::C && e != Element::H; }

inline std::string atom_description(const Molecule& m, int i) {
  const Atom& a = m.atom(i);
  std::string s(symbol(a.element));
  if (a.aromatic) s = "aromatic " + s;
  if (a.formal_charge != 0) s += (a.formal_charge > 0 ? " charge +" : " charge ") + std::to_string(a.formal_charge);
  return s;
}

}  // namespace detail

/// Throws UnsupportedAtomClass for atoms outside the table (for example
/// charged carbon).
inline LogPClass logp_class(const Molecule& m, int i) {
  const Atom& a = m.atom(i);
  bool hetero_nb = false;
  bool double_c = false;
  bool double_x = false;
  int doubles = 0;
  bool triple = false;
  for (const auto& nb : m.neighbors(i)) {
    Element e = m.atom(nb.atom).element;
    if (detail::is_hetero(e)) hetero_nb = true;
    BondOrder o = m.bond(nb.bond).order;
    if (o == BondOrder::Double) {
      ++doubles;
      (detail::is_hetero(e) ? double_x : double_c) = true;
    }
    if (o == BondOrder::Triple) triple = true;
  }
  auto unsupported = [&]() -> LogPClass { throw UnsupportedAtomClass(i, detail::atom_description(m, i)); };

  switch (a.element) {
    case Element::C:
      if (a.formal_charge != 0) return unsupported();
      if (a.aromatic) return hetero_nb ? LogPClass::CAromaticHetero : LogPClass::CAromatic;
      if (triple || doubles >= 2) return LogPClass::CAlkyne;
      if (double_x) return LogPClass::CCarbonyl;
      if (double_c) return LogPClass::CAlkene;
      return hetero_nb ? LogPClass::CAliphaticHetero : LogPClass::CAliphatic;
    case Element::N:
      if (a.formal_charge > 0) return LogPClass::NCation;
      if (a.formal_charge < 0) return unsupported();
      if (a.aromatic) return LogPClass::NAromatic;
      if (triple) return LogPClass::NNitrile;
      if (doubles > 0) return LogPClass::NImine;
      switch (m.degree(i)) {
        case 0:
        case 1: return LogPClass::NAmine1;
        case 2: return LogPClass::NAmine2;
        default: return LogPClass::NAmine3;
      }
    case Element::O:
      if (a.formal_charge < 0) return LogPClass::OAnion;
      if (a.formal_charge > 0) return unsupported();
      if (a.aromatic) return LogPClass::OAromatic;
      if (doubles > 0) return LogPClass::OCarbonyl;
      if (m.total_h(i) > 0) return LogPClass::OHydroxyl;
      return LogPClass::OEther;
    case Element::S:
      if (a.formal_charge != 0) return unsupported();
      if (a.aromatic) return LogPClass::SAromatic;
      return doubles > 0 ? LogPClass::SOxidised : LogPClass::SAliphatic;
    case Element::P:
      if (a.formal_charge != 0) return unsupported();
      return LogPClass::Phosphorus;
    case Element::B:
      if (a.formal_charge != 0) return unsupported();
      return LogPClass::Boron;
    case Element::F:
    case Element::Cl:
    case Element::Br:
    case Element::I:
      if (a.formal_charge != 0 || m.degree(i) > 1) return unsupported();
      switch (a.element) {
        case Element::F: return LogPClass::Fluorine;
        case Element::Cl: return LogPClass::Chlorine;
        case Element::Br: return LogPClass::Bromine;
        default: return LogPClass::Iodine;
      }
    case Element::H: return unsupported();
  }
  return unsupported();
}

inline double logp_contribution(const Molecule& m, int i) {
  const LogPEntry& e = logp_entry(logp_class(m, i));
  return e.value + e.per_h * m.total_h(i);
}

inline double logp(const Molecule& m) {
  double sum = 0.0;
  for (int i = 0; i < m.atom_count(); ++i) sum += logp_contribution(m, i);
  return sum;
}

// ---------------------------------------------------------------------------
// Counting descriptors

inline double molecular_weight(const Molecule& m) {
  double w = 0.0;
  for (int i = 0; i < m.atom_count(); ++i) w += atomic_mass(m.atom(i).element) + kHydrogenMass * m.total_h(i);
  return w;
}

/// Single, non-ring bonds whose two atoms both have another heavy neighbour.
inline int rotatable_bonds(const Molecule& m) {
  int n = 0;
  for (int b = 0; b < m.bond_count(); ++b) {
    const Bond& bond = m.bond(b);
    if (bond.order != BondOrder::Single || m.bond_in_ring(b)) continue;
    if (m.degree(bond.begin) >= 2 && m.degree(bond.end) >= 2) ++n;
  }
  return n;
}

inline double aromatic_fraction(const Molecule& m) {
  if (m.atom_count() == 0) return 0.0;
  int n = 0;
  for (const Atom& a : m.atoms()) n += a.aromatic ? 1 : 0;
  return static_cast<double>(n) / m.atom_count();
}

/// N and O atoms bearing hydrogen.
inline int h_bond_donors(const Molecule& m) {
  int n = 0;
  for (int i = 0; i < m.atom_count(); ++i) {
    Element e = m.atom(i).element;
    if ((e == Element::N || e == Element::O) && m.total_h(i) > 0) ++n;
  }
  return n;
}

/// O atoms plus N atoms without a positive charge.
inline int h_bond_acceptors(const Molecule& m) {
  int n = 0;
  for (const Atom& a : m.atoms()) {
    if (a.element == Element::O || (a.element == Element::N && a.formal_charge <= 0)) ++n;
  }
  return n;
}

inline int polar_atoms(const Molecule& m) {
  int n = 0;
  for (const Atom& a : m.atoms()) n += (a.element == Element::N || a.element == Element::O) ? 1 : 0;
  return n;
}

/// SSSR rings made entirely of aromatic atoms.
inline int aromatic_rings(const Molecule& m) {
  int n = 0;
  for (const auto& ring : m.rings()) {
    bool all = true;
    for (int v : ring) all = all && m.atom(v).aromatic;
    n += all ? 1 : 0;
  }
  return n;
}

/// Nitro groups ([N+](=O)[O-]) plus acyl halides (C(=O)X).
inline int structural_alerts(const Molecule& m) {
  int n = 0;
  for (int i = 0; i < m.atom_count(); ++i) {
    const Atom& a = m.atom(i);
    bool has_double_o = false;
    bool has_anion_o = false;
    bool has_halogen = false;
    for (const auto& nb : m.neighbors(i)) {
      const Atom& x = m.atom(nb.atom);
      BondOrder o = m.bond(nb.bond).order;
      if (x.element == Element::O && o == BondOrder::Double) has_double_o = true;
      if (x.element == Element::O && x.formal_charge == -1 && o == BondOrder::Single) has_anion_o = true;
      if ((x.element == Element::F || x.element == Element::Cl || x.element == Element::Br ||
           x.element == Element::I) && o == BondOrder::Single) {
        has_halogen = true;
      }
    }
    if (a.element == Element::N && a.formal_charge == 1 && has_double_o && has_anion_o) ++n;
    if (a.element == Element::C && !a.aromatic && has_double_o && has_halogen) ++n;
  }
  return n;
}

// ---------------------------------------------------------------------------
// Solubility (ESOL form)

inline double solubility(const Molecule& m) {
  return 0.16 - 0.63 * logp(m) - 0.0062 * molecular_weight(m) + 0.066 * rotatable_bonds(m) -
         0.74 * aromatic_fraction(m);
}

// ---------------------------------------------------------------------------
// QED-lite
//
// Each descriptor maps through a piecewise-linear desirability given by
// (x, d) knots; values outside the knot range take the end value. The score
// is the geometric mean of the eight desirabilities.

struct Knot {
  double x;
  double d;
};

inline constexpr std::array<Knot, 4> kQedMw{{{0, 0.1}, {200, 1.0}, {400, 1.0}, {700, 0.1}}};
inline constexpr std::array<Knot, 4> kQedLogP{{{-3, 0.1}, {1, 1.0}, {3, 1.0}, {7, 0.1}}};
inline constexpr std::array<Knot, 3> kQedHbd{{{0, 1.0}, {2, 1.0}, {6, 0.1}}};
inline constexpr std::array<Knot, 4> kQedHba{{{0, 0.5}, {2, 1.0}, {6, 1.0}, {12, 0.1}}};
inline constexpr std::array<Knot, 4> kQedPolar{{{0, 0.4}, {2, 1.0}, {8, 1.0}, {14, 0.1}}};
inline constexpr std::array<Knot, 3> kQedRotatable{{{0, 1.0}, {5, 1.0}, {12, 0.1}}};
inline constexpr std::array<Knot, 4> kQedAromaticRings{{{0, 0.5}, {1, 1.0}, {3, 1.0}, {6, 0.1}}};
inline constexpr std::array<Knot, 3> kQedAlerts{{{0, 1.0}, {1, 0.5}, {3, 0.1}}};

inline double desirability(std::span<const Knot> knots, double x) {
  if (x <= knots.front().x) return knots.front().d;
  if (x >= knots.back().x) return knots.back().d;
  for (std::size_t k = 1; k < knots.size(); ++k) {
    if (x <= knots[k].x) {
      const Knot& a = knots[k - 1];
      const Knot& b = knots[k];
      return a.d + (b.d - a.d) * (x - a.x) / (b.x - a.x);
    }
  }
  return knots.back().d;
}

struct QedTerms {
  std::array<double, 8> desirability{};  // mw, logp, hbd, hba, polar, rotatable, aromatic rings, alerts
  double score = 0.0;
};

inline QedTerms qed_terms(const Molecule& m) {
  QedTerms t;
  t.desirability = {
      desirability(kQedMw, molecular_weight(m)),
      desirability(kQedLogP, logp(m)),
      desirability(kQedHbd, h_bond_donors(m)),
      desirability(kQedHba, h_bond_acceptors(m)),
      desirability(kQedPolar, polar_atoms(m)),
      desirability(kQedRotatable, rotatable_bonds(m)),
      desirability(kQedAromaticRings, aromatic_rings(m)),
      desirability(kQedAlerts, structural_alerts(m)),
  };
  double log_sum = 0.0;
  for (double d : t.desirability) log_sum += std::log(d);
  t.score = std::exp(log_sum / static_cast<double>(t.desirability.size()));
  return t;
}

inline double qed(const Molecule& m) { return qed_terms(m).score; }

}  // namespace molact

#endif  // MOLACT_PROPERTIES_HPP_
