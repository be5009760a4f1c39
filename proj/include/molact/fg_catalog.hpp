// SPDX-License-Identifier: Apache-2.0
//
// Functional-group vocabulary and occurrence counting.
//
// A group is a small connected pattern with one attachment atom. A match is an
// injective map of pattern atoms onto molecule atoms such that
//   - element, aromatic flag and formal charge agree atom by atom,
//   - the bonds among the image atoms are exactly the pattern bonds with the
//     same orders (induced subgraph),
//   - exactly one bond leaves the image set; it is single and starts at the
//     image of the attachment atom.
// The last rule makes a group a pendant substituent: "hydroxyl" is a terminal
// O-H, "methyl" a terminal CH3, "phenyl" a monosubstituted benzene ring.
// Matches covering the same atom set are reported once.

#ifndef MOLACT_FG_CATALOG_HPP_
#define MOLACT_FG_CATALOG_HPP_

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "molact/error.hpp"
#include "molact/molecule.hpp"

namespace molact {

struct PatternAtom {
  Element element = Element::C;
  bool aromatic = false;
  int charge = 0;
};

struct PatternBond {
  int begin;
  int end;
  BondOrder order;
};

class FunctionalGroup {
 public:
  FunctionalGroup(std::string name, std::vector<PatternAtom> atoms, std::vector<PatternBond> bonds, int attachment)
      : name_(std::move(name)), atoms_(std::move(atoms)), bonds_(std::move(bonds)), attachment_(attachment) {
    if (name_.empty()) throw CatalogError("functional group without a name");
    if (atoms_.empty()) throw CatalogError("group '" + name_ + "' has no atoms");
    if (attachment_ < 0 || attachment_ >= atom_count()) {
      throw CatalogError("group '" + name_ + "' has an invalid attachment index");
    }
    order_.assign(atoms_.size() * atoms_.size(), 0);
    for (const auto& b : bonds_) {
      if (b.begin < 0 || b.end < 0 || b.begin >= atom_count() || b.end >= atom_count() || b.begin == b.end) {
        throw CatalogError("group '" + name_ + "' has an invalid bond");
      }
      auto& slot = order_[idx(b.begin, b.end)];
      if (slot != 0) throw CatalogError("group '" + name_ + "' has a duplicate bond");
      slot = order_[idx(b.end, b.begin)] = static_cast<int>(b.order);
    }
    // Connectivity, plus a BFS order rooted at the attachment atom for matching.
    std::vector<bool> seen(atoms_.size(), false);
    search_order_.push_back(attachment_);
    search_parent_.push_back(-1);
    seen[static_cast<std::size_t>(attachment_)] = true;
    for (std::size_t k = 0; k < search_order_.size(); ++k) {
      int v = search_order_[k];
      for (int w = 0; w < atom_count(); ++w) {
        if (!seen[static_cast<std::size_t>(w)] && bond_order(v, w) != 0) {
          seen[static_cast<std::size_t>(w)] = true;
          search_order_.push_back(w);
          search_parent_.push_back(v);
        }
      }
    }
    if (static_cast<int>(search_order_.size()) != atom_count()) {
      throw CatalogError("group '" + name_ + "' pattern is not connected");
    }
  }

  const std::string& name() const noexcept { return name_; }
  const std::vector<PatternAtom>& atoms() const noexcept { return atoms_; }
  const std::vector<PatternBond>& bonds() const noexcept { return bonds_; }
  int attachment() const noexcept { return attachment_; }
  int atom_count() const noexcept { return static_cast<int>(atoms_.size()); }

  /// 0 when the pattern atoms are not bonded.
  int bond_order(int a, int b) const { return order_[idx(a, b)]; }

  const std::vector<int>& search_order() const noexcept { return search_order_; }
  const std::vector<int>& search_parent() const noexcept { return search_parent_; }

 private:
  std::size_t idx(int a, int b) const {
    return static_cast<std::size_t>(a) * atoms_.size() + static_cast<std::size_t>(b);
  }

  std::string name_;
  std::vector<PatternAtom> atoms_;
  std::vector<PatternBond> bonds_;
  int attachment_;
  std::vector<int> order_;
  std::vector<int> search_order_;
  std::vector<int> search_parent_;
};

/// Pattern atom -> molecule atom.
using GroupMatch = std::vector<int>;

namespace detail {

inline bool atom_fits(const PatternAtom& p, const Atom& a) {
  return p.element == a.element && p.aromatic == a.aromatic && p.charge == a.formal_charge;
}

/// Checks the single-exit rule for a complete, induced embedding.
inline bool pendant_exit_ok(const Molecule& m, const FunctionalGroup& g, const GroupMatch& match) {
  int exits = 0;
  for (int p = 0; p < g.atom_count(); ++p) {
    int v = match[static_cast<std::size_t>(p)];
    for (const auto& nb : m.neighbors(v)) {
      if (std::find(match.begin(), match.end(), nb.atom) != match.end()) continue;
      if (p != g.attachment() || m.bond(nb.bond).order != BondOrder::Single) return false;
      ++exits;
    }
  }
  return exits == 1;
}

}  // namespace detail

inline std::vector<GroupMatch> match_group(const Molecule& m, const FunctionalGroup& g) {
  std::vector<GroupMatch> out;
  const int k = g.atom_count();
  if (k > m.atom_count()) return out;
  const auto& order = g.search_order();
  const auto& parent = g.search_parent();
  std::set<std::vector<int>> seen_sets;
  GroupMatch match(static_cast<std::size_t>(k), -1);
  std::vector<bool> used(static_cast<std::size_t>(m.atom_count()), false);

  auto try_place = [&](auto&& self, std::size_t depth) -> void {
    if (depth == order.size()) {
      if (!detail::pendant_exit_ok(m, g, match)) return;
      std::vector<int> atom_set = match;
      std::sort(atom_set.begin(), atom_set.end());
      if (seen_sets.insert(atom_set).second) out.push_back(match);
      return;
    }
    int p = order[depth];
    const PatternAtom& pa = g.atoms()[static_cast<std::size_t>(p)];
    auto consider = [&](int v) {
      if (used[static_cast<std::size_t>(v)] || !detail::atom_fits(pa, m.atom(v))) return;
      // Induced: bonds to every placed pattern atom must agree exactly.
      for (std::size_t d = 0; d < depth; ++d) {
        int q = order[d];
        int w = match[static_cast<std::size_t>(q)];
        int want = g.bond_order(p, q);
        auto have = m.bond_between(v, w);
        if ((want == 0) != !have.has_value()) return;
        if (have && static_cast<int>(m.bond(*have).order) != want) return;
      }
      match[static_cast<std::size_t>(p)] = v;
      used[static_cast<std::size_t>(v)] = true;
      self(self, depth + 1);
      used[static_cast<std::size_t>(v)] = false;
      match[static_cast<std::size_t>(p)] = -1;
    };
    int par = parent[depth];
    if (par < 0) {
      for (int v = 0; v < m.atom_count(); ++v) consider(v);
    } else {
      for (const auto& nb : m.neighbors(match[static_cast<std::size_t>(par)])) consider(nb.atom);
    }
  };
  try_place(try_place, 0);
  return out;
}

inline int count_group(const Molecule& m, const FunctionalGroup& g) {
  return static_cast<int>(match_group(m, g).size());
}

class Catalog {
 public:
  Catalog() = default;
  explicit Catalog(std::vector<FunctionalGroup> groups) {
    for (auto& g : groups) add(std::move(g));
    if (groups_.empty()) throw CatalogError("catalog is empty");
  }

  void add(FunctionalGroup g) {
    if (index_.count(g.name())) throw CatalogError("duplicate group name '" + g.name() + "'");
    index_[g.name()] = groups_.size();
    groups_.push_back(std::move(g));
  }

  const std::vector<FunctionalGroup>& groups() const noexcept { return groups_; }
  std::size_t size() const noexcept { return groups_.size(); }
  bool contains(std::string_view name) const { return index_.count(std::string(name)) > 0; }

  const FunctionalGroup& at(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) throw UnknownGroupError(std::string(name));
    return groups_[it->second];
  }

  /// Position of the group in catalog order.
  int index_of(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) throw UnknownGroupError(std::string(name));
    return static_cast<int>(it->second);
  }

  int count(const Molecule& m, std::string_view name) const { return count_group(m, at(name)); }

 private:
  std::vector<FunctionalGroup> groups_;
  std::map<std::string, std::size_t> index_;
};

namespace detail {

inline BondOrder bond_order_from_name(const std::string& s) {
  if (s == "single") return BondOrder::Single;
  if (s == "double") return BondOrder::Double;
  if (s == "triple") return BondOrder::Triple;
  if (s == "aromatic") return BondOrder::Aromatic;
  throw CatalogError("unknown bond order '" + s + "'");
}

inline std::string bond_order_name(BondOrder o) {
  switch (o) {
    case BondOrder::Single: return "single";
    case BondOrder::Double: return "double";
    case BondOrder::Triple: return "triple";
    case BondOrder::Aromatic: return "aromatic";
  }
  return "single";
}

struct GroupSpec {
  const char* name;
  std::vector<PatternAtom> atoms;
  std::vector<PatternBond> bonds;
  int attachment;
};

inline PatternAtom pa(Element e, bool aromatic = false, int charge = 0) { return {e, aromatic, charge}; }

}  // namespace detail

/// Built-in vocabulary. Multi-atom groups are written as terminal
/// substituents: ester is acetoxy (-OC(=O)CH3), ether is methoxy, ketone is
/// acetyl, amide is carboxamide, sulfonyl is methylsulfonyl.
inline Catalog default_catalog() {
  using detail::pa;
  using E = Element;
  constexpr auto S1 = BondOrder::Single;
  constexpr auto D2 = BondOrder::Double;
  constexpr auto T3 = BondOrder::Triple;
  constexpr auto Ar = BondOrder::Aromatic;
  std::vector<FunctionalGroup> gs;
  gs.emplace_back("methyl", std::vector{pa(E::C)}, std::vector<PatternBond>{}, 0);
  gs.emplace_back("ethyl", std::vector{pa(E::C), pa(E::C)}, std::vector<PatternBond>{{0, 1, S1}}, 0);
  gs.emplace_back("hydroxyl", std::vector{pa(E::O)}, std::vector<PatternBond>{}, 0);
  gs.emplace_back("carboxyl", std::vector{pa(E::C), pa(E::O), pa(E::O)},
                  std::vector<PatternBond>{{0, 1, D2}, {0, 2, S1}}, 0);
  gs.emplace_back("aldehyde", std::vector{pa(E::C), pa(E::O)}, std::vector<PatternBond>{{0, 1, D2}}, 0);
  gs.emplace_back("ketone", std::vector{pa(E::C), pa(E::O), pa(E::C)},
                  std::vector<PatternBond>{{0, 1, D2}, {0, 2, S1}}, 0);
  gs.emplace_back("ester", std::vector{pa(E::O), pa(E::C), pa(E::O), pa(E::C)},
                  std::vector<PatternBond>{{0, 1, S1}, {1, 2, D2}, {1, 3, S1}}, 0);
  gs.emplace_back("ether", std::vector{pa(E::O), pa(E::C)}, std::vector<PatternBond>{{0, 1, S1}}, 0);
  gs.emplace_back("amine", std::vector{pa(E::N)}, std::vector<PatternBond>{}, 0);
  gs.emplace_back("amide", std::vector{pa(E::C), pa(E::O), pa(E::N)},
                  std::vector<PatternBond>{{0, 1, D2}, {0, 2, S1}}, 0);
  gs.emplace_back("nitro", std::vector{pa(E::N, false, 1), pa(E::O), pa(E::O, false, -1)},
                  std::vector<PatternBond>{{0, 1, D2}, {0, 2, S1}}, 0);
  gs.emplace_back("nitrile", std::vector{pa(E::C), pa(E::N)}, std::vector<PatternBond>{{0, 1, T3}}, 0);
  gs.emplace_back("fluoro", std::vector{pa(E::F)}, std::vector<PatternBond>{}, 0);
  gs.emplace_back("chloro", std::vector{pa(E::Cl)}, std::vector<PatternBond>{}, 0);
  gs.emplace_back("bromo", std::vector{pa(E::Br)}, std::vector<PatternBond>{}, 0);
  gs.emplace_back("thiol", std::vector{pa(E::S)}, std::vector<PatternBond>{}, 0);
  gs.emplace_back("sulfonyl", std::vector{pa(E::S), pa(E::O), pa(E::O), pa(E::C)},
                  std::vector<PatternBond>{{0, 1, D2}, {0, 2, D2}, {0, 3, S1}}, 0);
  gs.emplace_back("phenyl", std::vector{pa(E::C, true), pa(E::C, true), pa(E::C, true), pa(E::C, true),
                                        pa(E::C, true), pa(E::C, true)},
                  std::vector<PatternBond>{{0, 1, Ar}, {1, 2, Ar}, {2, 3, Ar}, {3, 4, Ar}, {4, 5, Ar}, {5, 0, Ar}},
                  0);
  return Catalog(std::move(gs));
}

/// The named groups of `c`, in the order given. Throws UnknownGroupError.
inline Catalog catalog_subset(const Catalog& c, const std::vector<std::string>& names) {
  std::vector<FunctionalGroup> gs;
  for (const auto& n : names) gs.push_back(c.at(n));
  return Catalog(std::move(gs));
}

/// Catalog JSON: {"groups": [{"name", "atoms": [{"element", "aromatic", "charge"}],
/// "bonds": [[i, j, "single"|"double"|"triple"|"aromatic"]], "attachment"}]}.
/// "aromatic" and "charge" default to false/0.
inline Catalog catalog_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("groups") || !j["groups"].is_array()) {
    throw CatalogError("catalog JSON must be an object with a \"groups\" array");
  }
  std::vector<FunctionalGroup> groups;
  try {
    for (const auto& gj : j["groups"]) {
      std::vector<PatternAtom> atoms;
      for (const auto& aj : gj.at("atoms")) {
        auto sym = aj.at("element").get<std::string>();
        auto el = element_from_symbol(sym);
        if (!el) throw CatalogError("unknown element '" + sym + "' in catalog");
        atoms.push_back({*el, aj.value("aromatic", false), aj.value("charge", 0)});
      }
      std::vector<PatternBond> bonds;
      for (const auto& bj : gj.value("bonds", nlohmann::json::array())) {
        if (!bj.is_array() || bj.size() != 3) throw CatalogError("bond entries are [i, j, order]");
        bonds.push_back({bj[0].get<int>(), bj[1].get<int>(), detail::bond_order_from_name(bj[2].get<std::string>())});
      }
      groups.emplace_back(gj.at("name").get<std::string>(), std::move(atoms), std::move(bonds),
                          gj.at("attachment").get<int>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw CatalogError(std::string("malformed catalog JSON: ") + e.what());
  }
  return Catalog(std::move(groups));
}

inline nlohmann::json catalog_to_json(const Catalog& c) {
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : c.groups()) {
    nlohmann::json atoms = nlohmann::json::array();
    for (const auto& a : g.atoms()) {
      atoms.push_back({{"element", std::string(symbol(a.element))}, {"aromatic", a.aromatic}, {"charge", a.charge}});
    }
    nlohmann::json bonds = nlohmann::json::array();
    for (const auto& b : g.bonds()) bonds.push_back({b.begin, b.end, detail::bond_order_name(b.order)});
    groups.push_back({{"name", g.name()}, {"atoms", atoms}, {"bonds", bonds}, {"attachment", g.attachment()}});
  }
  return {{"groups", groups}};
}

inline Catalog load_catalog(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CatalogError("cannot open catalog file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw CatalogError("catalog file '" + path + "' is not valid JSON: " + e.what());
  }
  return catalog_from_json(j);
}

}  // namespace molact

#endif  // MOLACT_FG_CATALOG_HPP_
