// SPDX-License-Identifier: Apache-2.0
//
// Add / delete / substitute operators over functional groups.
//
// Every successful edit yields a valid molecule that satisfies the count law
// for its instruction: add raises the group count by exactly one, delete
// lowers it by exactly one, substitute does both for its two groups. Edits
// with collateral count changes are rejected.

#ifndef MOLACT_EDIT_HPP_
#define MOLACT_EDIT_HPP_

#include <algorithm>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "molact/canonical.hpp"
#include "molact/fg_catalog.hpp"
#include "molact/molecule.hpp"
#include "molact/validity.hpp"

namespace molact {

enum class EditKind { Add, Delete, Substitute };

inline std::string_view edit_kind_name(EditKind k) {
  switch (k) {
    case EditKind::Add: return "add";
    case EditKind::Delete: return "delete";
    case EditKind::Substitute: return "substitute";
  }
  return "add";
}

inline std::optional<EditKind> edit_kind_from_name(std::string_view s) {
  if (s == "add") return EditKind::Add;
  if (s == "delete") return EditKind::Delete;
  if (s == "substitute") return EditKind::Substitute;
  return std::nullopt;
}

/// `group` is the added group for add, the removed group for delete and
/// substitute; `add_group` is only used by substitute.
struct EditAction {
  EditKind kind = EditKind::Add;
  std::string group;
  std::string add_group;
  std::optional<int> site;

  friend bool operator==(const EditAction&, const EditAction&) = default;
};

struct EditOutcome {
  std::optional<Molecule> molecule;
  int applied_site = -1;
  ValidityReport validity;
  std::string failure;

  bool ok() const noexcept { return molecule.has_value(); }
};

/// Hydrogens on atom `i` that an edit may replace.
inline int free_valence(const Molecule& m, int i) {
  return m.atom(i).bracket ? m.atom(i).explicit_h : m.implicit_h(i);
}

/// True iff `after` differs from `before` by exactly the instructed counts.
inline bool count_law_holds(const Molecule& before, const Molecule& after, EditKind kind,
                            std::string_view group, std::string_view add_group, const Catalog& catalog) {
  switch (kind) {
    case EditKind::Add:
      return catalog.count(after, group) == catalog.count(before, group) + 1;
    case EditKind::Delete:
      return catalog.count(after, group) == catalog.count(before, group) - 1;
    case EditKind::Substitute:
      return catalog.count(after, add_group) == catalog.count(before, add_group) + 1 &&
             catalog.count(after, group) == catalog.count(before, group) - 1;
  }
  return false;
}

namespace detail {

/// Attaches `g` to `host` through a single bond from the group's attachment
/// atom. The caller checks validity.
inline Molecule graft(const Molecule& m, int host, const FunctionalGroup& g) {
  std::vector<Atom> atoms = m.atoms();
  std::vector<Bond> bonds = m.bonds();
  const int base = m.atom_count();
  auto& h = atoms[static_cast<std::size_t>(host)];
  if (h.bracket && h.explicit_h > 0) --h.explicit_h;
  for (int p = 0; p < g.atom_count(); ++p) {
    const auto& pa = g.atoms()[static_cast<std::size_t>(p)];
    Atom a;
    a.element = pa.element;
    a.aromatic = pa.aromatic;
    a.formal_charge = pa.charge;
    a.bracket = pa.charge != 0;
    if (a.bracket) {
      int bv = p == g.attachment() ? 1 : 0;
      for (const auto& b : g.bonds()) {
        if (b.begin == p || b.end == p) bv += valence_contribution(b.order);
      }
      a.explicit_h = Molecule::inferred_hydrogens(a.element, a.formal_charge, a.aromatic, bv);
    }
    atoms.push_back(a);
  }
  for (const auto& b : g.bonds()) bonds.push_back({base + b.begin, base + b.end, b.order});
  bonds.push_back({host, base + g.attachment(), BondOrder::Single});
  return Molecule(std::move(atoms), std::move(bonds));
}

struct Removal {
  Molecule molecule;
  int host;  // index of the former exit neighbour in `molecule`
};

/// Removes the matched atoms; the exit neighbour regains one hydrogen.
inline Removal remove_match(const Molecule& m, const GroupMatch& match, const FunctionalGroup& g) {
  std::vector<bool> drop(static_cast<std::size_t>(m.atom_count()), false);
  for (int v : match) drop[static_cast<std::size_t>(v)] = true;
  int attach = match[static_cast<std::size_t>(g.attachment())];
  int host_old = -1;
  for (const auto& nb : m.neighbors(attach)) {
    if (!drop[static_cast<std::size_t>(nb.atom)]) host_old = nb.atom;
  }
  std::vector<int> remap(static_cast<std::size_t>(m.atom_count()), -1);
  std::vector<Atom> atoms;
  for (int i = 0; i < m.atom_count(); ++i) {
    if (drop[static_cast<std::size_t>(i)]) continue;
    remap[static_cast<std::size_t>(i)] = static_cast<int>(atoms.size());
    atoms.push_back(m.atom(i));
  }
  std::vector<Bond> bonds;
  for (const Bond& b : m.bonds()) {
    int x = remap[static_cast<std::size_t>(b.begin)];
    int y = remap[static_cast<std::size_t>(b.end)];
    if (x >= 0 && y >= 0) bonds.push_back({x, y, b.order});
  }
  int host = host_old >= 0 ? remap[static_cast<std::size_t>(host_old)] : -1;
  if (host >= 0 && atoms[static_cast<std::size_t>(host)].bracket) ++atoms[static_cast<std::size_t>(host)].explicit_h;
  return {Molecule(std::move(atoms), std::move(bonds)), host};
}

inline std::vector<int> sort_by_rank(const Molecule& m, std::vector<int> sites) {
  if (sites.size() < 2) return sites;
  auto rank = canonical_ranks(m);
  std::sort(sites.begin(), sites.end(),
            [&](int a, int b) { return rank[static_cast<std::size_t>(a)] < rank[static_cast<std::size_t>(b)]; });
  sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
  return sites;
}

inline const GroupMatch* match_at(const std::vector<GroupMatch>& matches, const FunctionalGroup& g, int site) {
  for (const auto& mt : matches) {
    if (mt[static_cast<std::size_t>(g.attachment())] == site) return &mt;
  }
  return nullptr;
}

/// Builds the edited molecule at a fixed site without checking the count law.
inline EditOutcome raw_edit(const Molecule& m, const EditAction& action, const Catalog& catalog, int site) {
  EditOutcome out;
  out.applied_site = site;
  if (site < 0 || site >= m.atom_count()) {
    out.failure = "site " + std::to_string(site) + " out of range";
    return out;
  }
  const FunctionalGroup& g = catalog.at(action.group);
  Molecule candidate;
  if (action.kind == EditKind::Add) {
    if (free_valence(m, site) < 1) {
      out.failure = "no free valence at atom " + std::to_string(site);
      return out;
    }
    candidate = graft(m, site, g);
  } else {
    auto matches = match_group(m, g);
    const GroupMatch* mt = match_at(matches, g, site);
    if (!mt) {
      out.failure = "no " + g.name() + " match at atom " + std::to_string(site);
      return out;
    }
    Removal r = remove_match(m, *mt, g);
    if (action.kind == EditKind::Delete) {
      candidate = std::move(r.molecule);
    } else {
      const FunctionalGroup& add = catalog.at(action.add_group);
      if (r.host < 0 || free_valence(r.molecule, r.host) < 1) {
        out.failure = "no free valence after removing " + g.name();
        return out;
      }
      candidate = graft(r.molecule, r.host, add);
    }
  }
  out.validity = check_validity(candidate);
  if (!out.validity.valid) {
    out.failure = "invalid result: " + out.validity.violations.front();
    return out;
  }
  out.molecule = std::move(candidate);
  return out;
}

}  // namespace detail

/// Tool-validated sites, ordered by canonical rank. Add: atoms with a free
/// valence. Delete: attachment atoms of matches whose removal leaves a valid
/// molecule. Substitute: delete sites where grafting the new group also
/// yields a valid molecule. Throws UnknownGroupError.
inline std::vector<int> enumerate_sites(const Molecule& m, const EditAction& action, const Catalog& catalog) {
  const FunctionalGroup& g = catalog.at(action.group);
  if (action.kind == EditKind::Substitute) catalog.at(action.add_group);
  std::vector<int> sites;
  if (action.kind == EditKind::Add) {
    for (int i = 0; i < m.atom_count(); ++i) {
      if (free_valence(m, i) >= 1) sites.push_back(i);
    }
  } else {
    for (const auto& mt : match_group(m, g)) {
      int site = mt[static_cast<std::size_t>(g.attachment())];
      if (detail::raw_edit(m, action, catalog, site).ok()) sites.push_back(site);
    }
  }
  return detail::sort_by_rank(m, std::move(sites));
}

/// Applies the edit. With no site, the lowest canonical-rank site whose
/// result is valid and satisfies the count law is used. Failures are
/// reported in the outcome and leave the input untouched. Throws
/// UnknownGroupError for names missing from the catalog.
inline EditOutcome apply_edit(const Molecule& m, const EditAction& action, const Catalog& catalog) {
  catalog.at(action.group);
  if (action.kind == EditKind::Substitute) catalog.at(action.add_group);

  auto checked = [&](int site) {
    EditOutcome out = detail::raw_edit(m, action, catalog, site);
    if (out.ok() && !count_law_holds(m, *out.molecule, action.kind, action.group, action.add_group, catalog)) {
      out.molecule.reset();
      out.failure = "count law violated at atom " + std::to_string(site);
    }
    return out;
  };

  if (action.site) return checked(*action.site);

  auto sites = enumerate_sites(m, action, catalog);
  if (sites.empty()) {
    EditOutcome out;
    out.failure = action.kind == EditKind::Add ? "no free valence" : "no " + action.group + " to remove";
    return out;
  }
  EditOutcome last;
  for (int site : sites) {
    last = checked(site);
    if (last.ok()) return last;
  }
  last.failure = "no site satisfies the count law";
  last.applied_site = -1;
  return last;
}

}  // namespace molact

#endif  // MOLACT_EDIT_HPP_
