// SPDX-License-Identifier: Apache-2.0
//
// Canonical SMILES by iterative neighbourhood refinement (Morgan-style) with
// individualization of tied atoms. The canonical string is the lexicographic
// minimum over the tie-breaking search tree, so it does not depend on the
// input atom order.

#ifndef MOLACT_CANONICAL_HPP_
#define MOLACT_CANONICAL_HPP_

#include <algorithm>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "molact/molecule.hpp"
#include "molact/smiles.hpp"
#include "molact/validity.hpp"

namespace molact {

namespace detail {

// Replace arbitrary sortable keys with dense ranks 0..k-1.
template <class Key>
std::vector<int> dense_ranks(const std::vector<Key>& keys) {
  std::vector<Key> sorted = keys;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<int> out(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i) {
    out[i] = static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), keys[i]) - sorted.begin());
  }
  return out;
}

inline int count_classes(const std::vector<int>& ranks) {
  return ranks.empty() ? 0 : *std::max_element(ranks.begin(), ranks.end()) + 1;
}

/// Refines `ranks` until the partition is equitable: each atom's new key is
/// its old rank plus the sorted multiset of (neighbour rank, bond order).
inline std::vector<int> refine(const Molecule& m, std::vector<int> ranks) {
  const int n = m.atom_count();
  int classes = count_classes(ranks);
  while (true) {
    std::vector<std::pair<int, std::vector<std::pair<int, int>>>> keys(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      auto& k = keys[static_cast<std::size_t>(i)];
      k.first = ranks[static_cast<std::size_t>(i)];
      for (const auto& nb : m.neighbors(i)) {
        k.second.emplace_back(ranks[static_cast<std::size_t>(nb.atom)], static_cast<int>(m.bond(nb.bond).order));
      }
      std::sort(k.second.begin(), k.second.end());
    }
    std::vector<int> next = dense_ranks(keys);
    int next_classes = count_classes(next);
    ranks = std::move(next);
    if (next_classes == classes) return ranks;
    classes = next_classes;
  }
}

inline std::vector<int> initial_ranks(const Molecule& m) {
  using Key = std::tuple<int, int, int, int, int>;
  std::vector<Key> keys;
  keys.reserve(static_cast<std::size_t>(m.atom_count()));
  for (int i = 0; i < m.atom_count(); ++i) {
    const Atom& a = m.atom(i);
    keys.emplace_back(atomic_number(a.element), m.degree(i), a.formal_charge, m.total_h(i), a.aromatic ? 1 : 0);
  }
  return dense_ranks(keys);
}

struct CanonicalSearch {
  const Molecule& m;
  std::size_t leaf_budget;
  std::size_t leaves = 0;
  std::string best;
  std::vector<int> best_ranks;

  void visit(const std::vector<int>& ranks) {
    const int n = m.atom_count();
    // First (lowest-rank) non-singleton cell.
    std::vector<int> cell_size(static_cast<std::size_t>(n), 0);
    for (int r : ranks) ++cell_size[static_cast<std::size_t>(r)];
    int target = -1;
    for (int r = 0; r < n; ++r) {
      if (cell_size[static_cast<std::size_t>(r)] > 1) {
        target = r;
        break;
      }
    }
    if (target < 0) {
      ++leaves;
      std::string s = write_smiles(m, ranks);
      if (best_ranks.empty() || s < best) {
        best = std::move(s);
        best_ranks = ranks;
      }
      return;
    }
    for (int i = 0; i < n; ++i) {
      if (ranks[static_cast<std::size_t>(i)] != target) continue;
      std::vector<std::pair<int, int>> keys(static_cast<std::size_t>(n));
      for (int j = 0; j < n; ++j) {
        keys[static_cast<std::size_t>(j)] = {ranks[static_cast<std::size_t>(j)], j == i ? 0 : 1};
      }
      visit(refine(m, dense_ranks(keys)));
      // Out of budget: keep the first complete path only.
      if (leaves >= leaf_budget) return;
    }
  }
};

}  // namespace detail

/// Canonical atom ranks (a permutation of 0..n-1).
inline std::vector<int> canonical_ranks(const Molecule& m, std::size_t leaf_budget = 4096) {
  if (m.empty()) return {};
  detail::CanonicalSearch search{m, leaf_budget};
  search.visit(detail::refine(m, detail::initial_ranks(m)));
  return search.best_ranks;
}

/// Canonical SMILES. Throws MoleculeError for invalid molecules.
inline std::string canonical_smiles(const Molecule& m) {
  auto report = check_validity(m);
  if (!report.valid) {
    throw MoleculeError("canonical_smiles requires a valid molecule: " + report.violations.front());
  }
  detail::CanonicalSearch search{m, 4096};
  search.visit(detail::refine(m, detail::initial_ranks(m)));
  return search.best;
}

}  // namespace molact

#endif  // MOLACT_CANONICAL_HPP_
