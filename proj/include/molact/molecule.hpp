// SPDX-License-Identifier: Apache-2.0
//
// Molecular graph value type. A Molecule is immutable once built; edits
// construct a new one from modified atom/bond lists.

#ifndef MOLACT_MOLECULE_HPP_
#define MOLACT_MOLECULE_HPP_

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "molact/element.hpp"
#include "molact/error.hpp"

namespace molact {

enum class BondOrder : std::uint8_t { Single = 1, Double = 2, Triple = 3, Aromatic = 4 };

/// Contribution of a bond to an atom's sigma/pi valence sum. Aromatic bonds
/// count as one; the extra pi electron of an aromatic atom is accounted for
/// per atom (see Molecule::implicit_h).
inline constexpr int valence_contribution(BondOrder o) {
  return o == BondOrder::Aromatic ? 1 : static_cast<int>(o);
}

struct Atom {
  Element element = Element::C;
  int formal_charge = 0;
  bool aromatic = false;
  // Hydrogens written explicitly (bracket atoms). Organic-subset atoms carry
  // zero here and get implicit hydrogens from the valence table.
  int explicit_h = 0;
  // Bracket atoms never receive implicit hydrogens.
  bool bracket = false;

  friend bool operator==(const Atom&, const Atom&) = default;
};

struct Bond {
  int begin = 0;
  int end = 0;
  BondOrder order = BondOrder::Single;

  int other(int atom) const noexcept { return atom == begin ? end : begin; }

  friend bool operator==(const Bond&, const Bond&) = default;
};

struct Neighbor {
  int atom;
  int bond;
};

class Molecule {
 public:
  Molecule() = default;

  /// Throws MoleculeError on out-of-range or equal endpoints, duplicate bonds,
  /// negative explicit hydrogen counts.
  Molecule(std::vector<Atom> atoms, std::vector<Bond> bonds)
      : atoms_(std::move(atoms)), bonds_(std::move(bonds)) {
    const int n = static_cast<int>(atoms_.size());
    for (int i = 0; i < n; ++i) {
      if (atoms_[static_cast<std::size_t>(i)].explicit_h < 0) {
        throw MoleculeError("negative explicit hydrogen count on atom " + std::to_string(i));
      }
    }
    adjacency_.assign(atoms_.size(), {});
    for (int b = 0; b < static_cast<int>(bonds_.size()); ++b) {
      const Bond& bond = bonds_[static_cast<std::size_t>(b)];
      if (bond.begin < 0 || bond.end < 0 || bond.begin >= n || bond.end >= n) {
        throw MoleculeError("bond " + std::to_string(b) + " has an out-of-range endpoint");
      }
      if (bond.begin == bond.end) {
        throw MoleculeError("bond " + std::to_string(b) + " joins an atom to itself");
      }
      for (const auto& nb : adjacency_[static_cast<std::size_t>(bond.begin)]) {
        if (nb.atom == bond.end) {
          throw MoleculeError("duplicate bond between atoms " + std::to_string(bond.begin) +
                              " and " + std::to_string(bond.end));
        }
      }
      adjacency_[static_cast<std::size_t>(bond.begin)].push_back({bond.end, b});
      adjacency_[static_cast<std::size_t>(bond.end)].push_back({bond.begin, b});
    }
    compute_ring_bonds();
    compute_rings();
  }

  int atom_count() const noexcept { return static_cast<int>(atoms_.size()); }
  int bond_count() const noexcept { return static_cast<int>(bonds_.size()); }
  bool empty() const noexcept { return atoms_.empty(); }

  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  const std::vector<Bond>& bonds() const noexcept { return bonds_; }
  const Atom& atom(int i) const { return atoms_.at(static_cast<std::size_t>(i)); }
  const Bond& bond(int b) const { return bonds_.at(static_cast<std::size_t>(b)); }

  std::span<const Neighbor> neighbors(int i) const {
    return adjacency_.at(static_cast<std::size_t>(i));
  }
  int degree(int i) const { return static_cast<int>(neighbors(i).size()); }

  std::optional<int> bond_between(int a, int b) const {
    for (const auto& nb : neighbors(a)) {
      if (nb.atom == b) return nb.bond;
    }
    return std::nullopt;
  }

  bool bond_in_ring(int b) const { return ring_bond_.at(static_cast<std::size_t>(b)); }
  bool atom_in_ring(int i) const {
    for (const auto& nb : neighbors(i)) {
      if (ring_bond_[static_cast<std::size_t>(nb.bond)]) return true;
    }
    return false;
  }

  /// Smallest set of smallest rings, each as a cyclic atom sequence.
  const std::vector<std::vector<int>>& rings() const noexcept { return rings_; }

  /// Sum of bond valence contributions (aromatic bonds count one).
  int bond_valence(int i) const {
    int sum = 0;
    for (const auto& nb : neighbors(i)) sum += valence_contribution(bond(nb.bond).order);
    return sum;
  }

  /// Hydrogens inferred for an organic-subset atom from the valence table.
  /// Aromatic atoms reserve one slot for their pi bond when the lowest
  /// valence leaves room for it.
  int implicit_h(int i) const {
    const Atom& a = atom(i);
    if (a.bracket) return 0;
    return inferred_hydrogens(a.element, a.formal_charge, a.aromatic, bond_valence(i));
  }

  int total_h(int i) const { return atom(i).explicit_h + implicit_h(i); }

  /// Number of connected components; an empty molecule has zero.
  int fragment_count() const {
    std::vector<int> comp = component_labels();
    return comp.empty() ? 0 : *std::max_element(comp.begin(), comp.end()) + 1;
  }

  std::vector<int> component_labels() const {
    std::vector<int> label(atoms_.size(), -1);
    int next = 0;
    for (int s = 0; s < atom_count(); ++s) {
      if (label[static_cast<std::size_t>(s)] >= 0) continue;
      std::vector<int> stack{s};
      label[static_cast<std::size_t>(s)] = next;
      while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (const auto& nb : neighbors(v)) {
          if (label[static_cast<std::size_t>(nb.atom)] < 0) {
            label[static_cast<std::size_t>(nb.atom)] = next;
            stack.push_back(nb.atom);
          }
        }
      }
      ++next;
    }
    return label;
  }

  static int inferred_hydrogens(Element e, int charge, bool aromatic, int bond_valence) {
    auto vs = allowed_valences(e, charge);
    if (vs.empty()) return 0;
    if (aromatic) {
      int need = bond_valence + 1;
      return need <= vs.front() ? vs.front() - need : 0;
    }
    for (int v : vs) {
      if (v >= bond_valence) return v - bond_valence;
    }
    return 0;
  }

 private:
  void compute_ring_bonds() {
    // Bridges (Tarjan lowlink) are exactly the non-ring bonds.
    const std::size_t n = atoms_.size();
    ring_bond_.assign(bonds_.size(), true);
    std::vector<int> disc(n, -1), low(n, 0);
    int timer = 0;
    struct Frame {
      int atom;
      int parent_bond;
      std::size_t next;
    };
    for (int root = 0; root < atom_count(); ++root) {
      if (disc[static_cast<std::size_t>(root)] >= 0) continue;
      std::vector<Frame> stack{{root, -1, 0}};
      disc[static_cast<std::size_t>(root)] = low[static_cast<std::size_t>(root)] = timer++;
      while (!stack.empty()) {
        Frame& f = stack.back();
        const auto& adj = adjacency_[static_cast<std::size_t>(f.atom)];
        if (f.next < adj.size()) {
          Neighbor nb = adj[f.next++];
          if (nb.bond == f.parent_bond) continue;
          auto w = static_cast<std::size_t>(nb.atom);
          if (disc[w] < 0) {
            disc[w] = low[w] = timer++;
            stack.push_back({nb.atom, nb.bond, 0});
          } else {
            low[static_cast<std::size_t>(f.atom)] =
                std::min(low[static_cast<std::size_t>(f.atom)], disc[w]);
          }
        } else {
          Frame done = f;
          stack.pop_back();
          if (!stack.empty()) {
            auto p = static_cast<std::size_t>(stack.back().atom);
            auto c = static_cast<std::size_t>(done.atom);
            low[p] = std::min(low[p], low[c]);
            if (low[c] > disc[p]) ring_bond_[static_cast<std::size_t>(done.parent_bond)] = false;
          }
        }
      }
    }
  }

  // Horton candidate cycles filtered by GF(2) independence, shortest first.
  void compute_rings() {
    rings_.clear();
    const int n = atom_count();
    const int m = bond_count();
    if (m == 0) return;
    const int rank = m - n + fragment_count();
    if (rank <= 0) return;

    struct Candidate {
      std::vector<int> atoms;
      std::vector<std::uint64_t> edges;
    };
    const std::size_t words = (static_cast<std::size_t>(m) + 63) / 64;
    std::vector<Candidate> candidates;

    for (int root = 0; root < n; ++root) {
      if (!atom_in_ring(root)) continue;
      // BFS restricted to ring bonds.
      std::vector<int> parent(static_cast<std::size_t>(n), -2), parent_bond(static_cast<std::size_t>(n), -1),
          dist(static_cast<std::size_t>(n), -1);
      std::queue<int> q;
      q.push(root);
      parent[static_cast<std::size_t>(root)] = -1;
      dist[static_cast<std::size_t>(root)] = 0;
      while (!q.empty()) {
        int v = q.front();
        q.pop();
        for (const auto& nb : neighbors(v)) {
          if (!ring_bond_[static_cast<std::size_t>(nb.bond)]) continue;
          if (dist[static_cast<std::size_t>(nb.atom)] < 0) {
            dist[static_cast<std::size_t>(nb.atom)] = dist[static_cast<std::size_t>(v)] + 1;
            parent[static_cast<std::size_t>(nb.atom)] = v;
            parent_bond[static_cast<std::size_t>(nb.atom)] = nb.bond;
            q.push(nb.atom);
          }
        }
      }
      auto path_to_root = [&](int v) {
        std::vector<int> p;
        while (v != -1) {
          p.push_back(v);
          v = parent[static_cast<std::size_t>(v)];
        }
        return p;
      };
      for (int b = 0; b < m; ++b) {
        if (!ring_bond_[static_cast<std::size_t>(b)]) continue;
        int x = bonds_[static_cast<std::size_t>(b)].begin;
        int y = bonds_[static_cast<std::size_t>(b)].end;
        if (dist[static_cast<std::size_t>(x)] < 0 || dist[static_cast<std::size_t>(y)] < 0) continue;
        if (parent_bond[static_cast<std::size_t>(x)] == b || parent_bond[static_cast<std::size_t>(y)] == b) continue;
        auto px = path_to_root(x);
        auto py = path_to_root(y);
        // Paths must share only the root.
        bool disjoint = true;
        for (std::size_t i = 0; i + 1 < px.size() && disjoint; ++i) {
          for (std::size_t j = 0; j + 1 < py.size(); ++j) {
            if (px[i] == py[j]) {
              disjoint = false;
              break;
            }
          }
        }
        if (!disjoint) continue;
        Candidate c;
        c.atoms = px;
        std::reverse(c.atoms.begin(), c.atoms.end());  // root ... x
        c.atoms.pop_back();
        c.atoms.push_back(x);
        for (int v : py) {
          if (v != root) c.atoms.push_back(v);
        }
        // c.atoms: root .. x, y .. (towards root), cyclic.
        c.edges.assign(words, 0);
        const std::size_t len = c.atoms.size();
        for (std::size_t i = 0; i < len; ++i) {
          auto eb = bond_between(c.atoms[i], c.atoms[(i + 1) % len]);
          auto e = static_cast<std::size_t>(*eb);
          c.edges[e / 64] |= (std::uint64_t{1} << (e % 64));
        }
        candidates.push_back(std::move(c));
      }
    }

    std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
      if (a.atoms.size() != b.atoms.size()) return a.atoms.size() < b.atoms.size();
      return a.edges < b.edges;
    });

    // Incremental Gaussian elimination over GF(2).
    std::vector<std::vector<std::uint64_t>> basis;
    std::vector<std::size_t> pivots;
    for (auto& c : candidates) {
      if (static_cast<int>(rings_.size()) == rank) break;
      std::vector<std::uint64_t> v = c.edges;
      for (std::size_t k = 0; k < basis.size(); ++k) {
        std::size_t p = pivots[k];
        if ((v[p / 64] >> (p % 64)) & 1U) {
          for (std::size_t w = 0; w < words; ++w) v[w] ^= basis[k][w];
        }
      }
      std::size_t pivot = words * 64;
      for (std::size_t w = 0; w < words && pivot == words * 64; ++w) {
        if (v[w] != 0) pivot = w * 64 + static_cast<std::size_t>(__builtin_ctzll(v[w]));
      }
      if (pivot == words * 64) continue;
      // Keep basis reduced on the new pivot column.
      for (std::size_t k = 0; k < basis.size(); ++k) {
        if ((basis[k][pivot / 64] >> (pivot % 64)) & 1U) {
          for (std::size_t w = 0; w < words; ++w) basis[k][w] ^= v[w];
        }
      }
      basis.push_back(std::move(v));
      pivots.push_back(pivot);
      rings_.push_back(c.atoms);
    }
  }

  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<std::vector<Neighbor>> adjacency_;
  std::vector<bool> ring_bond_;
  std::vector<std::vector<int>> rings_;
};

/// Copy of `m` with atoms reordered so that new atom i is old atom order[i].
inline Molecule permute_atoms(const Molecule& m, std::span<const int> order) {
  const int n = m.atom_count();
  if (static_cast<int>(order.size()) != n) throw MoleculeError("permutation size mismatch");
  std::vector<int> new_index(static_cast<std::size_t>(n), -1);
  std::vector<Atom> atoms;
  atoms.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    int old = order[static_cast<std::size_t>(i)];
    if (old < 0 || old >= n || new_index[static_cast<std::size_t>(old)] >= 0) {
      throw MoleculeError("invalid permutation");
    }
    new_index[static_cast<std::size_t>(old)] = i;
    atoms.push_back(m.atom(old));
  }
  std::vector<Bond> bonds;
  bonds.reserve(m.bonds().size());
  for (const Bond& b : m.bonds()) {
    bonds.push_back({new_index[static_cast<std::size_t>(b.begin)], new_index[static_cast<std::size_t>(b.end)], b.order});
  }
  // Bond list order follows the new atom numbering so no trace of the old
  // order survives.
  std::sort(bonds.begin(), bonds.end(), [](const Bond& a, const Bond& b) {
    return std::pair(std::min(a.begin, a.end), std::max(a.begin, a.end)) <
           std::pair(std::min(b.begin, b.end), std::max(b.begin, b.end));
  });
  return Molecule(std::move(atoms), std::move(bonds));
}

}  // namespace molact

#endif  // MOLACT_MOLECULE_HPP_
