// SPDX-License-Identifier: Apache-2.0
//
// SMILES subset reader and writer.
//
// Supported: organic-subset atoms (B C N O P S F Cl Br I, aromatic b c n o p s),
// bracket atoms with element, hydrogen count and charge, bonds - = # :, branches,
// ring closures (digits and %nn). Rejected with a ParseError: stereo marks,
// isotopes, atom classes, wildcards, and '.' (multi-fragment input).

#ifndef MOLACT_SMILES_HPP_
#define MOLACT_SMILES_HPP_

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "molact/molecule.hpp"

namespace molact {

namespace detail {

class SmilesReader {
 public:
  explicit SmilesReader(std::string_view text) : text_(text) {}

  Molecule read() {
    if (text_.empty()) throw ParseError("empty input", 0);
    int prev = -1;
    std::optional<BondOrder> pending;
    std::size_t pending_pos = 0;
    std::vector<int> branch_stack;

    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '(') {
        if (prev < 0) throw ParseError("branch before any atom", pos_);
        if (pending) throw ParseError("bond symbol before branch", pos_);
        branch_stack.push_back(prev);
        ++pos_;
        if (pos_ < text_.size() && text_[pos_] == ')') throw ParseError("empty branch", pos_);
      } else if (c == ')') {
        if (branch_stack.empty()) throw ParseError("unmatched ')'", pos_);
        if (pending) throw ParseError("bond symbol at end of branch", pos_);
        prev = branch_stack.back();
        branch_stack.pop_back();
        ++pos_;
      } else if (c == '-' || c == '=' || c == '#' || c == ':') {
        if (prev < 0) throw ParseError("bond symbol before any atom", pos_);
        if (pending) throw ParseError("consecutive bond symbols", pos_);
        pending = c == '-' ? BondOrder::Single
                  : c == '=' ? BondOrder::Double
                  : c == '#' ? BondOrder::Triple
                             : BondOrder::Aromatic;
        pending_pos = pos_;
        ++pos_;
      } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '%') {
        if (prev < 0) throw ParseError("ring closure before any atom", pos_);
        std::size_t at = pos_;
        int label = read_ring_label();
        handle_ring(prev, label, pending, at);
        pending.reset();
      } else if (c == '.') {
        throw ParseError("multi-fragment input ('.') is not supported", pos_);
      } else if (c == '/' || c == '\\' || c == '@') {
        throw ParseError("stereochemistry is not supported", pos_);
      } else if (c == '*') {
        throw ParseError("wildcard atoms are not supported", pos_);
      } else {
        std::size_t at = pos_;
        int idx = read_atom();
        if (prev >= 0) add_bond(prev, idx, pending, at);
        pending.reset();
        prev = idx;
      }
    }
    if (pending) throw ParseError("dangling bond symbol", pending_pos);
    if (!branch_stack.empty()) throw ParseError("unclosed branch", text_.size());
    if (!open_rings_.empty()) {
      throw ParseError("unclosed ring bond " + std::to_string(open_rings_.begin()->first), text_.size());
    }

    Molecule draft(atoms_, bonds_);
    // Implicit aromatic bonds outside rings (e.g. biaryl links) are single.
    bool changed = false;
    for (int b = 0; b < draft.bond_count(); ++b) {
      if (bonds_[static_cast<std::size_t>(b)].order == BondOrder::Aromatic && implicit_[static_cast<std::size_t>(b)] &&
          !draft.bond_in_ring(b)) {
        bonds_[static_cast<std::size_t>(b)].order = BondOrder::Single;
        changed = true;
      }
    }
    if (!changed) return draft;
    return Molecule(std::move(atoms_), std::move(bonds_));
  }

 private:
  struct OpenRing {
    int atom;
    std::optional<BondOrder> order;
  };

  int read_ring_label() {
    if (text_[pos_] == '%') {
      if (pos_ + 2 >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])) ||
          !std::isdigit(static_cast<unsigned char>(text_[pos_ + 2]))) {
        throw ParseError("'%' must be followed by two digits", pos_);
      }
      int v = (text_[pos_ + 1] - '0') * 10 + (text_[pos_ + 2] - '0');
      pos_ += 3;
      return v;
    }
    return text_[pos_++] - '0';
  }

  void handle_ring(int atom, int label, std::optional<BondOrder> order, std::size_t at) {
    auto it = open_rings_.find(label);
    if (it == open_rings_.end()) {
      open_rings_[label] = {atom, order};
      return;
    }
    OpenRing open = it->second;
    open_rings_.erase(it);
    if (open.atom == atom) throw ParseError("ring closure to the same atom", at);
    if (open.order && order && *open.order != *order) throw ParseError("conflicting ring bond orders", at);
    add_bond(open.atom, atom, order ? order : open.order, at);
  }

  void add_bond(int a, int b, std::optional<BondOrder> order, std::size_t at) {
    for (const Bond& existing : bonds_) {
      if ((existing.begin == a && existing.end == b) || (existing.begin == b && existing.end == a)) {
        throw ParseError("duplicate bond", at);
      }
    }
    bool implicit = !order.has_value();
    BondOrder o = BondOrder::Single;
    if (order) {
      o = *order;
    } else if (atoms_[static_cast<std::size_t>(a)].aromatic && atoms_[static_cast<std::size_t>(b)].aromatic) {
      o = BondOrder::Aromatic;
    }
    bonds_.push_back({a, b, o});
    implicit_.push_back(implicit);
  }

  int read_atom() {
    if (text_[pos_] == '[') return read_bracket_atom();
    static constexpr std::array<std::pair<std::string_view, Element>, 10> kOrganic{{
        {"Cl", Element::Cl}, {"Br", Element::Br}, {"B", Element::B}, {"C", Element::C}, {"N", Element::N},
        {"O", Element::O}, {"P", Element::P}, {"S", Element::S}, {"F", Element::F}, {"I", Element::I},
    }};
    std::string_view rest = text_.substr(pos_);
    for (const auto& [sym, el] : kOrganic) {
      if (rest.starts_with(sym)) {
        pos_ += sym.size();
        return push_atom({el, 0, false, 0, false});
      }
    }
    if (auto el = aromatic_element(text_[pos_])) {
      ++pos_;
      return push_atom({*el, 0, true, 0, false});
    }
    throw ParseError(std::string("unknown element '") + text_[pos_] + "'", pos_);
  }

  static std::optional<Element> aromatic_element(char c) {
    switch (c) {
      case 'b': return Element::B;
      case 'c': return Element::C;
      case 'n': return Element::N;
      case 'o': return Element::O;
      case 'p': return Element::P;
      case 's': return Element::S;
      default: return std::nullopt;
    }
  }

  int read_bracket_atom() {
    std::size_t open = pos_++;
    auto at_end = [&] { return pos_ >= text_.size(); };
    if (at_end()) throw ParseError("unterminated bracket atom", open);
    if (std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      throw ParseError("isotopes are not supported", pos_);
    }
    Atom atom;
    atom.bracket = true;
    // Element symbol: aromatic lowercase, or uppercase with optional lowercase.
    if (auto el = aromatic_element(text_[pos_])) {
      atom.element = *el;
      atom.aromatic = true;
      ++pos_;
    } else {
      if (!std::isupper(static_cast<unsigned char>(text_[pos_]))) {
        throw ParseError("expected element symbol", pos_);
      }
      std::size_t sym_start = pos_;
      std::string sym(1, text_[pos_++]);
      if (!at_end() && std::islower(static_cast<unsigned char>(text_[pos_]))) sym += text_[pos_++];
      auto sym_el = element_from_symbol(sym);
      if (!sym_el) throw ParseError("unknown element '" + sym + "'", sym_start);
      atom.element = *sym_el;
    }
    if (at_end()) throw ParseError("unterminated bracket atom", open);
    if (!at_end() && text_[pos_] == '@') throw ParseError("stereochemistry is not supported", pos_);
    if (!at_end() && text_[pos_] == 'H') {
      ++pos_;
      atom.explicit_h = 1;
      if (!at_end() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        atom.explicit_h = text_[pos_++] - '0';
      }
    }
    if (!at_end() && (text_[pos_] == '+' || text_[pos_] == '-')) {
      char sign = text_[pos_++];
      int mag = 1;
      if (!at_end() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        mag = text_[pos_++] - '0';
      } else {
        while (!at_end() && text_[pos_] == sign) {
          ++mag;
          ++pos_;
        }
      }
      atom.formal_charge = sign == '+' ? mag : -mag;
    }
    if (!at_end() && text_[pos_] == ':') throw ParseError("atom classes are not supported", pos_);
    if (at_end() || text_[pos_] != ']') throw ParseError("unterminated bracket atom", open);
    ++pos_;
    return push_atom(atom);
  }

  int push_atom(const Atom& a) {
    atoms_.push_back(a);
    return static_cast<int>(atoms_.size()) - 1;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<bool> implicit_;
  std::map<int, OpenRing> open_rings_;
};

inline bool writes_as_organic(const Molecule& m, int i) {
  const Atom& a = m.atom(i);
  if (a.element == Element::H || a.formal_charge != 0) return false;
  if (!element_info(a.element).organic_subset) return false;
  if (a.aromatic && a.element != Element::B && a.element != Element::C && a.element != Element::N &&
      a.element != Element::O && a.element != Element::P && a.element != Element::S) {
    return false;
  }
  int inferred = Molecule::inferred_hydrogens(a.element, a.formal_charge, a.aromatic, m.bond_valence(i));
  return inferred == m.total_h(i);
}

inline std::string atom_token(const Molecule& m, int i) {
  const Atom& a = m.atom(i);
  std::string sym(symbol(a.element));
  if (a.aromatic) {
    for (auto& ch : sym) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  }
  if (writes_as_organic(m, i)) return sym;
  std::string out = "[" + sym;
  int h = m.total_h(i);
  if (h > 0) {
    out += 'H';
    if (h > 1) out += std::to_string(h);
  }
  if (a.formal_charge != 0) {
    out += a.formal_charge > 0 ? '+' : '-';
    int mag = a.formal_charge > 0 ? a.formal_charge : -a.formal_charge;
    if (mag > 1) out += std::to_string(mag);
  }
  out += ']';
  return out;
}

inline std::string bond_token(const Molecule& m, int b) {
  const Bond& bond = m.bond(b);
  switch (bond.order) {
    case BondOrder::Single:
      return m.atom(bond.begin).aromatic && m.atom(bond.end).aromatic ? "-" : "";
    case BondOrder::Double: return "=";
    case BondOrder::Triple: return "#";
    case BondOrder::Aromatic:
      return m.atom(bond.begin).aromatic && m.atom(bond.end).aromatic ? "" : ":";
  }
  return "";
}

inline std::string ring_label(int d) { return d < 10 ? std::to_string(d) : "%" + std::to_string(d); }

}  // namespace detail

/// Parses a single-fragment SMILES string. Hydrogens on organic-subset atoms
/// are implicit and follow the valence table.
inline Molecule parse_smiles(std::string_view text) { return detail::SmilesReader(text).read(); }

/// Writes `m` by depth-first traversal. Traversal starts at the atom with the
/// lowest `rank` and visits neighbours in increasing rank; ring-closure digits
/// take the lowest free label. With distinct ranks the output is a function of
/// the ranked graph only. Requires a single fragment.
inline std::string write_smiles(const Molecule& m, std::span<const int> rank) {
  const int n = m.atom_count();
  if (n == 0) return "";
  if (static_cast<int>(rank.size()) != n) throw MoleculeError("rank vector size mismatch");
  auto R = [&](int i) { return rank[static_cast<std::size_t>(i)]; };

  auto sorted_neighbors = [&](int v) {
    std::vector<Neighbor> nbs(m.neighbors(v).begin(), m.neighbors(v).end());
    std::sort(nbs.begin(), nbs.end(), [&](const Neighbor& a, const Neighbor& b) { return R(a.atom) < R(b.atom); });
    return nbs;
  };

  int start = 0;
  for (int i = 1; i < n; ++i) {
    if (R(i) < R(start)) start = i;
  }

  // Pass 1: DFS tree, children order and ring-closure bonds.
  std::vector<int> parent_bond(static_cast<std::size_t>(n), -1);
  std::vector<bool> visited(static_cast<std::size_t>(n), false);
  std::vector<std::vector<Neighbor>> children(static_cast<std::size_t>(n));
  // Ring bonds in the order they are met at each endpoint.
  std::vector<std::vector<int>> ring_at(static_cast<std::size_t>(n));
  std::vector<bool> is_ring_bond(static_cast<std::size_t>(m.bond_count()), false);
  {
    struct Frame {
      int atom;
      std::vector<Neighbor> nbs;
      std::size_t next;
    };
    std::vector<Frame> stack;
    visited[static_cast<std::size_t>(start)] = true;
    stack.push_back({start, sorted_neighbors(start), 0});
    while (!stack.empty()) {
      Frame& f = stack.back();
      if (f.next >= f.nbs.size()) {
        stack.pop_back();
        continue;
      }
      Neighbor nb = f.nbs[f.next++];
      if (nb.bond == parent_bond[static_cast<std::size_t>(f.atom)]) continue;
      if (is_ring_bond[static_cast<std::size_t>(nb.bond)]) continue;
      if (visited[static_cast<std::size_t>(nb.atom)]) {
        // Back edge to an ancestor: the ancestor opens, this atom closes.
        is_ring_bond[static_cast<std::size_t>(nb.bond)] = true;
        ring_at[static_cast<std::size_t>(nb.atom)].push_back(nb.bond);
        ring_at[static_cast<std::size_t>(f.atom)].push_back(nb.bond);
        continue;
      }
      visited[static_cast<std::size_t>(nb.atom)] = true;
      parent_bond[static_cast<std::size_t>(nb.atom)] = nb.bond;
      children[static_cast<std::size_t>(f.atom)].push_back(nb);
      int child = nb.atom;
      stack.push_back({child, sorted_neighbors(child), 0});
    }
  }
  for (int i = 0; i < n; ++i) {
    if (!visited[static_cast<std::size_t>(i)]) throw MoleculeError("cannot write a disconnected molecule as SMILES");
  }

  // Order ring bonds at the opening atom by their partner's rank. At the
  // closing atom they were discovered in rank order already.
  std::vector<bool> written(static_cast<std::size_t>(n), false);
  std::vector<int> label_of(static_cast<std::size_t>(m.bond_count()), -1);
  std::vector<bool> label_used(100, false);

  std::string out;
  struct Item {
    int atom;
    int via_bond;  // -1 for root
    bool close_paren;
    bool open_paren;
  };
  std::vector<Item> work{{start, -1, false, false}};
  while (!work.empty()) {
    Item it = work.back();
    work.pop_back();
    if (it.atom < 0) {
      out += ')';
      continue;
    }
    if (it.open_paren) out += '(';
    if (it.via_bond >= 0) out += detail::bond_token(m, it.via_bond);
    int v = it.atom;
    written[static_cast<std::size_t>(v)] = true;
    out += detail::atom_token(m, v);

    // Closures first (partner already written), then openings by partner rank.
    std::vector<int> closing, opening;
    for (int b : ring_at[static_cast<std::size_t>(v)]) {
      int other = m.bond(b).other(v);
      (written[static_cast<std::size_t>(other)] && label_of[static_cast<std::size_t>(b)] >= 0 ? closing : opening).push_back(b);
    }
    std::sort(opening.begin(), opening.end(), [&](int a, int b) { return R(m.bond(a).other(v)) < R(m.bond(b).other(v)); });
    for (int b : closing) {
      int label = label_of[static_cast<std::size_t>(b)];
      out += detail::ring_label(label);
      label_used[static_cast<std::size_t>(label)] = false;
    }
    for (int b : opening) {
      int label = 1;
      while (label_used[static_cast<std::size_t>(label)]) ++label;
      if (label > 99) throw MoleculeError("too many open rings");
      label_used[static_cast<std::size_t>(label)] = true;
      label_of[static_cast<std::size_t>(b)] = label;
      out += detail::bond_token(m, b);
      out += detail::ring_label(label);
    }

    const auto& kids = children[static_cast<std::size_t>(v)];
    // Push in reverse so the first child is processed first; all but the last
    // child are branches.
    for (std::size_t k = kids.size(); k-- > 0;) {
      bool branch = k + 1 < kids.size();
      if (branch) work.push_back({-1, -1, false, false});
      work.push_back({kids[k].atom, kids[k].bond, false, branch});
    }
  }
  return out;
}

/// Writes with atom order as rank (input order).
inline std::string write_smiles(const Molecule& m) {
  std::vector<int> rank(static_cast<std::size_t>(m.atom_count()));
  std::iota(rank.begin(), rank.end(), 0);
  return write_smiles(m, rank);
}

}  // namespace molact

#endif  // MOLACT_SMILES_HPP_
