// SPDX-License-Identifier: Apache-2.0
//
// Element table: symbols, atomic masses and the valence rules that back both
// implicit-hydrogen inference and the validity gate.

#ifndef MOLACT_ELEMENT_HPP_
#define MOLACT_ELEMENT_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace molact {

enum class Element : std::uint8_t { H, B, C, N, O, F, P, S, Cl, Br, I };

inline constexpr std::size_t kElementCount = 11;

namespace detail {

struct ElementInfo {
  Element element;
  std::string_view symbol;
  int atomic_number;
  double mass;
  bool organic_subset;
  // Neutral valences, ascending.
  std::array<int, 3> valences;
  int n_valences;
};

inline constexpr std::array<ElementInfo, kElementCount> kElements{{
    {Element::H, "H", 1, 1.008, false, {1, 0, 0}, 1},
    {Element::B, "B", 5, 10.811, true, {3, 0, 0}, 1},
    {Element::C, "C", 6, 12.011, true, {4, 0, 0}, 1},
    {Element::N, "N", 7, 14.007, true, {3, 0, 0}, 1},
    {Element::O, "O", 8, 15.999, true, {2, 0, 0}, 1},
    {Element::F, "F", 9, 18.998, true, {1, 0, 0}, 1},
    {Element::P, "P", 15, 30.974, true, {3, 5, 0}, 2},
    {Element::S, "S", 16, 32.065, true, {2, 4, 6}, 3},
    {Element::Cl, "Cl", 17, 35.453, true, {1, 0, 0}, 1},
    {Element::Br, "Br", 35, 79.904, true, {1, 0, 0}, 1},
    {Element::I, "I", 53, 126.904, true, {1, 0, 0}, 1},
}};

}  // namespace detail

inline constexpr const detail::ElementInfo& element_info(Element e) {
  return detail::kElements[static_cast<std::size_t>(e)];
}

inline constexpr std::string_view symbol(Element e) { return element_info(e).symbol; }
inline constexpr int atomic_number(Element e) { return element_info(e).atomic_number; }
inline constexpr double atomic_mass(Element e) { return element_info(e).mass; }

inline constexpr double kHydrogenMass = 1.008;

inline std::optional<Element> element_from_symbol(std::string_view s) {
  for (const auto& info : detail::kElements) {
    if (info.symbol == s) return info.element;
  }
  return std::nullopt;
}

/// Allowed total valences for an element at a given formal charge, ascending.
///
/// Charge shifts the neutral table by the isoelectronic rule: for N, O, P, S,
/// and halogens a positive charge adds one bonding slot per unit (N+ behaves
/// like C), a negative charge removes one. Carbon and hydrogen lose one slot
/// per unit of charge of either sign; boron gains one per negative unit (B- behaves like C).
inline std::vector<int> allowed_valences(Element e, int charge) {
  const auto& info = element_info(e);
  std::vector<int> out;
  for (int k = 0; k < info.n_valences; ++k) {
    int v = info.valences[static_cast<std::size_t>(k)];
    switch (e) {
      case Element::C:
      case Element::H:
        v -= charge < 0 ? -charge : charge;
        break;
      case Element::B:
        v -= charge;
        break;
      default:
        v += charge;
        break;
    }
    if (v >= 0) out.push_back(v);
  }
  return out;
}

inline int max_valence(Element e, int charge) {
  auto vs = allowed_valences(e, charge);
  return vs.empty() ? 0 : vs.back();
}

}  // namespace molact

#endif  // MOLACT_ELEMENT_HPP_
