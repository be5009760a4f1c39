// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <random>
#include <set>
#include <string>

#include "molact/canonical.hpp"
#include "molact/smiles.hpp"
#include "molact/validity.hpp"
#include "support/oracles.hpp"

namespace molact {
namespace {

TEST(ParseSmiles, Ethanol) {
  Molecule m = parse_smiles("CCO");
  ASSERT_EQ(m.atom_count(), 3);
  ASSERT_EQ(m.bond_count(), 2);
  EXPECT_EQ(m.atom(0).element, Element::C);
  EXPECT_EQ(m.atom(2).element, Element::O);
  for (const Bond& b : m.bonds()) EXPECT_EQ(b.order, BondOrder::Single);
  EXPECT_TRUE(m.bond_between(0, 1).has_value());
  EXPECT_TRUE(m.bond_between(1, 2).has_value());
  EXPECT_FALSE(m.bond_between(0, 2).has_value());
  EXPECT_EQ(m.total_h(0), 3);
  EXPECT_EQ(m.total_h(1), 2);
  EXPECT_EQ(m.total_h(2), 1);
}

TEST(ParseSmiles, Cyclopropane) {
  Molecule m = parse_smiles("C1CC1");
  EXPECT_EQ(m.atom_count(), 3);
  EXPECT_EQ(m.bond_count(), 3);
  ASSERT_EQ(m.rings().size(), 1u);
  EXPECT_EQ(m.rings()[0].size(), 3u);
  for (int i = 0; i < 3; ++i) EXPECT_TRUE(m.atom_in_ring(i));
}

TEST(ParseSmiles, AromaticHydrogens) {
  Molecule benzene = parse_smiles("c1ccccc1");
  for (int i = 0; i < 6; ++i) EXPECT_EQ(benzene.total_h(i), 1);
  Molecule pyridine = parse_smiles("c1ccncc1");
  EXPECT_EQ(pyridine.total_h(3), 0);
  Molecule pyrrole = parse_smiles("c1cc[nH]c1");
  EXPECT_EQ(pyrrole.total_h(3), 1);
  Molecule toluene = parse_smiles("Cc1ccccc1");
  EXPECT_EQ(toluene.total_h(1), 0);
}

TEST(ParseSmiles, BracketAtomsAndCharges) {
  Molecule nitro = parse_smiles("C[N+](=O)[O-]");
  EXPECT_EQ(nitro.atom(1).formal_charge, 1);
  EXPECT_EQ(nitro.atom(3).formal_charge, -1);
  EXPECT_EQ(nitro.total_h(1), 0);
  EXPECT_TRUE(is_valid(nitro));
  Molecule ammonium = parse_smiles("[NH4+]");
  EXPECT_EQ(ammonium.total_h(0), 4);
  EXPECT_TRUE(is_valid(ammonium));
  EXPECT_EQ(parse_smiles("[O--]").atom(0).formal_charge, -2);
  EXPECT_THROW(parse_smiles("[Fe+2]"), ParseError);
}

TEST(ParseSmiles, RingClosureForms) {
  Molecule a = parse_smiles("C%12CC%12");
  EXPECT_EQ(a.rings().size(), 1u);
  Molecule b = parse_smiles("C=1CCCCC1");
  EXPECT_EQ(b.bond(*b.bond_between(0, 5)).order, BondOrder::Double);
  Molecule biphenyl = parse_smiles("c1ccccc1c1ccccc1");
  auto link = biphenyl.bond_between(5, 6);
  ASSERT_TRUE(link.has_value());
  EXPECT_EQ(biphenyl.bond(*link).order, BondOrder::Single);
  EXPECT_TRUE(is_valid(biphenyl));
}

TEST(ParseSmiles, Errors) {
  for (const char* bad : {"", "C(", "C)", "(C)", "C1CC", "CX", "C.C", "C=", "C==C", "[C", "[13C]", "C[C@H](O)N",
                          "F/C=C/F", "*C", "C1C1", "[Xx]", "C()", "[CH3:1]", "%1C"}) {
    EXPECT_THROW(parse_smiles(bad), ParseError) << bad;
  }
}

TEST(ParseSmiles, ErrorPositionPointsAtProblem) {
  try {
    parse_smiles("CCX");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.position(), 2u);
  }
}

TEST(Validity, TextbookMoleculeIsValid) { EXPECT_TRUE(check_validity(parse_smiles("CCO")).valid); }

TEST(Validity, PentavalentCarbon) {
  auto report = check_validity(parse_smiles("CC(C)(C)(C)C"));
  ASSERT_FALSE(report.valid);
  EXPECT_EQ(report.violations.front(), "valence exceeded at atom 1");
}

TEST(Validity, DisconnectedGraph) {
  Molecule m({Atom{}, Atom{}, Atom{Element::O}}, {{0, 1, BondOrder::Single}});
  auto report = check_validity(m);
  ASSERT_FALSE(report.valid);
  EXPECT_EQ(report.violations.back(), "disconnected");
}

TEST(Validity, AromaticOutsideRing) {
  auto report = check_validity(parse_smiles("cc"));
  EXPECT_FALSE(report.valid);
  EXPECT_FALSE(check_validity(parse_smiles("C:C")).valid);
}

TEST(Validity, ChargedNitrogenAllowsFour) {
  EXPECT_TRUE(is_valid(parse_smiles("C[N+](C)(C)C")));
  EXPECT_FALSE(is_valid(parse_smiles("C[N](C)(C)C")));
  EXPECT_TRUE(is_valid(parse_smiles("CS(C)(=O)=O")));
  EXPECT_TRUE(is_valid(parse_smiles("CP(C)(C)=O")));
  EXPECT_FALSE(is_valid(parse_smiles("C[O](C)C")));
  EXPECT_FALSE(is_valid(parse_smiles("ClCl(Cl)")));
}

TEST(Validity, StructuralErrorsRejectedAtConstruction) {
  EXPECT_THROW(Molecule({Atom{}}, {{0, 0, BondOrder::Single}}), MoleculeError);
  EXPECT_THROW(Molecule({Atom{}, Atom{}}, {{0, 1, BondOrder::Single}, {1, 0, BondOrder::Double}}), MoleculeError);
  EXPECT_THROW(Molecule({Atom{}}, {{0, 3, BondOrder::Single}}), MoleculeError);
}

TEST(Rings, SmallestSetOfSmallestRings) {
  Molecule naphthalene = parse_smiles("c1ccc2ccccc2c1");
  EXPECT_EQ(naphthalene.rings().size(), 2u);
  for (const auto& r : naphthalene.rings()) EXPECT_EQ(r.size(), 6u);
  // Norbornane: two five-membered rings.
  auto nb = parse_smiles("C1CC2CCC1C2");
  ASSERT_EQ(nb.rings().size(), 2u);
  EXPECT_EQ(nb.rings()[0].size(), 5u);
  EXPECT_EQ(nb.rings()[1].size(), 5u);
  EXPECT_TRUE(parse_smiles("CCCC").rings().empty());
  // Cubane: 12 bonds, 8 atoms, rank 5 of 4-rings.
  auto cubane = parse_smiles("C12C3C4C1C5C2C3C45");
  ASSERT_EQ(cubane.rings().size(), 5u);
  for (const auto& r : cubane.rings()) EXPECT_EQ(r.size(), 4u);
}

TEST(Canonical, IsomorphicInputsAgree) {
  EXPECT_EQ(canonical_smiles(parse_smiles("OCC")), canonical_smiles(parse_smiles("CCO")));
  EXPECT_EQ(canonical_smiles(parse_smiles("c1ccccc1C")), canonical_smiles(parse_smiles("Cc1ccccc1")));
  EXPECT_NE(canonical_smiles(parse_smiles("CCO")), canonical_smiles(parse_smiles("COC")));
}

TEST(Canonical, Idempotent) {
  for (const auto& s : testing::load_corpus()) {
    std::string c = canonical_smiles(parse_smiles(s));
    EXPECT_EQ(canonical_smiles(parse_smiles(c)), c) << s;
  }
}

TEST(Canonical, RejectsInvalid) { EXPECT_THROW(canonical_smiles(parse_smiles("cc")), MoleculeError); }

TEST(Canonical, TwentyPermutationsOneString) {
  Molecule m = parse_smiles("CC(=O)Oc1ccccc1C(=O)O");
  std::mt19937_64 rng(11);
  std::set<std::string> seen;
  for (int k = 0; k < 20; ++k) {
    auto p = testing::random_permutation(m.atom_count(), rng);
    seen.insert(canonical_smiles(permute_atoms(m, p)));
  }
  EXPECT_EQ(seen.size(), 1u);
}

TEST(Canonical, RoundTripIsomorphicOnCorpus) {
  for (const auto& s : testing::load_corpus()) {
    Molecule m = parse_smiles(s);
    ASSERT_TRUE(is_valid(m)) << s;
    Molecule back = parse_smiles(canonical_smiles(m));
    EXPECT_TRUE(testing::isomorphic(m, back)) << s << " -> " << canonical_smiles(m);
  }
}

TEST(Validity, PermutationInvariant) {
  std::mt19937_64 rng(3);
  for (const auto& s : {"CCO", "CC(C)(C)(C)C", "cc", "c1ccncc1", "C[N](C)(C)C"}) {
    Molecule m = parse_smiles(s);
    bool v = is_valid(m);
    for (int k = 0; k < 5; ++k) {
      EXPECT_EQ(is_valid(permute_atoms(m, testing::random_permutation(m.atom_count(), rng))), v) << s;
    }
  }
}

}  // namespace
}  // namespace molact
