#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "tnvqe/errors.hpp"
#include "tnvqe/lattice.hpp"
#include "tnvqe/pauli.hpp"

using namespace tnvqe;

TEST(Lattice, SiteIndexFormula) {
  EXPECT_EQ(site_index(1, 1, 3), 1);
  EXPECT_EQ(site_index(2, 3, 3), 6);
  EXPECT_EQ(site_index(3, 1, 3), 7);
  EXPECT_THROW(site_index(1, 4, 3), DomainError);
}

TEST(Lattice, BondCounts) {
  for (auto [nx, ny] : {std::pair{1, 2}, {2, 2}, {2, 3}, {3, 3}, {1, 12}, {3, 4}}) {
    const LatticeGeometry g(nx, ny);
    EXPECT_EQ(static_cast<int>(g.bonds().size()), nx * (ny - 1) + (nx - 1) * ny);
    for (const auto& b : g.bonds()) {
      const auto [x1, y1] = g.coords(b.first);
      const auto [x2, y2] = g.coords(b.second);
      EXPECT_EQ(std::abs(x1 - x2) + std::abs(y1 - y2), 1);
      EXPECT_LT(b.first, b.second);
    }
  }
  EXPECT_THROW(LatticeGeometry(1, 1), DomainError);
  EXPECT_THROW(LatticeGeometry(0, 3), DomainError);
}

TEST(Lattice, InterleavedLayout) {
  const QubitLayout layout(6);
  std::vector<int> seen(12, 0);
  for (int s = 0; s < 6; ++s) {
    EXPECT_EQ(layout.qubit(s, Spin::Up), 2 * s);
    EXPECT_EQ(layout.qubit(s, Spin::Down), 2 * s + 1);
    ++seen[layout.qubit(s, Spin::Up)];
    ++seen[layout.qubit(s, Spin::Down)];
  }
  for (int c : seen) EXPECT_EQ(c, 1);
  for (int q = 0; q < 12; ++q) {
    EXPECT_EQ(layout.qubit(layout.site_of(q), layout.spin_of(q)), q);
  }
}

TEST(Lattice, Checkerboard) {
  const QubitLayout l2(2);
  EXPECT_EQ(to_string(checkerboard_occupation(LatticeGeometry(1, 2), l2)), "1001");
  const QubitLayout l4(4);
  EXPECT_EQ(spin_sector(checkerboard_occupation(LatticeGeometry(2, 2), l4), l4), std::make_pair(2, 2));
  const QubitLayout l3(3);
  EXPECT_EQ(spin_sector(checkerboard_occupation(LatticeGeometry(1, 3), l3), l3), std::make_pair(2, 1));
}

TEST(Lattice, ZeroDisorderIsUniform) {
  const auto m = realize_model(LatticeGeometry(2, 2), 1.0, 2.0, 0.0, 0.0, 7);
  ASSERT_EQ(m.hopping.size(), 4u);
  for (double h : m.hopping) EXPECT_EQ(h, 1.0);
  for (double mu : m.chemical_potential) EXPECT_EQ(mu, 0.0);
  EXPECT_EQ(realize_model(LatticeGeometry(2, 3), 1.0, 8.0, 0.5, 0.2, 1).hopping.size(), 7u);
}

TEST(Lattice, SeededDisorderReproducible) {
  const auto a = realize_model(LatticeGeometry(3, 3), 1.0, 2.0, 0.0, 0.8, 11);
  const auto b = realize_model(LatticeGeometry(3, 3), 1.0, 2.0, 0.0, 0.8, 11);
  const auto c = realize_model(LatticeGeometry(3, 3), 1.0, 2.0, 0.0, 0.8, 12);
  EXPECT_EQ(a.hopping, b.hopping);
  EXPECT_EQ(a.chemical_potential, b.chemical_potential);
  EXPECT_NE(a.hopping, c.hopping);
}

TEST(Lattice, ConfigParsing) {
  const auto c = parse_model_config("# dimer\nnx = 1\nny = 2\nu = 8\n\nseed = 3\n");
  EXPECT_EQ(c.ny, 2);
  EXPECT_EQ(c.u, 8.0);
  EXPECT_EQ(c.seed, 3u);
  EXPECT_THROW(parse_model_config("nx = 1\nfoo = 2\n"), ConfigError);
  EXPECT_THROW(parse_model_config("nx = one\n"), ConfigError);
}

TEST(Lattice, JsonRoundTrip) {
  const auto m = realize_model(LatticeGeometry(2, 3), 1.0, 4.0, 0.2, 0.8, 5);
  const auto back = model_from_json(model_to_json(m));
  EXPECT_EQ(back.hopping, m.hopping);
  EXPECT_EQ(back.chemical_potential, m.chemical_potential);
  EXPECT_EQ(back.u, m.u);
  EXPECT_EQ(back.geometry, m.geometry);
}

TEST(Pauli, DimerStructure) {
  const auto m = realize_model(LatticeGeometry(1, 2), 1.0, 0.0, 0.0, 0.0, 0);
  const auto h = jordan_wigner(m, QubitLayout(2));
  // Up pair is qubits (0, 2) with qubit 1 in between.
  EXPECT_DOUBLE_EQ(h.coefficient("XZXI"), -0.5);
  EXPECT_DOUBLE_EQ(h.coefficient("YZYI"), -0.5);
  EXPECT_DOUBLE_EQ(h.coefficient("IXZX"), -0.5);
  EXPECT_DOUBLE_EQ(h.coefficient("IYZY"), -0.5);
  EXPECT_EQ(h.size(), 4u);
}

TEST(Pauli, OnSiteTermPattern) {
  const auto m = realize_model(LatticeGeometry(1, 2), 1.0, 2.0, 0.0, 0.0, 0);
  const auto h = jordan_wigner(m, QubitLayout(2));
  EXPECT_DOUBLE_EQ(h.coefficient("ZZII"), 0.5);
  EXPECT_DOUBLE_EQ(h.coefficient("ZIII"), -0.5);
  EXPECT_DOUBLE_EQ(h.coefficient("IZII"), -0.5);
  EXPECT_DOUBLE_EQ(h.coefficient("IIIZ"), -0.5);
  EXPECT_DOUBLE_EQ(h.coefficient("IIII"), 1.0);  // 0.5 per site
}

// Brute-force fermionic matrix vs the Pauli form, including V and disorder.
TEST(Pauli, MatchesFermionMatrix) {
  struct Case {
    int nx, ny;
    double u, v, d;
  };
  for (const Case& c : {Case{1, 2, 2.0, 0.0, 0.0}, Case{1, 3, 8.0, 0.0, 0.0}, Case{2, 2, 4.0, 0.8, 0.0},
                        Case{1, 3, 2.0, 0.2, 0.8}}) {
    const auto m = realize_model(LatticeGeometry(c.nx, c.ny), 1.0, c.u, c.v, c.d, 9);
    std::vector<oracle::Bond> bonds;
    for (std::size_t b = 0; b < m.geometry.bonds().size(); ++b) {
      bonds.push_back({m.geometry.bonds()[b].first, m.geometry.bonds()[b].second, m.hopping[b]});
    }
    const auto ref = oracle::hubbard(m.geometry.n_sites(), bonds, c.u, c.v, m.chemical_potential);
    const auto got = dense_matrix(jordan_wigner(m, QubitLayout(m.geometry.n_sites())));
    EXPECT_LT((got - ref).cwiseAbs().maxCoeff(), 1e-12) << c.nx << "x" << c.ny;
  }
}

TEST(Pauli, DimerGroundEnergy) {
  const auto m = realize_model(LatticeGeometry(1, 2), 1.0, 2.0, 0.0, 0.0, 0);
  const auto h = dense_matrix(jordan_wigner(m, QubitLayout(2)));
  const double e = oracle::sector_ground_energy(h, 4, 1, 1);
  EXPECT_NEAR(e, (2.0 - std::sqrt(4.0 + 16.0)) / 2.0, 1e-12);
  EXPECT_EQ(std::round(e * 1e4) / 1e4, -1.2361);
}

TEST(Pauli, NumberConservation) {
  const auto m = realize_model(LatticeGeometry(2, 3), 1.0, 2.0, 0.8, 0.8, 4);
  EXPECT_TRUE(conserves_particle_number(jordan_wigner(m, QubitLayout(6))));
  PauliSum bad(2);
  bad.add(1.0, "XI");
  EXPECT_FALSE(conserves_particle_number(bad));
}

TEST(Pauli, TermCountLinearInSites) {
  std::vector<std::size_t> counts;
  for (int ny = 4; ny <= 7; ++ny) {
    const auto m = realize_model(LatticeGeometry(1, ny), 1.0, 2.0, 0.0, 0.0, 0);
    counts.push_back(jordan_wigner(m, QubitLayout(ny)).size());
  }
  for (std::size_t i = 2; i < counts.size(); ++i) EXPECT_EQ(counts[i] - counts[i - 1], counts[1] - counts[0]);
}

TEST(Pauli, CompiledApplyMatchesDense) {
  const auto m = realize_model(LatticeGeometry(2, 2), 1.0, 3.0, 0.5, 0.5, 2);
  const auto h = jordan_wigner(m, QubitLayout(4));
  const auto psi = oracle::random_state(8, 3);
  Eigen::VectorXcd out(psi.size());
  apply(compile(h), {psi.data(), static_cast<std::size_t>(psi.size())},
        {out.data(), static_cast<std::size_t>(out.size())});
  const Eigen::VectorXcd ref = dense_matrix(h) * psi;
  EXPECT_LT((out - ref).norm(), 1e-12);
  const cplx e = expectation(compile(h), {psi.data(), static_cast<std::size_t>(psi.size())});
  EXPECT_NEAR(e.real(), psi.dot(ref).real(), 1e-12);
  EXPECT_NEAR(e.imag(), 0.0, 1e-12);
}
