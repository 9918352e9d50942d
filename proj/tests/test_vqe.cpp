#include <cmath>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "tnvqe/ed.hpp"
#include "tnvqe/errors.hpp"
#include "tnvqe/observables.hpp"
#include "tnvqe/rng.hpp"
#include "tnvqe/statevector.hpp"
#include "tnvqe/vqe.hpp"

using namespace tnvqe;

namespace {

HubbardModel model(int nx, int ny, double u, double v = 0.0, double d = 0.0) {
  return realize_model(LatticeGeometry(nx, ny), 1.0, u, v, d, 0);
}

VqeProblem problem(const HubbardModel& m, AnsatzFamily family, int layers, LossKind loss, Backend backend,
                   std::optional<MpsState> reference = std::nullopt) {
  const QubitLayout layout(m.geometry.n_sites());
  return VqeProblem(build_ansatz(family, m.geometry, layers), checkerboard_occupation(m.geometry, layout),
                    jordan_wigner(m, layout), loss, std::move(reference), backend, 0, 0.0);
}

MpsState ground_state(const HubbardModel& m) {
  return exact_ground_state(m).to_mps(full_bond_dimension(m.geometry.n_qubits()), 0.0);
}

OptimizationConfig quick_config(int restarts) {
  OptimizationConfig c;
  c.restarts = restarts;
  c.max_steps = 300;
  return c;
}

}  // namespace

TEST(Vqe, OverlapLossBookkeeping) {
  EXPECT_EQ(overlap_loss_from_fidelity(0.99), std::log10(1.0 - 0.99));
  EXPECT_NEAR(overlap_loss_from_fidelity(0.99), -2.0, 1e-14);
  EXPECT_EQ(overlap_loss_from_fidelity(0.0), 0.0);
  EXPECT_EQ(overlap_loss_from_fidelity(1.0), -16.0);
}

TEST(Vqe, EnergyGradientMatchesFiniteDifference) {
  for (Backend b : {Backend::Dense, Backend::Mps}) {
    for (AnsatzFamily f : {AnsatzFamily::NP, AnsatzFamily::EP}) {
      const auto p = problem(model(1, 3, 2.0, 0.3, 0.4), f, 1, LossKind::Energy, b);
      for (std::uint64_t seed : {1, 2, 3}) {
        const auto x = oracle::random_params(p.circuit().n_parameters(), seed, 2.0);
        Eigen::VectorXd g;
        p.loss_and_gradient(x, g);
        EXPECT_TRUE(gradients_agree(g, p.finite_difference_gradient(x))) << to_string(f);
      }
    }
  }
}

TEST(Vqe, OverlapGradientMatchesFiniteDifference) {
  const auto m = model(1, 3, 2.0);
  for (Backend b : {Backend::Dense, Backend::Mps}) {
    const auto p = problem(m, AnsatzFamily::NP, 1, LossKind::Overlap, b, ground_state(m));
    const auto x = oracle::random_params(p.circuit().n_parameters(), 9, 2.0);
    Eigen::VectorXd g;
    p.loss_and_gradient(x, g);
    EXPECT_TRUE(gradients_agree(g, p.finite_difference_gradient(x)));
  }
}

TEST(Vqe, UccsdGradientMatchesFiniteDifference) {
  const auto m = model(1, 3, 4.0);
  const QubitLayout layout(3);
  const auto occ = checkerboard_occupation(m.geometry, layout);
  const VqeProblem p(build_uccsd_ansatz(m.geometry, occ), occ, jordan_wigner(m, layout), LossKind::Energy,
                     std::nullopt, Backend::Dense, 0, 0.0);
  const auto x = oracle::random_params(p.circuit().n_parameters(), 4, 1.0);
  Eigen::VectorXd g;
  p.loss_and_gradient(x, g);
  EXPECT_TRUE(gradients_agree(g, p.finite_difference_gradient(x)));
}

TEST(Vqe, OverlapClampHasZeroGradient) {
  // Reference equal to the circuit output at theta = 0.
  const auto m = model(1, 2, 2.0);
  const auto occ = checkerboard_occupation(m.geometry, QubitLayout(2));
  const auto ref = MpsState::product_state(occ, 4);
  const auto p = problem(m, AnsatzFamily::NP, 1, LossKind::Overlap, Backend::Dense, ref);
  Eigen::VectorXd g;
  const double f = p.loss_and_gradient(Eigen::VectorXd::Zero(p.circuit().n_parameters()), g);
  EXPECT_EQ(f, -16.0);
  EXPECT_EQ(g.cwiseAbs().maxCoeff(), 0.0);
  // orthogonal reference
  const auto far = MpsState::product_state(occupation_from_string("0110"), 4);
  const auto q = problem(m, AnsatzFamily::NP, 1, LossKind::Overlap, Backend::Dense, far);
  EXPECT_NEAR(q.loss(Eigen::VectorXd::Zero(q.circuit().n_parameters())), 0.0, 1e-15);
}

TEST(Vqe, OverlapRequiresReference) {
  EXPECT_THROW(problem(model(1, 2, 2.0), AnsatzFamily::NP, 1, LossKind::Overlap, Backend::Dense), DomainError);
}

TEST(Vqe, BackendsAgree) {
  const auto m = model(2, 2, 4.0);
  const auto d = problem(m, AnsatzFamily::NP, 2, LossKind::Energy, Backend::Dense);
  const auto s = problem(m, AnsatzFamily::NP, 2, LossKind::Energy, Backend::Mps);
  EXPECT_TRUE(d.dense());
  EXPECT_FALSE(s.dense());
  const auto x = oracle::random_params(d.circuit().n_parameters(), 6, 1.5);
  EXPECT_NEAR(d.energy(x), s.energy(x), 1e-10);
  Eigen::VectorXd gd, gs;
  d.loss_and_gradient(x, gd);
  s.loss_and_gradient(x, gs);
  EXPECT_LT((gd - gs).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Vqe, VariationalBound) {
  const auto m = model(2, 2, 2.0, 0.4, 0.5);
  const double e0 = exact_ground_state(m).energy;
  for (AnsatzFamily f : {AnsatzFamily::NP, AnsatzFamily::EP}) {
    const auto p = problem(m, f, 2, LossKind::Energy, Backend::Dense);
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      EXPECT_GE(p.energy(oracle::random_params(p.circuit().n_parameters(), seed, 3.0)), e0 - 1e-9);
    }
  }
}

TEST(Vqe, DimerConvergesAtTwoLayers) {
  const auto r = run_vqe(model(1, 2, 2.0), AnsatzFamily::NP, 2, quick_config(3));
  ASSERT_TRUE(r.valid);
  EXPECT_NEAR(r.best_energy, (2.0 - std::sqrt(20.0)) / 2, 1e-6);
  EXPECT_EQ(r.n_parameters, 20);
  for (const auto& rr : r.restarts) EXPECT_GE(rr.final_energy, r.best_energy);
}

TEST(Vqe, GradientVanishesAtOptimum) {
  const auto m = model(1, 2, 2.0);
  auto c = quick_config(2);
  c.energy_tol = 1e-14;
  const auto r = run_vqe(m, AnsatzFamily::NP, 2, c);
  const auto p = problem(m, AnsatzFamily::NP, 2, LossKind::Energy, Backend::Dense);
  Eigen::VectorXd g;
  p.loss_and_gradient(r.best_params, g);
  EXPECT_LT(g.cwiseAbs().maxCoeff(), 1e-5);
}

TEST(Vqe, DeterministicForFixedSeed) {
  auto c = quick_config(2);
  c.master_seed = 42;
  const auto a = run_vqe(model(1, 3, 4.0), AnsatzFamily::EP, 1, c);
  const auto b = run_vqe(model(1, 3, 4.0), AnsatzFamily::EP, 1, c);
  ASSERT_EQ(a.restarts.size(), b.restarts.size());
  for (std::size_t i = 0; i < a.restarts.size(); ++i) {
    EXPECT_EQ(a.restarts[i].trace, b.restarts[i].trace);
    EXPECT_EQ(a.restarts[i].params, b.restarts[i].params);
    EXPECT_EQ(a.restarts[i].seed, derive_seed(42, i));
  }
}

// The U = 0 stage on its own, converged with tight tolerances from the same
// small-variance start the driver uses.
TEST(Vqe, WarmStageReachesFreeFermionEnergy) {
  for (int ny = 2; ny <= 6; ++ny) {
    const auto m = model(1, ny, 4.0);
    const QubitLayout layout(ny);
    const auto [nu, nd] = spin_sector(checkerboard_occupation(m.geometry, layout), layout);
    const double want = oracle::free_fermion_energy(ny, oracle::square_bonds(1, ny), nu, nd);
    const auto p = problem(m.non_interacting(), AnsatzFamily::NP, std::max(2, ny / 2 + 1), LossKind::Energy,
                           Backend::Dense);
    LbfgsOptions opts;
    opts.energy_tol = 1e-13;
    opts.grad_tol = 1e-8;
    opts.max_steps = 2000;
    const Objective f = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) { return p.loss_and_gradient(x, g); };
    double best = 0.0;
    for (std::uint64_t r = 0; r < 3 && best > want + 1e-6; ++r) {
      GaussianSource src(derive_seed(0, r));
      Eigen::VectorXd x0(p.circuit().n_parameters());
      for (auto& v : x0) v = std::sqrt(1e-5) * src.normal();
      best = std::min(best, lbfgs_minimize(f, x0, opts).f);
    }
    EXPECT_NEAR(best, want, 1e-6) << "1x" << ny;
  }
}

TEST(Vqe, DriverRunsWarmStage) {
  const auto m = model(1, 3, 4.0);
  const auto r = run_vqe(m, AnsatzFamily::NP, 2, quick_config(2));
  const double want = oracle::free_fermion_energy(3, oracle::square_bonds(1, 3), 2, 1);
  double best = 0.0;
  for (const auto& rr : r.restarts) {
    ASSERT_TRUE(rr.warm_energy.has_value());
    EXPECT_GE(*rr.warm_energy, want - 1e-9);
    best = std::min(best, *rr.warm_energy);
  }
  EXPECT_NEAR(best, want, 1e-4);
  auto c = quick_config(1);
  c.warm_start = false;
  EXPECT_FALSE(run_vqe(m, AnsatzFamily::NP, 1, c).restarts[0].warm_energy.has_value());
}

TEST(Vqe, OverlapRunRecordsEnergyAndFidelity) {
  const auto m = model(1, 2, 8.0);
  auto c = quick_config(3);
  c.loss = LossKind::Overlap;
  const auto r = run_vqe(m, AnsatzFamily::NP, 3, c, ground_state(m));
  ASSERT_TRUE(r.valid);
  EXPECT_GT(*r.restarts[r.best_index].fidelity, 0.999);
  for (const auto& rr : r.restarts) {
    ASSERT_TRUE(rr.fidelity.has_value());
    EXPECT_GE(rr.final_energy, (8.0 - std::sqrt(80.0)) / 2 - 1e-9);
  }
}
