#include <gtest/gtest.h>

#include <cmath>

#include "generators.hpp"
#include "vmot/dual_recovery.hpp"
#include "vmot/error.hpp"
#include "vmot/exact_solver.hpp"
#include "vmot/verify.hpp"

using namespace vmot;
namespace gen = vmot::testing;

namespace {

struct Solved {
  VmotInstance instance;
  ExactSolution solution;
  DualCertificate certificate;
};

Solved solve(const VmotInstance& inst) {
  const LpTableau tab = assemble_lp(inst);
  ExactSolution sol = solve_exact(tab, inst.direction());
  DualCertificate cert = certificate_from_lp(tab, sol, inst);
  return {inst, std::move(sol), std::move(cert)};
}

}  // namespace

TEST(CheckDuality, ExactPairPasses) {
  for (Direction dir : {Direction::kMin, Direction::kMax}) {
    const Solved s =
        solve(gen::make(gen::chain_system(), "max(x[1][1],x[2][1],x[3][1])", dir));
    const SolveReport rep = check_duality(s.instance, s.solution.coupling, s.certificate);
    EXPECT_TRUE(rep.passed);
    EXPECT_TRUE(rep.weak_duality_ok);
    EXPECT_LE(rep.gap, 1e-9);
    EXPECT_NEAR(rep.primal_value, s.solution.value, 1e-12);
    EXPECT_EQ(rep.support_size, s.solution.coupling.support_size());
    EXPECT_LE(rep.worst_hedge.amount, 1e-9);
  }
}

TEST(CheckDuality, DetectsGapAndWeakDualityBreach) {
  const Solved s = solve(gen::make(gen::inst_b_system(), "abs(x[2][1]-x[1][1])"));
  DualCertificate low = s.certificate;
  for (double& v : low.phi[0][0]) v -= 0.01;
  const SolveReport gap = check_duality(s.instance, s.solution.coupling, low);
  EXPECT_TRUE(gap.weak_duality_ok);
  EXPECT_FALSE(gap.passed);
  EXPECT_NEAR(gap.gap, 0.01, 1e-12);

  DualCertificate high = s.certificate;
  for (double& v : high.phi[0][0]) v += 0.01;
  EXPECT_FALSE(check_duality(s.instance, s.solution.coupling, high).weak_duality_ok);
}

TEST(CheckDuality, MismatchedInputs) {
  const Solved s = solve(gen::make(gen::inst_b_system(), "abs(x[2][1]-x[1][1])"));
  const auto kind = [&](const Coupling& pi, const DualCertificate& cert) {
    try {
      check_duality(s.instance, pi, cert);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::kIo;
  };
  DualCertificate wrong_dir = s.certificate;
  wrong_dir.direction = Direction::kMax;
  EXPECT_EQ(kind(s.solution.coupling, wrong_dir), ErrorKind::kMismatchedInstance);
  EXPECT_EQ(kind(Coupling({{99, 1.0}}), s.certificate), ErrorKind::kMismatchedInstance);
  DualCertificate short_h = s.certificate;
  short_h.h.clear();
  EXPECT_EQ(kind(s.solution.coupling, short_h), ErrorKind::kMismatchedInstance);
}

TEST(CheckReplication, HoldsOnEveryOptimizer) {
  for (const auto& c : gen::acceptance_cases(83, 12)) {
    for (Direction dir : {Direction::kMin, Direction::kMax}) {
      const VmotInstance inst = gen::make(c.system, c.payoff, dir);
      const LpTableau tab = assemble_lp(inst);
      const ExactSolution sol = solve_exact(tab, dir);
      const DualCertificate cert = certificate_from_lp(tab, sol, inst);
      std::vector<Coupling> all{sol.coupling};
      for (auto& alt : alternate_optima(tab, sol, 3, 2)) all.push_back(alt);
      for (const Coupling& pi : all) {
        const ReplicationReport rep = check_replication(inst, pi, cert);
        EXPECT_TRUE(rep.passed()) << c.payoff << " residual " << rep.max_support_residual;
        EXPECT_EQ(rep.residuals.size(), rep.support.size());
      }
    }
  }
}

TEST(CheckReplication, FlagsSlackOnSupport) {
  // Lowering one leg keeps the certificate subhedging but breaks equality on
  // the support.
  const Solved s = solve(gen::make(gen::inst_b_system(), "abs(x[2][1]-x[1][1])"));
  DualCertificate cert = s.certificate;
  cert.phi[1][0][0] -= 0.5;  // payout drops on paths ending at -2
  const ReplicationReport rep = check_replication(s.instance, s.solution.coupling, cert);
  EXPECT_FALSE(rep.support_ok);
  EXPECT_TRUE(rep.one_sided_ok);
  EXPECT_NEAR(rep.max_support_residual, 0.5, 1e-12);
}

TEST(EntropicGapTolerance, GrowsWithEpsilon) {
  EXPECT_LT(entropic_gap_tolerance(0.01, 100), entropic_gap_tolerance(0.1, 100));
  EXPECT_GE(entropic_gap_tolerance(0.1, 2), 0.2);
}

TEST(CrossValidate, AllRoutesAgree) {
  gen::Rng rng(89);
  for (const auto& c : gen::acceptance_cases(89, 6)) {
    const VmotInstance inst = gen::make(c.system, c.payoff);
    const CrossValidation cv = cross_validate(inst);
    EXPECT_TRUE(cv.passed()) << c.payoff << ": "
                             << (cv.failures.empty() ? "" : cv.failures.front());
    EXPECT_TRUE(cv.bracket_ok);
    EXPECT_LE(cv.min.exact_value, cv.max.exact_value + 1e-12);
    EXPECT_EQ(cv.min.entropic.size(), 3u);
    EXPECT_GE(cv.min.optimizers_checked, 1u);
    EXPECT_TRUE(cv.min.envelope_route.has_value());
  }
}
