#include <gtest/gtest.h>

#include <cmath>

#include "generators.hpp"
#include "vmot/certificate.hpp"
#include "vmot/entropic.hpp"
#include "vmot/error.hpp"
#include "vmot/exact_solver.hpp"

using namespace vmot;
namespace gen = vmot::testing;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::kIo;
}

}  // namespace

TEST(Entropic, UniqueCouplingInstancesConvergeToExactValue) {
  // Both hand instances have a single martingale coupling, so every
  // temperature reaches it.
  for (const auto& sys : {gen::inst_a_system(), gen::inst_b_system()}) {
    const VmotInstance inst = gen::make(sys, "abs(x[2][1]-x[1][1])");
    const double exact = solve_exact(assemble_lp(inst), Direction::kMin).value;
    EntropicOptions opt;
    opt.epsilon = 0.1;
    const EntropicResult r = solve_entropic(inst, opt);
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.value, exact, 1e-5);
    EXPECT_LE(r.marginal_violation, 1e-6);
    EXPECT_LE(r.martingale_violation, 1e-6);
    EXPECT_EQ(r.certificate_raw.source, "entropic");
    EXPECT_EQ(r.certificate_raw.epsilon, std::optional<double>(0.1));
  }
}

TEST(Entropic, RawCertificateIsNearlySubhedging) {
  gen::Rng rng(21);
  for (const auto& c : gen::acceptance_cases(17, 6)) {
    for (Direction dir : {Direction::kMin, Direction::kMax}) {
      const VmotInstance inst = gen::make(c.system, c.payoff, dir);
      EntropicOptions opt;
      opt.epsilon = 0.05;
      const EntropicResult r = solve_entropic(inst, opt);
      ASSERT_TRUE(r.converged) << c.payoff;
      // payout - s c = eps log pi <= eps log(total mass), and the mass is one
      // up to the stopping tolerance.
      const HedgeViolation hv = worst_hedge_violation(r.certificate_raw, inst);
      EXPECT_LE(hv.amount, 1e-5) << c.payoff;
      // Weak duality against the exact value.
      const double exact = solve_exact(assemble_lp(inst), dir).value;
      const double dual = dual_value(r.certificate_raw, inst.system());
      EXPECT_LE(sign_of(dir) * (dual - exact), 1e-5);
      // The entropic primal value is within eps log n of the exact value.
      const double slack = opt.epsilon * std::log(static_cast<double>(inst.grid().path_count()));
      EXPECT_LE(std::abs(r.value - exact), slack + 1e-5) << c.payoff;
      EXPECT_GE(sign_of(dir) * (r.value - exact), -1e-5);
    }
  }
}

TEST(Entropic, ScheduleIsWarmStartedAndImproves) {
  const VmotInstance inst =
      gen::make(gen::chain_system(), "max(x[1][1],x[2][1],x[3][1])", Direction::kMax);
  const double exact = solve_exact(assemble_lp(inst), Direction::kMax).value;
  const std::vector<double> eps{0.5, 0.1, 0.02};
  const auto stages = epsilon_schedule(inst, eps);
  ASSERT_EQ(stages.size(), 3u);
  double prev = 1e300;
  for (const ScheduleStage& s : stages) {
    EXPECT_TRUE(s.result.converged);
    const double err = std::abs(s.value - exact);
    EXPECT_LE(err, prev + 1e-6);
    prev = err;
  }
  EXPECT_LE(prev, 0.05);
}

TEST(Entropic, ViolationHistoryIsRecorded) {
  gen::Rng rng(3);
  const VmotInstance inst = gen::make(gen::random_system(rng, 2, {2, 4}),
                                          "abs(x[2][1]-x[2][2])");
  const EntropicResult r = solve_entropic(inst);
  EXPECT_EQ(r.history.size(), r.iterations);
  EXPECT_LE(r.history.back(), 1e-6);
  EXPECT_LE(r.violation_increases, r.iterations);
}

TEST(Entropic, InvalidParameters) {
  const VmotInstance inst = gen::make(gen::inst_a_system(), "x[2][1]");
  EntropicOptions opt;
  opt.epsilon = 0.0;
  EXPECT_EQ(kind_of([&] { solve_entropic(inst, opt); }), ErrorKind::kInvalidSchedule);
  EXPECT_EQ(kind_of([&] { epsilon_schedule(inst, std::vector<double>{}); }),
            ErrorKind::kInvalidSchedule);
  EXPECT_EQ(kind_of([&] { epsilon_schedule(inst, std::vector<double>{0.1, 0.2}); }),
            ErrorKind::kInvalidSchedule);
  EXPECT_EQ(kind_of([&] { epsilon_schedule(inst, std::vector<double>{0.1, -0.01}); }),
            ErrorKind::kInvalidSchedule);
}

TEST(Entropic, IterationCapReportsNotConverged) {
  gen::Rng rng(9);
  const VmotInstance inst = gen::make(gen::random_system(rng, 1, {3, 6}),
                                          "abs(x[2][1]-x[1][1])");
  EntropicOptions opt;
  opt.epsilon = 0.01;
  opt.max_iter = 2;
  const EntropicResult r = solve_entropic(inst, opt);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.iterations, 2u);
}
