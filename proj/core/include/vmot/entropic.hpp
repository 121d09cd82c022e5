#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "vmot/certificate.hpp"
#include "vmot/coupling.hpp"
#include "vmot/instance.hpp"

namespace vmot {

struct EntropicOptions {
  double epsilon = 0.05;
  std::size_t max_iter = 200'000;  // full sweeps
  double tol = 1e-6;
  // Sweeps without a 0.1% improvement of the best violation before Stalled.
  std::size_t stall_window = 5'000;
  // Starting potentials, in the certificate convention of the instance's
  // direction. Zero when absent.
  std::optional<DualCertificate> initial;
};

// The Gibbs coupling pi(x) = exp((payout(x) - s c(x)) / eps) with s = +1 for
// MIN and -1 for MAX, payout built from the internal subhedging potentials.
// Every projection keeps the exponent exactly equal to that expression, so the
// raw certificate satisfies payout - c = eps log pi <= 0 on every path up to
// the residual mass error.
struct EntropicResult {
  double value = 0.0;  // <c, pi_eps>, entropy term excluded
  Coupling coupling;
  DualCertificate certificate_raw;
  double epsilon = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  double marginal_violation = 0.0;    // max total variation over (t, i)
  double martingale_violation = 0.0;  // max conditional-mean residual
  // Violation after each sweep, and the number of sweeps where it went up.
  std::vector<double> history;
  std::size_t violation_increases = 0;
};

// Log-domain Bregman projections. Sweep: marginal constraints (t, then i
// ascending, closed form), then martingale blocks (t ascending, partial paths
// in index order, assets ascending; a safeguarded Newton solve for each
// block's multiplier). Stops when the larger of the marginal total variation
// and the martingale residual (on partial paths with mass >= tol) drops below
// tol, or after max_iter sweeps with converged = false.
// Throws Error(kInvalidSchedule) for epsilon <= 0, Error(kStalled) and
// Error(kNumericUnderflow).
EntropicResult solve_entropic(const VmotInstance& instance, const EntropicOptions& options = {});

struct ScheduleStage {
  double epsilon = 0.0;
  double value = 0.0;
  EntropicResult result;
};

// Warm-started sweep over a strictly decreasing list of positive epsilons.
// Throws Error(kInvalidSchedule) for an empty or non-decreasing list.
std::vector<ScheduleStage> epsilon_schedule(const VmotInstance& instance,
                                            std::span<const double> eps_list,
                                            const EntropicOptions& options = {});

}  // namespace vmot
