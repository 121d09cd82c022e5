#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vmot/certificate.hpp"
#include "vmot/coupling.hpp"
#include "vmot/entropic.hpp"
#include "vmot/exact_solver.hpp"
#include "vmot/instance.hpp"

namespace vmot {

inline constexpr double kExactGapTolerance = 1e-6;
inline constexpr double kWeakDualityTolerance = 1e-7;

// Gap allowance for an entropic (coupling, raw certificate) pair at
// temperature eps: the entropy term is at most eps * log(paths).
double entropic_gap_tolerance(double epsilon, std::size_t path_count);

struct SolveReport {
  double primal_value = 0.0;  // <c, pi>
  double dual_value = 0.0;    // mu(phi)
  double gap = 0.0;           // |P - D|
  Direction direction = Direction::kMin;
  std::string source;
  double gap_tol = kExactGapTolerance;
  bool weak_duality_ok = false;  // D <= P + 1e-7 (MIN), reversed for MAX
  bool passed = false;           // weak duality and gap <= gap_tol
  HedgeViolation worst_hedge;    // sign * (payout - c), positive = violated
  std::size_t support_size = 0;
  double worst_support_residual = 0.0;
  double seconds = 0.0;  // filled in by callers that time the solve
};

// Throws Error(kMismatchedInstance) when the certificate or coupling do not
// fit the instance (shape, path range or direction).
SolveReport check_duality(const VmotInstance& instance, const Coupling& coupling,
                          const DualCertificate& cert, double gap_tol = kExactGapTolerance,
                          double mass_floor = 1e-10);

struct ReplicationOptions {
  double mass_floor = 1e-10;
  double rep_tol = 1e-6;    // |r| on the support
  double hedge_tol = 1e-7;  // one-sided bound on every grid path
};

struct ReplicationReport {
  // r(x) = payout(x) - c(x) on the paths carrying more than mass_floor.
  std::vector<Coupling::Atom> support;
  std::vector<double> residuals;
  double max_support_residual = 0.0;
  std::size_t worst_support_path = 0;
  HedgeViolation worst_one_sided;
  ReplicationOptions options;
  bool support_ok = false;
  bool one_sided_ok = false;
  bool passed() const noexcept { return support_ok && one_sided_ok; }
};

ReplicationReport check_replication(const VmotInstance& instance, const Coupling& coupling,
                                    const DualCertificate& cert,
                                    const ReplicationOptions& options = {});

struct CrossValidateOptions {
  std::vector<double> schedule{0.5, 0.1, 0.02};
  EntropicOptions entropic{};
  ExactOptions exact{};
  ReplicationOptions replication{};
  std::uint64_t seed = 1;
  std::size_t alternate_optima = 2;
};

struct RouteSummary {
  std::string name;
  double value = 0.0;
  HedgeViolation worst_hedge;
  double worst_support_residual = 0.0;
  bool ok = false;
};

struct DirectionSummary {
  Direction direction = Direction::kMin;
  double exact_value = 0.0;
  std::size_t optimizers_checked = 0;
  std::vector<ScheduleStage> entropic;
  RouteSummary lp_route;
  std::optional<RouteSummary> envelope_route;  // absent for d >= 3
  std::vector<std::string> failures;
};

struct CrossValidation {
  DirectionSummary min;
  DirectionSummary max;
  bool bracket_ok = false;  // entropic values inside [MIN, MAX]
  std::vector<std::string> failures;
  bool passed() const noexcept {
    return failures.empty() && min.failures.empty() && max.failures.empty();
  }
};

// Exact solve in both directions, the entropic schedule, the LP-dual and the
// envelope certificate routes, with replication checked on every optimizer
// found (the simplex optimum and its alternates). Errors from a route are
// rethrown with the route named in the message.
CrossValidation cross_validate(const VmotInstance& instance,
                               const CrossValidateOptions& options = {});

}  // namespace vmot
