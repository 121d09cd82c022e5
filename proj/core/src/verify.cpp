#include "vmot/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "vmot/dual_recovery.hpp"
#include "vmot/error.hpp"

namespace vmot {
namespace {

void check_match(const VmotInstance& instance, const Coupling& coupling,
                 const DualCertificate& cert) {
  check_certificate_shape(cert, instance.grid());
  if (cert.direction != instance.direction()) {
    throw Error(ErrorKind::kMismatchedInstance,
                std::string("certificate is for ") + to_string(cert.direction) +
                    " but the instance asks for " + to_string(instance.direction()));
  }
  if (!coupling.atoms().empty() &&
      coupling.atoms().back().first >= instance.grid().path_count()) {
    throw Error(ErrorKind::kMismatchedInstance, "coupling references paths off the grid");
  }
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

template <typename F>
auto with_provenance(const std::string& route, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.kind(), route + ": " + e.what());
  }
}

}  // namespace

double entropic_gap_tolerance(double epsilon, std::size_t path_count) {
  return epsilon * std::max(2.0, std::log(static_cast<double>(path_count))) + 1e-6;
}

SolveReport check_duality(const VmotInstance& instance, const Coupling& coupling,
                          const DualCertificate& cert, double gap_tol, double mass_floor) {
  check_match(instance, coupling, cert);
  SolveReport rep;
  rep.direction = cert.direction;
  rep.source = cert.source;
  rep.gap_tol = gap_tol;
  rep.primal_value = expected_cost(instance, coupling);
  rep.dual_value = dual_value(cert, instance.system());
  rep.gap = std::abs(rep.primal_value - rep.dual_value);
  const double s = sign_of(cert.direction);
  rep.weak_duality_ok = s * (rep.dual_value - rep.primal_value) <= kWeakDualityTolerance;
  rep.passed = rep.weak_duality_ok && rep.gap <= gap_tol;
  rep.worst_hedge = worst_hedge_violation(cert, instance);

  const auto c = instance.costs();
  for (const auto& [p, m] : coupling.atoms()) {
    if (m <= mass_floor) continue;
    ++rep.support_size;
    rep.worst_support_residual = std::max(
        rep.worst_support_residual, std::abs(payout(cert, instance.grid(), p) - c[p]));
  }
  return rep;
}

ReplicationReport check_replication(const VmotInstance& instance, const Coupling& coupling,
                                    const DualCertificate& cert,
                                    const ReplicationOptions& options) {
  check_match(instance, coupling, cert);
  ReplicationReport rep;
  rep.options = options;
  const auto c = instance.costs();
  for (const auto& [p, m] : coupling.atoms()) {
    if (m <= options.mass_floor) continue;
    const double r = payout(cert, instance.grid(), p) - c[p];
    rep.support.emplace_back(p, m);
    rep.residuals.push_back(r);
    if (std::abs(r) > rep.max_support_residual || rep.support.size() == 1) {
      rep.max_support_residual = std::abs(r);
      rep.worst_support_path = p;
    }
  }
  rep.worst_one_sided = worst_hedge_violation(cert, instance);
  rep.support_ok = rep.max_support_residual <= options.rep_tol;
  rep.one_sided_ok = rep.worst_one_sided.amount <= options.hedge_tol;
  return rep;
}

CrossValidation cross_validate(const VmotInstance& base, const CrossValidateOptions& options) {
  CrossValidation out;
  const LpTableau tableau =
      with_provenance("exact LP assembly", [&] { return assemble_lp(base, options.exact); });
  const double log_n = std::log(static_cast<double>(base.grid().path_count()));

  for (Direction dir : {Direction::kMin, Direction::kMax}) {
    const VmotInstance inst = base.with_direction(dir);
    const std::string tag = to_string(dir);
    DirectionSummary& sum = dir == Direction::kMin ? out.min : out.max;
    sum.direction = dir;

    const ExactSolution sol = with_provenance("exact " + tag, [&] {
      return solve_exact(tableau, dir, options.exact.simplex);
    });
    sum.exact_value = sol.value;
    std::vector<Coupling> optimizers{sol.coupling};
    for (Coupling& c : alternate_optima(tableau, sol, options.alternate_optima, options.seed)) {
      optimizers.push_back(std::move(c));
    }
    sum.optimizers_checked = optimizers.size();

    const auto check_route = [&](RouteSummary& route, const DualCertificate& cert) {
      route.value = dual_value(cert, inst.system());
      route.worst_hedge = worst_hedge_violation(cert, inst);
      route.ok = route.worst_hedge.amount <= options.replication.hedge_tol &&
                 std::abs(route.value - sol.value) <= kWeakDualityTolerance;
      for (const Coupling& pi : optimizers) {
        const ReplicationReport rep = check_replication(inst, pi, cert, options.replication);
        route.worst_support_residual =
            std::max(route.worst_support_residual, rep.max_support_residual);
        route.ok = route.ok && rep.passed();
      }
      if (!route.ok) {
        sum.failures.push_back(tag + " " + route.name + ": value " + fmt(route.value) +
                               ", worst hedge violation " + fmt(route.worst_hedge.amount) +
                               ", worst support residual " +
                               fmt(route.worst_support_residual));
      }
    };

    const DualCertificate lp_cert = with_provenance(
        "LP certificate " + tag, [&] { return certificate_from_lp(tableau, sol, inst); });
    sum.lp_route.name = "lp-duals";
    check_route(sum.lp_route, lp_cert);

    if (inst.assets() <= 2) {
      const EnvelopeRecovery env = with_provenance(
          "envelope " + tag, [&] { return recover_h_by_envelope(lp_cert, inst); });
      RouteSummary route;
      route.name = "envelope";
      check_route(route, env.certificate);
      sum.envelope_route = route;
    }

    sum.entropic = with_provenance("entropic " + tag, [&] {
      return epsilon_schedule(inst, options.schedule, options.entropic);
    });
    const ScheduleStage& last = sum.entropic.back();
    if (!last.result.converged) {
      sum.failures.push_back(tag + " entropic eps=" + fmt(last.epsilon) +
                             " did not converge in " +
                             std::to_string(last.result.iterations) + " sweeps");
    }
    const double bias = std::abs(last.value - sol.value);
    if (bias > last.epsilon * log_n + 10 * options.entropic.tol) {
      sum.failures.push_back(tag + " entropic eps=" + fmt(last.epsilon) + " value " +
                             fmt(last.value) + " is " + fmt(bias) +
                             " from the exact value, beyond eps*log(paths)");
    }
  }

  const double slack = 10 * options.entropic.tol;
  out.bracket_ok = true;
  for (const DirectionSummary* s : {&out.min, &out.max}) {
    for (const ScheduleStage& st : s->entropic) {
      if (st.value < out.min.exact_value - slack || st.value > out.max.exact_value + slack) {
        out.bracket_ok = false;
        out.failures.push_back(std::string(to_string(s->direction)) + " entropic eps=" +
                               fmt(st.epsilon) + " value " + fmt(st.value) +
                               " escapes the exact bracket");
      }
    }
  }
  return out;
}

}  // namespace vmot
