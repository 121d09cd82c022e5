#include "vmot/entropic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "vmot/error.hpp"

namespace vmot {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Tilt {
  double mean = 0.0;      // E[delta] under the tilted law
  double variance = 0.0;  // its derivative in lambda
};

class Solver {
 public:
  Solver(const VmotInstance& instance, const EntropicOptions& options)
      : inst_(instance),
        grid_(instance.grid()),
        opt_(options),
        s_(sign_of(instance.direction())),
        d_(grid_.assets()),
        n_t_(grid_.periods()) {
    pot_ = options.initial ? *options.initial : zero_certificate(grid_, instance.direction());
    check_certificate_shape(pot_, grid_);
    if (s_ < 0) flip(pot_);
    const auto c = instance.costs();
    log_pi_.resize(grid_.path_count());
    for (std::size_t p = 0; p < log_pi_.size(); ++p) {
      log_pi_[p] = (payout(pot_, grid_, p) - s_ * c[p]) / opt_.epsilon;
    }
    path_values_.resize(grid_.path_count() * n_t_ * d_);
    for (std::size_t p = 0; p < grid_.path_count(); ++p) {
      grid_.path_values(p, std::span<double>(path_values_.data() + p * n_t_ * d_, n_t_ * d_));
    }
  }

  EntropicResult run() {
    EntropicResult res;
    res.epsilon = opt_.epsilon;
    double best = std::numeric_limits<double>::infinity();
    std::size_t last_improvement = 0;
    double previous = std::numeric_limits<double>::infinity();
    for (std::size_t sweep = 1; sweep <= opt_.max_iter; ++sweep) {
      for (std::size_t t = 0; t < n_t_; ++t) {
        for (std::size_t i = 0; i < d_; ++i) project_marginal(t, i);
      }
      for (std::size_t t = 0; t + 1 < n_t_; ++t) {
        for (std::size_t g = 0; g < grid_.prefix_count(t + 1); ++g) {
          for (std::size_t i = 0; i < d_; ++i) project_martingale(t, g, i);
        }
      }
      measure(res);
      const double viol = std::max(res.marginal_violation, res.martingale_violation);
      if (!std::isfinite(viol)) {
        throw Error(ErrorKind::kNumericUnderflow,
                    "entropic iterate lost finiteness; increase epsilon");
      }
      res.history.push_back(viol);
      if (viol > previous) ++res.violation_increases;
      previous = viol;
      res.iterations = sweep;
      if (viol < opt_.tol) {
        res.converged = true;
        break;
      }
      if (viol < best * (1.0 - 1e-3)) {
        best = viol;
        last_improvement = sweep;
      } else if (sweep - last_improvement > opt_.stall_window) {
        std::ostringstream os;
        os << "entropic iteration stalled at violation " << viol << " after " << sweep
           << " sweeps (epsilon " << opt_.epsilon << ")";
        throw Error(ErrorKind::kStalled, os.str());
      }
    }

    std::vector<Coupling::Atom> atoms;
    atoms.reserve(log_pi_.size());
    const auto c = inst_.costs();
    double value = 0.0;
    for (std::size_t p = 0; p < log_pi_.size(); ++p) {
      const double m = std::exp(log_pi_[p]);
      value += c[p] * m;
      if (m > 0.0) atoms.emplace_back(p, m);
    }
    res.value = value;
    res.coupling = Coupling(std::move(atoms));
    res.certificate_raw = pot_;
    if (s_ < 0) flip(res.certificate_raw);
    res.certificate_raw.source = "entropic";
    res.certificate_raw.epsilon = opt_.epsilon;
    res.certificate_raw.direction = inst_.direction();
    return res;
  }

 private:
  static void flip(DualCertificate& cert) {
    for (auto& legs : cert.phi) {
      for (auto& leg : legs) {
        for (double& v : leg) v = -v;
      }
    }
    for (auto& table : cert.h) {
      for (double& v : table) v = -v;
    }
  }

  double x(std::size_t p, std::size_t t, std::size_t i) const {
    return path_values_[(p * n_t_ + t) * d_ + i];
  }

  void project_marginal(std::size_t t, std::size_t i) {
    const std::size_t n = grid_.atoms(t, i);
    std::vector<double> top(n, kNegInf);
    for (std::size_t p = 0; p < log_pi_.size(); ++p) {
      double& m = top[grid_.atom_of(p, t, i)];
      m = std::max(m, log_pi_[p]);
    }
    std::vector<double> sum(n, 0.0);
    for (std::size_t p = 0; p < log_pi_.size(); ++p) {
      const std::size_t a = grid_.atom_of(p, t, i);
      sum[a] += std::exp(log_pi_[p] - top[a]);
    }
    const auto w = inst_.system().at(t, i).weights();
    std::vector<double> shift(n);
    for (std::size_t a = 0; a < n; ++a) {
      const double log_mass = top[a] + std::log(sum[a]);
      if (!std::isfinite(log_mass)) {
        throw Error(ErrorKind::kNumericUnderflow,
                    "marginal atom lost all mass; increase epsilon");
      }
      shift[a] = std::log(w[a]) - log_mass;
      pot_.phi[t][i][a] += opt_.epsilon * shift[a];
    }
    for (std::size_t p = 0; p < log_pi_.size(); ++p) log_pi_[p] += shift[grid_.atom_of(p, t, i)];
  }

  Tilt tilt(std::size_t begin, std::size_t end, std::size_t t, std::size_t i,
            double here, double lambda) const {
    double top = kNegInf;
    for (std::size_t p = begin; p < end; ++p) {
      top = std::max(top, log_pi_[p] + lambda * (x(p, t + 1, i) - here));
    }
    double s0 = 0.0;
    double s1 = 0.0;
    double s2 = 0.0;
    for (std::size_t p = begin; p < end; ++p) {
      const double delta = x(p, t + 1, i) - here;
      const double e = std::exp(log_pi_[p] + lambda * delta - top);
      s0 += e;
      s1 += e * delta;
      s2 += e * delta * delta;
    }
    const double mean = s1 / s0;
    return {mean, std::max(s2 / s0 - mean * mean, 0.0)};
  }

  void project_martingale(std::size_t t, std::size_t g, std::size_t i) {
    const std::size_t width = grid_.suffix_size(t + 1);
    const std::size_t begin = g * width;
    const std::size_t end = begin + width;
    const double here = x(begin, t, i);
    double lo_delta = 0.0;
    double hi_delta = 0.0;
    double min_pos = std::numeric_limits<double>::infinity();
    double max_neg = -std::numeric_limits<double>::infinity();
    for (std::size_t p = begin; p < end; ++p) {
      const double delta = x(p, t + 1, i) - here;
      lo_delta = std::min(lo_delta, delta);
      hi_delta = std::max(hi_delta, delta);
      if (delta > 0.0) min_pos = std::min(min_pos, delta);
      if (delta < 0.0) max_neg = std::max(max_neg, delta);
    }
    if (lo_delta == 0.0 && hi_delta == 0.0) return;

    double lambda = 0.0;
    if (lo_delta == 0.0 || hi_delta == 0.0) {
      // One-sided increments: the projection pushes mass onto the
      // zero-increment paths; take a long finite step instead of -inf.
      lambda = lo_delta == 0.0 ? -50.0 / min_pos : 50.0 / -max_neg;
    } else {
      const double span = hi_delta - lo_delta;
      const double scale = 1e-15 * span;
      Tilt at = tilt(begin, end, t, i, here, 0.0);
      if (std::abs(at.mean) <= scale) return;
      double lo = 0.0;
      double hi = 0.0;
      double step = 1.0 / span;
      if (at.mean > 0.0) {
        for (lo = -step; tilt(begin, end, t, i, here, lo).mean > 0.0; lo *= 2.0) {
          if (lo < -1e300) break;
        }
      } else {
        for (hi = step; tilt(begin, end, t, i, here, hi).mean < 0.0; hi *= 2.0) {
          if (hi > 1e300) break;
        }
      }
      lambda = 0.0;
      for (int it = 0; it < 200; ++it) {
        if (std::abs(at.mean) <= scale) break;
        if (at.mean > 0.0) {
          hi = lambda;
        } else {
          lo = lambda;
        }
        double next = at.variance > 0.0 ? lambda - at.mean / at.variance : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (next == lambda || hi - lo <= 1e-16 * (1.0 + std::abs(lambda))) break;
        lambda = next;
        at = tilt(begin, end, t, i, here, lambda);
      }
    }
    pot_.h[t][g * d_ + i] += opt_.epsilon * lambda;
    for (std::size_t p = begin; p < end; ++p) log_pi_[p] += lambda * (x(p, t + 1, i) - here);
  }

  void measure(EntropicResult& res) const {
    res.marginal_violation = 0.0;
    res.martingale_violation = 0.0;
    std::vector<double> mass(log_pi_.size());
    for (std::size_t p = 0; p < mass.size(); ++p) mass[p] = std::exp(log_pi_[p]);
    for (std::size_t t = 0; t < n_t_; ++t) {
      for (std::size_t i = 0; i < d_; ++i) {
        std::vector<double> pushed(grid_.atoms(t, i), 0.0);
        for (std::size_t p = 0; p < mass.size(); ++p) pushed[grid_.atom_of(p, t, i)] += mass[p];
        const auto w = inst_.system().at(t, i).weights();
        double tv = 0.0;
        for (std::size_t a = 0; a < pushed.size(); ++a) tv += std::abs(pushed[a] - w[a]);
        res.marginal_violation = std::max(res.marginal_violation, 0.5 * tv);
      }
    }
    for (std::size_t t = 0; t + 1 < n_t_; ++t) {
      const std::size_t width = grid_.suffix_size(t + 1);
      for (std::size_t g = 0; g < grid_.prefix_count(t + 1); ++g) {
        const std::size_t begin = g * width;
        double m = 0.0;
        for (std::size_t p = begin; p < begin + width; ++p) m += mass[p];
        if (m < opt_.tol) continue;
        for (std::size_t i = 0; i < d_; ++i) {
          double acc = 0.0;
          for (std::size_t p = begin; p < begin + width; ++p) acc += mass[p] * x(p, t + 1, i);
          res.martingale_violation =
              std::max(res.martingale_violation, std::abs(acc / m - x(begin, t, i)));
        }
      }
    }
  }

  const VmotInstance& inst_;
  const PathGrid& grid_;
  EntropicOptions opt_;
  double s_;
  std::size_t d_;
  std::size_t n_t_;
  DualCertificate pot_;
  std::vector<double> log_pi_;
  std::vector<double> path_values_;
};

}  // namespace

EntropicResult solve_entropic(const VmotInstance& instance, const EntropicOptions& options) {
  if (!(options.epsilon > 0.0) || !std::isfinite(options.epsilon)) {
    throw Error(ErrorKind::kInvalidSchedule, "epsilon must be positive and finite");
  }
  return Solver(instance, options).run();
}

std::vector<ScheduleStage> epsilon_schedule(const VmotInstance& instance,
                                            std::span<const double> eps_list,
                                            const EntropicOptions& options) {
  if (eps_list.empty()) throw Error(ErrorKind::kInvalidSchedule, "empty epsilon schedule");
  for (std::size_t k = 0; k < eps_list.size(); ++k) {
    if (!(eps_list[k] > 0.0) || (k > 0 && !(eps_list[k] < eps_list[k - 1]))) {
      throw Error(ErrorKind::kInvalidSchedule,
                  "epsilon schedule must be positive and strictly decreasing");
    }
  }
  std::vector<ScheduleStage> out;
  EntropicOptions opt = options;
  for (double eps : eps_list) {
    opt.epsilon = eps;
    EntropicResult r = solve_entropic(instance, opt);
    opt.initial = r.certificate_raw;
    out.push_back({eps, r.value, std::move(r)});
  }
  return out;
}

}  // namespace vmot
