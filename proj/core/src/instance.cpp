#include "vmot/instance.hpp"

#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>

#include "vmot/error.hpp"

namespace vmot {

const char* to_string(Direction dir) {
  return dir == Direction::kMin ? "min" : "max";
}

Direction parse_direction(std::string_view text) {
  if (text == "min" || text == "MIN") return Direction::kMin;
  if (text == "max" || text == "MAX") return Direction::kMax;
  throw Error(ErrorKind::kPayoffParseError,
              "direction must be \"min\" or \"max\", got \"" + std::string(text) + "\"");
}

MarginalSystem::MarginalSystem(std::vector<std::vector<DiscreteMarginal>> marginals)
    : marginals_(std::move(marginals)) {
  if (marginals_.size() < 2) {
    throw Error(ErrorKind::kInvalidMarginal, "a marginal system needs N >= 2 maturities");
  }
  const std::size_t d = marginals_.front().size();
  if (d == 0) {
    throw Error(ErrorKind::kInvalidMarginal, "a marginal system needs d >= 1 assets");
  }
  for (const auto& row : marginals_) {
    if (row.size() != d) {
      throw Error(ErrorKind::kInvalidMarginal,
                  "every maturity must list the same number of assets");
    }
  }
}

void MarginalSystem::validate_convex_order() const {
  for (std::size_t t = 0; t + 1 < periods(); ++t) {
    for (std::size_t i = 0; i < assets(); ++i) {
      const ConvexOrderResult r = check_convex_order(at(t, i), at(t + 1, i));
      if (!r.holds) {
        std::ostringstream os;
        os << "mu[" << t + 1 << "][" << i + 1 << "] is not dominated by mu["
           << t + 2 << "][" << i + 1 << "] in convex order (witness x = "
           << *r.witness << ")";
        throw ConvexOrderViolation(t + 1, i + 1, *r.witness, os.str());
      }
    }
  }
}

PathGrid::PathGrid(const MarginalSystem& system, std::size_t path_budget)
    : periods_(system.periods()), assets_(system.assets()) {
  const std::size_t digits = periods_ * assets_;
  radix_.resize(digits);
  stride_.resize(digits);
  points_.resize(digits);
  for (std::size_t t = 0; t < periods_; ++t) {
    for (std::size_t i = 0; i < assets_; ++i) {
      const auto& mu = system.at(t, i);
      radix_[t * assets_ + i] = mu.size();
      points_[t * assets_ + i].assign(mu.points().begin(), mu.points().end());
    }
  }
  for (std::size_t k = digits; k-- > 0;) {
    stride_[k] = path_count_;
    if (radix_[k] > path_budget / path_count_) {
      std::ostringstream os;
      os << "path grid exceeds the budget of " << path_budget << " paths";
      throw Error(ErrorKind::kGridBudgetExceeded, os.str());
    }
    path_count_ *= radix_[k];
  }
  if (path_count_ > path_budget) {
    std::ostringstream os;
    os << "path grid of " << path_count_ << " paths exceeds the budget of "
       << path_budget;
    throw Error(ErrorKind::kGridBudgetExceeded, os.str());
  }
  period_size_.assign(periods_, 1);
  prefix_count_.assign(periods_ + 1, 1);
  for (std::size_t t = 0; t < periods_; ++t) {
    for (std::size_t i = 0; i < assets_; ++i) period_size_[t] *= radix_[t * assets_ + i];
    prefix_count_[t + 1] = prefix_count_[t] * period_size_[t];
  }
}

std::size_t PathGrid::atom_of_state(std::size_t state, std::size_t t,
                                    std::size_t i) const {
  std::size_t below = 1;
  for (std::size_t j = i + 1; j < assets_; ++j) below *= radix_[t * assets_ + j];
  return (state / below) % radix_[t * assets_ + i];
}

void PathGrid::path_values(std::size_t path, std::span<double> out) const {
  for (std::size_t k = 0; k < radix_.size(); ++k) {
    out[k] = points_[k][(path / stride_[k]) % radix_[k]];
  }
}

void PathGrid::state_values(std::size_t t, std::size_t state,
                            std::span<double> out) const {
  for (std::size_t i = 0; i < assets_; ++i) {
    out[i] = points_[t * assets_ + i][atom_of_state(state, t, i)];
  }
}

std::string PathGrid::prefix_key(std::size_t prefix, std::size_t t) const {
  // Decode the prefix as the leading t*d digits of a path index.
  std::vector<std::size_t> atoms(t * assets_);
  std::size_t rest = prefix;
  for (std::size_t k = t * assets_; k-- > 0;) {
    atoms[k] = rest % radix_[k];
    rest /= radix_[k];
  }
  std::ostringstream os;
  for (std::size_t s = 0; s < t; ++s) {
    if (s > 0) os << '|';
    for (std::size_t i = 0; i < assets_; ++i) {
      if (i > 0) os << ',';
      os << atoms[s * assets_ + i];
    }
  }
  return os.str();
}

struct VmotInstance::CostCache {
  std::once_flag once;
  std::vector<double> table;
};

VmotInstance::VmotInstance(MarginalSystem system, PathGrid grid, Payoff payoff,
                           Direction direction)
    : system_(std::move(system)),
      grid_(std::move(grid)),
      payoff_(std::move(payoff)),
      direction_(direction),
      cache_(std::make_shared<CostCache>()) {}

std::span<const double> VmotInstance::costs() const {
  std::call_once(cache_->once, [this] {
    const std::size_t n = grid_.path_count();
    const std::size_t d = grid_.assets();
    std::vector<double> table(n);
    std::vector<double> x(grid_.periods() * d);
    for (std::size_t p = 0; p < n; ++p) {
      grid_.path_values(p, x);
      const double v = payoff_.evaluate(x, d);
      if (!std::isfinite(v)) {
        std::ostringstream os;
        os << "payoff \"" << payoff_.text() << "\" is not finite on path " << p;
        throw NonFiniteCost(p, os.str());
      }
      table[p] = v;
    }
    cache_->table = std::move(table);
  });
  return cache_->table;
}

VmotInstance VmotInstance::with_direction(Direction dir) const {
  VmotInstance copy = *this;
  copy.direction_ = dir;
  return copy;
}

VmotInstance build_instance(MarginalSystem system, Payoff payoff,
                            Direction direction, const InstanceOptions& options) {
  system.validate_convex_order();
  payoff.check_dimensions(system.periods(), system.assets());
  PathGrid grid(system, options.path_budget);
  VmotInstance instance(std::move(system), std::move(grid), std::move(payoff),
                        direction);
  if (options.bounds) {
    const auto& bounds = *options.bounds;
    const std::size_t n_t = instance.periods();
    const std::size_t d = instance.assets();
    if (bounds.size() != n_t) {
      throw Error(ErrorKind::kPayoffParseError, "bounds must be an N x d array");
    }
    for (const auto& row : bounds) {
      if (row.size() != d) {
        throw Error(ErrorKind::kPayoffParseError, "bounds must be an N x d array");
      }
    }
    const auto costs = instance.costs();
    std::vector<double> x(n_t * d);
    instance.bound_status_ = BoundStatus::kHolds;
    for (std::size_t p = 0; p < instance.grid().path_count(); ++p) {
      instance.grid().path_values(p, x);
      double envelope = 0.0;
      for (std::size_t k = 0; k < n_t * d; ++k) {
        envelope += bounds[k / d][k % d].evaluate_scalar(x[k]);
      }
      if (std::abs(costs[p]) > envelope + 1e-12 * std::max(1.0, envelope)) {
        instance.bound_status_ = BoundStatus::kViolated;
        instance.bound_violation_ = p;
        break;
      }
    }
  }
  return instance;
}

double eval_payoff(const VmotInstance& instance, std::size_t path) {
  return instance.cost(path);
}

}  // namespace vmot
