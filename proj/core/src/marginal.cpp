#include "vmot/marginal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "vmot/error.hpp"

namespace vmot {

DiscreteMarginal::DiscreteMarginal(std::vector<double> points,
                                   std::vector<double> weights) {
  if (points.size() != weights.size()) {
    throw Error(ErrorKind::kInvalidMarginal,
                "points and weights differ in length");
  }
  if (points.empty()) {
    throw Error(ErrorKind::kInvalidMarginal, "marginal has no atoms");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < points.size(); ++k) {
    if (!std::isfinite(points[k]) || !std::isfinite(weights[k])) {
      throw Error(ErrorKind::kInvalidMarginal, "non-finite point or weight");
    }
    if (weights[k] < 0.0) {
      throw Error(ErrorKind::kInvalidMarginal, "negative weight");
    }
    total += weights[k];
  }
  if (std::abs(total - 1.0) > kWeightSumTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "weights sum to " << total << ", expected 1";
    throw Error(ErrorKind::kInvalidMarginal, os.str());
  }

  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return points[a] < points[b];
  });
  for (std::size_t k : order) {
    if (weights[k] == 0.0) continue;
    if (!points_.empty() && points_.back() == points[k]) {
      weights_.back() += weights[k];
    } else {
      points_.push_back(points[k]);
      weights_.push_back(weights[k]);
    }
  }
  if (points_.empty()) {
    throw Error(ErrorKind::kInvalidMarginal, "marginal has no positive mass");
  }
  for (std::size_t k = 0; k < points_.size(); ++k) {
    mean_ += weights_[k] * points_[k];
  }
}

DiscreteMarginal DiscreteMarginal::dirac(double at) {
  return DiscreteMarginal({at}, {1.0});
}

std::optional<std::size_t> DiscreteMarginal::atom_index(double x) const {
  auto it = std::lower_bound(points_.begin(), points_.end(), x);
  if (it != points_.end() && *it == x) {
    return static_cast<std::size_t>(it - points_.begin());
  }
  return std::nullopt;
}

double DiscreteMarginal::mass_at(double x) const {
  auto k = atom_index(x);
  return k ? weights_[*k] : 0.0;
}

PotentialFn::PotentialFn(const DiscreteMarginal& mu)
    : breakpoints_(mu.points().begin(), mu.points().end()),
      values_(mu.size()),
      mean_(mu.mean()) {
  // Left-to-right sweep: u(p_k) = p_k*W_left - S_left + S_right - p_k*W_right.
  const auto w = mu.weights();
  const std::size_t n = breakpoints_.size();
  double total_w = 0.0;
  double total_s = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    total_w += w[k];
    total_s += w[k] * breakpoints_[k];
  }
  double left_w = 0.0;
  double left_s = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double x = breakpoints_[k];
    left_w += w[k];
    left_s += w[k] * x;
    const double right_w = total_w - left_w;
    const double right_s = total_s - left_s;
    values_[k] = (x * left_w - left_s) + (right_s - x * right_w);
  }
}

double PotentialFn::operator()(double x) const {
  if (x <= breakpoints_.front()) {
    return values_.front() + (breakpoints_.front() - x);
  }
  if (x >= breakpoints_.back()) {
    return values_.back() + (x - breakpoints_.back());
  }
  auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
  const std::size_t hi = static_cast<std::size_t>(it - breakpoints_.begin());
  const std::size_t lo = hi - 1;
  const double x0 = breakpoints_[lo];
  const double x1 = breakpoints_[hi];
  if (x == x0) return values_[lo];
  const double s = (x - x0) / (x1 - x0);
  return values_[lo] + s * (values_[hi] - values_[lo]);
}

double potential(const DiscreteMarginal& mu, double x) {
  double acc = 0.0;
  const auto p = mu.points();
  const auto w = mu.weights();
  for (std::size_t k = 0; k < p.size(); ++k) acc += w[k] * std::abs(x - p[k]);
  return acc;
}

namespace {

std::vector<double> merged_breakpoints(const DiscreteMarginal& mu,
                                       const DiscreteMarginal& nu) {
  std::vector<double> out;
  out.reserve(mu.size() + nu.size());
  std::merge(mu.points().begin(), mu.points().end(), nu.points().begin(),
             nu.points().end(), std::back_inserter(out));
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool means_match(double a, double b) {
  const double scale = std::max({1.0, std::abs(a), std::abs(b)});
  return std::abs(a - b) <= kMeanRelativeTolerance * scale;
}

}  // namespace

ConvexOrderResult check_convex_order(const DiscreteMarginal& mu,
                                     const DiscreteMarginal& nu) {
  const std::vector<double> grid = merged_breakpoints(mu, nu);
  if (!means_match(mu.mean(), nu.mean())) {
    // Beyond the hull u(x) = |x - mean|, so the side with the larger
    // mean gap fails the dominance test.
    const double witness =
        nu.mean() > mu.mean() ? grid.back() + 1.0 : grid.front() - 1.0;
    return {false, witness};
  }
  const PotentialFn u_mu(mu);
  const PotentialFn u_nu(nu);
  double worst = kPotentialTolerance;
  std::optional<double> witness;
  for (double x : grid) {
    const double excess = u_mu(x) - u_nu(x);
    if (excess > worst) {
      worst = excess;
      witness = x;
    }
  }
  return {!witness.has_value(), witness};
}

IrreducibleDomain irreducibility(const DiscreteMarginal& mu,
                                 const DiscreteMarginal& nu) {
  const ConvexOrderResult order = check_convex_order(mu, nu);
  if (!order.holds) {
    std::ostringstream os;
    os << "marginals are not in convex order (witness x = " << *order.witness
       << ")";
    throw ConvexOrderViolation(0, 0, *order.witness, os.str());
  }
  const std::vector<double> grid = merged_breakpoints(mu, nu);
  const PotentialFn u_mu(mu);
  const PotentialFn u_nu(nu);
  std::vector<bool> positive(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    positive[k] = u_nu(grid[k]) - u_mu(grid[k]) > kPotentialTolerance;
  }

  // Connected components of {u_mu < u_nu}; on each segment the difference
  // is affine, so a segment belongs to the set iff either end is positive.
  struct Component {
    double lo, hi;
  };
  std::vector<Component> components;
  const std::size_t segments = grid.size() - 1;
  for (std::size_t s = 0; s < segments;) {
    if (positive[s] || positive[s + 1]) {
      std::size_t j = s;
      while (j + 1 < segments && positive[j + 1]) ++j;
      components.push_back({grid[s], grid[j + 1]});
      s = j + 1;
    } else {
      ++s;
    }
  }

  IrreducibleDomain dom;
  dom.components = components.size();
  if (components.empty()) {
    dom.lower = dom.upper = mu.mean();
    return dom;
  }
  double best_mass = -1.0;
  bool full_mass = false;
  for (const Component& c : components) {
    double mass = 0.0;
    for (std::size_t k = 0; k < mu.size(); ++k) {
      const double p = mu.points()[k];
      if (c.lo < p && p < c.hi) mass += mu.weights()[k];
    }
    if (mass > best_mass) {
      best_mass = mass;
      dom.lower = c.lo;
      dom.upper = c.hi;
      full_mass = true;
      for (double p : mu.points()) {
        if (!(c.lo < p && p < c.hi)) full_mass = false;
      }
    }
  }
  dom.lower_closed = nu.atom_index(dom.lower).has_value();
  dom.upper_closed = nu.atom_index(dom.upper).has_value();
  dom.irreducible = components.size() == 1 && full_mass;
  return dom;
}

DiscreteMarginal quantize(std::span<const double> samples,
                          std::size_t n_points) {
  if (samples.empty() || n_points == 0) {
    throw Error(ErrorKind::kEmptyInput,
                "quantize needs a nonempty sample and n_points >= 1");
  }
  std::vector<double> sorted(samples.begin(), samples.end());
  for (double s : sorted) {
    if (!std::isfinite(s)) {
      throw Error(ErrorKind::kInvalidMarginal, "non-finite sample");
    }
  }
  std::sort(sorted.begin(), sorted.end());
  const std::size_t m = sorted.size();
  const std::size_t n = std::min(n_points, m);
  const double sample_mean =
      std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(m);

  std::vector<double> points;
  std::vector<double> weights;
  std::size_t begin = 0;
  for (std::size_t k = 1; k <= n; ++k) {
    const std::size_t end = (k * m) / n;
    double bin_sum = 0.0;
    for (std::size_t j = begin; j < end; ++j) bin_sum += sorted[j];
    const double count = static_cast<double>(end - begin);
    points.push_back(bin_sum / count);
    weights.push_back(count / static_cast<double>(m));
    begin = end;
  }
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  for (double& w : weights) w /= total;
  double mean = 0.0;
  for (std::size_t k = 0; k < points.size(); ++k) mean += weights[k] * points[k];
  const double shift = sample_mean - mean;
  for (double& p : points) p += shift;
  return DiscreteMarginal(std::move(points), std::move(weights));
}

DiscreteMarginal convolve_three_point(const DiscreteMarginal& mu,
                                      double radius) {
  std::vector<double> points;
  std::vector<double> weights;
  for (std::size_t k = 0; k < mu.size(); ++k) {
    for (double offset : {-radius, 0.0, radius}) {
      points.push_back(mu.points()[k] + offset);
      weights.push_back(mu.weights()[k] / 3.0);
    }
  }
  return DiscreteMarginal(std::move(points), std::move(weights));
}

}  // namespace vmot
