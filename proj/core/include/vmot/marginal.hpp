#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace vmot {

// A finite probability law on the real line: strictly increasing support
// points carrying strictly positive mass that sums to one (within 1e-12).
class DiscreteMarginal {
 public:
  static constexpr double kWeightSumTolerance = 1e-12;

  // Sorts, merges coincident points and drops zero-mass atoms.
  // Throws Error(kInvalidMarginal) on non-finite input, negative weights,
  // mismatched lengths or a total mass off by more than the tolerance.
  DiscreteMarginal(std::vector<double> points, std::vector<double> weights);

  static DiscreteMarginal dirac(double at);

  std::span<const double> points() const noexcept { return points_; }
  std::span<const double> weights() const noexcept { return weights_; }
  std::size_t size() const noexcept { return points_.size(); }
  double mean() const noexcept { return mean_; }

  // Index of the atom located exactly at x, if any.
  std::optional<std::size_t> atom_index(double x) const;
  double mass_at(double x) const;

  // Integral of f against this law.
  template <typename F>
  double expectation(F&& f) const {
    double acc = 0.0;
    for (std::size_t k = 0; k < points_.size(); ++k) {
      acc += weights_[k] * f(points_[k]);
    }
    return acc;
  }

  friend bool operator==(const DiscreteMarginal&,
                         const DiscreteMarginal&) = default;

 private:
  std::vector<double> points_;
  std::vector<double> weights_;
  double mean_ = 0.0;
};

// u(x) = sum_k w_k |x - p_k|, stored by its values at the support points.
// Outside the support it continues with slope -1 (left) and +1 (right).
class PotentialFn {
 public:
  explicit PotentialFn(const DiscreteMarginal& mu);

  double operator()(double x) const;

  std::span<const double> breakpoints() const noexcept { return breakpoints_; }
  std::span<const double> values() const noexcept { return values_; }
  double left_slope() const noexcept { return -1.0; }
  double right_slope() const noexcept { return 1.0; }
  double mean() const noexcept { return mean_; }

 private:
  std::vector<double> breakpoints_;
  std::vector<double> values_;
  double mean_;
};

double potential(const DiscreteMarginal& mu, double x);

struct ConvexOrderResult {
  bool holds = false;
  std::optional<double> witness;
};

inline constexpr double kMeanRelativeTolerance = 1e-10;
inline constexpr double kPotentialTolerance = 1e-10;

// mu <=_c nu iff equal means and u_mu <= u_nu; piecewise linearity makes the
// comparison at the union of breakpoints sufficient.
ConvexOrderResult check_convex_order(const DiscreteMarginal& mu,
                                     const DiscreteMarginal& nu);

// The domain (I, J) of a pair in convex order. I = (lower, upper) is open;
// J adds whichever endpoints carry an atom of the dominating law.
struct IrreducibleDomain {
  double lower = 0.0;
  double upper = 0.0;
  bool lower_closed = false;
  bool upper_closed = false;
  bool irreducible = false;
  // Number of connected components of {u_mu < u_nu}.
  std::size_t components = 0;

  bool empty() const noexcept { return !(lower < upper); }
  bool in_interior(double x) const noexcept { return lower < x && x < upper; }
  bool in_hull(double x) const noexcept {
    return in_interior(x) || (lower_closed && x == lower) ||
           (upper_closed && x == upper);
  }
};

// Throws ConvexOrderViolation when mu is not dominated by nu.
IrreducibleDomain irreducibility(const DiscreteMarginal& mu,
                                 const DiscreteMarginal& nu);

// Conditional means over n contiguous quantile bins of the sorted sample,
// shifted so the mean matches the sample mean. Throws Error(kEmptyInput).
DiscreteMarginal quantize(std::span<const double> samples,
                          std::size_t n_points);

// Convolution with the centered three-point law {-r, 0, r} (equal weights).
DiscreteMarginal convolve_three_point(const DiscreteMarginal& mu, double radius);

}  // namespace vmot
