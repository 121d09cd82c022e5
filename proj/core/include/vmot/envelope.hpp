#pragma once

#include <array>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace vmot {

// Lower convex envelope of a function sampled at strictly increasing points:
// the supremum of affine minorants. Outside [x.front(), x.back()] it is +inf.
class ConvexEnvelope1D {
 public:
  ConvexEnvelope1D(std::span<const double> x, std::span<const double> f);

  double operator()(double q) const;
  bool contains(double q) const noexcept {
    return vx_.front() <= q && q <= vx_.back();
  }
  // [left, right] derivative bounds at q; infinite at the hull ends.
  std::pair<double, double> subdifferential(double q) const;
  // The element of the subdifferential closest to zero. q must lie in the hull.
  double min_norm_subgradient(double q) const;

  std::span<const double> vertices_x() const noexcept { return vx_; }
  std::span<const double> vertices_f() const noexcept { return vf_; }

 private:
  std::vector<double> vx_;
  std::vector<double> vf_;
};

// Envelope values at the sample points themselves.
std::vector<double> lower_convex_envelope(std::span<const double> x,
                                          std::span<const double> f);

struct EnvelopePoint2D {
  double value = 0.0;
  std::array<double, 2> gradient{};  // minimum-norm subgradient
};

// Envelope of a function sampled on a finite planar point set, at q. The
// value is the LP  min sum l_k f_k  s.t.  sum l_k = 1, sum l_k y_k = q, l >= 0;
// the subdifferential is {g : g.(y_k - q) <= f_k - value for all k}. Returns
// nullopt when q lies outside the convex hull of the points.
std::optional<EnvelopePoint2D> convex_envelope_2d(
    std::span<const std::array<double, 2>> y, std::span<const double> f,
    std::array<double, 2> q);

// Minimum-norm point of the convex hull of `points` (all of equal dimension),
// by Wolfe's algorithm.
std::vector<double> min_norm_in_hull(const std::vector<std::vector<double>>& points);

}  // namespace vmot
