#include "vmot/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vmot/error.hpp"
#include "vmot/simplex.hpp"

namespace vmot {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += a[k] * b[k];
  return acc;
}

// Solves the dense system in place by Gaussian elimination with partial
// pivoting; returns false if singular.
bool solve_dense(std::vector<std::vector<double>>& a, std::vector<double>& b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    }
    if (std::abs(a[piv][col]) < 1e-300) return false;
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double m = a[r][col] / a[col][col];
      if (m == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a[r][c] -= m * a[col][c];
      b[r] -= m * b[col];
    }
  }
  for (std::size_t col = n; col-- > 0;) {
    for (std::size_t c = col + 1; c < n; ++c) b[col] -= a[col][c] * b[c];
    b[col] /= a[col][col];
  }
  return true;
}

}  // namespace

ConvexEnvelope1D::ConvexEnvelope1D(std::span<const double> x, std::span<const double> f) {
  if (x.empty() || x.size() != f.size()) {
    throw Error(ErrorKind::kEnvelopeDegenerate, "envelope needs matching nonempty samples");
  }
  // Andrew's monotone chain, lower half; collinear points are dropped.
  for (std::size_t k = 0; k < x.size(); ++k) {
    while (vx_.size() >= 2) {
      const std::size_t m = vx_.size();
      const double cross = (vx_[m - 1] - vx_[m - 2]) * (f[k] - vf_[m - 2]) -
                           (vf_[m - 1] - vf_[m - 2]) * (x[k] - vx_[m - 2]);
      if (cross > 0.0) break;
      vx_.pop_back();
      vf_.pop_back();
    }
    vx_.push_back(x[k]);
    vf_.push_back(f[k]);
  }
}

double ConvexEnvelope1D::operator()(double q) const {
  if (!contains(q)) return kInf;
  const auto it = std::lower_bound(vx_.begin(), vx_.end(), q);
  const std::size_t k = static_cast<std::size_t>(it - vx_.begin());
  if (vx_[k] == q) return vf_[k];
  const double w = (q - vx_[k - 1]) / (vx_[k] - vx_[k - 1]);
  return (1.0 - w) * vf_[k - 1] + w * vf_[k];
}

std::pair<double, double> ConvexEnvelope1D::subdifferential(double q) const {
  if (!contains(q)) return {kInf, -kInf};  // empty
  const auto slope = [&](std::size_t k) {
    return (vf_[k + 1] - vf_[k]) / (vx_[k + 1] - vx_[k]);
  };
  const auto it = std::lower_bound(vx_.begin(), vx_.end(), q);
  const std::size_t k = static_cast<std::size_t>(it - vx_.begin());
  if (vx_[k] != q) {
    const double s = slope(k - 1);
    return {s, s};
  }
  const double left = k == 0 ? -kInf : slope(k - 1);
  const double right = k + 1 == vx_.size() ? kInf : slope(k);
  return {left, right};
}

double ConvexEnvelope1D::min_norm_subgradient(double q) const {
  const auto [lo, hi] = subdifferential(q);
  if (lo > hi) {
    throw Error(ErrorKind::kEnvelopeDegenerate, "subgradient requested outside the hull");
  }
  return std::clamp(0.0, lo, hi);
}

std::vector<double> lower_convex_envelope(std::span<const double> x,
                                          std::span<const double> f) {
  const ConvexEnvelope1D env(x, f);
  std::vector<double> out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = env(x[k]);
  return out;
}

std::optional<EnvelopePoint2D> convex_envelope_2d(
    std::span<const std::array<double, 2>> y, std::span<const double> f,
    std::array<double, 2> q) {
  const std::size_t n = y.size();
  lp::LinearProgram prog(3);
  prog.set_rhs(0, 1.0);
  prog.set_rhs(1, q[0]);
  prog.set_rhs(2, q[1]);
  double scale = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    const lp::Entry col[3] = {{0, 1.0}, {1, y[k][0]}, {2, y[k][1]}};
    prog.add_column(f[k], col);
    scale = std::max({scale, std::abs(f[k])});
  }
  const lp::Solution sol = lp::solve(prog);
  if (sol.status == lp::Status::kInfeasible) return std::nullopt;
  if (sol.status != lp::Status::kOptimal) {
    throw Error(ErrorKind::kEnvelopeDegenerate, "planar envelope LP did not solve");
  }
  EnvelopePoint2D out;
  out.value = sol.objective;

  // Minimum-norm g with g.a_k <= b_k, a_k = y_k - q, b_k = f_k - value. The
  // optimum is the origin, the projection of the origin onto one constraint
  // line, or a vertex where two lines meet.
  std::vector<std::array<double, 2>> a(n);
  std::vector<double> b(n);
  for (std::size_t k = 0; k < n; ++k) {
    a[k] = {y[k][0] - q[0], y[k][1] - q[1]};
    b[k] = f[k] - out.value;
  }
  const double tol = 1e-9 * scale;
  const auto feasible = [&](double g0, double g1) {
    for (std::size_t k = 0; k < n; ++k) {
      if (g0 * a[k][0] + g1 * a[k][1] > b[k] + tol) return false;
    }
    return true;
  };
  double best = kInf;
  const auto consider = [&](double g0, double g1) {
    if (!std::isfinite(g0) || !std::isfinite(g1)) return;
    const double norm = g0 * g0 + g1 * g1;
    if (norm < best && feasible(g0, g1)) {
      best = norm;
      out.gradient = {g0, g1};
    }
  };
  consider(0.0, 0.0);
  if (best > 0.0) {
    for (std::size_t k = 0; k < n; ++k) {
      const double nn = a[k][0] * a[k][0] + a[k][1] * a[k][1];
      if (nn == 0.0) continue;
      consider(b[k] * a[k][0] / nn, b[k] * a[k][1] / nn);
    }
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t l = k + 1; l < n; ++l) {
        const double det = a[k][0] * a[l][1] - a[k][1] * a[l][0];
        if (std::abs(det) < 1e-14) continue;
        consider((b[k] * a[l][1] - a[k][1] * b[l]) / det,
                 (a[k][0] * b[l] - b[k] * a[l][0]) / det);
      }
    }
  }
  if (!std::isfinite(best)) {
    // Tolerance corner case: fall back to the LP's own dual slope.
    out.gradient = {sol.duals[1], sol.duals[2]};
  }
  return out;
}

std::vector<double> min_norm_in_hull(const std::vector<std::vector<double>>& points) {
  if (points.empty()) throw Error(ErrorKind::kEmptyInput, "min_norm_in_hull: no points");
  const std::size_t dim = points.front().size();
  if (dim == 1) {
    double lo = kInf;
    double hi = -kInf;
    for (const auto& p : points) {
      lo = std::min(lo, p[0]);
      hi = std::max(hi, p[0]);
    }
    return {std::clamp(0.0, lo, hi)};
  }

  double scale = 0.0;
  for (const auto& p : points) scale = std::max(scale, dot(p, p));
  const double tol = 1e-13 * std::max(scale, 1e-300);

  std::vector<std::size_t> set;
  std::vector<double> lambda;
  std::size_t first = 0;
  for (std::size_t k = 1; k < points.size(); ++k) {
    if (dot(points[k], points[k]) < dot(points[first], points[first])) first = k;
  }
  set.push_back(first);
  lambda.push_back(1.0);
  std::vector<double> x = points[first];

  const auto combine = [&](const std::vector<double>& w) {
    std::vector<double> out(dim, 0.0);
    for (std::size_t s = 0; s < set.size(); ++s) {
      for (std::size_t c = 0; c < dim; ++c) out[c] += w[s] * points[set[s]][c];
    }
    return out;
  };

  for (std::size_t major = 0; major < 10 * points.size() + 100; ++major) {
    std::size_t j = 0;
    double best = kInf;
    for (std::size_t k = 0; k < points.size(); ++k) {
      const double v = dot(x, points[k]);
      if (v < best) {
        best = v;
        j = k;
      }
    }
    if (dot(x, x) - best <= tol || std::find(set.begin(), set.end(), j) != set.end()) break;
    set.push_back(j);
    lambda.push_back(0.0);

    for (std::size_t minor = 0; minor < 10 * points.size() + 100; ++minor) {
      // Affine minimiser over the current set: [G 1; 1 0] [alpha; mu] = [0; 1].
      const std::size_t m = set.size();
      std::vector<std::vector<double>> sys(m + 1, std::vector<double>(m + 1, 0.0));
      std::vector<double> rhs(m + 1, 0.0);
      for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t c = 0; c < m; ++c) sys[r][c] = dot(points[set[r]], points[set[c]]);
        sys[r][m] = 1.0;
        sys[m][r] = 1.0;
      }
      rhs[m] = 1.0;
      if (!solve_dense(sys, rhs)) {
        // Affinely dependent set; drop the newest point.
        set.pop_back();
        lambda.pop_back();
        return x;
      }
      std::vector<double> alpha(rhs.begin(), rhs.begin() + static_cast<std::ptrdiff_t>(m));
      if (std::all_of(alpha.begin(), alpha.end(), [](double v) { return v > 1e-15; })) {
        lambda = alpha;
        x = combine(lambda);
        break;
      }
      double theta = 1.0;
      for (std::size_t s = 0; s < m; ++s) {
        if (alpha[s] <= 1e-15) theta = std::min(theta, lambda[s] / (lambda[s] - alpha[s]));
      }
      for (std::size_t s = 0; s < m; ++s) lambda[s] = (1.0 - theta) * lambda[s] + theta * alpha[s];
      std::size_t keep = 0;
      for (std::size_t s = 0; s < m; ++s) {
        if (lambda[s] > 1e-15) {
          set[keep] = set[s];
          lambda[keep] = lambda[s];
          ++keep;
        }
      }
      set.resize(keep);
      lambda.resize(keep);
      x = combine(lambda);
    }
  }
  return x;
}

}  // namespace vmot
