#include "vmot/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/multiprecision/cpp_int.hpp>

namespace vmot::lp {

std::size_t LinearProgram::add_column(double cost, std::span<const Entry> entries) {
  costs_.push_back(cost);
  for (const Entry& e : entries) {
    if (e.value == 0.0) continue;
    row_index_.push_back(e.row);
    values_.push_back(e.value);
  }
  start_.push_back(values_.size());
  return costs_.size() - 1;
}

double LinearProgram::column_dot(std::size_t col, std::span<const double> y) const {
  double acc = 0.0;
  for (std::size_t k = start_[col]; k < start_[col + 1]; ++k) {
    acc += values_[k] * y[row_index_[k]];
  }
  return acc;
}

const char* to_string(Status s) {
  switch (s) {
    case Status::kOptimal: return "optimal";
    case Status::kInfeasible: return "infeasible";
    case Status::kUnbounded: return "unbounded";
    case Status::kIterationLimit: return "iteration-limit";
  }
  return "unknown";
}

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

class Engine {
 public:
  Engine(const LinearProgram& lp, const Options& opt)
      : lp_(lp),
        opt_(opt),
        m_(lp.rows()),
        n_(lp.cols()),
        art_sign_(m_),
        binv_(m_ * m_, 0.0),
        basis_(m_),
        is_basic_(n_ + m_, 0),
        xb_(m_),
        cost_(n_ + m_, 0.0),
        y_(m_),
        alpha_(m_) {
    for (std::size_t r = 0; r < m_; ++r) {
      art_sign_[r] = lp_.rhs(r) < 0.0 ? -1.0 : 1.0;
      basis_[r] = n_ + r;
      is_basic_[n_ + r] = 1;
      binv_[r * m_ + r] = art_sign_[r];
      xb_[r] = std::abs(lp_.rhs(r));
    }
  }

  Solution run() {
    Solution sol;
    // Phase 1: minimise the sum of artificials.
    std::fill(cost_.begin(), cost_.end(), 0.0);
    for (std::size_t r = 0; r < m_; ++r) cost_[n_ + r] = 1.0;
    Status st = iterate(/*phase_two=*/false);
    sol.iterations = iterations_;
    if (st == Status::kIterationLimit) {
      sol.status = st;
      return sol;
    }
    double infeasibility = 0.0;
    double scale = 1.0;
    for (std::size_t r = 0; r < m_; ++r) {
      scale = std::max(scale, std::abs(lp_.rhs(r)));
      if (basis_[r] >= n_) infeasibility += std::max(0.0, xb_[r]);
    }
    sol.phase_one_infeasibility = infeasibility;
    if (infeasibility > opt_.feasibility_tol * scale) {
      sol.status = Status::kInfeasible;
      return sol;
    }
    sol.redundant_rows = drive_out_artificials();

    if (!opt_.phase_one_only) {
      for (std::size_t j = 0; j < n_; ++j) cost_[j] = lp_.cost(j);
      for (std::size_t r = 0; r < m_; ++r) cost_[n_ + r] = 0.0;
      degenerate_streak_ = 0;
      st = iterate(/*phase_two=*/true);
      sol.iterations = iterations_;
      if (st != Status::kOptimal) {
        sol.status = st;
        return sol;
      }
    }

    reinvert();
    compute_duals();
    sol.status = Status::kOptimal;
    sol.primal.assign(n_, 0.0);
    for (std::size_t r = 0; r < m_; ++r) {
      if (basis_[r] < n_) {
        const double v = xb_[r];
        sol.primal[basis_[r]] = v < 0.0 && v > -opt_.feasibility_tol ? 0.0 : v;
      }
    }
    sol.objective = 0.0;
    for (std::size_t j = 0; j < n_; ++j) sol.objective += lp_.cost(j) * sol.primal[j];
    sol.duals = y_;
    sol.basis = basis_;
    return sol;
  }

 private:
  double entry_dot(std::size_t j, const std::vector<double>& y) const {
    if (j >= n_) return art_sign_[j - n_] * y[j - n_];
    return lp_.column_dot(j, y);
  }

  // alpha = B^{-1} a_j
  void compute_column(std::size_t j) {
    std::fill(alpha_.begin(), alpha_.end(), 0.0);
    if (j >= n_) {
      const std::size_t r = j - n_;
      for (std::size_t i = 0; i < m_; ++i) alpha_[i] = binv_[i * m_ + r] * art_sign_[r];
      return;
    }
    const auto rows = lp_.column_rows(j);
    const auto vals = lp_.column_values(j);
    for (std::size_t i = 0; i < m_; ++i) {
      const double* row = &binv_[i * m_];
      double acc = 0.0;
      for (std::size_t k = 0; k < rows.size(); ++k) acc += row[rows[k]] * vals[k];
      alpha_[i] = acc;
    }
  }

  void dense_basis(std::vector<double>& b) const {
    b.assign(m_ * m_, 0.0);
    for (std::size_t c = 0; c < m_; ++c) {
      const std::size_t j = basis_[c];
      if (j >= n_) {
        b[(j - n_) * m_ + c] = art_sign_[j - n_];
        continue;
      }
      const auto rows = lp_.column_rows(j);
      const auto vals = lp_.column_values(j);
      for (std::size_t k = 0; k < rows.size(); ++k) b[rows[k] * m_ + c] = vals[k];
    }
  }

  // Rebuilds B^{-1} by Gauss-Jordan elimination with partial pivoting and
  // recomputes the basic solution with one step of iterative refinement.
  void reinvert() {
    std::vector<double> b;
    dense_basis(b);
    std::vector<double> a = b;
    std::vector<double>& inv = binv_;
    std::fill(inv.begin(), inv.end(), 0.0);
    for (std::size_t i = 0; i < m_; ++i) inv[i * m_ + i] = 1.0;
    for (std::size_t col = 0; col < m_; ++col) {
      std::size_t piv = col;
      double best = std::abs(a[col * m_ + col]);
      for (std::size_t r = col + 1; r < m_; ++r) {
        const double v = std::abs(a[r * m_ + col]);
        if (v > best) {
          best = v;
          piv = r;
        }
      }
      if (best < 1e-14) throw std::runtime_error("simplex basis became singular");
      if (piv != col) {
        for (std::size_t k = 0; k < m_; ++k) {
          std::swap(a[piv * m_ + k], a[col * m_ + k]);
          std::swap(inv[piv * m_ + k], inv[col * m_ + k]);
        }
      }
      const double d = a[col * m_ + col];
      for (std::size_t k = 0; k < m_; ++k) {
        a[col * m_ + k] /= d;
        inv[col * m_ + k] /= d;
      }
      for (std::size_t r = 0; r < m_; ++r) {
        if (r == col) continue;
        const double f = a[r * m_ + col];
        if (f == 0.0) continue;
        for (std::size_t k = 0; k < m_; ++k) {
          a[r * m_ + k] -= f * a[col * m_ + k];
          inv[r * m_ + k] -= f * inv[col * m_ + k];
        }
      }
    }
    // x_B = B^{-1} b, refined once.
    const auto rhs = lp_.rhs();
    std::vector<double> x(m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      double acc = 0.0;
      for (std::size_t k = 0; k < m_; ++k) acc += inv[i * m_ + k] * rhs[k];
      x[i] = acc;
    }
    std::vector<double> resid(m_);
    for (std::size_t i = 0; i < m_; ++i) {
      double acc = rhs[i];
      for (std::size_t k = 0; k < m_; ++k) acc -= b[i * m_ + k] * x[k];
      resid[i] = acc;
    }
    for (std::size_t i = 0; i < m_; ++i) {
      double acc = 0.0;
      for (std::size_t k = 0; k < m_; ++k) acc += inv[i * m_ + k] * resid[k];
      x[i] += acc;
    }
    xb_ = std::move(x);
    since_refactor_ = 0;
  }

  // y^T = c_B^T B^{-1}, refined once against B^T y = c_B when fresh.
  void compute_duals() {
    std::fill(y_.begin(), y_.end(), 0.0);
    for (std::size_t r = 0; r < m_; ++r) {
      const double c = cost_[basis_[r]];
      if (c == 0.0) continue;
      const double* row = &binv_[r * m_];
      for (std::size_t k = 0; k < m_; ++k) y_[k] += c * row[k];
    }
    if (since_refactor_ != 0) return;
    std::vector<double> resid(m_);
    for (std::size_t r = 0; r < m_; ++r) {
      resid[r] = cost_[basis_[r]] - entry_dot(basis_[r], y_);
    }
    for (std::size_t r = 0; r < m_; ++r) {
      if (resid[r] == 0.0) continue;
      const double* row = &binv_[r * m_];
      for (std::size_t k = 0; k < m_; ++k) y_[k] += resid[r] * row[k];
    }
  }

  void pivot(std::size_t r, std::size_t q, double theta) {
    for (std::size_t i = 0; i < m_; ++i) xb_[i] -= theta * alpha_[i];
    xb_[r] = theta;
    const double p = alpha_[r];
    double* prow = &binv_[r * m_];
    for (std::size_t k = 0; k < m_; ++k) prow[k] /= p;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r || alpha_[i] == 0.0) continue;
      const double f = alpha_[i];
      double* row = &binv_[i * m_];
      for (std::size_t k = 0; k < m_; ++k) row[k] -= f * prow[k];
    }
    is_basic_[basis_[r]] = 0;
    is_basic_[q] = 1;
    basis_[r] = q;
    ++iterations_;
    ++since_refactor_;
  }

  std::size_t price(bool bland) const {
    std::size_t best = kNone;
    double best_d = -opt_.optimality_tol;
    for (std::size_t j = 0; j < n_; ++j) {
      if (is_basic_[j]) continue;
      const double d = cost_[j] - lp_.column_dot(j, y_);
      if (d < best_d) {
        best = j;
        if (bland) break;
        best_d = d;
      }
    }
    return best;
  }

  std::size_t ratio_test(bool bland, bool phase_two, double& theta) const {
    std::size_t leave = kNone;
    theta = std::numeric_limits<double>::infinity();
    // Basic artificials left on redundant rows must stay at zero.
    if (phase_two) {
      for (std::size_t r = 0; r < m_; ++r) {
        if (basis_[r] >= n_ && std::abs(alpha_[r]) > opt_.pivot_tol) {
          if (leave == kNone || std::abs(alpha_[r]) > std::abs(alpha_[leave])) leave = r;
        }
      }
      if (leave != kNone) {
        theta = 0.0;
        return leave;
      }
    }
    for (std::size_t r = 0; r < m_; ++r) {
      if (alpha_[r] <= opt_.pivot_tol) continue;
      const double ratio = std::max(xb_[r], 0.0) / alpha_[r];
      if (leave == kNone || ratio < theta - 1e-12 * (1.0 + theta)) {
        theta = ratio;
        leave = r;
      } else if (ratio <= theta + 1e-12 * (1.0 + theta)) {
        const bool better = bland ? basis_[r] < basis_[leave]
                                  : alpha_[r] > alpha_[leave];
        if (better) {
          leave = r;
          theta = std::min(theta, ratio);
        }
      }
    }
    return leave;
  }

  Status iterate(bool phase_two) {
    for (;;) {
      if (iterations_ >= opt_.max_iterations) return Status::kIterationLimit;
      if (since_refactor_ >= opt_.refactor_interval) reinvert();
      compute_duals();
      const bool bland = degenerate_streak_ >= opt_.degenerate_streak_for_bland;
      const std::size_t q = price(bland);
      if (q == kNone) {
        if (since_refactor_ != 0) {
          reinvert();
          continue;
        }
        return Status::kOptimal;
      }
      compute_column(q);
      double theta = 0.0;
      const std::size_t r = ratio_test(bland, phase_two, theta);
      if (r == kNone) return Status::kUnbounded;
      if (theta <= opt_.feasibility_tol) {
        ++degenerate_streak_;
      } else {
        degenerate_streak_ = 0;
      }
      pivot(r, q, theta);
    }
  }

  std::size_t drive_out_artificials() {
    std::size_t redundant = 0;
    for (std::size_t r = 0; r < m_; ++r) {
      if (basis_[r] < n_) continue;
      const double* row = &binv_[r * m_];
      std::vector<double> rowv(row, row + m_);
      std::size_t best = kNone;
      double best_v = 1e-7;
      for (std::size_t j = 0; j < n_; ++j) {
        if (is_basic_[j]) continue;
        const double v = std::abs(lp_.column_dot(j, rowv));
        if (v > best_v) {
          best_v = v;
          best = j;
        }
      }
      if (best == kNone) {
        ++redundant;
        continue;
      }
      compute_column(best);
      pivot(r, best, xb_[r] / alpha_[r]);
    }
    reinvert();
    return redundant;
  }

  const LinearProgram& lp_;
  Options opt_;
  std::size_t m_;
  std::size_t n_;
  std::vector<double> art_sign_;
  std::vector<double> binv_;
  std::vector<std::size_t> basis_;
  std::vector<char> is_basic_;
  std::vector<double> xb_;
  std::vector<double> cost_;
  std::vector<double> y_;
  std::vector<double> alpha_;
  std::size_t iterations_ = 0;
  std::size_t since_refactor_ = 0;
  std::size_t degenerate_streak_ = 0;
};

using Rational = boost::multiprecision::cpp_rational;

Rational exact(double v) { return Rational(v); }

// Solves M z = rhs exactly; M is square and row-major. Returns false if
// singular.
bool solve_rational(std::vector<Rational> m, std::vector<Rational> rhs,
                    std::size_t n, std::vector<Rational>& out) {
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    while (piv < n && m[piv * n + col] == 0) ++piv;
    if (piv == n) return false;
    if (piv != col) {
      for (std::size_t k = 0; k < n; ++k) std::swap(m[piv * n + k], m[col * n + k]);
      std::swap(rhs[piv], rhs[col]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      if (m[r * n + col] == 0) continue;
      const Rational f = m[r * n + col] / m[col * n + col];
      for (std::size_t k = col; k < n; ++k) m[r * n + k] -= f * m[col * n + k];
      rhs[r] -= f * rhs[col];
    }
  }
  out.assign(n, Rational(0));
  for (std::size_t r = n; r-- > 0;) {
    Rational acc = rhs[r];
    for (std::size_t k = r + 1; k < n; ++k) acc -= m[r * n + k] * out[k];
    out[r] = acc / m[r * n + r];
  }
  return true;
}

}  // namespace

Solution solve(const LinearProgram& lp, const Options& options) {
  if (lp.rows() == 0) {
    Solution sol;
    sol.status = Status::kOptimal;
    sol.primal.assign(lp.cols(), 0.0);
    for (std::size_t j = 0; j < lp.cols(); ++j) {
      if (lp.cost(j) < 0.0) {
        sol.status = Status::kUnbounded;
        break;
      }
    }
    return sol;
  }
  Engine engine(lp, options);
  return engine.run();
}

ExactCheck check_basis_exact(const LinearProgram& lp, const Solution& solution) {
  ExactCheck out;
  const std::size_t m = lp.rows();
  const std::size_t n = lp.cols();
  if (solution.basis.size() != m) return out;

  std::vector<Rational> b(m * m, Rational(0));
  std::vector<Rational> bt(m * m, Rational(0));
  std::vector<Rational> cb(m, Rational(0));
  for (std::size_t c = 0; c < m; ++c) {
    const std::size_t j = solution.basis[c];
    if (j >= n) {
      b[(j - n) * m + c] = 1;
      continue;
    }
    cb[c] = exact(lp.cost(j));
    const auto rows = lp.column_rows(j);
    const auto vals = lp.column_values(j);
    for (std::size_t k = 0; k < rows.size(); ++k) b[rows[k] * m + c] = exact(vals[k]);
  }
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < m; ++c) bt[c * m + r] = b[r * m + c];
  }
  std::vector<Rational> rhs(m);
  for (std::size_t r = 0; r < m; ++r) rhs[r] = exact(lp.rhs(r));

  std::vector<Rational> xb;
  std::vector<Rational> y;
  if (!solve_rational(b, rhs, m, xb) || !solve_rational(bt, cb, m, y)) return out;

  out.primal_feasible = true;
  Rational objective = 0;
  for (std::size_t c = 0; c < m; ++c) {
    const std::size_t j = solution.basis[c];
    if (xb[c] < 0) out.primal_feasible = false;
    if (j >= n) {
      if (xb[c] != 0) out.primal_feasible = false;
      continue;
    }
    objective += cb[c] * xb[c];
    out.max_primal_error = std::max(
        out.max_primal_error,
        std::abs(solution.primal[j] - static_cast<double>(xb[c])));
  }
  out.objective = static_cast<double>(objective);

  std::vector<char> basic(n, 0);
  for (std::size_t j : solution.basis) {
    if (j < n) basic[j] = 1;
  }
  out.dual_feasible = true;
  for (std::size_t j = 0; j < n && out.dual_feasible; ++j) {
    if (basic[j]) continue;
    Rational reduced = exact(lp.cost(j));
    const auto rows = lp.column_rows(j);
    const auto vals = lp.column_values(j);
    for (std::size_t k = 0; k < rows.size(); ++k) reduced -= exact(vals[k]) * y[rows[k]];
    if (reduced < 0) out.dual_feasible = false;
  }
  return out;
}

}  // namespace vmot::lp
