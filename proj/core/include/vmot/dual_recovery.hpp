#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "vmot/certificate.hpp"
#include "vmot/exact_solver.hpp"
#include "vmot/instance.hpp"

namespace vmot {

// Reads phi from the marginal-row multipliers and h from the martingale-row
// multipliers (Markov multipliers are spread over all histories sharing the
// state). Dropped redundant rows and omitted trivial rows contribute zero.
// Throws Error(kInconsistentDuals) naming the worst path if the result is not
// a sub/superhedge within tol * max(1, max|c|), or if mu(phi) misses the LP
// value by more than that.
DualCertificate certificate_from_lp(const LpTableau& tableau, const ExactSolution& solution,
                                    const VmotInstance& instance, double tol = 1e-7);

// Componentwise mean of the first-maturity marginals.
std::vector<double> default_anchor(const MarginalSystem& system);

// Gauge normalization. For every t >= 2 the affine support L_t of chi_t at the
// anchor (minimum-norm subgradient) is moved from leg t-1 to leg t together
// with the matching shift of h_{t-1}, which leaves every path payout unchanged
// and makes chi_t >= 0 with chi_t(a) = 0. Finally, within each maturity, the
// legs of assets 2..d are centred under their marginals and the constant is
// carried by asset 1. MAX certificates are normalized in their negated
// (subhedging) form. Throws Error(kAnchorOutsideDomain) unless a_i lies in the
// open domain I of every consecutive pair (mu_{t,i}, mu_{t+1,i}).
DualCertificate gauge_normalize(const DualCertificate& cert, const VmotInstance& instance,
                                std::optional<std::vector<double>> anchor = std::nullopt);

// chi_t(y) = max over partial paths (x_1..x_{t-1}) of
//   sum_{s<t} [phi_s(x_s) + h_s . (x_{s+1} - x_s)]  with x_t = y,
// a maximum of affine functions of y. For MAX certificates the negated
// certificate is used.
class ChiFunction {
 public:
  explicit ChiFunction(std::size_t dim) : dim_(dim) {}
  void add_piece(double intercept, std::span<const double> slope);
  double operator()(std::span<const double> y) const;
  // Slopes of the pieces within tol of the maximum at y.
  std::vector<std::vector<double>> active_slopes(std::span<const double> y, double tol) const;
  std::size_t pieces() const noexcept { return intercept_.size(); }

 private:
  std::size_t dim_;
  std::vector<double> intercept_;
  std::vector<double> slope_;
};

// chi_1 is identically zero and stored as a single flat piece.
std::vector<ChiFunction> chi_functions(const DualCertificate& cert, const PathGrid& grid);

struct ChiTable {
  std::vector<double> anchor;
  // values[t] over the states of S_t, 0-based t = 1..N-1 (values[0] is chi_1 = 0).
  std::vector<std::vector<double>> values;
  std::vector<double> at_anchor;         // chi_t(a), same indexing
  double min_value = 0.0;                // over t >= 2 and grid states
  // max over t < N and x in S_t of chi_t(x) + phi_t(x) - chi_{t+1}(x).
  double monotonicity_violation = 0.0;
  // For t >= 2: integral of chi_t against mu_t^(x) - mu_{t-1}^(x) (product laws).
  std::vector<double> integrals;
};

ChiTable compute_chi(const DualCertificate& cert, const VmotInstance& instance,
                     std::optional<std::vector<double>> anchor = std::nullopt);

// H_t(xbar_t, .) sampled on the states of S_{t+1}, per partial path.
struct EnvelopeTable {
  // layers[t][prefix * |S_{t+1}| + state], 0-based t = 0..N-2.
  std::vector<std::vector<double>> layers;
};

struct EnvelopeRecovery {
  DualCertificate certificate;
  HedgeViolation worst;  // of the recovered certificate
  std::optional<EnvelopeTable> table;
};

// Rebuilds h from phi by the backward convex-envelope recursion
//   H_N = c,  H_t(xbar_t, .) = conv[H_{t+1}(xbar_t, .) - phi_{t+1}],
// taking h_t(xbar_t) as the minimum-norm subgradient of H_t(xbar_t, .) at x_t.
// Every partial path is processed, whatever its mass. Throws
// Error(kDimensionUnsupported) for d >= 3 and Error(kEnvelopeDegenerate) if
// some x_t falls outside the hull of S_{t+1}.
EnvelopeRecovery recover_h_by_envelope(const DualCertificate& cert,
                                       const VmotInstance& instance,
                                       bool keep_table = false);

}  // namespace vmot
