#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vmot/coupling.hpp"
#include "vmot/instance.hpp"

namespace vmot {

// Static option legs phi[t][i][atom] and trading strategies h. For
// 0-based t < N-1, h[t] is a table over partial paths (x_1..x_{t+1}) with d
// entries each: h[t][prefix * d + i]. The strategy after the last maturity is
// zero by convention and not stored.
//
// For MIN the portfolio payout sum_t [phi_t(x_t) + h_t . (x_{t+1} - x_t)]
// should lie below c on every path, for MAX above.
struct DualCertificate {
  std::vector<std::vector<std::vector<double>>> phi;
  std::vector<std::vector<double>> h;
  Direction direction = Direction::kMin;
  std::string source = "exact";  // exact | entropic | envelope
  std::optional<std::vector<double>> anchor;
  std::optional<double> epsilon;  // entropic certificates only

  std::size_t periods() const noexcept { return phi.size(); }
  std::size_t assets() const noexcept { return phi.empty() ? 0 : phi.front().size(); }

  friend bool operator==(const DualCertificate&, const DualCertificate&) = default;
};

DualCertificate zero_certificate(const PathGrid& grid, Direction direction);

// Throws Error(kMismatchedInstance) when the table shapes do not fit the grid
// or an entry is not finite.
void check_certificate_shape(const DualCertificate& cert, const PathGrid& grid);

// mu(phi): the price of the static legs.
double dual_value(const DualCertificate& cert, const MarginalSystem& system);

// Sum of phi over the assets of period t at one state of S_t.
double phi_sum(const DualCertificate& cert, const PathGrid& grid, std::size_t t,
               std::size_t state);

double payout(const DualCertificate& cert, const PathGrid& grid, std::size_t path);
std::vector<double> payouts(const DualCertificate& cert, const PathGrid& grid);

// Signed hedging error: the largest of sign * (payout - c) over the grid,
// where sign is +1 for MIN. Positive values are violations.
struct HedgeViolation {
  double amount = 0.0;
  std::size_t path = 0;
};
HedgeViolation worst_hedge_violation(const DualCertificate& cert,
                                     const VmotInstance& instance);

// JSON artifacts. Doubles are written in shortest round-trip form, so a
// save/load cycle is bit-exact. Loaders throw Error(kIo) on malformed text and
// Error(kMismatchedInstance) if keys do not match the grid.
std::string certificate_to_json(const DualCertificate& cert, const PathGrid& grid,
                                const std::string& instance_hash);
DualCertificate certificate_from_json(std::string_view text, const PathGrid& grid,
                                      std::string* instance_hash = nullptr);

std::string coupling_to_json(const Coupling& coupling, const std::string& instance_hash);
Coupling coupling_from_json(std::string_view text, const PathGrid& grid,
                            std::string* instance_hash = nullptr);

// Shortest round-trip decimal form, used for the phi point keys.
std::string format_double(double v);

}  // namespace vmot
