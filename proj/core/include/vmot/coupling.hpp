#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "vmot/instance.hpp"

namespace vmot {

// A sparse joint law on the path grid: (flat path index, mass) pairs sorted
// by path index with strictly positive masses.
class Coupling {
 public:
  using Atom = std::pair<std::size_t, double>;

  Coupling() = default;
  // Sorts, merges repeated paths and drops masses <= 0.
  explicit Coupling(std::vector<Atom> atoms);
  // From a dense mass vector, keeping entries above `floor`.
  static Coupling from_dense(const std::vector<double>& dense, double floor = 0.0);

  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  std::size_t support_size() const noexcept { return atoms_.size(); }
  double mass(std::size_t path) const;
  double total_mass() const;

  friend bool operator==(const Coupling&, const Coupling&) = default;

 private:
  std::vector<Atom> atoms_;
};

enum class Conditioning {
  kFullHistory,  // E[X_{t+1} | X_1..X_t] = X_t
  kMarkov,       // E[X_{t+1} | X_t] = X_t
};

struct CouplingDiagnostics {
  double mass_error = 0.0;           // |sum - 1|
  double marginal_tv = 0.0;          // max over (t, i) of total variation
  double martingale_residual = 0.0;  // max conditional-mean error
  std::size_t worst_martingale_prefix = 0;
  std::size_t worst_martingale_period = 0;  // 0-based t of the conditioning
};

// Conditional means are only assessed on conditioning events with mass at
// least `mass_floor`.
CouplingDiagnostics check_coupling(const VmotInstance& instance,
                                   const Coupling& coupling,
                                   double mass_floor = 1e-12,
                                   Conditioning conditioning = Conditioning::kFullHistory);

double expected_cost(const VmotInstance& instance, const Coupling& coupling);

}  // namespace vmot
