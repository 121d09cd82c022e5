#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vmot/marginal.hpp"
#include "vmot/payoff.hpp"

namespace vmot {

enum class Direction { kMin, kMax };

inline double sign_of(Direction dir) { return dir == Direction::kMin ? 1.0 : -1.0; }
const char* to_string(Direction dir);
Direction parse_direction(std::string_view text);

// N x d array of one-dimensional marginals, indexed [t][i] with 0-based t and
// i. Convex order between consecutive maturities is checked by
// validate_convex_order(), not at construction, so that infeasible systems
// can still be probed.
class MarginalSystem {
 public:
  explicit MarginalSystem(std::vector<std::vector<DiscreteMarginal>> marginals);

  std::size_t periods() const noexcept { return marginals_.size(); }
  std::size_t assets() const noexcept { return marginals_.front().size(); }
  const DiscreteMarginal& at(std::size_t t, std::size_t i) const {
    return marginals_[t][i];
  }
  const std::vector<std::vector<DiscreteMarginal>>& marginals() const noexcept {
    return marginals_;
  }

  // Throws ConvexOrderViolation (1-based t, i) on the first failing pair.
  void validate_convex_order() const;

  friend bool operator==(const MarginalSystem&, const MarginalSystem&) = default;

 private:
  std::vector<std::vector<DiscreteMarginal>> marginals_;
};

// The product grid S_1 x ... x S_N with S_t = S_{t,1} x ... x S_{t,d}.
// Paths are numbered row-major over (t, i, atom index), the last asset of the
// last period varying fastest. The paths extending a partial path of length t
// therefore occupy one contiguous block of width suffix_size(t).
class PathGrid {
 public:
  static constexpr std::size_t kDefaultPathBudget = std::size_t{1} << 22;

  // Throws Error(kGridBudgetExceeded).
  PathGrid(const MarginalSystem& system, std::size_t path_budget);

  std::size_t periods() const noexcept { return periods_; }
  std::size_t assets() const noexcept { return assets_; }
  std::size_t path_count() const noexcept { return path_count_; }
  std::size_t atoms(std::size_t t, std::size_t i) const {
    return radix_[t * assets_ + i];
  }
  // Number of states of S_t (product over assets).
  std::size_t period_size(std::size_t t) const { return period_size_[t]; }
  // Number of partial paths (x_1..x_t) with t periods, t in 0..N.
  std::size_t prefix_count(std::size_t t) const { return prefix_count_[t]; }
  // Number of full paths extending one partial path of t periods.
  std::size_t suffix_size(std::size_t t) const {
    return path_count_ / prefix_count_[t];
  }

  std::size_t atom_of(std::size_t path, std::size_t t, std::size_t i) const {
    const std::size_t k = t * assets_ + i;
    return (path / stride_[k]) % radix_[k];
  }
  // Index of the partial path (x_1, ..., x_t) among prefix_count(t) ones.
  std::size_t prefix_of(std::size_t path, std::size_t t) const {
    return path / suffix_size(t);
  }
  // Index of x_t within S_t.
  std::size_t state_of(std::size_t path, std::size_t t) const {
    return prefix_of(path, t + 1) % period_size_[t];
  }
  // Atom index of asset i within a state of S_t.
  std::size_t atom_of_state(std::size_t state, std::size_t t, std::size_t i) const;

  // Fills out[t*d + i] with the point values of the path.
  void path_values(std::size_t path, std::span<double> out) const;
  // Point values of one state of S_t.
  void state_values(std::size_t t, std::size_t state, std::span<double> out) const;
  double point(std::size_t t, std::size_t i, std::size_t atom) const {
    return points_[t * assets_ + i][atom];
  }

  std::string prefix_key(std::size_t prefix, std::size_t t) const;

 private:
  std::size_t periods_;
  std::size_t assets_;
  std::size_t path_count_ = 1;
  std::vector<std::size_t> radix_;
  std::vector<std::size_t> stride_;
  std::vector<std::size_t> period_size_;
  std::vector<std::size_t> prefix_count_;
  std::vector<std::vector<double>> points_;
};

enum class BoundStatus { kUnchecked, kHolds, kViolated };

struct InstanceOptions {
  std::size_t path_budget = PathGrid::kDefaultPathBudget;
  // Optional per-(t, i) bound functions v_{t,i} in scalar form.
  std::optional<std::vector<std::vector<Payoff>>> bounds;
};

class VmotInstance {
 public:
  VmotInstance(MarginalSystem system, PathGrid grid, Payoff payoff,
               Direction direction);

  const MarginalSystem& system() const noexcept { return system_; }
  const PathGrid& grid() const noexcept { return grid_; }
  const Payoff& payoff() const noexcept { return payoff_; }
  Direction direction() const noexcept { return direction_; }
  std::size_t periods() const noexcept { return grid_.periods(); }
  std::size_t assets() const noexcept { return grid_.assets(); }

  // Full cost table, evaluated on first use. Throws NonFiniteCost.
  std::span<const double> costs() const;
  double cost(std::size_t path) const { return costs()[path]; }

  BoundStatus bound_status() const noexcept { return bound_status_; }
  std::optional<std::size_t> bound_violation_path() const noexcept {
    return bound_violation_;
  }

  VmotInstance with_direction(Direction dir) const;

 private:
  friend VmotInstance build_instance(MarginalSystem, Payoff, Direction,
                                     const InstanceOptions&);
  struct CostCache;

  MarginalSystem system_;
  PathGrid grid_;
  Payoff payoff_;
  Direction direction_;
  BoundStatus bound_status_ = BoundStatus::kUnchecked;
  std::optional<std::size_t> bound_violation_;
  std::shared_ptr<CostCache> cache_;
};

// Throws ConvexOrderViolation, Error(kGridBudgetExceeded),
// Error(kPayoffParseError) and NonFiniteCost (the latter only when bounds are
// supplied, which forces evaluation).
VmotInstance build_instance(MarginalSystem system, Payoff payoff,
                            Direction direction,
                            const InstanceOptions& options = {});

double eval_payoff(const VmotInstance& instance, std::size_t path);

}  // namespace vmot
