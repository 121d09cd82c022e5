#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "vmot/coupling.hpp"
#include "vmot/instance.hpp"
#include "vmot/simplex.hpp"

namespace vmot {

enum class RowKind { kMarginal, kMartingale };

// t and asset are 0-based. For marginal rows `index` is the atom; for
// martingale rows it is the conditioning prefix (full history) or the state
// of S_t (Markov variant).
struct RowTag {
  RowKind kind;
  std::size_t t;
  std::size_t asset;
  std::size_t index;
};

struct LpTableau {
  lp::LinearProgram program{0};
  std::vector<RowTag> rows;
  // Raw cost table; the direction sign is applied by solve_exact.
  std::vector<double> costs;
  Conditioning conditioning = Conditioning::kFullHistory;
  std::size_t periods = 0;
  std::size_t assets = 0;
  std::size_t path_count = 0;
  std::size_t marginal_rows_total = 0;    // before dropping redundant ones
  std::size_t marginal_rows_dropped = 0;  // one per (t, i) except (1, 1)
  std::size_t martingale_rows = 0;
  std::size_t martingale_rows_trivial = 0;  // all-zero rows, omitted
};

struct ExactOptions {
  // The dense-inverse simplex is meant for desk-scale grids.
  std::size_t path_budget = 100'000;
  Conditioning conditioning = Conditioning::kFullHistory;
  lp::Options simplex{};
};

// Throws Error(kGridBudgetExceeded).
LpTableau assemble_lp(const VmotInstance& instance, const ExactOptions& options = {});

struct ExactSolution {
  double value = 0.0;
  Coupling coupling;
  // Row multipliers in the sign convention of `direction`: for MIN they
  // satisfy A^T y <= c, for MAX A^T y >= c.
  std::vector<double> duals;
  Direction direction = Direction::kMin;
  lp::Solution raw;
};

// Throws Error(kInfeasible), Error(kUnbounded) or Error(kIterationLimit).
ExactSolution solve_exact(const LpTableau& tableau, Direction direction,
                          const lp::Options& options = {});

// Phase-one feasibility of the martingale transport set. Does not require
// (or check) convex order. Throws Error(kGridBudgetExceeded).
bool feasibility_probe(const MarginalSystem& system,
                       std::size_t path_budget = ExactOptions{}.path_budget,
                       Conditioning conditioning = Conditioning::kFullHistory);

// Further optimal couplings: vertices of the optimal face found by
// minimising seeded random objectives over the zero-reduced-cost columns.
// Duplicates are removed; the input optimum is not repeated.
std::vector<Coupling> alternate_optima(const LpTableau& tableau,
                                       const ExactSolution& solution,
                                       std::size_t count, std::uint64_t seed);

// CPLEX LP text format, one variable p<k> per path.
void export_lp(const LpTableau& tableau, Direction direction, std::ostream& out);

}  // namespace vmot
