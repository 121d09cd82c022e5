#include "vmot/exact_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "vmot/error.hpp"

namespace vmot {
namespace {

constexpr std::size_t kNoRow = std::numeric_limits<std::size_t>::max();

LpTableau assemble(const MarginalSystem& system, const PathGrid& grid,
                   std::vector<double> costs, Conditioning conditioning) {
  const std::size_t n_t = grid.periods();
  const std::size_t d = grid.assets();
  LpTableau tab;
  tab.conditioning = conditioning;
  tab.periods = n_t;
  tab.assets = d;
  tab.path_count = grid.path_count();
  tab.costs = std::move(costs);

  // Marginal rows; the last atom of every (t, i) other than (0, 0) is implied
  // by the others together with total mass one.
  std::vector<std::vector<std::size_t>> marginal_row(n_t * d);
  std::vector<double> rhs;
  for (std::size_t t = 0; t < n_t; ++t) {
    for (std::size_t i = 0; i < d; ++i) {
      const auto& mu = system.at(t, i);
      auto& rows = marginal_row[t * d + i];
      rows.assign(mu.size(), kNoRow);
      tab.marginal_rows_total += mu.size();
      const bool drop_last = !(t == 0 && i == 0);
      for (std::size_t a = 0; a < mu.size(); ++a) {
        if (drop_last && a + 1 == mu.size()) {
          ++tab.marginal_rows_dropped;
          continue;
        }
        rows[a] = tab.rows.size();
        tab.rows.push_back({RowKind::kMarginal, t, i, a});
        rhs.push_back(mu.weights()[a]);
      }
    }
  }

  // Martingale rows. A row is identically zero when S_{t+1,i} is the single
  // point x_{t,i}; such rows are omitted.
  std::vector<std::vector<std::size_t>> martingale_row(n_t > 0 ? n_t - 1 : 0);
  std::vector<double> here(d);
  for (std::size_t t = 0; t + 1 < n_t; ++t) {
    const std::size_t groups = conditioning == Conditioning::kFullHistory
                                   ? grid.prefix_count(t + 1)
                                   : grid.period_size(t);
    auto& rows = martingale_row[t];
    rows.assign(groups * d, kNoRow);
    for (std::size_t g = 0; g < groups; ++g) {
      const std::size_t state = conditioning == Conditioning::kFullHistory
                                    ? g % grid.period_size(t)
                                    : g;
      grid.state_values(t, state, here);
      for (std::size_t i = 0; i < d; ++i) {
        const bool trivial =
            grid.atoms(t + 1, i) == 1 && grid.point(t + 1, i, 0) == here[i];
        if (trivial) {
          ++tab.martingale_rows_trivial;
          continue;
        }
        rows[g * d + i] = tab.rows.size();
        tab.rows.push_back({RowKind::kMartingale, t, i, g});
        rhs.push_back(0.0);
        ++tab.martingale_rows;
      }
    }
  }

  tab.program = lp::LinearProgram(tab.rows.size());
  for (std::size_t r = 0; r < rhs.size(); ++r) tab.program.set_rhs(r, rhs[r]);

  std::vector<lp::Entry> entries;
  std::vector<double> x(n_t * d);
  for (std::size_t p = 0; p < grid.path_count(); ++p) {
    entries.clear();
    grid.path_values(p, x);
    for (std::size_t t = 0; t < n_t; ++t) {
      for (std::size_t i = 0; i < d; ++i) {
        const std::size_t r = marginal_row[t * d + i][grid.atom_of(p, t, i)];
        if (r != kNoRow) entries.push_back({r, 1.0});
      }
    }
    for (std::size_t t = 0; t + 1 < n_t; ++t) {
      const std::size_t g = conditioning == Conditioning::kFullHistory
                                ? grid.prefix_of(p, t + 1)
                                : grid.state_of(p, t);
      for (std::size_t i = 0; i < d; ++i) {
        const std::size_t r = martingale_row[t][g * d + i];
        if (r == kNoRow) continue;
        entries.push_back({r, x[(t + 1) * d + i] - x[t * d + i]});
      }
    }
    std::sort(entries.begin(), entries.end(),
              [](const lp::Entry& a, const lp::Entry& b) { return a.row < b.row; });
    tab.program.add_column(tab.costs[p], entries);
  }
  return tab;
}

[[noreturn]] void throw_status(lp::Status status, const std::string& context) {
  switch (status) {
    case lp::Status::kInfeasible:
      throw Error(ErrorKind::kInfeasible, context + ": martingale transport set is empty");
    case lp::Status::kUnbounded:
      throw Error(ErrorKind::kUnbounded,
                  context + ": LP reported unbounded (internal error for a valid instance)");
    default:
      throw Error(ErrorKind::kIterationLimit, context + ": simplex iteration limit reached");
  }
}

}  // namespace

LpTableau assemble_lp(const VmotInstance& instance, const ExactOptions& options) {
  const PathGrid& grid = instance.grid();
  if (grid.path_count() > options.path_budget) {
    std::ostringstream os;
    os << "exact backend budget is " << options.path_budget << " paths but the grid has "
       << grid.path_count() << "; use the entropic backend";
    throw Error(ErrorKind::kGridBudgetExceeded, os.str());
  }
  const auto c = instance.costs();
  return assemble(instance.system(), grid, std::vector<double>(c.begin(), c.end()),
                  options.conditioning);
}

ExactSolution solve_exact(const LpTableau& tableau, Direction direction,
                          const lp::Options& options) {
  lp::LinearProgram program = tableau.program;
  const double s = sign_of(direction);
  for (std::size_t j = 0; j < program.cols(); ++j) program.set_cost(j, s * tableau.costs[j]);
  lp::Solution raw = lp::solve(program, options);
  if (raw.status != lp::Status::kOptimal) throw_status(raw.status, "solve_exact");

  ExactSolution out;
  out.direction = direction;
  out.value = s * raw.objective;
  out.coupling = Coupling::from_dense(raw.primal);
  out.duals = raw.duals;
  for (double& y : out.duals) y *= s;
  out.raw = std::move(raw);
  return out;
}

bool feasibility_probe(const MarginalSystem& system, std::size_t path_budget,
                       Conditioning conditioning) {
  const PathGrid grid(system, path_budget);
  LpTableau tab = assemble(system, grid, std::vector<double>(grid.path_count(), 0.0),
                           conditioning);
  lp::Options opt;
  opt.phase_one_only = true;
  const lp::Solution sol = lp::solve(tab.program, opt);
  if (sol.status == lp::Status::kIterationLimit) throw_status(sol.status, "feasibility_probe");
  return sol.status == lp::Status::kOptimal;
}

std::vector<Coupling> alternate_optima(const LpTableau& tableau,
                                       const ExactSolution& solution,
                                       std::size_t count, std::uint64_t seed) {
  const double s = sign_of(solution.direction);
  // Duals in the minimisation convention.
  std::vector<double> y = solution.duals;
  for (double& v : y) v *= s;
  std::vector<std::size_t> face;
  double scale = 1.0;
  for (double c : tableau.costs) scale = std::max(scale, std::abs(c));
  for (std::size_t j = 0; j < tableau.program.cols(); ++j) {
    const double reduced = s * tableau.costs[j] - tableau.program.column_dot(j, y);
    if (reduced <= 1e-9 * scale) face.push_back(j);
  }

  lp::LinearProgram restricted(tableau.program.rows());
  for (std::size_t r = 0; r < restricted.rows(); ++r) {
    restricted.set_rhs(r, tableau.program.rhs(r));
  }
  std::vector<lp::Entry> entries;
  for (std::size_t j : face) {
    entries.clear();
    const auto rows = tableau.program.column_rows(j);
    const auto vals = tableau.program.column_values(j);
    for (std::size_t k = 0; k < rows.size(); ++k) entries.push_back({rows[k], vals[k]});
    restricted.add_column(0.0, entries);
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<Coupling> out;
  std::set<std::vector<std::size_t>> seen;
  {
    std::vector<std::size_t> support;
    for (const auto& [p, m] : solution.coupling.atoms()) {
      if (m > 1e-12) support.push_back(p);
    }
    seen.insert(support);
  }
  for (std::size_t attempt = 0; attempt < 4 * count && out.size() < count; ++attempt) {
    for (std::size_t k = 0; k < face.size(); ++k) restricted.set_cost(k, unif(rng));
    const lp::Solution sol = lp::solve(restricted);
    if (sol.status != lp::Status::kOptimal) continue;
    std::vector<Coupling::Atom> atoms;
    std::vector<std::size_t> support;
    for (std::size_t k = 0; k < face.size(); ++k) {
      if (sol.primal[k] > 0.0) {
        atoms.emplace_back(face[k], sol.primal[k]);
        if (sol.primal[k] > 1e-12) support.push_back(face[k]);
      }
    }
    if (seen.insert(support).second) out.emplace_back(std::move(atoms));
  }
  return out;
}

void export_lp(const LpTableau& tableau, Direction direction, std::ostream& out) {
  out.precision(17);
  out << "\\ martingale transport LP: " << tableau.path_count << " paths, "
      << tableau.rows.size() << " rows\n";
  out << (direction == Direction::kMin ? "Minimize\n" : "Maximize\n");
  out << " obj:";
  for (std::size_t j = 0; j < tableau.costs.size(); ++j) {
    const double c = tableau.costs[j];
    out << (c < 0 ? " - " : " + ") << std::abs(c) << " p" << j;
    if (j % 8 == 7) out << "\n     ";
  }
  out << "\nSubject To\n";
  // Transpose the column store into rows.
  const auto& prog = tableau.program;
  std::vector<std::vector<std::pair<std::size_t, double>>> rows(prog.rows());
  for (std::size_t j = 0; j < prog.cols(); ++j) {
    const auto r = prog.column_rows(j);
    const auto v = prog.column_values(j);
    for (std::size_t k = 0; k < r.size(); ++k) rows[r[k]].emplace_back(j, v[k]);
  }
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const RowTag& tag = tableau.rows[r];
    out << ' ' << (tag.kind == RowKind::kMarginal ? "marg_" : "mart_") << tag.t + 1 << '_'
        << tag.asset + 1 << '_' << tag.index << ':';
    std::size_t n = 0;
    for (const auto& [j, v] : rows[r]) {
      out << (v < 0 ? " - " : " + ") << std::abs(v) << " p" << j;
      if (++n % 8 == 0) out << "\n    ";
    }
    out << " = " << prog.rhs(r) << '\n';
  }
  out << "End\n";
}

}  // namespace vmot
