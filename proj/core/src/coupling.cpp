#include "vmot/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace vmot {

Coupling::Coupling(std::vector<Atom> atoms) {
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& a, const Atom& b) { return a.first < b.first; });
  for (const Atom& a : atoms) {
    if (!atoms_.empty() && atoms_.back().first == a.first) {
      atoms_.back().second += a.second;
    } else {
      atoms_.push_back(a);
    }
  }
  std::erase_if(atoms_, [](const Atom& a) { return !(a.second > 0.0); });
}

Coupling Coupling::from_dense(const std::vector<double>& dense, double floor) {
  std::vector<Atom> atoms;
  for (std::size_t p = 0; p < dense.size(); ++p) {
    if (dense[p] > floor) atoms.emplace_back(p, dense[p]);
  }
  Coupling c;
  c.atoms_ = std::move(atoms);
  return c;
}

double Coupling::mass(std::size_t path) const {
  auto it = std::lower_bound(atoms_.begin(), atoms_.end(), path,
                             [](const Atom& a, std::size_t p) { return a.first < p; });
  return it != atoms_.end() && it->first == path ? it->second : 0.0;
}

double Coupling::total_mass() const {
  double acc = 0.0;
  for (const Atom& a : atoms_) acc += a.second;
  return acc;
}

CouplingDiagnostics check_coupling(const VmotInstance& instance,
                                   const Coupling& coupling, double mass_floor,
                                   Conditioning conditioning) {
  const PathGrid& grid = instance.grid();
  const std::size_t n_t = grid.periods();
  const std::size_t d = grid.assets();
  CouplingDiagnostics diag;
  diag.mass_error = std::abs(coupling.total_mass() - 1.0);

  for (std::size_t t = 0; t < n_t; ++t) {
    for (std::size_t i = 0; i < d; ++i) {
      std::vector<double> pushed(grid.atoms(t, i), 0.0);
      for (const auto& [p, m] : coupling.atoms()) pushed[grid.atom_of(p, t, i)] += m;
      const auto w = instance.system().at(t, i).weights();
      double tv = 0.0;
      for (std::size_t a = 0; a < pushed.size(); ++a) tv += std::abs(pushed[a] - w[a]);
      diag.marginal_tv = std::max(diag.marginal_tv, 0.5 * tv);
    }
  }

  std::vector<double> x(n_t * d);
  for (std::size_t t = 0; t + 1 < n_t; ++t) {
    // key -> (mass, sum over i of mass * next, current point)
    struct Acc {
      double mass = 0.0;
      std::vector<double> next;
      std::vector<double> here;
    };
    std::unordered_map<std::size_t, Acc> groups;
    for (const auto& [p, m] : coupling.atoms()) {
      const std::size_t key = conditioning == Conditioning::kFullHistory
                                  ? grid.prefix_of(p, t + 1)
                                  : grid.state_of(p, t);
      grid.path_values(p, x);
      Acc& acc = groups[key];
      if (acc.next.empty()) {
        acc.next.assign(d, 0.0);
        acc.here.assign(x.begin() + static_cast<std::ptrdiff_t>(t * d),
                        x.begin() + static_cast<std::ptrdiff_t>((t + 1) * d));
      }
      acc.mass += m;
      for (std::size_t i = 0; i < d; ++i) acc.next[i] += m * x[(t + 1) * d + i];
    }
    for (const auto& [key, acc] : groups) {
      if (acc.mass < mass_floor) continue;
      for (std::size_t i = 0; i < d; ++i) {
        const double r = std::abs(acc.next[i] / acc.mass - acc.here[i]);
        if (r > diag.martingale_residual) {
          diag.martingale_residual = r;
          diag.worst_martingale_prefix = key;
          diag.worst_martingale_period = t;
        }
      }
    }
  }
  return diag;
}

double expected_cost(const VmotInstance& instance, const Coupling& coupling) {
  const auto costs = instance.costs();
  double acc = 0.0;
  for (const auto& [p, m] : coupling.atoms()) acc += m * costs[p];
  return acc;
}

}  // namespace vmot
