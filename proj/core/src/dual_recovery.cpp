#include "vmot/dual_recovery.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "vmot/envelope.hpp"
#include "vmot/error.hpp"

namespace vmot {
namespace {

DualCertificate negated(DualCertificate cert) {
  for (auto& legs : cert.phi) {
    for (auto& leg : legs) {
      for (double& v : leg) v = -v;
    }
  }
  for (auto& table : cert.h) {
    for (double& v : table) v = -v;
  }
  return cert;
}

double cost_scale(const VmotInstance& instance) {
  double m = 1.0;
  for (double c : instance.costs()) m = std::max(m, std::abs(c));
  return m;
}

}  // namespace

DualCertificate certificate_from_lp(const LpTableau& tableau, const ExactSolution& solution,
                                    const VmotInstance& instance, double tol) {
  const PathGrid& grid = instance.grid();
  const std::size_t d = grid.assets();
  if (tableau.path_count != grid.path_count() || solution.duals.size() != tableau.rows.size()) {
    throw Error(ErrorKind::kMismatchedInstance, "LP duals do not belong to this instance");
  }
  DualCertificate cert = zero_certificate(grid, solution.direction);
  cert.source = "exact";
  for (std::size_t r = 0; r < tableau.rows.size(); ++r) {
    const RowTag& tag = tableau.rows[r];
    const double y = solution.duals[r];
    if (tag.kind == RowKind::kMarginal) {
      cert.phi[tag.t][tag.asset][tag.index] = y;
    } else if (tableau.conditioning == Conditioning::kFullHistory) {
      cert.h[tag.t][tag.index * d + tag.asset] = y;
    } else {
      // Markov row: tag.index is a state of S_t; copy to every history ending there.
      const std::size_t states = grid.period_size(tag.t);
      for (std::size_t pre = tag.index; pre < grid.prefix_count(tag.t + 1); pre += states) {
        cert.h[tag.t][pre * d + tag.asset] = y;
      }
    }
  }

  const double bound = tol * cost_scale(instance);
  const HedgeViolation worst = worst_hedge_violation(cert, instance);
  if (worst.amount > bound) {
    std::ostringstream os;
    os << "LP duals violate the " << (cert.direction == Direction::kMin ? "sub" : "super")
       << "hedging inequality by " << worst.amount << " on path " << worst.path;
    throw Error(ErrorKind::kInconsistentDuals, os.str());
  }
  const double value = dual_value(cert, instance.system());
  if (std::abs(value - solution.value) > bound) {
    std::ostringstream os;
    os << "dual value " << value << " differs from the LP value " << solution.value;
    throw Error(ErrorKind::kInconsistentDuals, os.str());
  }
  return cert;
}

std::vector<double> default_anchor(const MarginalSystem& system) {
  std::vector<double> a(system.assets());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = system.at(0, i).mean();
  return a;
}

void ChiFunction::add_piece(double intercept, std::span<const double> slope) {
  intercept_.push_back(intercept);
  slope_.insert(slope_.end(), slope.begin(), slope.end());
}

double ChiFunction::operator()(std::span<const double> y) const {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < intercept_.size(); ++k) {
    double v = intercept_[k];
    for (std::size_t i = 0; i < dim_; ++i) v += slope_[k * dim_ + i] * y[i];
    best = std::max(best, v);
  }
  return best;
}

std::vector<std::vector<double>> ChiFunction::active_slopes(std::span<const double> y,
                                                            double tol) const {
  std::vector<double> vals(intercept_.size());
  for (std::size_t k = 0; k < intercept_.size(); ++k) {
    double v = intercept_[k];
    for (std::size_t i = 0; i < dim_; ++i) v += slope_[k * dim_ + i] * y[i];
    vals[k] = v;
  }
  const double top = *std::max_element(vals.begin(), vals.end());
  std::vector<std::vector<double>> out;
  for (std::size_t k = 0; k < vals.size(); ++k) {
    if (vals[k] >= top - tol) {
      out.emplace_back(slope_.begin() + static_cast<std::ptrdiff_t>(k * dim_),
                       slope_.begin() + static_cast<std::ptrdiff_t>((k + 1) * dim_));
    }
  }
  return out;
}

std::vector<ChiFunction> chi_functions(const DualCertificate& cert, const PathGrid& grid) {
  const std::size_t n_t = grid.periods();
  const std::size_t d = grid.assets();
  std::vector<ChiFunction> chi(n_t, ChiFunction(d));
  chi[0].add_piece(0.0, std::vector<double>(d, 0.0));

  // w[p]: accumulated payout of the partial path p up to and including the
  // static leg of its last period.
  std::vector<double> w(grid.period_size(0));
  for (std::size_t s = 0; s < w.size(); ++s) w[s] = phi_sum(cert, grid, 0, s);
  std::vector<double> here(d);
  std::vector<double> next(d);
  for (std::size_t k = 0; k + 1 < n_t; ++k) {
    const std::size_t states = grid.period_size(k);
    const std::size_t next_states = grid.period_size(k + 1);
    const bool extend = k + 2 < n_t;
    std::vector<double> w_next(extend ? w.size() * next_states : 0);
    for (std::size_t p = 0; p < w.size(); ++p) {
      grid.state_values(k, p % states, here);
      const std::span<const double> g(cert.h[k].data() + p * d, d);
      double intercept = w[p];
      for (std::size_t i = 0; i < d; ++i) intercept -= g[i] * here[i];
      chi[k + 1].add_piece(intercept, g);
      if (!extend) continue;
      for (std::size_t s = 0; s < next_states; ++s) {
        grid.state_values(k + 1, s, next);
        double v = intercept + phi_sum(cert, grid, k + 1, s);
        for (std::size_t i = 0; i < d; ++i) v += g[i] * next[i];
        w_next[p * next_states + s] = v;
      }
    }
    w = std::move(w_next);
  }
  return chi;
}

DualCertificate gauge_normalize(const DualCertificate& cert, const VmotInstance& instance,
                                std::optional<std::vector<double>> anchor) {
  const PathGrid& grid = instance.grid();
  const MarginalSystem& sys = instance.system();
  check_certificate_shape(cert, grid);
  const std::size_t n_t = grid.periods();
  const std::size_t d = grid.assets();
  const std::vector<double> a = anchor ? *anchor : default_anchor(sys);
  if (a.size() != d) {
    throw Error(ErrorKind::kAnchorOutsideDomain, "anchor dimension does not match the assets");
  }
  for (std::size_t t = 0; t + 1 < n_t; ++t) {
    for (std::size_t i = 0; i < d; ++i) {
      const IrreducibleDomain dom = irreducibility(sys.at(t, i), sys.at(t + 1, i));
      if (!dom.in_interior(a[i])) {
        std::ostringstream os;
        os << "anchor " << a[i] << " of asset " << i + 1 << " is outside the domain ("
           << dom.lower << ", " << dom.upper << ") of maturities " << t + 1 << "->" << t + 2;
        throw Error(ErrorKind::kAnchorOutsideDomain, os.str());
      }
    }
  }

  const bool flip = cert.direction == Direction::kMax;
  DualCertificate work = flip ? negated(cert) : cert;
  const std::vector<ChiFunction> chi = chi_functions(work, grid);

  for (std::size_t t = 1; t < n_t; ++t) {
    const double v = chi[t](a);
    const double tol = 1e-11 * (1.0 + std::abs(v));
    const std::vector<double> g = min_norm_in_hull(chi[t].active_slopes(a, tol));
    // L(y) = v + g.(y - a): out of leg t-1, into leg t, h_{t-1} -= g.
    for (std::size_t i = 0; i < d; ++i) {
      const double c0 = i == 0 ? v : 0.0;
      for (std::size_t k = 0; k < grid.atoms(t - 1, i); ++k) {
        work.phi[t - 1][i][k] -= c0 + g[i] * (grid.point(t - 1, i, k) - a[i]);
      }
      for (std::size_t k = 0; k < grid.atoms(t, i); ++k) {
        work.phi[t][i][k] += c0 + g[i] * (grid.point(t, i, k) - a[i]);
      }
    }
    auto& h = work.h[t - 1];
    for (std::size_t p = 0; p < grid.prefix_count(t); ++p) {
      for (std::size_t i = 0; i < d; ++i) h[p * d + i] -= g[i];
    }
  }

  for (std::size_t t = 0; t < n_t; ++t) {
    for (std::size_t i = 1; i < d; ++i) {
      const auto wts = sys.at(t, i).weights();
      double m = 0.0;
      for (std::size_t k = 0; k < wts.size(); ++k) m += wts[k] * work.phi[t][i][k];
      for (double& v : work.phi[t][i]) v -= m;
      for (double& v : work.phi[t][0]) v += m;
    }
  }

  DualCertificate out = flip ? negated(std::move(work)) : std::move(work);
  out.anchor = a;
  return out;
}

ChiTable compute_chi(const DualCertificate& cert, const VmotInstance& instance,
                     std::optional<std::vector<double>> anchor) {
  const PathGrid& grid = instance.grid();
  const MarginalSystem& sys = instance.system();
  check_certificate_shape(cert, grid);
  const std::size_t n_t = grid.periods();
  const std::size_t d = grid.assets();
  const DualCertificate work = cert.direction == Direction::kMax ? negated(cert) : cert;
  const std::vector<ChiFunction> chi = chi_functions(work, grid);

  ChiTable table;
  table.anchor = anchor ? *anchor : cert.anchor ? *cert.anchor : default_anchor(sys);
  table.values.resize(n_t);
  table.at_anchor.assign(n_t, 0.0);
  table.integrals.assign(n_t, 0.0);
  table.min_value = std::numeric_limits<double>::infinity();
  table.monotonicity_violation = -std::numeric_limits<double>::infinity();

  const auto state_weight = [&](std::size_t t, std::size_t s) {
    double w = 1.0;
    for (std::size_t i = 0; i < d; ++i) {
      w *= sys.at(t, i).weights()[grid.atom_of_state(s, t, i)];
    }
    return w;
  };

  std::vector<double> x(d);
  for (std::size_t t = 0; t < n_t; ++t) {
    table.values[t].resize(grid.period_size(t));
    table.at_anchor[t] = chi[t](table.anchor);
    for (std::size_t s = 0; s < grid.period_size(t); ++s) {
      grid.state_values(t, s, x);
      const double v = chi[t](x);
      table.values[t][s] = v;
      if (t >= 1) {
        table.min_value = std::min(table.min_value, v);
        table.integrals[t] += state_weight(t, s) * v;
      }
      if (t + 1 < n_t) {
        const double gap = v + phi_sum(work, grid, t, s) - chi[t + 1](x);
        table.monotonicity_violation = std::max(table.monotonicity_violation, gap);
      }
    }
    if (t >= 1) {
      for (std::size_t s = 0; s < grid.period_size(t - 1); ++s) {
        grid.state_values(t - 1, s, x);
        table.integrals[t] -= state_weight(t - 1, s) * chi[t](x);
      }
    }
  }
  return table;
}

EnvelopeRecovery recover_h_by_envelope(const DualCertificate& cert,
                                       const VmotInstance& instance, bool keep_table) {
  const PathGrid& grid = instance.grid();
  check_certificate_shape(cert, grid);
  const std::size_t n_t = grid.periods();
  const std::size_t d = grid.assets();
  if (d >= 3) {
    throw Error(ErrorKind::kDimensionUnsupported,
                "envelope recovery supports d <= 2; use the LP certificate instead");
  }
  const double s = sign_of(cert.direction);
  // Work on the subhedging form: MAX problems are negated.
  DualCertificate work = cert.direction == Direction::kMax ? negated(cert) : cert;

  std::vector<double> value(instance.costs().begin(), instance.costs().end());
  for (double& v : value) v *= s;

  EnvelopeTable table;
  if (keep_table) table.layers.resize(n_t - 1);

  std::vector<double> here(d);
  std::vector<double> f;
  std::vector<double> ys;
  std::vector<std::array<double, 2>> ys2;
  for (std::size_t k = n_t - 1; k-- > 0;) {
    const std::size_t next_states = grid.period_size(k + 1);
    const std::size_t prefixes = grid.prefix_count(k + 1);
    std::vector<double> phi_next(next_states);
    ys.resize(next_states);
    ys2.resize(next_states);
    for (std::size_t st = 0; st < next_states; ++st) {
      phi_next[st] = phi_sum(work, grid, k + 1, st);
      std::array<double, 2> y{};
      grid.state_values(k + 1, st, std::span<double>(y.data(), d));
      ys[st] = y[0];
      ys2[st] = y;
    }
    if (keep_table) table.layers[k].resize(prefixes * next_states);

    std::vector<double> value_k(prefixes);
    f.resize(next_states);
    for (std::size_t p = 0; p < prefixes; ++p) {
      for (std::size_t st = 0; st < next_states; ++st) {
        f[st] = value[p * next_states + st] - phi_next[st];
      }
      grid.state_values(k, p % grid.period_size(k), here);
      double* h = work.h[k].data() + p * d;
      if (d == 1) {
        const ConvexEnvelope1D env(ys, f);
        if (!env.contains(here[0])) {
          throw Error(ErrorKind::kEnvelopeDegenerate,
                      "x_t outside the hull of the next support (marginals not in convex order)");
        }
        value_k[p] = env(here[0]);
        h[0] = env.min_norm_subgradient(here[0]);
        if (keep_table) {
          for (std::size_t st = 0; st < next_states; ++st) {
            table.layers[k][p * next_states + st] = env(ys[st]);
          }
        }
      } else {
        const auto pt = convex_envelope_2d(ys2, f, {here[0], here[1]});
        if (!pt) {
          throw Error(ErrorKind::kEnvelopeDegenerate,
                      "x_t outside the hull of the next support (marginals not in convex order)");
        }
        value_k[p] = pt->value;
        h[0] = pt->gradient[0];
        h[1] = pt->gradient[1];
        if (keep_table) {
          for (std::size_t st = 0; st < next_states; ++st) {
            const auto at = convex_envelope_2d(ys2, f, ys2[st]);
            table.layers[k][p * next_states + st] = at->value;
          }
        }
      }
    }
    value = std::move(value_k);
  }

  EnvelopeRecovery out;
  out.certificate = cert.direction == Direction::kMax ? negated(std::move(work)) : std::move(work);
  out.certificate.source = "envelope";
  out.worst = worst_hedge_violation(out.certificate, instance);
  if (keep_table) out.table = std::move(table);
  return out;
}

}  // namespace vmot
