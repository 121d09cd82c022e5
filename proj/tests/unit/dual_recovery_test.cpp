#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <limits>

#include "generators.hpp"
#include "vmot/certificate.hpp"
#include "vmot/dual_recovery.hpp"
#include "vmot/envelope.hpp"
#include "vmot/error.hpp"
#include "vmot/exact_solver.hpp"

using namespace vmot;
namespace gen = vmot::testing;

namespace {

struct Solved {
  VmotInstance instance;
  LpTableau tableau;
  ExactSolution solution;
  DualCertificate certificate;
};

Solved solve(const MarginalSystem& sys, const std::string& payoff, Direction dir) {
  VmotInstance inst = gen::make(sys, payoff, dir);
  LpTableau tab = assemble_lp(inst);
  ExactSolution sol = solve_exact(tab, dir);
  DualCertificate cert = certificate_from_lp(tab, sol, inst);
  return {std::move(inst), std::move(tab), std::move(sol), std::move(cert)};
}

double max_payout_change(const DualCertificate& a, const DualCertificate& b, const PathGrid& g) {
  const auto pa = payouts(a, g);
  const auto pb = payouts(b, g);
  double worst = 0.0;
  for (std::size_t p = 0; p < pa.size(); ++p) worst = std::max(worst, std::abs(pa[p] - pb[p]));
  return worst;
}

// Lower convex envelope at q by trying every segment through q.
double brute_envelope_1d(const std::vector<double>& x, const std::vector<double>& f, double q) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < x.size(); ++a) {
    if (x[a] == q) best = std::min(best, f[a]);
    for (std::size_t b = 0; b < x.size(); ++b) {
      if (x[a] < q && q < x[b]) {
        const double w = (q - x[a]) / (x[b] - x[a]);
        best = std::min(best, (1 - w) * f[a] + w * f[b]);
      }
    }
  }
  return best;
}

// Planar envelope: the LP optimum sits on a point, a segment or a triangle.
double brute_envelope_2d(const std::vector<std::array<double, 2>>& y, const std::vector<double>& f,
                         std::array<double, 2> q) {
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = y.size();
  for (std::size_t a = 0; a < n; ++a) {
    if (y[a] == q) best = std::min(best, f[a]);
    for (std::size_t b = a + 1; b < n; ++b) {
      const double dx = y[b][0] - y[a][0], dy = y[b][1] - y[a][1];
      const double len2 = dx * dx + dy * dy;
      const double s = ((q[0] - y[a][0]) * dx + (q[1] - y[a][1]) * dy) / len2;
      const double px = y[a][0] + s * dx - q[0], py = y[a][1] + s * dy - q[1];
      if (s >= 0 && s <= 1 && std::hypot(px, py) < 1e-12) {
        best = std::min(best, (1 - s) * f[a] + s * f[b]);
      }
      for (std::size_t c = b + 1; c < n; ++c) {
        const double det = (y[b][0] - y[a][0]) * (y[c][1] - y[a][1]) -
                           (y[c][0] - y[a][0]) * (y[b][1] - y[a][1]);
        if (std::abs(det) < 1e-12) continue;
        const double l1 = ((q[0] - y[a][0]) * (y[c][1] - y[a][1]) -
                           (y[c][0] - y[a][0]) * (q[1] - y[a][1])) / det;
        const double l2 = ((y[b][0] - y[a][0]) * (q[1] - y[a][1]) -
                           (q[0] - y[a][0]) * (y[b][1] - y[a][1])) / det;
        const double l0 = 1 - l1 - l2;
        if (l0 >= -1e-12 && l1 >= -1e-12 && l2 >= -1e-12) {
          best = std::min(best, l0 * f[a] + l1 * f[b] + l2 * f[c]);
        }
      }
    }
  }
  return best;
}

}  // namespace

TEST(ConvexEnvelope1D, MatchesSegmentOracle) {
  gen::Rng rng(41);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 2 + rep % 7;
    std::vector<double> x(n), f(n);
    for (std::size_t k = 0; k < n; ++k) {
      x[k] = static_cast<double>(k) + 0.5 * u(rng) * 0.4;
      f[k] = u(rng);
    }
    const ConvexEnvelope1D env(x, f);
    const auto at_points = lower_convex_envelope(x, f);
    for (std::size_t k = 0; k < n; ++k) {
      EXPECT_NEAR(at_points[k], brute_envelope_1d(x, f, x[k]), 1e-12);
      EXPECT_LE(at_points[k], f[k] + 1e-15);
    }
    for (double q = x.front(); q <= x.back(); q += 0.13) {
      EXPECT_NEAR(env(q), brute_envelope_1d(x, f, q), 1e-12);
      const auto [lo, hi] = env.subdifferential(q);
      const double g = env.min_norm_subgradient(q);
      EXPECT_LE(lo, g + 1e-15);
      EXPECT_LE(g, hi + 1e-15);
      if (lo <= 0 && 0 <= hi) {
        EXPECT_EQ(g, 0.0);
      }
      // g supports the envelope at q.
      for (std::size_t k = 0; k < n; ++k) EXPECT_LE(env(q) + g * (x[k] - q), f[k] + 1e-9);
    }
    EXPECT_TRUE(std::isinf(env(x.back() + 1.0)));
  }
}

TEST(ConvexEnvelope2D, MatchesTriangleOracle) {
  gen::Rng rng(43);
  std::uniform_int_distribution<int> coord(-3, 3);
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  int inside = 0;
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<std::array<double, 2>> y;
    std::vector<double> f;
    for (int a = -1; a <= 1; ++a) {
      for (int b = -1; b <= 1; ++b) {
        if ((a + b + rep) % 3 == 0 && !(a == 0 && b == 0)) continue;
        y.push_back({a * (1.0 + rep % 3), b * 1.0});
        f.push_back(val(rng));
      }
    }
    const std::array<double, 2> q{coord(rng) / 3.0, coord(rng) / 3.0};
    const auto got = convex_envelope_2d(y, f, q);
    const double expect = brute_envelope_2d(y, f, q);
    if (std::isinf(expect)) {
      EXPECT_FALSE(got.has_value());
      continue;
    }
    ASSERT_TRUE(got.has_value()) << "rep " << rep;
    ++inside;
    EXPECT_NEAR(got->value, expect, 1e-9) << "rep " << rep;
    for (std::size_t k = 0; k < y.size(); ++k) {
      const double lin = got->gradient[0] * (y[k][0] - q[0]) + got->gradient[1] * (y[k][1] - q[1]);
      EXPECT_LE(lin, f[k] - got->value + 1e-8);
    }
  }
  EXPECT_GT(inside, 100);
}

TEST(MinNormInHull, MatchesClosedFormInThePlane) {
  gen::Rng rng(47);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int rep = 0; rep < 300; ++rep) {
    std::vector<std::vector<double>> pts(1 + rep % 3, std::vector<double>(2));
    for (auto& p : pts) p = {u(rng), u(rng)};
    // Oracle: best over vertices and edge projections, or zero if the origin
    // lies inside the triangle.
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < pts.size(); ++a) {
      best = std::min(best, std::hypot(pts[a][0], pts[a][1]));
      for (std::size_t b = a + 1; b < pts.size(); ++b) {
        const double dx = pts[b][0] - pts[a][0], dy = pts[b][1] - pts[a][1];
        const double s = std::clamp(-(pts[a][0] * dx + pts[a][1] * dy) / (dx * dx + dy * dy), 0.0, 1.0);
        best = std::min(best, std::hypot(pts[a][0] + s * dx, pts[a][1] + s * dy));
      }
    }
    if (pts.size() == 3) {
      const auto cross = [](const std::vector<double>& p, const std::vector<double>& q) {
        return p[0] * q[1] - p[1] * q[0];
      };
      const double c0 = cross(pts[0], pts[1]), c1 = cross(pts[1], pts[2]), c2 = cross(pts[2], pts[0]);
      if ((c0 > 0 && c1 > 0 && c2 > 0) || (c0 < 0 && c1 < 0 && c2 < 0)) best = 0.0;
    }
    const auto got = min_norm_in_hull(pts);
    EXPECT_NEAR(std::hypot(got[0], got[1]), best, 1e-9) << "rep " << rep;
  }
  EXPECT_EQ(min_norm_in_hull({{-1.0}, {2.0}})[0], 0.0);
  EXPECT_EQ(min_norm_in_hull({{0.5}, {2.0}})[0], 0.5);
}

TEST(DualRecovery, LpCertificateSubhedgesAndPricesExactly) {
  for (const auto& c : gen::acceptance_cases(61, 12)) {
    for (Direction dir : {Direction::kMin, Direction::kMax}) {
      const Solved s = solve(c.system, c.payoff, dir);
      EXPECT_LE(worst_hedge_violation(s.certificate, s.instance).amount, 1e-9);
      EXPECT_NEAR(dual_value(s.certificate, s.instance.system()), s.solution.value, 1e-9);
      EXPECT_EQ(s.certificate.direction, dir);
      EXPECT_EQ(s.certificate.source, "exact");
    }
  }
}

TEST(DualRecovery, MarkovMultipliersAreSpread) {
  gen::Rng rng(12);
  const MarginalSystem sys = gen::random_system(rng, 1, {2, 3, 4});
  const VmotInstance inst = gen::make(sys, "x[3][1]*x[3][1] - x[2][1]*x[1][1]");
  ExactOptions mk;
  mk.conditioning = Conditioning::kMarkov;
  const LpTableau tab = assemble_lp(inst, mk);
  const ExactSolution sol = solve_exact(tab, Direction::kMin);
  const DualCertificate cert = certificate_from_lp(tab, sol, inst);
  // h depends on the current state only.
  const PathGrid& g = inst.grid();
  for (std::size_t pre = 0; pre < g.prefix_count(2); ++pre) {
    EXPECT_EQ(cert.h[1][pre], cert.h[1][pre % g.period_size(1)]);
  }
  EXPECT_NEAR(dual_value(cert, sys), sol.value, 1e-9);
}

TEST(DualRecovery, InconsistentDualsAreRejected) {
  const Solved s = solve(gen::inst_b_system(), "abs(x[2][1]-x[1][1])", Direction::kMin);
  ExactSolution broken = s.solution;
  for (double& y : broken.duals) y += 1.0;
  try {
    certificate_from_lp(s.tableau, broken, s.instance);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInconsistentDuals);
  }
}

TEST(GaugeNormalize, PreservesPayoutsAndPins) {
  for (const auto& c : gen::acceptance_cases(67, 12)) {
    for (Direction dir : {Direction::kMin, Direction::kMax}) {
      const Solved s = solve(c.system, c.payoff, dir);
      const DualCertificate norm = gauge_normalize(s.certificate, s.instance);
      EXPECT_LE(max_payout_change(s.certificate, norm, s.instance.grid()), 1e-9);
      EXPECT_NEAR(dual_value(norm, s.instance.system()), s.solution.value, 1e-9);
      ASSERT_TRUE(norm.anchor.has_value());
      // Assets 2..d are centred.
      for (std::size_t t = 0; t < s.instance.periods(); ++t) {
        for (std::size_t i = 1; i < s.instance.assets(); ++i) {
          const auto& mu = s.instance.system().at(t, i);
          double m = 0.0;
          for (std::size_t a = 0; a < mu.size(); ++a) m += mu.weights()[a] * norm.phi[t][i][a];
          EXPECT_NEAR(m, 0.0, 1e-10);
        }
      }
      const ChiTable chi = compute_chi(norm, s.instance);
      for (std::size_t t = 1; t < chi.at_anchor.size(); ++t) {
        EXPECT_NEAR(chi.at_anchor[t], 0.0, 1e-9);
        EXPECT_TRUE(std::isfinite(chi.integrals[t]));
      }
      EXPECT_GE(chi.min_value, -1e-9);
      EXPECT_LE(chi.monotonicity_violation, 1e-8);
      // Idempotent.
      const DualCertificate again = gauge_normalize(norm, s.instance);
      EXPECT_LE(max_payout_change(norm, again, s.instance.grid()), 1e-9);
    }
  }
}

TEST(GaugeNormalize, ChiMatchesBruteForceMaximum) {
  gen::Rng rng(71);
  const MarginalSystem sys = gen::random_system(rng, 1, {2, 3, 4});
  const Solved s = solve(sys, "max(x[1][1],x[2][1],x[3][1])", Direction::kMin);
  const DualCertificate norm = gauge_normalize(s.certificate, s.instance);
  const auto chi = chi_functions(norm, s.instance.grid());
  const PathGrid& g = s.instance.grid();
  // chi_3(y) = max over (x1, x2) of phi_1(x1) + h_1(x1)(x2 - x1) + phi_2(x2) + h_2(x1,x2)(y - x2).
  for (double y = -3.0; y <= 3.0; y += 0.25) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < g.atoms(0, 0); ++a) {
      for (std::size_t b = 0; b < g.atoms(1, 0); ++b) {
        const double x1 = g.point(0, 0, a), x2 = g.point(1, 0, b);
        const double v = norm.phi[0][0][a] + norm.h[0][a] * (x2 - x1) + norm.phi[1][0][b] +
                         norm.h[1][a * g.atoms(1, 0) + b] * (y - x2);
        best = std::max(best, v);
      }
    }
    EXPECT_NEAR(chi[2](std::vector<double>{y}), best, 1e-10);
  }
}

TEST(GaugeNormalize, AnchorOutsideDomain) {
  const Solved s = solve(gen::inst_b_system(), "abs(x[2][1]-x[1][1])", Direction::kMin);
  try {
    gauge_normalize(s.certificate, s.instance, std::vector<double>{2.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kAnchorOutsideDomain);
  }
  EXPECT_NO_THROW(gauge_normalize(s.certificate, s.instance, std::vector<double>{0.5}));
  EXPECT_EQ(default_anchor(s.instance.system()), std::vector<double>{0.0});
}

TEST(EnvelopeRecovery, RebuildsHedgeFromStaticLegs) {
  for (const auto& c : gen::acceptance_cases(73, 12)) {
    for (Direction dir : {Direction::kMin, Direction::kMax}) {
      const Solved s = solve(c.system, c.payoff, dir);
      DualCertificate legs = s.certificate;
      for (auto& h : legs.h) std::fill(h.begin(), h.end(), 0.0);
      const EnvelopeRecovery env = recover_h_by_envelope(legs, s.instance, true);
      EXPECT_LE(env.worst.amount, 1e-7) << c.payoff;
      EXPECT_EQ(env.certificate.phi, s.certificate.phi);
      EXPECT_EQ(env.certificate.source, "envelope");
      ASSERT_TRUE(env.table.has_value());
      EXPECT_EQ(env.table->layers.size(), s.instance.periods() - 1);
    }
  }
}

TEST(EnvelopeRecovery, UnsupportedAndDegenerateCases) {
  gen::Rng rng(5);
  const VmotInstance three = gen::make(gen::random_system(rng, 3, {1, 2}), "x[2][1]");
  try {
    recover_h_by_envelope(zero_certificate(three.grid(), Direction::kMin), three);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDimensionUnsupported);
  }
}
