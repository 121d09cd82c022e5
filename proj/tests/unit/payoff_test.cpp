#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "generators.hpp"
#include "vmot/error.hpp"
#include "vmot/payoff.hpp"

using namespace vmot;
namespace gen = vmot::testing;

namespace {

double eval(const std::string& text, const std::vector<double>& x, std::size_t d) {
  return Payoff::parse(text).evaluate(x, d);
}

ErrorKind parse_error(const std::string& text) {
  try {
    Payoff::parse(text);
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::kIo;
}

}  // namespace

TEST(Payoff, ArithmeticAndPrecedence) {
  const std::vector<double> x{1.0, 2.0, 3.0};  // N = 3, d = 1
  EXPECT_DOUBLE_EQ(eval("1 + 2 * 3", x, 1), 7.0);
  EXPECT_DOUBLE_EQ(eval("(1 + 2) * 3", x, 1), 9.0);
  EXPECT_DOUBLE_EQ(eval("8 / 4 / 2", x, 1), 1.0);
  EXPECT_DOUBLE_EQ(eval("2 - 3 - 4", x, 1), -5.0);
  EXPECT_DOUBLE_EQ(eval("--2", x, 1), 2.0);
  EXPECT_DOUBLE_EQ(eval("-x[2][1] * 2", x, 1), -4.0);
  EXPECT_DOUBLE_EQ(eval("1.5e1", x, 1), 15.0);
}

TEST(Payoff, FunctionsAndIndexing) {
  const std::vector<double> x{0.5, -1.0, 2.0, 4.0};  // N = 2, d = 2
  EXPECT_DOUBLE_EQ(eval("x[1][2] - x[2][1]", x, 2), -3.0);
  EXPECT_DOUBLE_EQ(eval("abs(x[1][2])", x, 2), 1.0);
  EXPECT_DOUBLE_EQ(eval("pow(x[2][1], 3)", x, 2), 8.0);
  EXPECT_DOUBLE_EQ(eval("max(x[1][1], x[1][2], x[2][2])", x, 2), 4.0);
  EXPECT_DOUBLE_EQ(eval("min(x[1][1], x[1][2])", x, 2), -1.0);
  EXPECT_DOUBLE_EQ(eval("avg_t(x[t][1])", x, 2), 1.25);
  EXPECT_DOUBLE_EQ(eval("avg_t(x[t][1] * x[t][2])", x, 2), (-0.5 + 8.0) / 2);
}

TEST(Payoff, AcceptsUnicodeMinus) {
  EXPECT_DOUBLE_EQ(eval("3 − 1", {0.0}, 1), 2.0);
}

TEST(Payoff, ParseErrors) {
  for (const char* bad : {"", "1 +", "x[1]", "x[0][1]", "foo(1)", "abs(1, 2)", "max(1)",
                          "(1 + 2", "x[t][1]", "avg_t(avg_t(x[t][1]))", "1 $ 2"}) {
    EXPECT_EQ(parse_error(bad), ErrorKind::kPayoffParseError) << bad;
  }
}

TEST(Payoff, DimensionCheck) {
  const Payoff p = Payoff::parse("x[3][2]");
  EXPECT_NO_THROW(p.check_dimensions(3, 2));
  EXPECT_THROW(p.check_dimensions(2, 2), Error);
  EXPECT_THROW(p.check_dimensions(3, 1), Error);
}

TEST(Payoff, ScalarMode) {
  const Payoff v = Payoff::parse_scalar("1 + abs(x)");
  EXPECT_DOUBLE_EQ(v.evaluate_scalar(-2.0), 3.0);
  EXPECT_THROW(Payoff::parse_scalar("x[1][1]"), Error);
  EXPECT_THROW(Payoff::parse("x + 1"), Error);
}

TEST(Payoff, Callback) {
  const Payoff p = Payoff::from_callback(
      [](std::span<const double> x, std::size_t) { return x[0] * x[1]; }, "product");
  EXPECT_TRUE(p.is_callback());
  EXPECT_DOUBLE_EQ(p.evaluate(std::vector<double>{2.0, 3.0}, 1), 6.0);
}

// Random expression trees compared against a direct evaluation.
TEST(Payoff, RandomTreesMatchReference) {
  gen::Rng rng(31);
  struct Expr {
    std::string text;
    double value;
  };
  const std::vector<double> x{0.25, -0.5, 1.5, 2.0, -1.0, 0.75};  // N = 3, d = 2
  std::function<Expr(int)> grow = [&](int depth) -> Expr {
    std::uniform_int_distribution<int> pick(0, depth > 0 ? 7 : 1);
    switch (pick(rng)) {
      case 0: {
        std::uniform_int_distribution<int> k(-8, 8);
        const double v = k(rng) / 4.0;
        return {"(" + std::to_string(v) + ")", v};
      }
      case 1: {
        std::uniform_int_distribution<int> t(1, 3), i(1, 2);
        const int tt = t(rng), ii = i(rng);
        return {"x[" + std::to_string(tt) + "][" + std::to_string(ii) + "]",
                x[(tt - 1) * 2 + ii - 1]};
      }
      case 2: {
        auto a = grow(depth - 1), b = grow(depth - 1);
        return {"(" + a.text + "+" + b.text + ")", a.value + b.value};
      }
      case 3: {
        auto a = grow(depth - 1), b = grow(depth - 1);
        return {"(" + a.text + "-" + b.text + ")", a.value - b.value};
      }
      case 4: {
        auto a = grow(depth - 1), b = grow(depth - 1);
        return {a.text + "*" + b.text, a.value * b.value};
      }
      case 5: {
        auto a = grow(depth - 1);
        return {"abs(" + a.text + ")", std::abs(a.value)};
      }
      case 6: {
        auto a = grow(depth - 1), b = grow(depth - 1);
        return {"max(" + a.text + "," + b.text + ")", std::max(a.value, b.value)};
      }
      default: {
        auto a = grow(depth - 1), b = grow(depth - 1);
        return {"min(" + a.text + "," + b.text + ")", std::min(a.value, b.value)};
      }
    }
  };
  for (int rep = 0; rep < 300; ++rep) {
    const Expr e = grow(4);
    EXPECT_NEAR(eval(e.text, x, 2), e.value, 1e-12 * (1 + std::abs(e.value))) << e.text;
  }
}
