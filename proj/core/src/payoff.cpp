#include "vmot/payoff.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>
#include <vector>

#include "vmot/error.hpp"

namespace vmot {
namespace detail {

enum class Op {
  kConst,
  kVar,       // x[t][i]
  kScalarVar, // bare x
  kNeg,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kAbs,
  kPow,
  kMin,
  kMax,
  kAvgT,
};

// Index value meaning "the period bound by the enclosing avg_t".
inline constexpr int kBoundPeriod = -1;

struct Node {
  Op op = Op::kConst;
  double value = 0.0;
  int period = 0;  // 1-based or kBoundPeriod
  int asset = 0;   // 1-based
  std::vector<std::unique_ptr<Node>> args;
};

}  // namespace detail

namespace {

using detail::Node;
using detail::Op;

class Parser {
 public:
  Parser(std::string_view text, bool scalar) : text_(text), scalar_(scalar) {}

  std::unique_ptr<Node> parse() {
    auto root = expr();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    std::ostringstream os;
    os << "payoff parse error at column " << pos_ + 1 << ": " << msg
       << " in \"" << text_ << "\"";
    throw Error(ErrorKind::kPayoffParseError, os.str());
  }

  void skip_ws() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }

  // Accepts ASCII '-' as well as the UTF-8 minus sign U+2212.
  bool eat_minus() {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == '-') {
      ++pos_;
      return true;
    }
    if (text_.substr(pos_, 3) == "\xE2\x88\x92") {
      pos_ += 3;
      return true;
    }
    return false;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!eat(c)) fail(std::string("expected '") + c + "'");
  }

  static std::unique_ptr<Node> make(Op op) {
    auto n = std::make_unique<Node>();
    n->op = op;
    return n;
  }

  std::unique_ptr<Node> expr() {
    auto lhs = term();
    for (;;) {
      Op op;
      if (eat('+')) {
        op = Op::kAdd;
      } else if (eat_minus()) {
        op = Op::kSub;
      } else {
        return lhs;
      }
      auto n = make(op);
      n->args.push_back(std::move(lhs));
      n->args.push_back(term());
      lhs = std::move(n);
    }
  }

  std::unique_ptr<Node> term() {
    auto lhs = unary();
    for (;;) {
      Op op;
      if (eat('*')) {
        op = Op::kMul;
      } else if (eat('/')) {
        op = Op::kDiv;
      } else {
        return lhs;
      }
      auto n = make(op);
      n->args.push_back(std::move(lhs));
      n->args.push_back(unary());
      lhs = std::move(n);
    }
  }

  std::unique_ptr<Node> unary() {
    if (eat_minus()) {
      auto n = make(Op::kNeg);
      n->args.push_back(unary());
      return n;
    }
    if (eat('+')) return unary();
    return primary();
  }

  std::string identifier() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
            text_[pos_] == '_')) {
      ++pos_;
    }
    return std::string(text_.substr(start, pos_ - start));
  }

  int index(bool allow_bound) {
    expect('[');
    skip_ws();
    int value = 0;
    if (pos_ < text_.size() && text_[pos_] == 't') {
      if (!allow_bound) fail("period index 't' is only valid inside avg_t");
      ++pos_;
      value = detail::kBoundPeriod;
    } else {
      const char* first = text_.data() + pos_;
      const char* last = text_.data() + text_.size();
      auto [ptr, ec] = std::from_chars(first, last, value);
      if (ec != std::errc() || value < 1) fail("expected a positive integer index");
      pos_ += static_cast<std::size_t>(ptr - first);
    }
    expect(']');
    return value;
  }

  std::unique_ptr<Node> number() {
    skip_ws();
    const char* first = text_.data() + pos_;
    const char* last = text_.data() + text_.size();
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc()) fail("expected a number");
    pos_ += static_cast<std::size_t>(ptr - first);
    auto n = make(Op::kConst);
    n->value = value;
    return n;
  }

  std::unique_ptr<Node> call(Op op, std::size_t min_args, std::size_t max_args) {
    expect('(');
    auto n = make(op);
    if (op == Op::kAvgT) ++avg_depth_;
    n->args.push_back(expr());
    while (eat(',')) n->args.push_back(expr());
    if (op == Op::kAvgT) --avg_depth_;
    expect(')');
    if (n->args.size() < min_args || n->args.size() > max_args) {
      fail("wrong number of arguments");
    }
    return n;
  }

  std::unique_ptr<Node> primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of expression");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      auto inner = expr();
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    const std::size_t start = pos_;
    const std::string id = identifier();
    if (id == "x") {
      skip_ws();
      if (pos_ < text_.size() && text_[pos_] == '[') {
        if (scalar_) fail("bound expressions take a bare x, not x[t][i]");
        auto n = make(Op::kVar);
        n->period = index(avg_depth_ > 0);
        n->asset = index(false);
        return n;
      }
      if (!scalar_) fail("x must be indexed as x[t][i]");
      return make(Op::kScalarVar);
    }
    if (id == "abs") return call(Op::kAbs, 1, 1);
    if (id == "pow") return call(Op::kPow, 2, 2);
    if (id == "min") return call(Op::kMin, 2, SIZE_MAX);
    if (id == "max") return call(Op::kMax, 2, SIZE_MAX);
    if (id == "avg_t") {
      if (avg_depth_ > 0) fail("nested avg_t is not supported");
      return call(Op::kAvgT, 1, 1);
    }
    pos_ = start;
    fail(id.empty() ? "unexpected character" : "unknown identifier '" + id + "'");
  }

  std::string_view text_;
  bool scalar_;
  std::size_t pos_ = 0;
  int avg_depth_ = 0;
};

struct EvalContext {
  std::span<const double> path;
  std::size_t d;
  std::size_t n_periods;
  int bound_period;
  double scalar;
};

double eval(const Node& n, const EvalContext& ctx) {
  switch (n.op) {
    case Op::kConst:
      return n.value;
    case Op::kVar: {
      const int t = n.period == detail::kBoundPeriod ? ctx.bound_period : n.period;
      return ctx.path[static_cast<std::size_t>(t - 1) * ctx.d +
                      static_cast<std::size_t>(n.asset - 1)];
    }
    case Op::kScalarVar:
      return ctx.scalar;
    case Op::kNeg:
      return -eval(*n.args[0], ctx);
    case Op::kAdd:
      return eval(*n.args[0], ctx) + eval(*n.args[1], ctx);
    case Op::kSub:
      return eval(*n.args[0], ctx) - eval(*n.args[1], ctx);
    case Op::kMul:
      return eval(*n.args[0], ctx) * eval(*n.args[1], ctx);
    case Op::kDiv:
      return eval(*n.args[0], ctx) / eval(*n.args[1], ctx);
    case Op::kAbs:
      return std::abs(eval(*n.args[0], ctx));
    case Op::kPow:
      return std::pow(eval(*n.args[0], ctx), eval(*n.args[1], ctx));
    case Op::kMin: {
      double v = eval(*n.args[0], ctx);
      for (std::size_t k = 1; k < n.args.size(); ++k) {
        v = std::min(v, eval(*n.args[k], ctx));
      }
      return v;
    }
    case Op::kMax: {
      double v = eval(*n.args[0], ctx);
      for (std::size_t k = 1; k < n.args.size(); ++k) {
        v = std::max(v, eval(*n.args[k], ctx));
      }
      return v;
    }
    case Op::kAvgT: {
      double acc = 0.0;
      EvalContext inner = ctx;
      for (std::size_t t = 1; t <= ctx.n_periods; ++t) {
        inner.bound_period = static_cast<int>(t);
        acc += eval(*n.args[0], inner);
      }
      return acc / static_cast<double>(ctx.n_periods);
    }
  }
  return 0.0;
}

void check_node(const Node& n, std::size_t n_periods, std::size_t n_assets,
                const std::string& text) {
  if (n.op == Op::kVar) {
    const bool period_ok = n.period == detail::kBoundPeriod ||
                           static_cast<std::size_t>(n.period) <= n_periods;
    if (!period_ok || static_cast<std::size_t>(n.asset) > n_assets) {
      std::ostringstream os;
      os << "payoff \"" << text << "\" references x[" << n.period << "]["
         << n.asset << "] outside N=" << n_periods << ", d=" << n_assets;
      throw Error(ErrorKind::kPayoffParseError, os.str());
    }
  }
  for (const auto& a : n.args) check_node(*a, n_periods, n_assets, text);
}

}  // namespace

Payoff Payoff::parse(std::string_view text) {
  Payoff p;
  p.text_ = std::string(text);
  p.root_ = Parser(text, false).parse();
  return p;
}

Payoff Payoff::parse_scalar(std::string_view text) {
  Payoff p;
  p.text_ = std::string(text);
  p.root_ = Parser(text, true).parse();
  p.scalar_ = true;
  return p;
}

Payoff Payoff::from_callback(Callback fn, std::string label) {
  Payoff p;
  p.text_ = std::move(label);
  p.callback_ = std::move(fn);
  return p;
}

void Payoff::check_dimensions(std::size_t n_periods, std::size_t n_assets) const {
  if (root_) check_node(*root_, n_periods, n_assets, text_);
}

double Payoff::evaluate(std::span<const double> path, std::size_t n_assets) const {
  if (callback_) return callback_(path, n_assets);
  const EvalContext ctx{path, n_assets, path.size() / n_assets, 0, 0.0};
  return eval(*root_, ctx);
}

double Payoff::evaluate_scalar(double x) const {
  const EvalContext ctx{{}, 1, 0, 0, x};
  return eval(*root_, ctx);
}

}  // namespace vmot
