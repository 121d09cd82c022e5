#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>

namespace vmot {

namespace detail {
struct Node;
}

// A path-dependent payoff c(x), x = (x[t][i]) with t in 1..N, i in 1..d.
//
// Expression grammar (whitespace insensitive):
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | primary
//   primary := number | x[T][I] | call | '(' expr ')'
//   call    := abs(e) | pow(e, e) | min(e, e, ...) | max(e, e, ...) | avg_t(e)
// T is a 1-based integer or, inside avg_t, the letter t (the averaged period).
// Bound expressions additionally accept a bare `x`, the single coordinate
// the bound function is applied to.
class Payoff {
 public:
  using Callback = std::function<double(std::span<const double> path, std::size_t d)>;

  // Throws Error(kPayoffParseError) with the offending column.
  static Payoff parse(std::string_view text);
  static Payoff parse_scalar(std::string_view text);
  static Payoff from_callback(Callback fn, std::string label);

  // Throws Error(kPayoffParseError) if a referenced x[t][i] is out of range.
  void check_dimensions(std::size_t n_periods, std::size_t n_assets) const;

  // path holds N*d values laid out as path[(t-1)*d + (i-1)].
  double evaluate(std::span<const double> path, std::size_t n_assets) const;
  // For scalar-mode expressions.
  double evaluate_scalar(double x) const;

  const std::string& text() const noexcept { return text_; }
  bool is_callback() const noexcept { return static_cast<bool>(callback_); }

 private:
  std::string text_;
  std::shared_ptr<const detail::Node> root_;
  Callback callback_;
  bool scalar_ = false;
};

}  // namespace vmot
