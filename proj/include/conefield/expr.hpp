#pragma once

// Scalar expression language for field components.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' expo)?          right associative
//   expo    := ('-' | '+') expo | power
//   primary := number | 'pi' | 'e' | 'x1'..'x4' | func '(' expr ')' | '(' expr ')'
//   func    := exp | log | sqrt | sin | cos | tanh | abs
//
// Division and log are not checked at parse time; callers check evaluated
// samples for finiteness.

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>

#include "conefield/linalg.hpp"

namespace conefield {

inline constexpr std::size_t kMaxExpressionBytes = 64 * 1024;

namespace detail {
struct Program;
}

class ScalarField {
 public:
  ScalarField() = default;

  double operator()(std::span<const double> x) const;
  double operator()(const Point& x) const { return (*this)(std::span<const double>(x)); }

  // Fully parenthesised rendering; re-parsing it yields the same tree.
  std::string to_string() const;
  const std::string& source() const;
  // Highest variable index referenced (x3 -> 3), 0 for constants.
  int max_variable() const;
  bool valid() const { return program_ != nullptr; }

 private:
  friend ScalarField parse_expr(std::string_view, int);
  explicit ScalarField(std::shared_ptr<const detail::Program> p) : program_(std::move(p)) {}
  std::shared_ptr<const detail::Program> program_;
};

// Throws Error with syntax_error / unknown_identifier / arity_error and the
// byte offset of the offending token. Variables beyond x<max_dim> are unknown.
ScalarField parse_expr(std::string_view text, int max_dim = kMaxDim);

}  // namespace conefield
