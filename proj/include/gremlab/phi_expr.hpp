#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>

#include "gremlab/subsets.hpp"

namespace gremlab {

/// Syntax error with the 0-based input position where it was detected.
class PhiParseError : public std::runtime_error {
 public:
  PhiParseError(const std::string& what, std::size_t position);
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

/// Domain error (log/sqrt of a non-positive argument, non-finite result),
/// annotated with the position of the offending node in the source text.
class PhiEvalError : public std::runtime_error {
 public:
  PhiEvalError(const std::string& what, std::size_t position);
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

/// Expression tree for interaction functions over subset variables x<digits>.
///
/// Grammar (left-associative except '^', which binds right):
///   expr   := term (('+'|'-') term)*
///   term   := factor (('*'|'/') factor)*
///   factor := base ('^' factor)?
///   base   := number | var | func '(' expr ')' | '(' expr ')' | '-' factor
///
/// Functions: exp, log, sqrt, abs, tanh (plus unary minus).
struct PhiExpr {
  enum class Kind { Number, Variable, Unary, Binary };
  enum class UnaryOp { Neg, Exp, Log, Sqrt, Abs, Tanh };
  enum class BinaryOp { Add, Sub, Mul, Div, Pow };

  Kind kind = Kind::Number;
  double number = 0.0;
  SubsetId subset;  // Kind::Variable
  UnaryOp unary_op = UnaryOp::Neg;
  BinaryOp binary_op = BinaryOp::Add;
  std::unique_ptr<PhiExpr> lhs;  // unary operand lives here too
  std::unique_ptr<PhiExpr> rhs;
  std::size_t position = 0;  // start of this node in the source text
};

/// Parses the grammar above. The species count bounds the allowed variables:
/// every x<digits> must name a nonempty subset of {1,..,n}. Tree depth is
/// capped at 64.
std::unique_ptr<PhiExpr> parse_phi(const std::string& text, int n);

/// Evaluates with the given per-subset variable values. Throws PhiEvalError
/// on domain errors or a non-finite result.
double evaluate_phi(const PhiExpr& expr, const std::map<std::uint32_t, double>& assignment);

/// Canonical fully parenthesized rendering; parse(pretty_print(e)) has the
/// same tree shape as e.
std::string pretty_print(const PhiExpr& expr);

bool phi_equal(const PhiExpr& a, const PhiExpr& b);

}  // namespace gremlab
