#include "gremlab/phi_expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace gremlab {

PhiParseError::PhiParseError(const std::string& what, std::size_t position)
    : std::runtime_error(what + " (at position " + std::to_string(position) + ")"),
      position_(position) {}

PhiEvalError::PhiEvalError(const std::string& what, std::size_t position)
    : std::runtime_error(what + " (at position " + std::to_string(position) + ")"),
      position_(position) {}

namespace {

constexpr std::size_t kMaxSourceBytes = 64 * 1024;
constexpr int kMaxDepth = 64;

class Parser {
 public:
  Parser(const std::string& text, int n) : text_(text), n_(n) {}

  std::unique_ptr<PhiExpr> run() {
    auto e = parse_expr(0);
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw PhiParseError(msg, pos_); }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  int peek() {
    skip_ws();
    return pos_ < text_.size() ? static_cast<unsigned char>(text_[pos_]) : -1;
  }

  bool consume(char c) {
    if (peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void check_depth(int depth) const {
    if (depth > kMaxDepth) throw PhiParseError("expression nests deeper than 64", pos_);
  }

  std::unique_ptr<PhiExpr> parse_expr(int depth) {
    check_depth(depth);
    auto lhs = parse_term(depth + 1);
    for (;;) {
      std::size_t at = lhs->position;
      if (consume('+')) {
        lhs = make_binary(PhiExpr::BinaryOp::Add, std::move(lhs), parse_term(depth + 1), at);
      } else if (consume('-')) {
        lhs = make_binary(PhiExpr::BinaryOp::Sub, std::move(lhs), parse_term(depth + 1), at);
      } else {
        return lhs;
      }
    }
  }

  std::unique_ptr<PhiExpr> parse_term(int depth) {
    check_depth(depth);
    auto lhs = parse_factor(depth + 1);
    for (;;) {
      std::size_t at = lhs->position;
      if (consume('*')) {
        lhs = make_binary(PhiExpr::BinaryOp::Mul, std::move(lhs), parse_factor(depth + 1), at);
      } else if (consume('/')) {
        lhs = make_binary(PhiExpr::BinaryOp::Div, std::move(lhs), parse_factor(depth + 1), at);
      } else {
        return lhs;
      }
    }
  }

  std::unique_ptr<PhiExpr> parse_factor(int depth) {
    check_depth(depth);
    auto base = parse_base(depth + 1);
    if (consume('^')) {
      std::size_t at = base->position;
      // '^' is right-associative: recurse into factor, not base.
      return make_binary(PhiExpr::BinaryOp::Pow, std::move(base), parse_factor(depth + 1), at);
    }
    return base;
  }

  std::unique_ptr<PhiExpr> parse_base(int depth) {
    check_depth(depth);
    int c = peek();
    std::size_t at = pos_;
    if (c == '-') {
      ++pos_;
      auto node = std::make_unique<PhiExpr>();
      node->kind = PhiExpr::Kind::Unary;
      node->unary_op = PhiExpr::UnaryOp::Neg;
      node->lhs = parse_factor(depth + 1);
      node->position = at;
      return node;
    }
    if (c == '(') {
      ++pos_;
      auto inner = parse_expr(depth + 1);
      if (!consume(')')) fail("expected ')'");
      return inner;
    }
    if (c == -1) fail("unexpected end of input");
    if (std::isdigit(c) || c == '.') return parse_number();
    if (std::isalpha(c)) return parse_name(depth);
    fail(std::string("unexpected character '") + static_cast<char>(c) + "'");
  }

  std::unique_ptr<PhiExpr> parse_number() {
    std::size_t at = pos_;
    const char* begin = text_.c_str() + pos_;
    char* end = nullptr;
    double value = std::strtod(begin, &end);
    if (end == begin) fail("expected a number");
    pos_ += static_cast<std::size_t>(end - begin);
    auto node = std::make_unique<PhiExpr>();
    node->kind = PhiExpr::Kind::Number;
    node->number = value;
    node->position = at;
    return node;
  }

  std::unique_ptr<PhiExpr> parse_name(int depth) {
    std::size_t at = pos_;
    std::string name;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])))) {
      name += text_[pos_++];
    }
    if (name.size() >= 2 && name[0] == 'x' &&
        std::isdigit(static_cast<unsigned char>(name[1]))) {
      SubsetId subset;
      try {
        subset = parse_subset_label(name.substr(1), n_);
      } catch (const std::invalid_argument& err) {
        throw PhiParseError(std::string("malformed variable '") + name + "': " + err.what(), at);
      }
      auto node = std::make_unique<PhiExpr>();
      node->kind = PhiExpr::Kind::Variable;
      node->subset = subset;
      node->position = at;
      return node;
    }
    PhiExpr::UnaryOp op;
    if (name == "exp") {
      op = PhiExpr::UnaryOp::Exp;
    } else if (name == "log") {
      op = PhiExpr::UnaryOp::Log;
    } else if (name == "sqrt") {
      op = PhiExpr::UnaryOp::Sqrt;
    } else if (name == "abs") {
      op = PhiExpr::UnaryOp::Abs;
    } else if (name == "tanh") {
      op = PhiExpr::UnaryOp::Tanh;
    } else {
      throw PhiParseError("unknown function or variable '" + name + "'", at);
    }
    if (!consume('(')) fail("expected '(' after function name");
    auto node = std::make_unique<PhiExpr>();
    node->kind = PhiExpr::Kind::Unary;
    node->unary_op = op;
    node->lhs = parse_expr(depth + 1);
    node->position = at;
    if (!consume(')')) fail("expected ')'");
    return node;
  }

  static std::unique_ptr<PhiExpr> make_binary(PhiExpr::BinaryOp op, std::unique_ptr<PhiExpr> lhs,
                                              std::unique_ptr<PhiExpr> rhs, std::size_t at) {
    auto node = std::make_unique<PhiExpr>();
    node->kind = PhiExpr::Kind::Binary;
    node->binary_op = op;
    node->lhs = std::move(lhs);
    node->rhs = std::move(rhs);
    node->position = at;
    return node;
  }

  const std::string& text_;
  int n_;
  std::size_t pos_ = 0;
};

const char* unary_name(PhiExpr::UnaryOp op) {
  switch (op) {
    case PhiExpr::UnaryOp::Neg: return "-";
    case PhiExpr::UnaryOp::Exp: return "exp";
    case PhiExpr::UnaryOp::Log: return "log";
    case PhiExpr::UnaryOp::Sqrt: return "sqrt";
    case PhiExpr::UnaryOp::Abs: return "abs";
    case PhiExpr::UnaryOp::Tanh: return "tanh";
  }
  return "?";
}

char binary_symbol(PhiExpr::BinaryOp op) {
  switch (op) {
    case PhiExpr::BinaryOp::Add: return '+';
    case PhiExpr::BinaryOp::Sub: return '-';
    case PhiExpr::BinaryOp::Mul: return '*';
    case PhiExpr::BinaryOp::Div: return '/';
    case PhiExpr::BinaryOp::Pow: return '^';
  }
  return '?';
}

}  // namespace

std::unique_ptr<PhiExpr> parse_phi(const std::string& text, int n) {
  if (text.size() > kMaxSourceBytes) {
    throw PhiParseError("expression source exceeds 64 KiB", kMaxSourceBytes);
  }
  return Parser(text, n).run();
}

double evaluate_phi(const PhiExpr& expr, const std::map<std::uint32_t, double>& assignment) {
  double value = 0.0;
  switch (expr.kind) {
    case PhiExpr::Kind::Number:
      value = expr.number;
      break;
    case PhiExpr::Kind::Variable: {
      auto it = assignment.find(expr.subset.mask);
      if (it == assignment.end()) {
        throw PhiEvalError("variable x" + subset_label(expr.subset) + " has no assigned value",
                           expr.position);
      }
      value = it->second;
      break;
    }
    case PhiExpr::Kind::Unary: {
      double a = evaluate_phi(*expr.lhs, assignment);
      switch (expr.unary_op) {
        case PhiExpr::UnaryOp::Neg: value = -a; break;
        case PhiExpr::UnaryOp::Exp: value = std::exp(a); break;
        case PhiExpr::UnaryOp::Log:
          if (a <= 0.0) throw PhiEvalError("log of non-positive argument", expr.position);
          value = std::log(a);
          break;
        case PhiExpr::UnaryOp::Sqrt:
          if (a < 0.0) throw PhiEvalError("sqrt of negative argument", expr.position);
          value = std::sqrt(a);
          break;
        case PhiExpr::UnaryOp::Abs: value = std::abs(a); break;
        case PhiExpr::UnaryOp::Tanh: value = std::tanh(a); break;
      }
      break;
    }
    case PhiExpr::Kind::Binary: {
      double a = evaluate_phi(*expr.lhs, assignment);
      double b = evaluate_phi(*expr.rhs, assignment);
      switch (expr.binary_op) {
        case PhiExpr::BinaryOp::Add: value = a + b; break;
        case PhiExpr::BinaryOp::Sub: value = a - b; break;
        case PhiExpr::BinaryOp::Mul: value = a * b; break;
        case PhiExpr::BinaryOp::Div:
          if (b == 0.0) throw PhiEvalError("division by zero", expr.position);
          value = a / b;
          break;
        case PhiExpr::BinaryOp::Pow: value = std::pow(a, b); break;
      }
      break;
    }
  }
  if (!std::isfinite(value)) throw PhiEvalError("non-finite result", expr.position);
  return value;
}

std::string pretty_print(const PhiExpr& expr) {
  switch (expr.kind) {
    case PhiExpr::Kind::Number: {
      std::ostringstream os;
      os.precision(17);
      os << expr.number;
      std::string s = os.str();
      // strtod does not accept a leading '-'; negative literals only arise
      // from printing, so render them through unary minus.
      if (!s.empty() && s[0] == '-') return "(-" + s.substr(1) + ")";
      return s;
    }
    case PhiExpr::Kind::Variable:
      return "x" + subset_label(expr.subset);
    case PhiExpr::Kind::Unary:
      if (expr.unary_op == PhiExpr::UnaryOp::Neg) return "(-" + pretty_print(*expr.lhs) + ")";
      return std::string(unary_name(expr.unary_op)) + "(" + pretty_print(*expr.lhs) + ")";
    case PhiExpr::Kind::Binary:
      return "(" + pretty_print(*expr.lhs) + " " + binary_symbol(expr.binary_op) + " " +
             pretty_print(*expr.rhs) + ")";
  }
  return "?";
}

bool phi_equal(const PhiExpr& a, const PhiExpr& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case PhiExpr::Kind::Number:
      return a.number == b.number;
    case PhiExpr::Kind::Variable:
      return a.subset == b.subset;
    case PhiExpr::Kind::Unary:
      return a.unary_op == b.unary_op && phi_equal(*a.lhs, *b.lhs);
    case PhiExpr::Kind::Binary:
      return a.binary_op == b.binary_op && phi_equal(*a.lhs, *b.lhs) && phi_equal(*a.rhs, *b.rhs);
  }
  return false;
}

}  // namespace gremlab
