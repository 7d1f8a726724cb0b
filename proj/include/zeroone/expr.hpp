#pragma once

// Single-variable expression language for diffusion coefficients.
//
// Grammar (lowest to highest precedence):
//   sum     := product (('+' | '-') product)*
//   product := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?            (right associative)
//   primary := number | 'x' | func '(' args ')' | '(' sum ')'
//   func    := exp | log | sqrt | abs | sin | cos | pow (two arguments)
//
// Expressions are immutable and cheap to copy; evaluation is reentrant.

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace zeroone::expr {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t position, const std::string& message);
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

enum class EvalErrorKind { Domain, DivisionByZero, Overflow };

const char* to_string(EvalErrorKind kind);

class EvalError : public std::runtime_error {
 public:
  EvalError(EvalErrorKind kind, double abscissa, const std::string& what);
  EvalErrorKind kind() const noexcept { return kind_; }
  double abscissa() const noexcept { return abscissa_; }

 private:
  EvalErrorKind kind_;
  double abscissa_;
};

enum class NodeKind { Constant, Variable, Negate, Add, Sub, Mul, Div, Pow, Call };
enum class Function { Exp, Log, Sqrt, Abs, Sin, Cos, Pow };

struct Node {
  NodeKind kind;
  double value = 0.0;
  Function function = Function::Exp;
  std::vector<std::shared_ptr<const Node>> args;
};

using NodePtr = std::shared_ptr<const Node>;

class Expression {
 public:
  /// The identity expression `x`.
  Expression();

  static Expression parse(std::string_view source);
  static Expression constant(double value);
  static Expression variable();

  /// Throws EvalError on any mathematically undefined or non-finite result.
  double evaluate(double x) const;
  double operator()(double x) const { return evaluate(x); }

  /// Fully parenthesised text that re-parses to an equivalent expression.
  std::string to_string() const;

  const Node& root() const noexcept { return *root_; }

  friend Expression operator+(const Expression& a, const Expression& b);
  friend Expression operator-(const Expression& a, const Expression& b);
  friend Expression operator*(const Expression& a, const Expression& b);
  friend Expression operator/(const Expression& a, const Expression& b);
  friend Expression operator-(const Expression& a);
  friend Expression pow(const Expression& base, const Expression& exponent);
  friend Expression sqrt(const Expression& a);

 private:
  struct Instr {
    NodeKind kind;
    Function function;
    double value;
  };

  explicit Expression(NodePtr root);
  void compile();

  NodePtr root_;
  std::shared_ptr<const std::vector<Instr>> program_;
  std::size_t stack_depth_ = 0;
};

Expression operator+(const Expression& a, const Expression& b);
Expression operator-(const Expression& a, const Expression& b);
Expression operator*(const Expression& a, const Expression& b);
Expression operator/(const Expression& a, const Expression& b);
Expression operator-(const Expression& a);
Expression pow(const Expression& base, const Expression& exponent);
Expression sqrt(const Expression& a);

inline Expression parse(std::string_view source) { return Expression::parse(source); }
inline double evaluate(const Expression& e, double x) { return e.evaluate(x); }

}  // namespace zeroone::expr
