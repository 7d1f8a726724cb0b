#include "zeroone/expr.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <utility>

namespace zeroone::expr {

ParseError::ParseError(std::size_t position, const std::string& message)
    : std::runtime_error("parse error at position " + std::to_string(position) + ": " + message),
      position_(position) {}

const char* to_string(EvalErrorKind kind) {
  switch (kind) {
    case EvalErrorKind::Domain: return "domain";
    case EvalErrorKind::DivisionByZero: return "division by zero";
    case EvalErrorKind::Overflow: return "overflow";
  }
  return "unknown";
}

namespace {

std::string format_abscissa(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

EvalError::EvalError(EvalErrorKind kind, double abscissa, const std::string& what)
    : std::runtime_error(std::string(expr::to_string(kind)) + " error at x = " +
                         format_abscissa(abscissa) + ": " + what),
      kind_(kind),
      abscissa_(abscissa) {}

namespace {

NodePtr make_constant(double v) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Constant;
  n->value = v;
  return n;
}

NodePtr make_variable() {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Variable;
  return n;
}

NodePtr make_node(NodeKind kind, std::vector<NodePtr> args) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->args = std::move(args);
  return n;
}

NodePtr make_call(Function f, std::vector<NodePtr> args) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Call;
  n->function = f;
  n->args = std::move(args);
  return n;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  NodePtr parse() {
    skip_ws();
    if (pos_ >= src_.size()) throw ParseError(pos_, "empty expression");
    NodePtr e = sum();
    skip_ws();
    if (pos_ != src_.size()) {
      throw ParseError(pos_, std::string("unexpected character '") + src_[pos_] + "'");
    }
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= src_.size()) {
        throw ParseError(pos_, std::string("expected '") + c + "' before end of input");
      }
      throw ParseError(pos_, std::string("expected '") + c + "'");
    }
  }

  NodePtr sum() {
    NodePtr lhs = product();
    for (;;) {
      if (accept('+')) {
        lhs = make_node(NodeKind::Add, {lhs, product()});
      } else if (accept('-')) {
        lhs = make_node(NodeKind::Sub, {lhs, product()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr product() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = make_node(NodeKind::Mul, {lhs, unary()});
      } else if (accept('/')) {
        lhs = make_node(NodeKind::Div, {lhs, unary()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr unary() {
    if (accept('-')) return make_node(NodeKind::Negate, {unary()});
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return make_node(NodeKind::Pow, {base, unary()});
    return base;
  }

  NodePtr primary() {
    skip_ws();
    if (pos_ >= src_.size()) throw ParseError(pos_, "unexpected end of input");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr inner = sum();
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    throw ParseError(pos_, std::string("unexpected character '") + c + "'");
  }

  NodePtr number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        ++pos_;
        ++n;
      }
      return n;
    };
    std::size_t mantissa = digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      mantissa += digits();
    }
    if (mantissa == 0) throw ParseError(start, "malformed number");
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      const std::size_t epos = pos_;
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (digits() == 0) throw ParseError(epos, "malformed exponent");
    }
    const std::string text(src_.substr(start, pos_ - start));
    const double v = std::strtod(text.c_str(), nullptr);
    if (!std::isfinite(v)) throw ParseError(start, "numeric literal out of range");
    return make_constant(v);
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
      ++pos_;
    }
    const std::string_view name = src_.substr(start, pos_ - start);
    if (name == "x") return make_variable();

    static constexpr std::pair<std::string_view, Function> kFunctions[] = {
        {"exp", Function::Exp},   {"log", Function::Log}, {"sqrt", Function::Sqrt},
        {"abs", Function::Abs},   {"sin", Function::Sin}, {"cos", Function::Cos},
        {"pow", Function::Pow},
    };
    for (const auto& [fname, f] : kFunctions) {
      if (name != fname) continue;
      expect('(');
      std::vector<NodePtr> args{sum()};
      if (f == Function::Pow) {
        expect(',');
        args.push_back(sum());
      }
      expect(')');
      return make_call(f, std::move(args));
    }
    throw ParseError(start, "unknown identifier '" + std::string(name) + "'");
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

void print(const Node& n, std::string& out) {
  auto binary = [&](const char* op) {
    out += '(';
    print(*n.args[0], out);
    out += op;
    print(*n.args[1], out);
    out += ')';
  };
  switch (n.kind) {
    case NodeKind::Constant: {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g", n.value);
      if (n.value < 0 || std::signbit(n.value)) {
        out += '(';
        out += buf;
        out += ')';
      } else {
        out += buf;
      }
      return;
    }
    case NodeKind::Variable: out += 'x'; return;
    case NodeKind::Negate:
      out += "(-";
      print(*n.args[0], out);
      out += ')';
      return;
    case NodeKind::Add: binary(" + "); return;
    case NodeKind::Sub: binary(" - "); return;
    case NodeKind::Mul: binary(" * "); return;
    case NodeKind::Div: binary(" / "); return;
    case NodeKind::Pow: binary(" ^ "); return;
    case NodeKind::Call: {
      static constexpr const char* kNames[] = {"exp", "log", "sqrt", "abs", "sin", "cos", "pow"};
      out += kNames[static_cast<int>(n.function)];
      out += '(';
      print(*n.args[0], out);
      if (n.args.size() > 1) {
        out += ", ";
        print(*n.args[1], out);
      }
      out += ')';
      return;
    }
  }
}

double checked(double v, double x, const char* what) {
  if (!std::isfinite(v)) throw EvalError(EvalErrorKind::Overflow, x, what);
  return v;
}

double apply_pow(double base, double exponent, double x) {
  if (base == 0.0 && exponent < 0.0) {
    throw EvalError(EvalErrorKind::DivisionByZero, x, "zero raised to a negative power");
  }
  if (base < 0.0 && exponent != std::trunc(exponent)) {
    throw EvalError(EvalErrorKind::Domain, x, "negative base with non-integer exponent");
  }
  return checked(std::pow(base, exponent), x, "power");
}

}  // namespace

Expression::Expression() : root_(make_variable()) { compile(); }

Expression::Expression(NodePtr root) : root_(std::move(root)) { compile(); }

Expression Expression::parse(std::string_view source) { return Expression(Parser(source).parse()); }

Expression Expression::constant(double value) { return Expression(make_constant(value)); }

Expression Expression::variable() { return Expression(make_variable()); }

std::string Expression::to_string() const {
  std::string out;
  print(*root_, out);
  return out;
}

void Expression::compile() {
  auto program = std::make_shared<std::vector<Instr>>();
  std::size_t depth = 0;
  std::size_t max_depth = 0;
  auto emit = [&](auto&& self, const Node& n) -> void {
    for (const auto& a : n.args) self(self, *a);
    program->push_back({n.kind, n.function, n.value});
    if (n.kind == NodeKind::Constant || n.kind == NodeKind::Variable) {
      ++depth;
    } else {
      depth -= n.args.size() - 1;
    }
    max_depth = std::max(max_depth, depth);
  };
  emit(emit, *root_);
  program_ = std::move(program);
  stack_depth_ = max_depth;
}

double Expression::evaluate(double x) const {
  std::array<double, 64> small{};
  std::vector<double> large;
  double* stack = small.data();
  if (stack_depth_ > small.size()) {
    large.resize(stack_depth_);
    stack = large.data();
  }
  std::size_t top = 0;
  for (const Instr& ins : *program_) {
    switch (ins.kind) {
      case NodeKind::Constant: stack[top++] = ins.value; break;
      case NodeKind::Variable: stack[top++] = x; break;
      case NodeKind::Negate: stack[top - 1] = -stack[top - 1]; break;
      case NodeKind::Add:
        --top;
        stack[top - 1] = checked(stack[top - 1] + stack[top], x, "sum");
        break;
      case NodeKind::Sub:
        --top;
        stack[top - 1] = checked(stack[top - 1] - stack[top], x, "difference");
        break;
      case NodeKind::Mul:
        --top;
        stack[top - 1] = checked(stack[top - 1] * stack[top], x, "product");
        break;
      case NodeKind::Div:
        --top;
        if (stack[top] == 0.0) throw EvalError(EvalErrorKind::DivisionByZero, x, "quotient");
        stack[top - 1] = checked(stack[top - 1] / stack[top], x, "quotient");
        break;
      case NodeKind::Pow:
        --top;
        stack[top - 1] = apply_pow(stack[top - 1], stack[top], x);
        break;
      case NodeKind::Call: {
        double& a = stack[top - 1];
        switch (ins.function) {
          case Function::Exp: a = checked(std::exp(a), x, "exp"); break;
          case Function::Log:
            if (a <= 0.0) throw EvalError(EvalErrorKind::Domain, x, "log of non-positive value");
            a = std::log(a);
            break;
          case Function::Sqrt:
            if (a < 0.0) throw EvalError(EvalErrorKind::Domain, x, "sqrt of negative value");
            a = std::sqrt(a);
            break;
          case Function::Abs: a = std::fabs(a); break;
          case Function::Sin: a = std::sin(a); break;
          case Function::Cos: a = std::cos(a); break;
          case Function::Pow:
            --top;
            stack[top - 1] = apply_pow(stack[top - 1], stack[top], x);
            break;
        }
        break;
      }
    }
  }
  return stack[0];
}

Expression operator+(const Expression& a, const Expression& b) {
  return Expression(make_node(NodeKind::Add, {a.root_, b.root_}));
}
Expression operator-(const Expression& a, const Expression& b) {
  return Expression(make_node(NodeKind::Sub, {a.root_, b.root_}));
}
Expression operator*(const Expression& a, const Expression& b) {
  return Expression(make_node(NodeKind::Mul, {a.root_, b.root_}));
}
Expression operator/(const Expression& a, const Expression& b) {
  return Expression(make_node(NodeKind::Div, {a.root_, b.root_}));
}
Expression operator-(const Expression& a) { return Expression(make_node(NodeKind::Negate, {a.root_})); }
Expression pow(const Expression& base, const Expression& exponent) {
  return Expression(make_node(NodeKind::Pow, {base.root_, exponent.root_}));
}
Expression sqrt(const Expression& a) { return Expression(make_call(Function::Sqrt, {a.root_})); }

}  // namespace zeroone::expr
