#include "projfinsler/metric_dsl.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

namespace projfinsler {

ParseError::ParseError(int line, int column, const std::string& message)
    : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message),
      line_(line),
      column_(column) {}

namespace dsl {

bool equal(const Node& a, const Node& b) {
  if (a.kind != b.kind || a.op != b.op || a.block != b.block || a.index != b.index || a.name != b.name) return false;
  if (a.kind == NodeKind::Number && !(a.value == b.value)) return false;
  if (a.children.size() != b.children.size()) return false;
  for (std::size_t i = 0; i < a.children.size(); ++i) {
    if (!equal(*a.children[i], *b.children[i])) return false;
  }
  return true;
}

}  // namespace dsl

namespace {

using dsl::Node;
using dsl::NodeKind;
using dsl::NodePtr;

enum class Tok { Number, Ident, Op, LParen, RParen, Comma, End };

struct Token {
  Tok kind;
  std::string text;
  double number = 0.0;
  int line = 1;
  int column = 1;
};

std::vector<Token> lex(const std::string& src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t count) {
    for (std::size_t k = 0; k < count; ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    Token t{Tok::End, "", 0.0, line, col};
    if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      if (j < src.size() && src[j] == '.') {
        ++j;
        while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      }
      // Exponent only when digits follow, so that "2e" stays 2 followed by the constant e.
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
          while (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) ++k;
          j = k;
        }
      }
      t.kind = Tok::Number;
      t.text = src.substr(i, j - i);
      t.number = std::strtod(t.text.c_str(), nullptr);
      out.push_back(t);
      advance(j - i);
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      t.kind = Tok::Ident;
      t.text = src.substr(i, j - i);
      out.push_back(t);
      advance(j - i);
    } else if (c == '+' || c == '-' || c == '*' || c == '/' || c == '^') {
      t.kind = Tok::Op;
      t.text = std::string(1, c);
      out.push_back(t);
      advance(1);
    } else if (c == '(' || c == ')' || c == ',') {
      t.kind = c == '(' ? Tok::LParen : c == ')' ? Tok::RParen : Tok::Comma;
      t.text = std::string(1, c);
      out.push_back(t);
      advance(1);
    } else {
      throw ParseError(line, col, std::string("unexpected character '") + c + "'");
    }
  }
  out.push_back(Token{Tok::End, "", 0.0, line, col});
  return out;
}

NodePtr make(Node n) { return std::make_shared<const Node>(std::move(n)); }

bool is_function(const std::string& name) {
  return name == "sin" || name == "cos" || name == "sqrt" || name == "abs" || name == "exp";
}

class Parser {
 public:
  Parser(std::vector<Token> tokens, int dim) : tokens_(std::move(tokens)), dim_(dim) {}

  NodePtr parse_all() {
    NodePtr e = expr();
    if (peek().kind != Tok::End) fail(peek(), "unexpected '" + peek().text + "'");
    return e;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  const Token& take() { return tokens_[pos_++]; }
  [[noreturn]] static void fail(const Token& t, const std::string& msg) { throw ParseError(t.line, t.column, msg); }

  bool accept_op(char op) {
    if (peek().kind == Tok::Op && peek().text[0] == op) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(Tok kind, const char* what) {
    if (peek().kind != kind) fail(peek(), std::string("expected ") + what);
    ++pos_;
  }

  static NodePtr binary(char op, NodePtr a, NodePtr b) {
    Node n;
    n.kind = NodeKind::Binary;
    n.op = op;
    n.children = {std::move(a), std::move(b)};
    return make(std::move(n));
  }

  NodePtr expr() {
    NodePtr lhs = term();
    while (true) {
      if (accept_op('+')) {
        lhs = binary('+', lhs, term());
      } else if (accept_op('-')) {
        lhs = binary('-', lhs, term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    while (true) {
      if (accept_op('*')) {
        lhs = binary('*', lhs, unary());
      } else if (accept_op('/')) {
        lhs = binary('/', lhs, unary());
      } else {
        return lhs;
      }
    }
  }

  NodePtr unary() {
    if (accept_op('-')) {
      Node n;
      n.kind = NodeKind::Negate;
      n.children = {unary()};
      return make(std::move(n));
    }
    return power();
  }

  // ^ binds tighter than unary minus and associates to the right; its
  // exponent may carry a sign, as in 2^-1.
  NodePtr power() {
    NodePtr base = atom();
    if (accept_op('^')) return binary('^', base, unary());
    return base;
  }

  NodePtr atom() {
    const Token t = take();
    switch (t.kind) {
      case Tok::Number: {
        Node n;
        n.kind = NodeKind::Number;
        n.value = t.number;
        return make(std::move(n));
      }
      case Tok::LParen: {
        NodePtr e = expr();
        expect(Tok::RParen, "')'");
        return e;
      }
      case Tok::Ident:
        return identifier(t);
      default:
        fail(t, t.kind == Tok::End ? "unexpected end of input" : "unexpected '" + t.text + "'");
    }
  }

  NodePtr identifier(const Token& t) {
    const std::string& name = t.text;
    if (peek().kind == Tok::LParen) {
      if (!is_function(name) && name != "norm2") fail(t, "unknown function '" + name + "'");
      ++pos_;
      if (name == "norm2") {
        const Token a = take();
        if (a.kind != Tok::Ident || (a.text != "v" && a.text != "u")) fail(a, "norm2 expects the block name v or u");
        if (peek().kind == Tok::Comma) fail(peek(), "arity mismatch: norm2 takes 1 argument");
        expect(Tok::RParen, "')'");
        Node n;
        n.kind = NodeKind::Norm2;
        n.block = a.text[0];
        n.name = "norm2";
        return make(std::move(n));
      }
      std::vector<NodePtr> children{expr()};
      while (peek().kind == Tok::Comma) {
        ++pos_;
        children.push_back(expr());
      }
      expect(Tok::RParen, "')'");
      if (children.size() != 1) {
        fail(t, "arity mismatch: " + name + " takes 1 argument, got " + std::to_string(children.size()));
      }
      Node n;
      n.kind = NodeKind::Call;
      n.name = name;
      n.children = std::move(children);
      return make(std::move(n));
    }
    if (is_function(name) || name == "norm2") fail(t, "function '" + name + "' needs an argument list");
    if (name == "pi" || name == "e") {
      Node n;
      n.kind = NodeKind::Constant;
      n.name = name;
      return make(std::move(n));
    }
    if (name == "p") {
      Node n;
      n.kind = NodeKind::Variable;
      n.block = 'p';
      return make(std::move(n));
    }
    if (name.size() >= 2 && (name[0] == 'x' || name[0] == 'v' || name[0] == 'u') &&
        std::all_of(name.begin() + 1, name.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      const int index = std::atoi(name.c_str() + 1);
      if (index < 1 || index > dim_) {
        fail(t, "index out of range: '" + name + "' in dimension " + std::to_string(dim_));
      }
      Node n;
      n.kind = NodeKind::Variable;
      n.block = name[0];
      n.index = index;
      return make(std::move(n));
    }
    fail(t, "unknown identifier '" + name + "'");
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  int dim_;
};

double eval(const Node& n, const EvalPoint& at) {
  switch (n.kind) {
    case NodeKind::Number:
      return n.value;
    case NodeKind::Constant:
      return n.name == "pi" ? kPi : std::exp(1.0);
    case NodeKind::Variable: {
      if (n.block == 'p') return at.p;
      const Vec& block = n.block == 'x' ? at.x : n.block == 'v' ? at.v : at.u;
      if (block.size() < n.index) throw PreconditionError(std::string("evaluate: missing value for block ") + n.block);
      return block(n.index - 1);
    }
    case NodeKind::Negate:
      return -eval(*n.children[0], at);
    case NodeKind::Binary: {
      const double a = eval(*n.children[0], at);
      const double b = eval(*n.children[1], at);
      switch (n.op) {
        case '+': return a + b;
        case '-': return a - b;
        case '*': return a * b;
        case '/': return a / b;
        default: {
          // Small integer exponents by repeated multiplication: exact and sign-safe.
          if (b == std::round(b) && std::abs(b) <= 16.0) {
            double r = 1.0;
            for (int k = 0; k < static_cast<int>(std::abs(b)); ++k) r *= a;
            return b < 0 ? 1.0 / r : r;
          }
          return std::pow(a, b);
        }
      }
    }
    case NodeKind::Call: {
      const double a = eval(*n.children[0], at);
      if (n.name == "sin") return std::sin(a);
      if (n.name == "cos") return std::cos(a);
      if (n.name == "sqrt") return std::sqrt(a);
      if (n.name == "abs") return std::abs(a);
      return std::exp(a);
    }
    case NodeKind::Norm2:
      return (n.block == 'v' ? at.v : at.u).norm();
  }
  return 0.0;
}

void print_node(const Node& n, std::string& out) {
  switch (n.kind) {
    case NodeKind::Number: {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", n.value);
      out += buf;
      return;
    }
    case NodeKind::Constant:
      out += n.name;
      return;
    case NodeKind::Variable:
      out += n.block;
      if (n.block != 'p') out += std::to_string(n.index);
      return;
    case NodeKind::Negate:
      out += "(-";
      print_node(*n.children[0], out);
      out += ')';
      return;
    case NodeKind::Binary:
      out += '(';
      print_node(*n.children[0], out);
      out += ' ';
      out += n.op;
      out += ' ';
      print_node(*n.children[1], out);
      out += ')';
      return;
    case NodeKind::Call:
      out += n.name + "(";
      print_node(*n.children[0], out);
      out += ')';
      return;
    case NodeKind::Norm2:
      out += "norm2(";
      out += n.block;
      out += ')';
      return;
  }
}

template <class Pred>
bool any_node(const Node& n, const Pred& pred) {
  if (pred(n)) return true;
  for (const auto& c : n.children) {
    if (any_node(*c, pred)) return true;
  }
  return false;
}

}  // namespace

MetricExpr::MetricExpr(dsl::NodePtr root, int dim, std::string source)
    : root_(std::move(root)), dim_(dim), source_(std::move(source)) {
  if (!root_) throw PreconditionError("MetricExpr: empty tree");
}

double MetricExpr::evaluate(const EvalPoint& at) const { return eval(*root_, at); }

std::string MetricExpr::print() const {
  std::string out;
  print_node(*root_, out);
  return out;
}

bool MetricExpr::uses_block(char block) const {
  return any_node(*root_, [block](const Node& n) {
    return (n.kind == NodeKind::Variable || n.kind == NodeKind::Norm2) && n.block == block;
  });
}

bool MetricExpr::uses_abs() const {
  return any_node(*root_, [](const Node& n) { return n.kind == NodeKind::Call && n.name == "abs"; });
}

MetricExpr parse(const std::string& source, int dim) {
  if (dim < 1) throw PreconditionError("parse: dimension must be positive");
  Parser parser(lex(source), dim);
  return MetricExpr(parser.parse_all(), dim, source);
}

HomogeneityReport check_homogeneity(const MetricExpr& expr, int samples, double tol, std::uint64_t seed) {
  HomogeneityReport r;
  r.tol = tol;
  Rng rng(seed);
  const int n = expr.dim();
  for (int s = 0; s < samples; ++s) {
    const Vec x = random_in_box(rng, Vec::Zero(n), Vec::Ones(n));
    const Vec v = random_unit_vector(rng, n);
    const double base = expr.evaluate({x, v, {}, 0.0});
    for (double lambda : {0.5, 2.0, 7.0}) {
      const double scaled_value = expr.evaluate({x, lambda * v, {}, 0.0});
      const double defect = std::abs(scaled_value - lambda * base) / std::max(1.0, std::abs(base));
      r.max_defect = std::max(r.max_defect, std::isfinite(defect) ? defect : std::numeric_limits<double>::infinity());
      ++r.samples;
    }
  }
  return r;
}

OneDensity as_one_density(const MetricExpr& expr, DensityTraits traits, bool smooth_asserted, double homogeneity_tol) {
  if (expr.uses_block('u') || expr.uses_block('p')) {
    throw PreconditionError("as_one_density: a Lagrangian may only use x and v");
  }
  const HomogeneityReport h = check_homogeneity(expr, 64, homogeneity_tol);
  if (!h.pass()) {
    throw PreconditionError("as_one_density: expression is not 1-homogeneous in v (defect " + std::to_string(h.max_defect) + ")");
  }
  if (expr.uses_abs() && !smooth_asserted) traits.smoothness = Smoothness::C0;
  if (traits.label.empty()) traits.label = expr.print();
  if (!expr.uses_block('x')) traits.translation_invariant = true;
  return OneDensity(expr.dim(), [expr](const Vec& x, const Vec& v) { return expr.evaluate({x, v, {}, 0.0}); }, traits);
}

std::function<double(const Vec&, double)> as_measure_density(const MetricExpr& expr) {
  if (expr.uses_block('x') || expr.uses_block('v')) {
    throw PreconditionError("as_measure_density: a hyperplane density may only use u and p");
  }
  return [expr](const Vec& u, double p) { return expr.evaluate({{}, {}, u, p}); };
}

std::function<double(const Vec&)> as_scalar_field(const MetricExpr& expr) {
  if (expr.uses_block('v') || expr.uses_block('u') || expr.uses_block('p')) {
    throw PreconditionError("as_scalar_field: a potential may only use x");
  }
  return [expr](const Vec& x) { return expr.evaluate({x, {}, {}, 0.0}); };
}

}  // namespace projfinsler
