#pragma once

#include "projfinsler/metric_core.hpp"

#include <memory>
#include <string>
#include <vector>

namespace projfinsler {

/// Syntax error with 1-based source position.
class ParseError : public Error {
 public:
  ParseError(int line, int column, const std::string& message);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

namespace dsl {

enum class NodeKind { Number, Constant, Variable, Negate, Binary, Call, Norm2 };

/// Immutable syntax-tree node. Variables carry their block ('x', 'v', 'u', 'p')
/// and 1-based index (0 for p); Norm2 carries the block it measures.
struct Node {
  NodeKind kind = NodeKind::Number;
  double value = 0.0;
  char op = 0;
  char block = 0;
  int index = 0;
  std::string name;
  std::vector<std::shared_ptr<const Node>> children;
};

using NodePtr = std::shared_ptr<const Node>;

bool equal(const Node& a, const Node& b);

}  // namespace dsl

/// Arguments of an evaluation; blocks not used by the expression may stay empty.
struct EvalPoint {
  Vec x;
  Vec v;
  Vec u;
  double p = 0.0;
};

/// Parsed expression over x1..xn, v1..vn, u1..un, p, the constants pi and e,
/// + - * / ^, unary minus and sin, cos, sqrt, abs, exp, norm2(v | u).
class MetricExpr {
 public:
  MetricExpr(dsl::NodePtr root, int dim, std::string source);

  int dim() const { return dim_; }
  const dsl::Node& root() const { return *root_; }
  const std::string& source() const { return source_; }

  double evaluate(const EvalPoint& at) const;
  /// Canonical, fully parenthesized form; parsing it yields an equal tree.
  std::string print() const;

  bool uses_block(char block) const;
  /// abs makes the expression only continuous.
  bool uses_abs() const;

  bool operator==(const MetricExpr& other) const { return dim_ == other.dim_ && dsl::equal(*root_, *other.root_); }

 private:
  dsl::NodePtr root_;
  int dim_;
  std::string source_;
};

/// Precedence, tightest first: ^ (right associative), unary minus, * /, + -.
MetricExpr parse(const std::string& source, int dim);

struct HomogeneityReport {
  double max_defect = 0.0;
  std::size_t samples = 0;
  double tol = 0.0;
  bool pass() const { return max_defect <= tol; }
};

/// max |L(x, lambda v) - lambda L(x, v)| over seeded samples in the unit box,
/// unit directions v and lambda in {0.5, 2, 7}, relative to max(1, |L(x, v)|).
HomogeneityReport check_homogeneity(const MetricExpr& expr, int samples, double tol, std::uint64_t seed = 1);

/// L(x, v) from an expression in x and v. Throws PreconditionError if the
/// expression uses u or p or fails the homogeneity gate. Expressions with abs
/// are flagged C0 unless smooth_asserted is set.
OneDensity as_one_density(const MetricExpr& expr, DensityTraits traits = {}, bool smooth_asserted = false,
                          double homogeneity_tol = 1e-9);

/// m(u, p) from an expression in u and p.
std::function<double(const Vec&, double)> as_measure_density(const MetricExpr& expr);

/// f(x) from an expression in x only.
std::function<double(const Vec&)> as_scalar_field(const MetricExpr& expr);

}  // namespace projfinsler
