#pragma once

// Expression language for Lagrangians, admissibility predicates and action
// densities.
//
//   expr  := term (('+'|'-') term)*
//   term  := unary (('*'|'/') unary)*
//   unary := '-' unary | power
//   power := atom ('^' ['-'] number)?
//   atom  := number | ident | ident '(' expr (',' expr)* ')' | '(' expr ')'
//
// Variables are x0..x{n-1} (base point) and y0..y{n-1} (direction).
// Functions: sqrt abs sgn exp log sin cos (one argument), pow(base, c) with c
// a constant expression. Exponents are always constants.

#include <cmath>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>

#include "finslervol/error.hpp"

namespace finslervol {

enum class NodeKind { Number, VarX, VarY, Neg, Add, Sub, Mul, Div, Pow, Call };

enum class Func { Sqrt, Abs, Sgn, Exp, Log, Sin, Cos };

std::string_view to_string(Func f);

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  NodeKind kind = NodeKind::Number;
  double number = 0.0;  // literal value, or the exponent of a Pow node
  int index = 0;        // variable index for VarX / VarY
  Func func = Func::Sqrt;
  NodePtr lhs;
  NodePtr rhs;
};

/// Immutable expression tree. Copies share structure.
class Expr {
 public:
  Expr();
  explicit Expr(NodePtr root);

  static Expr constant(double v);
  static Expr x(int i);
  static Expr y(int i);

  const Node& root() const { return *root_; }
  const NodePtr& root_ptr() const { return root_; }

  /// Largest referenced x / y index, or -1 when none.
  int max_x_index() const;
  int max_y_index() const;
  bool is_constant() const { return max_x_index() < 0 && max_y_index() < 0; }

  friend bool operator==(const Expr& a, const Expr& b);

 private:
  NodePtr root_;
};

struct ParseOptions {
  /// When positive, variable indices must be below this dimension.
  int dim = -1;
  /// Named symbols (action-mode fields) inlined at parse time.
  std::map<std::string, Expr, std::less<>> symbols;
};

Expr parse(std::string_view source, const ParseOptions& options = {});

/// Precedence-aware printing; parse(to_string(e)) == e for parsed e.
std::string to_string(const Expr& e);

/// Replace every y_i by sum_j basis(i,j) * y_j, row-major n x n.
Expr substitute_linear_y(const Expr& e, std::span<const double> basis, int n);

inline double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

template <typename T>
struct Env {
  std::span<const T> x;
  std::span<const T> y;
};

namespace detail {

[[noreturn]] void throw_unbound(char prefix, int index, std::size_t bound);

template <typename T>
T eval_node(const Node& n, const Env<T>& env) {
  using std::abs;
  using std::cos;
  using std::exp;
  using std::log;
  using std::pow;
  using std::sin;
  using std::sqrt;
  switch (n.kind) {
    case NodeKind::Number:
      return T(n.number);
    case NodeKind::VarX:
      if (static_cast<std::size_t>(n.index) >= env.x.size()) throw_unbound('x', n.index, env.x.size());
      return env.x[n.index];
    case NodeKind::VarY:
      if (static_cast<std::size_t>(n.index) >= env.y.size()) throw_unbound('y', n.index, env.y.size());
      return env.y[n.index];
    case NodeKind::Neg:
      return -eval_node(*n.lhs, env);
    case NodeKind::Add:
      return eval_node(*n.lhs, env) + eval_node(*n.rhs, env);
    case NodeKind::Sub:
      return eval_node(*n.lhs, env) - eval_node(*n.rhs, env);
    case NodeKind::Mul:
      return eval_node(*n.lhs, env) * eval_node(*n.rhs, env);
    case NodeKind::Div:
      return eval_node(*n.lhs, env) / eval_node(*n.rhs, env);
    case NodeKind::Pow: {
      T base = eval_node(*n.lhs, env);
      if (n.number == 2.0) return base * base;
      if (n.number == 1.0) return base;
      return pow(base, n.number);
    }
    case NodeKind::Call: {
      T a = eval_node(*n.lhs, env);
      switch (n.func) {
        case Func::Sqrt: return sqrt(a);
        case Func::Abs: return abs(a);
        case Func::Sgn: return sgn(a);
        case Func::Exp: return exp(a);
        case Func::Log: return log(a);
        case Func::Sin: return sin(a);
        case Func::Cos: return cos(a);
      }
    }
  }
  return T(0.0);
}

}  // namespace detail

/// Evaluates `e` with double semantics lifted to T. Domain violations
/// propagate as non-finite components rather than exceptions.
template <typename T>
T evaluate(const Expr& e, const Env<T>& env) {
  return detail::eval_node(e.root(), env);
}

inline double evaluate(const Expr& e, std::span<const double> x, std::span<const double> y) {
  return evaluate<double>(e, Env<double>{x, y});
}

}  // namespace finslervol
