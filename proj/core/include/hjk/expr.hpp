#pragma once

// Expression language for Lagrangians, Hamiltonians, sections and constraints.
//
//   expr  := term (("+"|"-") term)*
//   term  := unary (("*"|"/") unary)*
//   unary := "-" unary | power
//   power := atom ("^" unary)?
//   atom  := number | var | func "(" expr ")" | "(" expr ")"
//   var   := ("q"|"v"|"p") digits          (1-based index, 1..dof)
//   func  := "sin" | "cos" | "exp" | "log" | "sqrt"

#include <cstdint>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "hjk/dual.hpp"

namespace hjk {

enum class Family : std::uint8_t { q, v, p };

char family_letter(Family f) noexcept;

enum class BinaryOp : std::uint8_t { add, sub, mul, div, pow };
enum class Func : std::uint8_t { sin, cos, exp, log, sqrt };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

namespace node {
struct Number {
  double value;
};
struct Variable {
  Family family;
  int index;  // 0-based
};
struct Negate {
  NodePtr operand;
};
struct Binary {
  BinaryOp op;
  NodePtr lhs;
  NodePtr rhs;
};
struct Call {
  Func func;
  NodePtr arg;
};
}  // namespace node

struct Node {
  std::variant<node::Number, node::Variable, node::Negate, node::Binary, node::Call> data;
};

/// Values for the variable families an expression may reference. An empty span
/// means the family is unbound.
template <class T>
struct Binding {
  std::span<const T> q;
  std::span<const T> v;
  std::span<const T> p;
};

/// Bitmask over Family.
struct FamilySet {
  bool q = false;
  bool v = false;
  bool p = false;

  bool has(Family f) const noexcept {
    switch (f) {
      case Family::q: return q;
      case Family::v: return v;
      case Family::p: return p;
    }
    return false;
  }
};

/// Immutable expression tree bound to a system dimension.
class Expr {
 public:
  Expr() = default;
  Expr(NodePtr root, int dof);

  static Expr parse(std::string_view text, int dof);
  static Expr constant(double c, int dof);
  static Expr variable(Family family, int index, int dof);

  int dof() const noexcept { return dof_; }
  const NodePtr& root() const noexcept { return root_; }
  bool empty() const noexcept { return root_ == nullptr; }

  template <class T>
  T eval(const Binding<T>& b) const;

  /// Fully parenthesised canonical form; parse(print()) reproduces the tree.
  std::string print() const;

  FamilySet families() const;
  /// 0-based indices referenced by any variable.
  std::set<int> indices() const;
  bool has_variables() const;

  /// Top-level additive terms, distributing constant factors over sums and
  /// differences. Every returned term carries its own sign.
  std::vector<Expr> additive_terms() const;

  /// Copy with every variable index i replaced by map(i) and dof set to new_dof.
  Expr reindexed(const std::vector<int>& index_map, int new_dof) const;

  friend bool operator==(const Expr& a, const Expr& b);

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  Expr operator-() const;

 private:
  NodePtr root_;
  int dof_ = 0;
};

bool structurally_equal(const NodePtr& a, const NodePtr& b);

extern template double Expr::eval<double>(const Binding<double>&) const;
extern template ad::Dual1 Expr::eval<ad::Dual1>(const Binding<ad::Dual1>&) const;
extern template ad::Dual2 Expr::eval<ad::Dual2>(const Binding<ad::Dual2>&) const;

/// Shortest round-trippable rendering of a double (17 significant digits).
std::string format_number(double x);

}  // namespace hjk
