#include "hjk/expr.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <utility>

namespace hjk {

char family_letter(Family f) noexcept {
  switch (f) {
    case Family::q: return 'q';
    case Family::v: return 'v';
    case Family::p: return 'p';
  }
  return '?';
}

std::string format_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

NodePtr make(auto&& data) { return std::make_shared<const Node>(Node{std::forward<decltype(data)>(data)}); }

// ---------------------------------------------------------------------------
// Parser

class Parser {
 public:
  Parser(std::string_view text, int dof) : text_(text), dof_(dof) {}

  NodePtr parse() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("empty expression", pos_);
    NodePtr e = expr();
    skip_ws();
    if (pos_ != text_.size()) throw ParseError("unexpected '" + std::string(1, text_[pos_]) + "'", pos_);
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= text_.size()) throw ParseError(std::string("expected '") + c + "' but input ended", pos_);
      throw ParseError(std::string("expected '") + c + "'", pos_);
    }
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = make(node::Binary{BinaryOp::add, lhs, term()});
      } else if (accept('-')) {
        lhs = make(node::Binary{BinaryOp::sub, lhs, term()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = make(node::Binary{BinaryOp::mul, lhs, unary()});
      } else if (accept('/')) {
        lhs = make(node::Binary{BinaryOp::div, lhs, unary()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(node::Negate{unary()});
    return power();
  }

  NodePtr power() {
    NodePtr base = atom();
    if (accept('^')) return make(node::Binary{BinaryOp::pow, base, unary()});
    return base;
  }

  NodePtr atom() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    throw ParseError("unexpected '" + std::string(1, c) + "'", pos_);
  }

  NodePtr number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        ++pos_;
        ++n;
      }
      return n;
    };
    std::size_t mantissa = digits();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      mantissa += digits();
    }
    if (mantissa == 0) throw ParseError("malformed number", start);
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      const std::size_t save = pos_;
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (digits() == 0) throw ParseError("malformed exponent", save);
    }
    double value = 0.0;
    const char* first = text_.data() + start;
    const char* last = text_.data() + pos_;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec == std::errc::result_out_of_range) throw ParseError("number out of range", start);
    if (ec != std::errc() || ptr != last) throw ParseError("malformed number", start);
    return make(node::Number{value});
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    const std::string_view name = text_.substr(start, pos_ - start);
    const std::size_t digit_start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    const std::string_view digits = text_.substr(digit_start, pos_ - digit_start);

    if (digits.empty()) {
      static constexpr std::pair<std::string_view, Func> kFuncs[] = {
          {"sin", Func::sin}, {"cos", Func::cos}, {"exp", Func::exp}, {"log", Func::log}, {"sqrt", Func::sqrt}};
      for (const auto& [fname, f] : kFuncs) {
        if (name == fname) {
          skip_ws();
          if (pos_ >= text_.size() || text_[pos_] != '(') {
            throw ParseError("expected '(' after function " + std::string(name), pos_);
          }
          ++pos_;
          NodePtr arg = expr();
          expect(')');
          return make(node::Call{f, arg});
        }
      }
      throw ParseError("unknown identifier '" + std::string(name) + "'", start);
    }

    if (name.size() != 1 || (name[0] != 'q' && name[0] != 'v' && name[0] != 'p')) {
      throw ParseError("unknown identifier '" + std::string(text_.substr(start, pos_ - start)) + "'", start);
    }
    int index = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), index);
    if (ec != std::errc() || index < 1 || index > dof_) {
      throw ParseError("variable index out of range 1.." + std::to_string(dof_) + " in '" +
                           std::string(text_.substr(start, pos_ - start)) + "'",
                       start);
    }
    const Family fam = name[0] == 'q' ? Family::q : (name[0] == 'v' ? Family::v : Family::p);
    return make(node::Variable{fam, index - 1});
  }

  std::string_view text_;
  int dof_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Evaluation

template <class T>
const T& lookup(const Binding<T>& b, const node::Variable& var) {
  std::span<const T> values;
  switch (var.family) {
    case Family::q: values = b.q; break;
    case Family::v: values = b.v; break;
    case Family::p: values = b.p; break;
  }
  if (values.empty()) {
    throw UnboundVariableError(std::string("variable family '") + family_letter(var.family) + "' is not bound");
  }
  if (static_cast<std::size_t>(var.index) >= values.size()) {
    throw UnboundVariableError(std::string("variable ") + family_letter(var.family) +
                               std::to_string(var.index + 1) + " is not bound");
  }
  return values[static_cast<std::size_t>(var.index)];
}

bool contains_variables(const NodePtr& n) {
  return std::visit(
      [](const auto& d) -> bool {
        using D = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<D, node::Number>) {
          return false;
        } else if constexpr (std::is_same_v<D, node::Variable>) {
          return true;
        } else if constexpr (std::is_same_v<D, node::Negate>) {
          return contains_variables(d.operand);
        } else if constexpr (std::is_same_v<D, node::Binary>) {
          return contains_variables(d.lhs) || contains_variables(d.rhs);
        } else {
          return contains_variables(d.arg);
        }
      },
      n->data);
}

template <class T>
struct Evaluator {
  const Binding<T>& binding;
  // Dual constants need the number of active variables; taken from any bound value.
  const T* prototype = nullptr;

  T constant(double c) const {
    if constexpr (std::is_same_v<T, double>) {
      return c;
    } else {
      if (prototype == nullptr) throw UnboundVariableError("no bound variable to size dual constants");
      return prototype->constant(c);
    }
  }

  T operator()(const NodePtr& n) const {
    return std::visit([this](const auto& d) { return eval(d); }, n->data);
  }

  T eval(const node::Number& d) const { return constant(d.value); }
  T eval(const node::Variable& d) const { return lookup(binding, d); }
  T eval(const node::Negate& d) const { return -(*this)(d.operand); }

  T eval(const node::Binary& d) const {
    switch (d.op) {
      case BinaryOp::add: return (*this)(d.lhs) + (*this)(d.rhs);
      case BinaryOp::sub: return (*this)(d.lhs) - (*this)(d.rhs);
      case BinaryOp::mul: return (*this)(d.lhs) * (*this)(d.rhs);
      case BinaryOp::div: return ad::divide((*this)(d.lhs), (*this)(d.rhs));
      case BinaryOp::pow: {
        if constexpr (std::is_same_v<T, double>) {
          return ad::pow((*this)(d.lhs), (*this)(d.rhs));
        } else {
          if (!contains_variables(d.rhs)) {
            const Evaluator<double> plain{Binding<double>{}};
            return ad::pow((*this)(d.lhs), plain(d.rhs));
          }
          return ad::pow((*this)(d.lhs), (*this)(d.rhs));
        }
      }
    }
    throw Error("corrupt binary node");
  }

  T eval(const node::Call& d) const {
    const T x = (*this)(d.arg);
    switch (d.func) {
      case Func::sin: return ad::sin(x);
      case Func::cos: return ad::cos(x);
      case Func::exp: return ad::exp(x);
      case Func::log: return ad::log(x);
      case Func::sqrt: return ad::sqrt(x);
    }
    throw Error("corrupt call node");
  }
};

// ---------------------------------------------------------------------------
// Printing and traversal

const char* func_name(Func f) {
  switch (f) {
    case Func::sin: return "sin";
    case Func::cos: return "cos";
    case Func::exp: return "exp";
    case Func::log: return "log";
    case Func::sqrt: return "sqrt";
  }
  return "?";
}

char op_char(BinaryOp op) {
  switch (op) {
    case BinaryOp::add: return '+';
    case BinaryOp::sub: return '-';
    case BinaryOp::mul: return '*';
    case BinaryOp::div: return '/';
    case BinaryOp::pow: return '^';
  }
  return '?';
}

void print_node(const NodePtr& n, std::string& out) {
  std::visit(
      [&out](const auto& d) {
        using D = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<D, node::Number>) {
          out += format_number(d.value);
        } else if constexpr (std::is_same_v<D, node::Variable>) {
          out += family_letter(d.family);
          out += std::to_string(d.index + 1);
        } else if constexpr (std::is_same_v<D, node::Negate>) {
          out += "(-";
          print_node(d.operand, out);
          out += ')';
        } else if constexpr (std::is_same_v<D, node::Binary>) {
          out += '(';
          print_node(d.lhs, out);
          out += ' ';
          out += op_char(d.op);
          out += ' ';
          print_node(d.rhs, out);
          out += ')';
        } else {
          out += func_name(d.func);
          out += '(';
          print_node(d.arg, out);
          out += ')';
        }
      },
      n->data);
}

template <class Visit>
void walk(const NodePtr& n, Visit&& visit) {
  std::visit(
      [&](const auto& d) {
        using D = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<D, node::Variable>) {
          visit(d);
        } else if constexpr (std::is_same_v<D, node::Negate>) {
          walk(d.operand, visit);
        } else if constexpr (std::is_same_v<D, node::Binary>) {
          walk(d.lhs, visit);
          walk(d.rhs, visit);
        } else if constexpr (std::is_same_v<D, node::Call>) {
          walk(d.arg, visit);
        }
      },
      n->data);
}

NodePtr reindex(const NodePtr& n, const std::vector<int>& map) {
  return std::visit(
      [&](const auto& d) -> NodePtr {
        using D = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<D, node::Number>) {
          return n;
        } else if constexpr (std::is_same_v<D, node::Variable>) {
          return make(node::Variable{d.family, map.at(static_cast<std::size_t>(d.index))});
        } else if constexpr (std::is_same_v<D, node::Negate>) {
          return make(node::Negate{reindex(d.operand, map)});
        } else if constexpr (std::is_same_v<D, node::Binary>) {
          return make(node::Binary{d.op, reindex(d.lhs, map), reindex(d.rhs, map)});
        } else {
          return make(node::Call{d.func, reindex(d.arg, map)});
        }
      },
      n->data);
}

// Collects signed additive terms of n into out, scaling each by `factor`
// (a variable-free subtree, or null for 1).
void collect_terms(const NodePtr& n, bool negative, const NodePtr& factor, std::vector<NodePtr>& out) {
  auto emit = [&](const NodePtr& t) {
    NodePtr scaled = factor ? make(node::Binary{BinaryOp::mul, factor, t}) : t;
    out.push_back(negative ? make(node::Negate{scaled}) : scaled);
  };
  if (const auto* neg = std::get_if<node::Negate>(&n->data)) {
    collect_terms(neg->operand, !negative, factor, out);
    return;
  }
  if (const auto* bin = std::get_if<node::Binary>(&n->data)) {
    switch (bin->op) {
      case BinaryOp::add:
        collect_terms(bin->lhs, negative, factor, out);
        collect_terms(bin->rhs, negative, factor, out);
        return;
      case BinaryOp::sub:
        collect_terms(bin->lhs, negative, factor, out);
        collect_terms(bin->rhs, !negative, factor, out);
        return;
      case BinaryOp::mul: {
        auto combine = [&](const NodePtr& c) {
          return factor ? make(node::Binary{BinaryOp::mul, factor, c}) : c;
        };
        if (!contains_variables(bin->lhs)) {
          collect_terms(bin->rhs, negative, combine(bin->lhs), out);
          return;
        }
        if (!contains_variables(bin->rhs)) {
          collect_terms(bin->lhs, negative, combine(bin->rhs), out);
          return;
        }
        break;
      }
      case BinaryOp::div:
        if (!contains_variables(bin->rhs)) {
          const NodePtr inv = make(node::Binary{BinaryOp::div, make(node::Number{1.0}), bin->rhs});
          collect_terms(bin->lhs, negative, factor ? make(node::Binary{BinaryOp::mul, factor, inv}) : inv, out);
          return;
        }
        break;
      case BinaryOp::pow:
        break;
    }
  }
  emit(n);
}

}  // namespace

// ---------------------------------------------------------------------------

Expr::Expr(NodePtr root, int dof) : root_(std::move(root)), dof_(dof) {}

Expr Expr::parse(std::string_view text, int dof) {
  if (dof < 1) throw InputError("dimension must be positive");
  return Expr(Parser(text, dof).parse(), dof);
}

Expr Expr::constant(double c, int dof) { return Expr(make(node::Number{c}), dof); }

Expr Expr::variable(Family family, int index, int dof) {
  if (index < 0 || index >= dof) throw InputError("variable index out of range");
  return Expr(make(node::Variable{family, index}), dof);
}

template <class T>
T Expr::eval(const Binding<T>& b) const {
  if (!root_) throw Error("evaluating an empty expression");
  Evaluator<T> ev{b};
  if constexpr (!std::is_same_v<T, double>) {
    if (!b.q.empty()) {
      ev.prototype = &b.q.front();
    } else if (!b.v.empty()) {
      ev.prototype = &b.v.front();
    } else if (!b.p.empty()) {
      ev.prototype = &b.p.front();
    }
  }
  return ev(root_);
}

template double Expr::eval<double>(const Binding<double>&) const;
template ad::Dual1 Expr::eval<ad::Dual1>(const Binding<ad::Dual1>&) const;
template ad::Dual2 Expr::eval<ad::Dual2>(const Binding<ad::Dual2>&) const;

std::string Expr::print() const {
  std::string out;
  if (root_) print_node(root_, out);
  return out;
}

FamilySet Expr::families() const {
  FamilySet s;
  if (!root_) return s;
  walk(root_, [&s](const node::Variable& v) {
    switch (v.family) {
      case Family::q: s.q = true; break;
      case Family::v: s.v = true; break;
      case Family::p: s.p = true; break;
    }
  });
  return s;
}

std::set<int> Expr::indices() const {
  std::set<int> out;
  if (root_) walk(root_, [&out](const node::Variable& v) { out.insert(v.index); });
  return out;
}

bool Expr::has_variables() const { return root_ && contains_variables(root_); }

std::vector<Expr> Expr::additive_terms() const {
  std::vector<NodePtr> nodes;
  if (root_) collect_terms(root_, false, nullptr, nodes);
  std::vector<Expr> out;
  out.reserve(nodes.size());
  for (auto& n : nodes) out.emplace_back(std::move(n), dof_);
  return out;
}

Expr Expr::reindexed(const std::vector<int>& index_map, int new_dof) const {
  for (int i : indices()) {
    if (static_cast<std::size_t>(i) >= index_map.size() || index_map[static_cast<std::size_t>(i)] < 0 ||
        index_map[static_cast<std::size_t>(i)] >= new_dof) {
      throw InputError("reindexing leaves variable index " + std::to_string(i + 1) + " unmapped");
    }
  }
  return Expr(root_ ? reindex(root_, index_map) : nullptr, new_dof);
}

bool structurally_equal(const NodePtr& a, const NodePtr& b) {
  if (a == b) return true;
  if (!a || !b || a->data.index() != b->data.index()) return false;
  return std::visit(
      [&b](const auto& da) -> bool {
        using D = std::decay_t<decltype(da)>;
        const auto& db = std::get<D>(b->data);
        if constexpr (std::is_same_v<D, node::Number>) {
          return da.value == db.value;
        } else if constexpr (std::is_same_v<D, node::Variable>) {
          return da.family == db.family && da.index == db.index;
        } else if constexpr (std::is_same_v<D, node::Negate>) {
          return structurally_equal(da.operand, db.operand);
        } else if constexpr (std::is_same_v<D, node::Binary>) {
          return da.op == db.op && structurally_equal(da.lhs, db.lhs) && structurally_equal(da.rhs, db.rhs);
        } else {
          return da.func == db.func && structurally_equal(da.arg, db.arg);
        }
      },
      a->data);
}

bool operator==(const Expr& a, const Expr& b) { return a.dof_ == b.dof_ && structurally_equal(a.root_, b.root_); }

Expr operator+(const Expr& a, const Expr& b) {
  return Expr(make(node::Binary{BinaryOp::add, a.root_, b.root_}), std::max(a.dof_, b.dof_));
}
Expr operator-(const Expr& a, const Expr& b) {
  return Expr(make(node::Binary{BinaryOp::sub, a.root_, b.root_}), std::max(a.dof_, b.dof_));
}
Expr operator*(const Expr& a, const Expr& b) {
  return Expr(make(node::Binary{BinaryOp::mul, a.root_, b.root_}), std::max(a.dof_, b.dof_));
}
Expr Expr::operator-() const { return Expr(make(node::Negate{root_}), dof_); }

}  // namespace hjk
