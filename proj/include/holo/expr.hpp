#pragma once

#include <array>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "holo/common.hpp"

namespace holo {

struct EvalOptions {
  double hard_pole_floor = 1e-300;
  double soft_pole_floor = 1e-12;
};

/** Filled during evaluation when passed; min_denominator below the soft floor
 *  flags a near-pole without aborting the evaluation. */
struct EvalStats {
  double min_denominator = std::numeric_limits<double>::infinity();
  bool soft_pole(const EvalOptions& opt = {}) const { return min_denominator < opt.soft_pole_floor; }
};

namespace detail {

/** Forward-mode jet: value plus all first partials. Fixed capacity keeps the
 *  evaluator allocation-free. */
struct Jet {
  cplx v{};
  int n = 0;
  std::array<cplx, kMaxVars> d{};
};

inline Jet jet_const(cplx c, int n) {
  Jet j;
  j.v = c;
  j.n = n;
  return j;
}

inline Jet jet_var(cplx value, int index, int n) {
  Jet j;
  j.v = value;
  j.n = n;
  j.d[static_cast<size_t>(index)] = cplx(1.0, 0.0);
  return j;
}

inline std::string format_double(double x) {
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

struct Token {
  enum class Kind { number, ident, punct, end } kind;
  double number = 0.0;
  std::string text;
  char punct = 0;
  size_t pos = 0;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) { advance(); }

  const Token& peek() const { return tok_; }
  Token take() {
    Token t = tok_;
    advance();
    return t;
  }
  bool accept_punct(char c) {
    if (tok_.kind == Token::Kind::punct && tok_.punct == c) {
      advance();
      return true;
    }
    return false;
  }
  void expect_punct(char c) {
    if (!accept_punct(c)) fail_here(std::string("expected '") + c + "'");
  }
  [[noreturn]] void fail_here(const std::string& msg) const {
    fail(errc::parse, msg + " at offset " + std::to_string(tok_.pos) + " in \"" + std::string(src_) + "\"");
  }

 private:
  void advance() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    tok_ = Token{};
    tok_.pos = pos_;
    if (pos_ >= src_.size()) {
      tok_.kind = Token::Kind::end;
      return;
    }
    char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && pos_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
      size_t start = pos_;
      while (pos_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.')) ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
        size_t mark = pos_ + 1;
        if (mark < src_.size() && (src_[mark] == '+' || src_[mark] == '-')) ++mark;
        if (mark < src_.size() && std::isdigit(static_cast<unsigned char>(src_[mark]))) {
          pos_ = mark;
          while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        }
      }
      tok_.kind = Token::Kind::number;
      tok_.text = std::string(src_.substr(start, pos_ - start));
      tok_.number = std::strtod(tok_.text.c_str(), nullptr);
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = pos_;
      while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) ++pos_;
      tok_.kind = Token::Kind::ident;
      tok_.text = std::string(src_.substr(start, pos_ - start));
      return;
    }
    tok_.kind = Token::Kind::punct;
    tok_.punct = c;
    ++pos_;
  }

  std::string_view src_;
  size_t pos_ = 0;
  Token tok_;
};

}  // namespace detail

/** Immutable holomorphic expression tree over variables z0..z{n-1}.
 *  Supported operations: + - * / unary minus and integer powers; constants may
 *  be complex. Division tracks denominator moduli against the pole floors. */
class Expression {
 public:
  enum class Op : std::uint8_t { constant, variable, add, sub, mul, div, neg, pow };

  Expression() : Expression(constant(cplx(0.0, 0.0))) {}

  static Expression constant(cplx c) {
    return Expression(std::make_shared<Node>(Node{Op::constant, c, 0, nullptr, nullptr}));
  }
  static Expression variable(int index) {
    require(index >= 0 && index < kMaxVars, errc::arity, "variable index out of supported range");
    return Expression(std::make_shared<Node>(Node{Op::variable, cplx{}, index, nullptr, nullptr}));
  }

  friend Expression operator+(const Expression& a, const Expression& b) { return binary(Op::add, a, b); }
  friend Expression operator-(const Expression& a, const Expression& b) { return binary(Op::sub, a, b); }
  friend Expression operator*(const Expression& a, const Expression& b) { return binary(Op::mul, a, b); }
  friend Expression operator/(const Expression& a, const Expression& b) { return binary(Op::div, a, b); }
  friend Expression operator-(const Expression& a) {
    if (a.op() == Op::constant) return constant(-a.n_->value);
    return Expression(std::make_shared<Node>(Node{Op::neg, cplx{}, 0, a.n_, nullptr}));
  }
  Expression pow(int exponent) const {
    if (op() == Op::constant) return constant(detail_ipow_checked(n_->value, exponent));
    return Expression(std::make_shared<Node>(Node{Op::pow, cplx{}, exponent, n_, nullptr}));
  }

  Op op() const { return n_->op; }
  bool is_constant() const { return op() == Op::constant; }
  cplx constant_value() const {
    require(is_constant(), errc::invalid_argument, "not a constant expression");
    return n_->value;
  }

  cplx eval(std::span<const cplx> z, EvalStats* stats = nullptr, const EvalOptions& opt = {}) const {
    return eval_node(n_.get(), z, stats, opt);
  }

  /** Value and all partials d/dz_j in one forward pass (exact, no differencing). */
  detail::Jet eval_jet(std::span<const cplx> z, EvalStats* stats = nullptr, const EvalOptions& opt = {}) const {
    require(z.size() <= kMaxVars, errc::arity, "too many variables");
    return jet_node(n_.get(), z, stats, opt);
  }

  int max_variable() const { return max_var_node(n_.get()); }

  Expression substitute(std::span<const Expression> repl) const { return subst_node(n_.get(), repl); }

  std::string to_string() const {
    std::string out;
    print_node(n_.get(), 0, out);
    return out;
  }

  friend bool operator==(const Expression& a, const Expression& b) { return equal_nodes(a.n_.get(), b.n_.get()); }

 private:
  struct Node {
    Op op;
    cplx value;
    int index;  // variable index, or integer exponent for pow
    std::shared_ptr<const Node> a, b;
  };

  explicit Expression(std::shared_ptr<const Node> n) : n_(std::move(n)) {}

  static cplx detail_ipow_checked(cplx u, int k, const EvalOptions& opt = {}) {
    if (k == 0) return cplx(1.0, 0.0);
    bool neg = k < 0;
    unsigned long e = neg ? static_cast<unsigned long>(-(long)k) : static_cast<unsigned long>(k);
    cplx acc(1.0, 0.0), base = u;
    while (e) {
      if (e & 1u) acc *= base;
      base *= base;
      e >>= 1u;
    }
    if (neg) {
      require(std::abs(acc) >= opt.hard_pole_floor, errc::pole, "pole: negative power of a vanishing base");
      return cplx(1.0, 0.0) / acc;
    }
    return acc;
  }

  static Expression binary(Op op, const Expression& a, const Expression& b) {
    if (a.is_constant() && b.is_constant()) {
      cplx x = a.n_->value, y = b.n_->value;
      switch (op) {
        case Op::add: return constant(x + y);
        case Op::sub: return constant(x - y);
        case Op::mul: return constant(x * y);
        case Op::div:
          if (std::abs(y) > 1e-12) return constant(x / y);
          break;  // keep the node so evaluation reports the pole
        default: break;
      }
    }
    return Expression(std::make_shared<Node>(Node{op, cplx{}, 0, a.n_, b.n_}));
  }

  static cplx eval_node(const Node* nd, std::span<const cplx> z, EvalStats* stats, const EvalOptions& opt) {
    switch (nd->op) {
      case Op::constant: return nd->value;
      case Op::variable:
        require(static_cast<size_t>(nd->index) < z.size(), errc::arity, "variable index exceeds point dimension");
        return z[static_cast<size_t>(nd->index)];
      case Op::add: return eval_node(nd->a.get(), z, stats, opt) + eval_node(nd->b.get(), z, stats, opt);
      case Op::sub: return eval_node(nd->a.get(), z, stats, opt) - eval_node(nd->b.get(), z, stats, opt);
      case Op::mul: return eval_node(nd->a.get(), z, stats, opt) * eval_node(nd->b.get(), z, stats, opt);
      case Op::div: {
        cplx den = eval_node(nd->b.get(), z, stats, opt);
        double m = std::abs(den);
        if (stats && m < stats->min_denominator) stats->min_denominator = m;
        require(m >= opt.hard_pole_floor, errc::pole, "pole: denominator modulus below hard floor");
        return eval_node(nd->a.get(), z, stats, opt) / den;
      }
      case Op::neg: return -eval_node(nd->a.get(), z, stats, opt);
      case Op::pow: {
        cplx u = eval_node(nd->a.get(), z, stats, opt);
        if (nd->index < 0 && stats) {
          double m = std::pow(std::abs(u), -nd->index);
          if (m < stats->min_denominator) stats->min_denominator = m;
        }
        return detail_ipow_checked(u, nd->index, opt);
      }
    }
    fail(errc::invalid_argument, "corrupt expression node");
  }

  static detail::Jet jet_node(const Node* nd, std::span<const cplx> z, EvalStats* stats, const EvalOptions& opt) {
    const int n = static_cast<int>(z.size());
    using detail::Jet;
    switch (nd->op) {
      case Op::constant: return detail::jet_const(nd->value, n);
      case Op::variable:
        require(nd->index < n, errc::arity, "variable index exceeds point dimension");
        return detail::jet_var(z[static_cast<size_t>(nd->index)], nd->index, n);
      case Op::add: {
        Jet a = jet_node(nd->a.get(), z, stats, opt), b = jet_node(nd->b.get(), z, stats, opt);
        a.v += b.v;
        for (int j = 0; j < n; ++j) a.d[j] += b.d[j];
        return a;
      }
      case Op::sub: {
        Jet a = jet_node(nd->a.get(), z, stats, opt), b = jet_node(nd->b.get(), z, stats, opt);
        a.v -= b.v;
        for (int j = 0; j < n; ++j) a.d[j] -= b.d[j];
        return a;
      }
      case Op::mul: {
        Jet a = jet_node(nd->a.get(), z, stats, opt), b = jet_node(nd->b.get(), z, stats, opt);
        Jet r = detail::jet_const(a.v * b.v, n);
        for (int j = 0; j < n; ++j) r.d[j] = a.d[j] * b.v + a.v * b.d[j];
        return r;
      }
      case Op::div: {
        Jet a = jet_node(nd->a.get(), z, stats, opt), b = jet_node(nd->b.get(), z, stats, opt);
        double m = std::abs(b.v);
        if (stats && m < stats->min_denominator) stats->min_denominator = m;
        require(m >= opt.hard_pole_floor, errc::pole, "pole: denominator modulus below hard floor");
        Jet r = detail::jet_const(a.v / b.v, n);
        for (int j = 0; j < n; ++j) r.d[j] = (a.d[j] - r.v * b.d[j]) / b.v;
        return r;
      }
      case Op::neg: {
        Jet a = jet_node(nd->a.get(), z, stats, opt);
        a.v = -a.v;
        for (int j = 0; j < n; ++j) a.d[j] = -a.d[j];
        return a;
      }
      case Op::pow: {
        Jet a = jet_node(nd->a.get(), z, stats, opt);
        int k = nd->index;
        Jet r = detail::jet_const(detail_ipow_checked(a.v, k, opt), n);
        if (k != 0) {
          cplx factor;
          if (k >= 1) {
            factor = static_cast<double>(k) * detail_ipow_checked(a.v, k - 1, opt);
          } else {
            require(std::abs(a.v) >= opt.hard_pole_floor, errc::pole, "pole: negative power at vanishing base");
            factor = static_cast<double>(k) * r.v / a.v;
          }
          for (int j = 0; j < n; ++j) r.d[j] = factor * a.d[j];
        }
        return r;
      }
    }
    fail(errc::invalid_argument, "corrupt expression node");
  }

  static int max_var_node(const Node* nd) {
    switch (nd->op) {
      case Op::constant: return -1;
      case Op::variable: return nd->index;
      case Op::neg:
      case Op::pow: return max_var_node(nd->a.get());
      default: return std::max(max_var_node(nd->a.get()), max_var_node(nd->b.get()));
    }
  }

  static Expression subst_node(const Node* nd, std::span<const Expression> repl) {
    switch (nd->op) {
      case Op::constant: return constant(nd->value);
      case Op::variable:
        require(static_cast<size_t>(nd->index) < repl.size(), errc::arity, "substitution misses a variable");
        return repl[static_cast<size_t>(nd->index)];
      case Op::add: return subst_node(nd->a.get(), repl) + subst_node(nd->b.get(), repl);
      case Op::sub: return subst_node(nd->a.get(), repl) - subst_node(nd->b.get(), repl);
      case Op::mul: return subst_node(nd->a.get(), repl) * subst_node(nd->b.get(), repl);
      case Op::div: return subst_node(nd->a.get(), repl) / subst_node(nd->b.get(), repl);
      case Op::neg: return -subst_node(nd->a.get(), repl);
      case Op::pow: return subst_node(nd->a.get(), repl).pow(nd->index);
    }
    fail(errc::invalid_argument, "corrupt expression node");
  }

  // Precedence levels: add/sub 1, mul/div 2, unary minus 2, pow 3, atoms 4.
  static void print_node(const Node* nd, int min_prec, std::string& out) {
    auto wrap = [&](int prec, auto&& body) {
      bool parens = prec < min_prec;
      if (parens) out += '(';
      body();
      if (parens) out += ')';
    };
    switch (nd->op) {
      case Op::constant: {
        cplx c = nd->value;
        if (c.imag() == 0.0) {
          bool neg = std::signbit(c.real()) && c.real() != 0.0;
          wrap(neg ? 2 : 4, [&] { out += detail::format_double(c.real()); });
        } else if (c.real() == 0.0) {
          if (c.imag() == 1.0) {
            out += "i";
          } else if (c.imag() == -1.0) {
            wrap(2, [&] { out += "-i"; });
          } else {
            wrap(2, [&] {
              out += detail::format_double(c.imag());
              out += "*i";
            });
          }
        } else {
          out += '(';
          out += detail::format_double(c.real());
          out += c.imag() > 0 ? "+" : "-";
          double im = std::abs(c.imag());
          if (im != 1.0) {
            out += detail::format_double(im);
            out += "*i";
          } else {
            out += "i";
          }
          out += ')';
        }
        return;
      }
      case Op::variable:
        out += 'z';
        out += std::to_string(nd->index);
        return;
      case Op::add:
        wrap(1, [&] {
          print_node(nd->a.get(), 1, out);
          out += '+';
          print_node(nd->b.get(), 2, out);
        });
        return;
      case Op::sub:
        wrap(1, [&] {
          print_node(nd->a.get(), 1, out);
          out += '-';
          print_node(nd->b.get(), 2, out);
        });
        return;
      case Op::mul:
        wrap(2, [&] {
          print_node(nd->a.get(), 2, out);
          out += '*';
          print_node(nd->b.get(), 3, out);
        });
        return;
      case Op::div:
        wrap(2, [&] {
          print_node(nd->a.get(), 2, out);
          out += '/';
          print_node(nd->b.get(), 3, out);
        });
        return;
      case Op::neg:
        wrap(2, [&] {
          out += '-';
          print_node(nd->a.get(), 3, out);
        });
        return;
      case Op::pow:
        wrap(3, [&] {
          print_node(nd->a.get(), 4, out);
          out += '^';
          out += std::to_string(nd->index);
        });
        return;
    }
  }

  static bool equal_nodes(const Node* x, const Node* y) {
    if (x == y) return true;
    if (x->op != y->op) return false;
    switch (x->op) {
      case Op::constant: return x->value == y->value;
      case Op::variable: return x->index == y->index;
      case Op::neg: return equal_nodes(x->a.get(), y->a.get());
      case Op::pow: return x->index == y->index && equal_nodes(x->a.get(), y->a.get());
      default: return equal_nodes(x->a.get(), y->a.get()) && equal_nodes(x->b.get(), y->b.get());
    }
  }

  std::shared_ptr<const Node> n_;
};

namespace detail {

class ExprParser {
 public:
  ExprParser(Lexer& lex, int arity) : lex_(lex), arity_(arity) {}

  Expression parse_expression() {
    Expression e = parse_term();
    while (true) {
      if (lex_.accept_punct('+')) {
        e = e + parse_term();
      } else if (lex_.accept_punct('-')) {
        e = e - parse_term();
      } else {
        return e;
      }
    }
  }

 private:
  Expression parse_term() {
    Expression e = parse_unary();
    while (true) {
      if (lex_.accept_punct('*')) {
        e = e * parse_unary();
      } else if (lex_.accept_punct('/')) {
        e = e / parse_unary();
      } else {
        return e;
      }
    }
  }

  Expression parse_unary() {
    int sign = 1;
    while (true) {
      if (lex_.accept_punct('-')) {
        sign = -sign;
      } else if (lex_.accept_punct('+')) {
      } else {
        break;
      }
    }
    Expression e = parse_power();
    return sign < 0 ? -e : e;
  }

  Expression parse_power() {
    Expression base = parse_atom();
    if (lex_.accept_punct('^')) {
      bool neg = lex_.accept_punct('-');
      auto t = lex_.peek();
      if (t.kind != Token::Kind::number || t.text.find_first_of(".eE") != std::string::npos)
        lex_.fail_here("exponent must be an integer literal");
      lex_.take();
      long k = std::lround(t.number);
      return base.pow(static_cast<int>(neg ? -k : k));
    }
    return base;
  }

  Expression parse_atom() {
    auto t = lex_.peek();
    if (t.kind == Token::Kind::number) {
      lex_.take();
      return Expression::constant(cplx(t.number, 0.0));
    }
    if (t.kind == Token::Kind::ident) {
      lex_.take();
      if (t.text == "i") return Expression::constant(cplx(0.0, 1.0));
      if (t.text == "x") return make_var(0, t);
      if (t.text == "y") return make_var(1, t);
      if (t.text == "z") {
        if (arity_ == 1) return make_var(0, t);
        lex_.fail_here("bare 'z' is only valid in one variable; use z0..z" + std::to_string(arity_ - 1));
      }
      if (t.text.size() >= 2 && t.text[0] == 'z') {
        bool digits = true;
        for (size_t k = 1; k < t.text.size(); ++k)
          if (!std::isdigit(static_cast<unsigned char>(t.text[k]))) digits = false;
        if (digits) return make_var(std::atoi(t.text.c_str() + 1), t);
      }
      lex_.fail_here("unknown identifier '" + t.text + "'");
    }
    if (t.kind == Token::Kind::punct && t.punct == '(') {
      lex_.take();
      Expression e = parse_expression();
      lex_.expect_punct(')');
      return e;
    }
    lex_.fail_here("expected a number, variable, i, or '('");
  }

  Expression make_var(int idx, const Token& t) {
    if (idx < 0 || idx >= arity_)
      lex_.fail_here("variable '" + t.text + "' out of range for dimension " + std::to_string(arity_));
    return Expression::variable(idx);
  }

  Lexer& lex_;
  int arity_;
};

}  // namespace detail

inline Expression parse_expression(std::string_view text, int arity) {
  detail::Lexer lex(text);
  detail::ExprParser p(lex, arity);
  Expression e = p.parse_expression();
  if (lex.peek().kind != detail::Token::Kind::end) lex.fail_here("trailing input");
  return e;
}

/** A holomorphic map C^arity -> C^dim given componentwise by expressions. */
class HolomorphicMap {
 public:
  HolomorphicMap() : arity_(0) {}
  HolomorphicMap(std::vector<Expression> comps, int arity) : comps_(std::move(comps)), arity_(arity) {
    require(arity_ >= 0 && arity_ <= kMaxVars, errc::arity, "unsupported arity");
    for (const auto& c : comps_)
      require(c.max_variable() < arity_, errc::arity, "component references a variable beyond the arity");
  }

  /** Comma-separated component expressions, e.g. "x*y, 1/x". */
  static HolomorphicMap parse(std::string_view text, int arity) {
    detail::Lexer lex(text);
    detail::ExprParser p(lex, arity);
    std::vector<Expression> comps;
    comps.push_back(p.parse_expression());
    while (lex.accept_punct(',')) comps.push_back(p.parse_expression());
    if (lex.peek().kind != detail::Token::Kind::end) lex.fail_here("trailing input");
    return HolomorphicMap(std::move(comps), arity);
  }

  static HolomorphicMap identity(int n) {
    std::vector<Expression> comps;
    for (int j = 0; j < n; ++j) comps.push_back(Expression::variable(j));
    return HolomorphicMap(std::move(comps), n);
  }

  int arity() const { return arity_; }
  int dim() const { return static_cast<int>(comps_.size()); }
  const Expression& component(int j) const { return comps_[static_cast<size_t>(j)]; }

  void eval_into(std::span<const cplx> z, std::span<cplx> out, EvalStats* stats = nullptr) const {
    require(static_cast<int>(z.size()) == arity_, errc::arity, "point dimension mismatch");
    require(out.size() == comps_.size(), errc::arity, "output dimension mismatch");
    for (size_t j = 0; j < comps_.size(); ++j) out[j] = comps_[j].eval(z, stats);
  }

  cvec eval(const cvec& z, EvalStats* stats = nullptr) const {
    cvec out(dim());
    eval_into({z.data(), static_cast<size_t>(z.size())}, {out.data(), static_cast<size_t>(out.size())}, stats);
    return out;
  }

  /** Exact Jacobian (dim x arity) by forward-mode differentiation. */
  cmat jacobian(const cvec& z, EvalStats* stats = nullptr) const {
    require(static_cast<int>(z.size()) == arity_, errc::arity, "point dimension mismatch");
    cmat J(dim(), arity_);
    std::span<const cplx> zs{z.data(), static_cast<size_t>(z.size())};
    for (int r = 0; r < dim(); ++r) {
      auto jet = comps_[static_cast<size_t>(r)].eval_jet(zs, stats);
      for (int c = 0; c < arity_; ++c) J(r, c) = jet.d[static_cast<size_t>(c)];
    }
    return J;
  }

  /** Pointwise n-fold application (requires dim == arity). The optional guard
   *  is consulted after each step and aborts on escape. */
  template <class Guard>
  cvec iterate(cvec z, int count, Guard&& inside) const {
    require(dim() == arity_, errc::arity, "iteration needs a self-map shape");
    cvec buf(dim());
    for (int k = 0; k < count; ++k) {
      eval_into({z.data(), static_cast<size_t>(z.size())}, {buf.data(), static_cast<size_t>(buf.size())});
      z.swap(buf);
      if (!inside(z)) fail(errc::domain, "iterate left the domain after step " + std::to_string(k + 1));
    }
    return z;
  }
  cvec iterate(cvec z, int count) const {
    return iterate(std::move(z), count, [](const cvec&) { return true; });
  }

  /** Symbolic composition this(inner(z)). */
  HolomorphicMap compose(const HolomorphicMap& inner) const {
    require(inner.dim() == arity_, errc::arity, "composition dimension mismatch");
    std::vector<Expression> comps;
    comps.reserve(comps_.size());
    for (const auto& c : comps_) comps.push_back(c.substitute(inner.comps_));
    return HolomorphicMap(std::move(comps), inner.arity());
  }

  std::string to_string() const {
    std::string out;
    for (size_t j = 0; j < comps_.size(); ++j) {
      if (j) out += ", ";
      out += comps_[j].to_string();
    }
    return out;
  }

 private:
  std::vector<Expression> comps_;
  int arity_;
};

inline HolomorphicMap parse_map(std::string_view text, int arity) { return HolomorphicMap::parse(text, arity); }

}  // namespace holo
