#pragma once

#include <cctype>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "dual.hpp"
#include "errors.hpp"
#include "field.hpp"

namespace driftlab {

// Minimal arithmetic grammar for metric components:
//   expr  := term (('+'|'-') term)*
//   term  := unary (('*'|'/') unary)*
//   unary := ('+'|'-') unary | power
//   power := atom ('^' unary)?
//   atom  := number | pi | e | x<k> | fn '(' expr ')' | '(' expr ')'
class Expr {
 public:
  enum class Op { num, var, add, sub, mul, div, pow, neg, sin, cos, exp, log, sqrt };

  static Expr parse(const std::string& src) {
    Expr e;
    Parser p{src, 0, e};
    e.root_ = p.expr();
    p.skip();
    if (p.pos != src.size()) p.fail("unexpected trailing input");
    return e;
  }

  int max_var() const {
    int mv = -1;
    for (const auto& n : nodes_)
      if (n.op == Op::var) mv = std::max(mv, n.var);
    return mv;
  }

  bool uses(int k) const {
    for (const auto& n : nodes_)
      if (n.op == Op::var && n.var == k) return true;
    return false;
  }

  template <class S>
  S eval(const S* x) const { return eval_node<S>(root_, x); }

 private:
  struct Node {
    Op op;
    double num = 0.0;
    int var = -1;
    int a = -1, b = -1;
  };
  std::vector<Node> nodes_;
  int root_ = -1;

  int add(Node n) {
    nodes_.push_back(n);
    return static_cast<int>(nodes_.size()) - 1;
  }

  bool is_const(int i) const {
    const Node& n = nodes_[i];
    if (n.op == Op::var) return false;
    if (n.op == Op::num) return true;
    if (n.a >= 0 && !is_const(n.a)) return false;
    if (n.b >= 0 && !is_const(n.b)) return false;
    return true;
  }

  template <class S>
  S eval_node(int i, const S* x) const {
    const Node& n = nodes_[i];
    switch (n.op) {
      case Op::num: return S(n.num);
      case Op::var: return x[n.var];
      case Op::add: return eval_node<S>(n.a, x) + eval_node<S>(n.b, x);
      case Op::sub: return eval_node<S>(n.a, x) - eval_node<S>(n.b, x);
      case Op::mul: return eval_node<S>(n.a, x) * eval_node<S>(n.b, x);
      case Op::div: return eval_node<S>(n.a, x) / eval_node<S>(n.b, x);
      case Op::neg: return -eval_node<S>(n.a, x);
      case Op::sin: return ad::sin(eval_node<S>(n.a, x));
      case Op::cos: return ad::cos(eval_node<S>(n.a, x));
      case Op::exp: return ad::exp(eval_node<S>(n.a, x));
      case Op::log: return ad::log(eval_node<S>(n.a, x));
      case Op::sqrt: return ad::sqrt(eval_node<S>(n.a, x));
      case Op::pow: {
        S base = eval_node<S>(n.a, x);
        if (is_const(n.b)) {
          double p = eval_node<double>(n.b, nullptr);
          if (p == std::round(p) && std::abs(p) < 64) return ad::ipow(base, static_cast<int>(p));
          return ad::pow(base, p);
        }
        return ad::pow(base, eval_node<S>(n.b, x));
      }
    }
    return S(0.0);
  }

  struct Parser {
    const std::string& s;
    size_t pos;
    Expr& e;

    [[noreturn]] void fail(const std::string& msg) const {
      throw ParseError(msg + " at position " + std::to_string(pos) + " in '" + s + "'");
    }
    void skip() {
      while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool eat(char c) {
      skip();
      if (pos < s.size() && s[pos] == c) {
        ++pos;
        return true;
      }
      return false;
    }
    int expr() {
      int l = term();
      for (;;) {
        if (eat('+')) l = e.add({Op::add, 0, -1, l, term()});
        else if (eat('-')) l = e.add({Op::sub, 0, -1, l, term()});
        else return l;
      }
    }
    int term() {
      int l = unary();
      for (;;) {
        if (eat('*')) l = e.add({Op::mul, 0, -1, l, unary()});
        else if (eat('/')) l = e.add({Op::div, 0, -1, l, unary()});
        else return l;
      }
    }
    int unary() {
      if (eat('-')) return e.add({Op::neg, 0, -1, unary(), -1});
      if (eat('+')) return unary();
      return power();
    }
    int power() {
      int b = atom();
      if (eat('^')) return e.add({Op::pow, 0, -1, b, unary()});
      return b;
    }
    int atom() {
      skip();
      if (pos >= s.size()) fail("unexpected end of input");
      char c = s[pos];
      if (c == '(') {
        ++pos;
        int r = expr();
        if (!eat(')')) fail("expected ')'");
        return r;
      }
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        size_t used = 0;
        double v = 0.0;
        try {
          v = std::stod(s.substr(pos), &used);
        } catch (const std::exception&) {
          fail("bad number");
        }
        pos += used;
        return e.add({Op::num, v, -1, -1, -1});
      }
      if (std::isalpha(static_cast<unsigned char>(c))) {
        size_t start = pos;
        while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_')) ++pos;
        std::string id = s.substr(start, pos - start);
        if (id == "pi") return e.add({Op::num, std::numbers::pi, -1, -1, -1});
        if (id == "e") return e.add({Op::num, std::numbers::e, -1, -1, -1});
        if (id.size() > 1 && id[0] == 'x' &&
            id.find_first_not_of("0123456789", 1) == std::string::npos)
          return e.add({Op::var, 0, std::stoi(id.substr(1)), -1, -1});
        Op op;
        if (id == "sin") op = Op::sin;
        else if (id == "cos") op = Op::cos;
        else if (id == "exp") op = Op::exp;
        else if (id == "log") op = Op::log;
        else if (id == "sqrt") op = Op::sqrt;
        else fail("unknown identifier '" + id + "'");
        if (!eat('(')) fail("expected '(' after " + id);
        int a = expr();
        if (!eat(')')) fail("expected ')'");
        return e.add({op, 0, -1, a, -1});
      }
      fail(std::string("unexpected character '") + c + "'");
    }
  };
};

// Field whose components are parsed expressions in x0..x{dim-1}.
inline FieldPtr expression_field(int dim, const std::vector<std::string>& comps) {
  std::vector<Expr> ex;
  for (const auto& c : comps) {
    ex.push_back(Expr::parse(c));
    if (ex.back().max_var() >= dim) throw ParseError("expression '" + c + "' uses a coordinate beyond dim");
  }
  return make_field(dim, static_cast<int>(ex.size()), [ex](const auto* x, auto* out) {
    for (size_t i = 0; i < ex.size(); ++i) out[i] = ex[i].eval(x);
  });
}

}  // namespace driftlab
