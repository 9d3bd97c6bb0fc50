#pragma once

#include <cctype>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>
#include <string_view>
#include <utility>

#include "error.hpp"

namespace orlicz_elastica {

// Scalar expressions over x and y:
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('+' | '-') unary | power
//   power   := primary ('^' unary)?                 right associative
//   primary := number | 'x' | 'y' | 'pi' | 'e'
//            | func '(' expr ')' | '(' expr ')'
//   func    := sin cos tan exp log sqrt abs sinh cosh tanh
class Expression {
 public:
  Expression() : Expression(std::make_shared<Node>(Node{Node::Kind::constant, 0.0})) {}

  static Expression parse(std::string_view text) {
    Parser p{text};
    auto node = p.expr();
    p.skip_space();
    if (p.pos != text.size()) p.fail("unexpected '" + std::string(1, text[p.pos]) + "'");
    return Expression(std::move(node), std::string(text));
  }

  static Expression constant(double c) {
    auto e = Expression(std::make_shared<Node>(Node{Node::Kind::constant, c}));
    return e;
  }

  double operator()(double x, double y) const { return eval(*root_, x, y); }
  const std::string& text() const { return text_; }

 private:
  struct Node {
    enum class Kind { constant, var_x, var_y, neg, add, sub, mul, div, pow, call };
    Kind kind;
    double value = 0.0;
    std::shared_ptr<const Node> lhs{};
    std::shared_ptr<const Node> rhs{};
    double (*fn)(double) = nullptr;
  };
  using NodePtr = std::shared_ptr<const Node>;

  explicit Expression(NodePtr root, std::string text = "") : root_(std::move(root)), text_(std::move(text)) {}

  static double eval(const Node& n, double x, double y) {
    switch (n.kind) {
      case Node::Kind::constant: return n.value;
      case Node::Kind::var_x: return x;
      case Node::Kind::var_y: return y;
      case Node::Kind::neg: return -eval(*n.lhs, x, y);
      case Node::Kind::add: return eval(*n.lhs, x, y) + eval(*n.rhs, x, y);
      case Node::Kind::sub: return eval(*n.lhs, x, y) - eval(*n.rhs, x, y);
      case Node::Kind::mul: return eval(*n.lhs, x, y) * eval(*n.rhs, x, y);
      case Node::Kind::div: return eval(*n.lhs, x, y) / eval(*n.rhs, x, y);
      case Node::Kind::pow: return std::pow(eval(*n.lhs, x, y), eval(*n.rhs, x, y));
      case Node::Kind::call: return n.fn(eval(*n.lhs, x, y));
    }
    return 0.0;
  }

  struct Parser {
    std::string_view src;
    std::size_t pos = 0;

    [[noreturn]] void fail(const std::string& msg) const {
      throw ConfigError("expression '" + std::string(src) + "' at column " + std::to_string(pos + 1) + ": " + msg);
    }
    void skip_space() {
      while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
    }
    bool accept(char c) {
      skip_space();
      if (pos < src.size() && src[pos] == c) {
        ++pos;
        return true;
      }
      return false;
    }
    static NodePtr binary(Node::Kind k, NodePtr a, NodePtr b) {
      return std::make_shared<Node>(Node{k, 0.0, std::move(a), std::move(b)});
    }

    NodePtr expr() {
      NodePtr n = term();
      for (;;) {
        if (accept('+')) {
          n = binary(Node::Kind::add, n, term());
        } else if (accept('-')) {
          n = binary(Node::Kind::sub, n, term());
        } else {
          return n;
        }
      }
    }
    NodePtr term() {
      NodePtr n = unary();
      for (;;) {
        if (accept('*')) {
          n = binary(Node::Kind::mul, n, unary());
        } else if (accept('/')) {
          n = binary(Node::Kind::div, n, unary());
        } else {
          return n;
        }
      }
    }
    NodePtr unary() {
      if (accept('-')) return binary(Node::Kind::neg, unary(), nullptr);
      if (accept('+')) return unary();
      return power();
    }
    NodePtr power() {
      NodePtr base = primary();
      if (accept('^')) return binary(Node::Kind::pow, base, unary());
      return base;
    }
    NodePtr primary() {
      skip_space();
      if (pos >= src.size()) fail("unexpected end of expression");
      const char c = src[pos];
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        const std::string rest(src.substr(pos));
        std::size_t used = 0;
        double v = 0.0;
        try {
          v = std::stod(rest, &used);
        } catch (...) {
          fail("malformed number");
        }
        pos += used;
        return std::make_shared<Node>(Node{Node::Kind::constant, v});
      }
      if (accept('(')) {
        NodePtr n = expr();
        if (!accept(')')) fail("expected ')'");
        return n;
      }
      if (std::isalpha(static_cast<unsigned char>(c))) {
        const std::size_t start = pos;
        while (pos < src.size() && std::isalnum(static_cast<unsigned char>(src[pos]))) ++pos;
        const std::string_view name = src.substr(start, pos - start);
        if (name == "x") return std::make_shared<Node>(Node{Node::Kind::var_x});
        if (name == "y") return std::make_shared<Node>(Node{Node::Kind::var_y});
        if (name == "pi") return std::make_shared<Node>(Node{Node::Kind::constant, std::numbers::pi});
        if (name == "e") return std::make_shared<Node>(Node{Node::Kind::constant, std::numbers::e});
        double (*fn)(double) = lookup(name);
        if (!fn) {
          pos = start;
          fail("unknown identifier '" + std::string(name) + "'");
        }
        if (!accept('(')) fail("expected '(' after " + std::string(name));
        NodePtr arg = expr();
        if (!accept(')')) fail("expected ')'");
        auto n = std::make_shared<Node>(Node{Node::Kind::call, 0.0, std::move(arg), nullptr});
        n->fn = fn;
        return n;
      }
      fail("unexpected '" + std::string(1, c) + "'");
    }
    static double (*lookup(std::string_view name))(double) {
      if (name == "sin") return [](double v) { return std::sin(v); };
      if (name == "cos") return [](double v) { return std::cos(v); };
      if (name == "tan") return [](double v) { return std::tan(v); };
      if (name == "exp") return [](double v) { return std::exp(v); };
      if (name == "log") return [](double v) { return std::log(v); };
      if (name == "sqrt") return [](double v) { return std::sqrt(v); };
      if (name == "abs") return [](double v) { return std::abs(v); };
      if (name == "sinh") return [](double v) { return std::sinh(v); };
      if (name == "cosh") return [](double v) { return std::cosh(v); };
      if (name == "tanh") return [](double v) { return std::tanh(v); };
      return nullptr;
    }
  };

  NodePtr root_;
  std::string text_;
};

}  // namespace orlicz_elastica
