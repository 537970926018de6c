#include "toruscope/expression.hpp"

#include "toruscope/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace toruscope {

namespace {

std::string at_offset(int off) { return " at offset " + std::to_string(off); }

}  // namespace

class ExprParser {
 public:
  ExprParser(const std::string& text, Expression& out) : text_(text), out_(out) {}

  void run() {
    out_.source_ = text_;
    out_.root_ = parse_expr();
    skip_ws();
    if (pos_ != text_.size())
      throw InputError("syntax error" + at_offset(static_cast<int>(pos_)));
    if (out_.root_ < 0) throw InputError("syntax error at offset 0");
  }

 private:
  const std::string& text_;
  Expression& out_;
  size_t pos_ = 0;

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }
  int add(Expression::Node n) {
    out_.nodes_.push_back(n);
    return static_cast<int>(out_.nodes_.size()) - 1;
  }

  int parse_expr() {
    int lhs = parse_term();
    while (true) {
      char c = peek();
      if (c != '+' && c != '-') return lhs;
      int off = static_cast<int>(pos_);
      ++pos_;
      int rhs = parse_term();
      Expression::Node n;
      n.kind = (c == '+') ? Expression::Kind::Add : Expression::Kind::Sub;
      n.a = lhs;
      n.b = rhs;
      n.offset = off;
      lhs = add(n);
    }
  }

  int parse_term() {
    int lhs = parse_factor();
    while (true) {
      char c = peek();
      if (c != '*' && c != '/') return lhs;
      int off = static_cast<int>(pos_);
      ++pos_;
      int rhs = parse_factor();
      Expression::Node n;
      n.kind = (c == '*') ? Expression::Kind::Mul : Expression::Kind::Div;
      n.a = lhs;
      n.b = rhs;
      n.offset = off;
      lhs = add(n);
    }
  }

  int parse_factor() {
    int base = parse_atom();
    if (peek() != '^') return base;
    int off = static_cast<int>(pos_);
    ++pos_;
    skip_ws();
    size_t start = pos_;
    bool neg = false;
    if (pos_ < text_.size() && text_[pos_] == '-') {
      neg = true;
      ++pos_;
    }
    size_t digits = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ == digits)
      throw InputError("syntax error" + at_offset(static_cast<int>(start)) +
                       " (exponent must be an integer literal)");
    if (pos_ < text_.size() && (text_[pos_] == '.' || text_[pos_] == 'e' || text_[pos_] == 'E'))
      throw InputError("non-integer exponent" + at_offset(static_cast<int>(start)));
    int expo = 0;
    auto res = std::from_chars(text_.data() + digits, text_.data() + pos_, expo);
    if (res.ec != std::errc())
      throw InputError("exponent out of range" + at_offset(static_cast<int>(start)));
    Expression::Node n;
    n.kind = Expression::Kind::Pow;
    n.a = base;
    n.expo = neg ? -expo : expo;
    n.offset = off;
    return add(n);
  }

  int parse_atom() {
    char c = peek();
    int off = static_cast<int>(pos_);
    if (c == '\0') throw InputError("syntax error" + at_offset(off));
    if (c == '(') {
      ++pos_;
      int inner = parse_expr();
      if (peek() != ')')
        throw InputError("syntax error" + at_offset(static_cast<int>(pos_)) +
                         " (expected ')')");
      ++pos_;
      return inner;
    }
    if (c == '-') {
      ++pos_;
      int inner = parse_atom();
      Expression::Node n;
      n.kind = Expression::Kind::Neg;
      n.a = inner;
      n.offset = off;
      return add(n);
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number(off);
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident(off);
    throw InputError("syntax error" + at_offset(off));
  }

  int parse_number(int off) {
    size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      size_t mark = pos_;
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      size_t d = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (pos_ == d) pos_ = mark;  // "2e" is the number 2 followed by an identifier
    }
    double v = 0;
    auto res = std::from_chars(text_.data() + start, text_.data() + pos_, v);
    if (res.ec != std::errc() || res.ptr != text_.data() + pos_)
      throw InputError("malformed number" + at_offset(off));
    Expression::Node n;
    n.kind = Expression::Kind::Number;
    n.num = v;
    n.offset = off;
    return add(n);
  }

  int parse_ident(int off) {
    size_t start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                                   text_[pos_] == '_'))
      ++pos_;
    std::string name = text_.substr(start, pos_ - start);
    if (name.size() >= 2 && name[0] == 'x' &&
        std::all_of(name.begin() + 1, name.end(),
                    [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
      int idx = 0;
      std::from_chars(name.data() + 1, name.data() + name.size(), idx);
      if (idx < 1) throw InputError("unknown identifier '" + name + "'" + at_offset(off));
      Expression::Node n;
      n.kind = Expression::Kind::Var;
      n.var = idx;
      n.offset = off;
      if (idx > out_.max_var_) out_.max_var_ = idx;
      return add(n);
    }
    Expression::Fn fn;
    if (name == "sin") fn = Expression::Fn::Sin;
    else if (name == "cos") fn = Expression::Fn::Cos;
    else if (name == "exp") fn = Expression::Fn::Exp;
    else if (name == "sqrt") fn = Expression::Fn::Sqrt;
    else throw InputError("unknown identifier '" + name + "'" + at_offset(off));
    if (peek() != '(')
      throw InputError("syntax error" + at_offset(static_cast<int>(pos_)) +
                       " (expected '(' after function name)");
    ++pos_;
    int inner = parse_expr();
    if (peek() != ')')
      throw InputError("syntax error" + at_offset(static_cast<int>(pos_)) + " (expected ')')");
    ++pos_;
    Expression::Node n;
    n.kind = Expression::Kind::Func;
    n.fn = fn;
    n.a = inner;
    n.offset = off;
    return add(n);
  }
};

Expression Expression::parse(const std::string& text) {
  Expression e;
  ExprParser p(text, e);
  p.run();
  return e;
}

double Expression::eval(int idx, const Eigen::VectorXd& x, Eigen::MatrixXd* grads,
                        std::vector<double>& vals) const {
  const Node& n = nodes_[idx];
  auto g = [&](int i) { return grads->row(i); };
  double v = 0;
  switch (n.kind) {
    case Kind::Number:
      v = n.num;
      if (grads) g(idx).setZero();
      break;
    case Kind::Var:
      if (n.var > x.size())
        throw InputError("variable x" + std::to_string(n.var) +
                         " exceeds the system dimension" + at_offset(n.offset));
      v = x[n.var - 1];
      if (grads) {
        g(idx).setZero();
        (*grads)(idx, n.var - 1) = 1.0;
      }
      break;
    case Kind::Add:
      v = eval(n.a, x, grads, vals) + eval(n.b, x, grads, vals);
      if (grads) g(idx) = g(n.a) + g(n.b);
      break;
    case Kind::Sub:
      v = eval(n.a, x, grads, vals) - eval(n.b, x, grads, vals);
      if (grads) g(idx) = g(n.a) - g(n.b);
      break;
    case Kind::Mul: {
      double a = eval(n.a, x, grads, vals), b = eval(n.b, x, grads, vals);
      v = a * b;
      if (grads) g(idx) = b * g(n.a) + a * g(n.b);
      break;
    }
    case Kind::Div: {
      double a = eval(n.a, x, grads, vals), b = eval(n.b, x, grads, vals);
      if (b == 0.0) throw InputError("division by zero" + at_offset(n.offset));
      v = a / b;
      if (grads) g(idx) = (g(n.a) - v * g(n.b)) / b;
      break;
    }
    case Kind::Pow: {
      double a = eval(n.a, x, grads, vals);
      if (a == 0.0 && n.expo < 0)
        throw InputError("zero raised to a negative power" + at_offset(n.offset));
      v = std::pow(a, n.expo);
      if (grads) {
        if (n.expo == 0)
          g(idx).setZero();
        else
          g(idx) = n.expo * std::pow(a, n.expo - 1) * g(n.a);
      }
      break;
    }
    case Kind::Neg:
      v = -eval(n.a, x, grads, vals);
      if (grads) g(idx) = -g(n.a);
      break;
    case Kind::Func: {
      double a = eval(n.a, x, grads, vals);
      double dv = 0;
      switch (n.fn) {
        case Fn::Sin: v = std::sin(a); dv = std::cos(a); break;
        case Fn::Cos: v = std::cos(a); dv = -std::sin(a); break;
        case Fn::Exp: v = std::exp(a); dv = v; break;
        case Fn::Sqrt:
          if (a <= 0.0)
            throw InputError("sqrt of a non-positive value" + at_offset(n.offset));
          v = std::sqrt(a);
          dv = 0.5 / v;
          break;
      }
      if (grads) g(idx) = dv * g(n.a);
      break;
    }
  }
  vals[idx] = v;
  return v;
}

double Expression::value(const Eigen::VectorXd& x) const {
  if (root_ < 0) throw InputError("empty expression");
  std::vector<double> vals(nodes_.size());
  return eval(root_, x, nullptr, vals);
}

double Expression::value_and_gradient(const Eigen::VectorXd& x, Eigen::VectorXd& grad) const {
  if (root_ < 0) throw InputError("empty expression");
  std::vector<double> vals(nodes_.size());
  Eigen::MatrixXd grads(nodes_.size(), x.size());
  double v = eval(root_, x, &grads, vals);
  grad = grads.row(root_).transpose();
  return v;
}

int Expression::level(Kind k) {
  switch (k) {
    case Kind::Add:
    case Kind::Sub: return 1;
    case Kind::Mul:
    case Kind::Div: return 2;
    case Kind::Pow: return 3;
    default: return 4;
  }
}

void Expression::print(int idx, int need, std::string& out) const {
  const Node& n = nodes_[idx];
  bool paren = level(n.kind) < need;
  if (paren) out += '(';
  switch (n.kind) {
    case Kind::Number: {
      char buf[64];
      auto res = std::to_chars(buf, buf + sizeof(buf), n.num);
      out.append(buf, res.ptr);
      break;
    }
    case Kind::Var:
      out += 'x';
      out += std::to_string(n.var);
      break;
    case Kind::Add:
      print(n.a, 1, out);
      out += '+';
      print(n.b, 2, out);
      break;
    case Kind::Sub:
      print(n.a, 1, out);
      out += '-';
      print(n.b, 2, out);
      break;
    case Kind::Mul:
      print(n.a, 2, out);
      out += '*';
      print(n.b, 3, out);
      break;
    case Kind::Div:
      print(n.a, 2, out);
      out += '/';
      print(n.b, 3, out);
      break;
    case Kind::Pow:
      print(n.a, 4, out);
      out += '^';
      out += std::to_string(n.expo);
      break;
    case Kind::Neg:
      out += '-';
      print(n.a, 4, out);
      break;
    case Kind::Func:
      switch (n.fn) {
        case Fn::Sin: out += "sin("; break;
        case Fn::Cos: out += "cos("; break;
        case Fn::Exp: out += "exp("; break;
        case Fn::Sqrt: out += "sqrt("; break;
      }
      print(n.a, 1, out);
      out += ')';
      break;
  }
  if (paren) out += ')';
}

std::string Expression::str() const {
  if (root_ < 0) return "";
  std::string out;
  print(root_, 1, out);
  return out;
}

bool Expression::node_equal(int idx, const Expression& other, int oidx) const {
  const Node& a = nodes_[idx];
  const Node& b = other.nodes_[oidx];
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Kind::Number: return a.num == b.num;
    case Kind::Var: return a.var == b.var;
    case Kind::Pow:
      return a.expo == b.expo && node_equal(a.a, other, b.a);
    case Kind::Neg: return node_equal(a.a, other, b.a);
    case Kind::Func:
      return a.fn == b.fn && node_equal(a.a, other, b.a);
    default:
      return node_equal(a.a, other, b.a) && node_equal(a.b, other, b.b);
  }
}

bool Expression::same_tree(const Expression& other) const {
  if ((root_ < 0) != (other.root_ < 0)) return false;
  if (root_ < 0) return true;
  return node_equal(root_, other, other.root_);
}

}  // namespace toruscope
