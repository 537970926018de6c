#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace toruscope {

/// Arithmetic expressions over variables x1..xN with sin/cos/exp/sqrt,
/// integer powers, and forward-mode differentiation.  Grammar:
///
///   expr   := term (('+' | '-') term)*
///   term   := factor (('*' | '/') factor)*
///   factor := atom ('^' int)?
///   atom   := number | var | func '(' expr ')' | '(' expr ')' | '-' atom
///
/// Errors carry byte offsets into the source text.
class Expression {
 public:
  Expression() = default;
  static Expression parse(const std::string& text);

  double value(const Eigen::VectorXd& x) const;
  double value_and_gradient(const Eigen::VectorXd& x, Eigen::VectorXd& grad) const;

  /// Highest variable index used, 1-based; 0 for constant expressions.
  int max_variable() const { return max_var_; }
  const std::string& source() const { return source_; }

  /// Prints with minimal parentheses; reparsing yields an identical tree.
  std::string str() const;
  bool same_tree(const Expression& other) const;

 private:
  enum class Kind { Number, Var, Add, Sub, Mul, Div, Pow, Neg, Func };
  enum class Fn { Sin, Cos, Exp, Sqrt };
  struct Node {
    Kind kind = Kind::Number;
    double num = 0.0;
    int var = 0;
    Fn fn = Fn::Sin;
    int a = -1;
    int b = -1;
    int expo = 0;
    int offset = 0;
  };
  std::vector<Node> nodes_;
  int root_ = -1;
  int max_var_ = 0;
  std::string source_;

  friend class ExprParser;
  double eval(int idx, const Eigen::VectorXd& x, Eigen::MatrixXd* grads,
              std::vector<double>& vals) const;
  void print(int idx, int need, std::string& out) const;
  static int level(Kind k);
  bool node_equal(int idx, const Expression& other, int oidx) const;
};

}  // namespace toruscope
