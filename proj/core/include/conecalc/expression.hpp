#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace conecalc {

// Arithmetic expression over named real variables: + - * / ^, parentheses,
// and exp, log, sqrt, sin, cos, tanh. Evaluation is exact-derivative capable
// through forward-mode dual numbers.
class Expression {
 public:
  static Expression parse(std::string_view text, std::vector<std::string> variables);

  double operator()(std::span<const double> values) const;
  // Returns (value, d value / d variables[wrt]).
  std::pair<double, double> value_and_derivative(std::span<const double> values,
                                                 std::size_t wrt) const;

  const std::string& text() const { return text_; }
  const std::vector<std::string>& variables() const { return variables_; }

  struct Node {
    enum class Kind { number, variable, add, sub, mul, div, pow, neg, call };
    Kind kind = Kind::number;
    double value = 0.0;
    int index = 0;  // variable slot or function id
    int lhs = -1;
    int rhs = -1;
  };
  const std::vector<Node>& nodes() const { return nodes_; }
  int root() const { return root_; }

 private:
  std::string text_;
  std::vector<std::string> variables_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

// Sparse bivariate polynomial sum c_ij x^i y^j.
class Polynomial2 {
 public:
  Polynomial2() = default;
  static Polynomial2 constant(double c);
  static Polynomial2 monomial(double c, int i, int j);
  // Requires a polynomial expression in exactly two variables (x first).
  static Polynomial2 from_expression(const Expression& e);
  // Parses "P; Q; ..." and sums the segments.
  static Polynomial2 parse(std::string_view text, const std::string& x, const std::string& y);

  double operator()(double x, double y) const;
  double coefficient(int i, int j) const;
  int degree_x() const;
  int degree_y() const;
  bool is_zero() const { return terms_.empty(); }
  const std::map<std::pair<int, int>, double>& terms() const { return terms_; }

  // Coefficient polynomial of y^j as a polynomial in x (returned with j = 0).
  Polynomial2 y_slice(int j) const;

  std::string to_string(const std::string& x, const std::string& y) const;

  Polynomial2& operator+=(const Polynomial2& o);
  friend Polynomial2 operator+(Polynomial2 a, const Polynomial2& b) { return a += b; }
  friend Polynomial2 operator-(const Polynomial2& a, const Polynomial2& b);
  friend Polynomial2 operator*(const Polynomial2& a, const Polynomial2& b);
  friend Polynomial2 operator*(double c, const Polynomial2& a);
  friend bool operator==(const Polynomial2&, const Polynomial2&) = default;

 private:
  void prune();
  std::map<std::pair<int, int>, double> terms_;
};

}  // namespace conecalc
