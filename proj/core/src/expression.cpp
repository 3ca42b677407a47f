#include "conecalc/expression.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "conecalc/error.hpp"

namespace conecalc {

namespace {

using Kind = Expression::Node::Kind;

constexpr std::string_view kFunctions[] = {"exp", "log", "sqrt", "sin", "cos", "tanh"};

class Parser {
 public:
  Parser(std::string_view text, const std::vector<std::string>& vars,
         std::vector<Expression::Node>& nodes)
      : text_(text), vars_(vars), nodes_(nodes) {}

  int parse() {
    const int root = expr();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw DomainError("expression \"" + std::string(text_) + "\": " + what + " at offset " +
                      std::to_string(pos_));
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  bool accept_pow() {
    skip_space();
    if (text_.substr(pos_, 2) == "**") {
      pos_ += 2;
      return true;
    }
    return accept('^');
  }

  int push(Expression::Node n) {
    nodes_.push_back(n);
    return static_cast<int>(nodes_.size()) - 1;
  }

  int binary(Kind k, int a, int b) { return push({k, 0.0, 0, a, b}); }

  int expr() {
    int lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = binary(Kind::add, lhs, term());
      } else if (accept('-')) {
        lhs = binary(Kind::sub, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  int term() {
    int lhs = unary();
    for (;;) {
      skip_space();
      if (text_.substr(pos_, 2) == "**") return lhs;
      if (accept('*')) {
        lhs = binary(Kind::mul, lhs, unary());
      } else if (accept('/')) {
        lhs = binary(Kind::div, lhs, unary());
      } else {
        return lhs;
      }
    }
  }

  int unary() {
    if (accept('-')) return push({Kind::neg, 0.0, 0, unary(), -1});
    if (accept('+')) return unary();
    return power();
  }

  int power() {
    const int base = primary();
    if (accept_pow()) return binary(Kind::pow, base, unary());
    return base;
  }

  int primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end");
    if (accept('(')) {
      const int inner = expr();
      if (!accept(')')) fail("missing ')'");
      return inner;
    }
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      double value = 0.0;
      const char* first = text_.data() + pos_;
      const auto [ptr, ec] = std::from_chars(first, text_.data() + text_.size(), value);
      if (ec != std::errc()) fail("bad number");
      pos_ += static_cast<std::size_t>(ptr - first);
      return push({Kind::number, value, 0, -1, -1});
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
        ++pos_;
      const std::string name(text_.substr(start, pos_ - start));
      for (std::size_t i = 0; i < vars_.size(); ++i)
        if (vars_[i] == name) return push({Kind::variable, 0.0, static_cast<int>(i), -1, -1});
      if (name == "pi") return push({Kind::number, std::acos(-1.0), 0, -1, -1});
      for (std::size_t f = 0; f < std::size(kFunctions); ++f) {
        if (kFunctions[f] != name) continue;
        if (!accept('(')) fail("expected '(' after " + name);
        const int arg = expr();
        if (!accept(')')) fail("missing ')'");
        return push({Kind::call, 0.0, static_cast<int>(f), arg, -1});
      }
      fail("unknown identifier '" + name + "'");
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  std::string_view text_;
  const std::vector<std::string>& vars_;
  std::vector<Expression::Node>& nodes_;
  std::size_t pos_ = 0;
};

struct Dual {
  double v;
  double d;
};

Dual apply(int fn, Dual a) {
  switch (fn) {
    case 0: {
      const double e = std::exp(a.v);
      return {e, e * a.d};
    }
    case 1: return {std::log(a.v), a.d / a.v};
    case 2: {
      const double s = std::sqrt(a.v);
      return {s, a.d / (2.0 * s)};
    }
    case 3: return {std::sin(a.v), std::cos(a.v) * a.d};
    case 4: return {std::cos(a.v), -std::sin(a.v) * a.d};
    default: {
      const double t = std::tanh(a.v);
      return {t, (1.0 - t * t) * a.d};
    }
  }
}

Dual eval_dual(const std::vector<Expression::Node>& nodes, int i, std::span<const double> values,
               std::size_t wrt) {
  const auto& n = nodes[static_cast<std::size_t>(i)];
  switch (n.kind) {
    case Kind::number: return {n.value, 0.0};
    case Kind::variable:
      return {values[static_cast<std::size_t>(n.index)],
              static_cast<std::size_t>(n.index) == wrt ? 1.0 : 0.0};
    case Kind::neg: {
      const Dual a = eval_dual(nodes, n.lhs, values, wrt);
      return {-a.v, -a.d};
    }
    case Kind::call: return apply(n.index, eval_dual(nodes, n.lhs, values, wrt));
    default: break;
  }
  const Dual a = eval_dual(nodes, n.lhs, values, wrt);
  const Dual b = eval_dual(nodes, n.rhs, values, wrt);
  switch (n.kind) {
    case Kind::add: return {a.v + b.v, a.d + b.d};
    case Kind::sub: return {a.v - b.v, a.d - b.d};
    case Kind::mul: return {a.v * b.v, a.d * b.v + a.v * b.d};
    case Kind::div: return {a.v / b.v, (a.d * b.v - a.v * b.d) / (b.v * b.v)};
    case Kind::pow: {
      const double p = std::pow(a.v, b.v);
      double d = 0.0;
      if (a.d != 0.0) d += b.v * std::pow(a.v, b.v - 1.0) * a.d;
      if (b.d != 0.0) d += p * std::log(a.v) * b.d;
      return {p, d};
    }
    default: return {0.0, 0.0};
  }
}

Polynomial2 eval_poly(const Expression& e, int i) {
  const auto& n = e.nodes()[static_cast<std::size_t>(i)];
  switch (n.kind) {
    case Kind::number: return Polynomial2::constant(n.value);
    case Kind::variable:
      return n.index == 0 ? Polynomial2::monomial(1.0, 1, 0) : Polynomial2::monomial(1.0, 0, 1);
    case Kind::neg: return -1.0 * eval_poly(e, n.lhs);
    case Kind::call:
      throw DomainError("expression \"" + e.text() + "\" is not a polynomial (function call)");
    default: break;
  }
  const Polynomial2 a = eval_poly(e, n.lhs);
  const Polynomial2 b = eval_poly(e, n.rhs);
  const auto constant_of = [&](const Polynomial2& p, const char* what) {
    if (p.degree_x() > 0 || p.degree_y() > 0)
      throw DomainError("expression \"" + e.text() + "\" is not a polynomial (" + what + ")");
    return p.coefficient(0, 0);
  };
  switch (n.kind) {
    case Kind::add: return a + b;
    case Kind::sub: return a - b;
    case Kind::mul: return a * b;
    case Kind::div: {
      const double c = constant_of(b, "non-constant divisor");
      if (c == 0.0) throw DomainError("expression \"" + e.text() + "\": division by zero");
      return (1.0 / c) * a;
    }
    case Kind::pow: {
      const double k = constant_of(b, "non-constant exponent");
      if (k < 0 || k != std::floor(k) || k > 64)
        throw DomainError("expression \"" + e.text() + "\" is not a polynomial (exponent)");
      Polynomial2 out = Polynomial2::constant(1.0);
      for (int j = 0; j < static_cast<int>(k); ++j) out = out * a;
      return out;
    }
    default: return {};
  }
}

}  // namespace

Expression Expression::parse(std::string_view text, std::vector<std::string> variables) {
  Expression e;
  e.text_ = std::string(text);
  e.variables_ = std::move(variables);
  Parser parser(e.text_, e.variables_, e.nodes_);
  e.root_ = parser.parse();
  return e;
}

double Expression::operator()(std::span<const double> values) const {
  return eval_dual(nodes_, root_, values, values.size()).v;
}

std::pair<double, double> Expression::value_and_derivative(std::span<const double> values,
                                                           std::size_t wrt) const {
  const Dual r = eval_dual(nodes_, root_, values, wrt);
  return {r.v, r.d};
}

Polynomial2 Polynomial2::constant(double c) { return monomial(c, 0, 0); }

Polynomial2 Polynomial2::monomial(double c, int i, int j) {
  Polynomial2 p;
  if (c != 0.0) p.terms_[{i, j}] = c;
  return p;
}

Polynomial2 Polynomial2::from_expression(const Expression& e) {
  if (e.variables().size() != 2)
    throw DomainError("polynomial expressions take exactly two variables");
  return eval_poly(e, e.root());
}

Polynomial2 Polynomial2::parse(std::string_view text, const std::string& x, const std::string& y) {
  Polynomial2 sum;
  std::size_t start = 0;
  for (;;) {
    const std::size_t semi = text.find(';', start);
    const std::string_view segment = text.substr(start, semi == std::string_view::npos ? semi : semi - start);
    if (segment.find_first_not_of(" \t") != std::string_view::npos)
      sum += from_expression(Expression::parse(segment, {x, y}));
    if (semi == std::string_view::npos) break;
    start = semi + 1;
  }
  return sum;
}

double Polynomial2::operator()(double x, double y) const {
  double s = 0.0;
  for (const auto& [ij, c] : terms_) s += c * std::pow(x, ij.first) * std::pow(y, ij.second);
  return s;
}

double Polynomial2::coefficient(int i, int j) const {
  const auto it = terms_.find({i, j});
  return it == terms_.end() ? 0.0 : it->second;
}

int Polynomial2::degree_x() const {
  int d = 0;
  for (const auto& [ij, c] : terms_) d = std::max(d, ij.first);
  return d;
}

int Polynomial2::degree_y() const {
  int d = 0;
  for (const auto& [ij, c] : terms_) d = std::max(d, ij.second);
  return d;
}

Polynomial2 Polynomial2::y_slice(int j) const {
  Polynomial2 out;
  for (const auto& [ij, c] : terms_)
    if (ij.second == j) out.terms_[{ij.first, 0}] = c;
  return out;
}

std::string Polynomial2::to_string(const std::string& x, const std::string& y) const {
  if (terms_.empty()) return "0";
  std::ostringstream out;
  out.precision(17);
  bool first = true;
  for (const auto& [ij, c] : terms_) {
    if (!first) out << " + ";
    first = false;
    out << c;
    if (ij.first > 0) out << "*" << x << (ij.first > 1 ? "^" + std::to_string(ij.first) : "");
    if (ij.second > 0) out << "*" << y << (ij.second > 1 ? "^" + std::to_string(ij.second) : "");
  }
  return out.str();
}

Polynomial2& Polynomial2::operator+=(const Polynomial2& o) {
  for (const auto& [ij, c] : o.terms_) terms_[ij] += c;
  prune();
  return *this;
}

Polynomial2 operator-(const Polynomial2& a, const Polynomial2& b) { return a + (-1.0) * b; }

Polynomial2 operator*(const Polynomial2& a, const Polynomial2& b) {
  Polynomial2 out;
  for (const auto& [ij, c] : a.terms_)
    for (const auto& [kl, d] : b.terms_) out.terms_[{ij.first + kl.first, ij.second + kl.second}] += c * d;
  out.prune();
  return out;
}

Polynomial2 operator*(double c, const Polynomial2& a) {
  Polynomial2 out;
  for (const auto& [ij, d] : a.terms_) out.terms_[ij] = c * d;
  out.prune();
  return out;
}

void Polynomial2::prune() {
  std::erase_if(terms_, [](const auto& kv) { return kv.second == 0.0; });
}

}  // namespace conecalc
