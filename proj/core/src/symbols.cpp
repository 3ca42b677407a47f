#include "conecalc/symbols.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "conecalc/error.hpp"

namespace conecalc {

namespace {

constexpr double kOrderTol = 1e-8;
constexpr double kClusterTol = 1e-5;
constexpr double kLineTol = 1e-10;

// m-th derivative of Σ c_k z^k and the matching magnitude scale.
std::pair<cplx, double> derivative(const std::vector<double>& c, int m, cplx z) {
  cplx value = 0.0;
  double scale = 0.0;
  const double az = std::abs(z);
  for (int k = static_cast<int>(c.size()) - 1; k >= m; --k) {
    double falling = 1.0;
    for (int i = 0; i < m; ++i) falling *= k - i;
    value += c[static_cast<std::size_t>(k)] * falling * std::pow(z, k - m);
    scale += std::abs(c[static_cast<std::size_t>(k)]) * falling * std::pow(std::max(az, 1.0), k - m);
  }
  return {value, scale};
}

bool root_less(const IndicialRoot& a, const IndicialRoot& b) {
  if (a.mode != b.mode) return a.mode < b.mode;
  if (a.z.real() != b.z.real()) return a.z.real() < b.z.real();
  return a.z.imag() < b.z.imag();
}

}  // namespace

CrossSectionSpectrum::CrossSectionSpectrum(int n, std::vector<ModeEigenvalue> modes) : n_(n) {
  if (n < 1) throw DomainError("cross section: dimension n must be >= 1");
  std::sort(modes.begin(), modes.end(),
            [](const ModeEigenvalue& a, const ModeEigenvalue& b) { return a.nu > b.nu; });
  for (const auto& m : modes) {
    if (!(m.nu <= 0.0)) throw DomainError("cross section: eigenvalues must be <= 0");
    if (m.multiplicity < 1) throw DomainError("cross section: multiplicities must be positive");
    if (!modes_.empty() && modes_.back().nu == m.nu) {
      modes_.back().multiplicity += m.multiplicity;
    } else {
      modes_.push_back(m);
    }
  }
  if (modes_.empty() || modes_.front().nu != 0.0)
    throw DomainError("cross section: the eigenvalue 0 must be present");
}

CrossSectionSpectrum CrossSectionSpectrum::circle(int cutoff) {
  if (cutoff < 0) throw DomainError("circle: mode cutoff must be >= 0");
  std::vector<ModeEigenvalue> modes;
  for (int k = 0; k <= cutoff; ++k) modes.push_back({-static_cast<double>(k) * k, k == 0 ? 1 : 2});
  return {1, std::move(modes)};
}

double gamma_p(int n, double p) {
  if (!(p > 1.0)) throw DomainError("weight.p must lie in (1, inf)");
  return (n + 1) * (0.5 - 1.0 / p);
}

std::vector<Polynomial2> derived_symbols(int mu, const std::vector<Polynomial2>& coeff) {
  std::vector<Polynomial2> out(static_cast<std::size_t>(mu) + 1);
  for (int j = 0; j <= mu && j < static_cast<int>(coeff.size()); ++j) {
    if ((mu - j) % 2 != 0) continue;
    const int l = (mu - j) / 2;
    const double sign = l % 2 == 0 ? 1.0 : -1.0;
    for (const auto& [ij, c] : coeff[static_cast<std::size_t>(j)].terms())
      if (ij.second == l) out[static_cast<std::size_t>(j)] += Polynomial2::monomial(sign * c, ij.first, 2 * l);
  }
  return out;
}

void validate(const FuchsOperator& op) {
  if (op.mu < 1) throw DomainError("operator.mu must be >= 1");
  if (op.coeff.size() != static_cast<std::size_t>(op.mu) + 1)
    throw DomainError("operator: expected mu+1 coefficient polynomials");
  if (op.symbol.size() != static_cast<std::size_t>(op.mu) + 1)
    throw DomainError("operator: expected mu+1 symbol polynomials");
  if (!(op.weight.p > 1.0) || !std::isfinite(op.weight.p)) throw DomainError("weight.p must lie in (1, inf)");
  if (!std::isfinite(op.weight.gamma)) throw DomainError("weight.gamma must be finite");
  if (!std::isfinite(op.shift)) throw DomainError("operator.shift must be finite");
}

FuchsOperator make_cone_laplacian(const CrossSectionSpectrum& spectrum, double shift,
                                  WeightData weight) {
  if (!(shift >= 0.0)) throw DomainError("operator.shift must be >= 0");
  FuchsOperator op;
  op.mu = 2;
  op.weight = weight;
  op.cross_section = spectrum;
  const double n = spectrum.dimension();
  // σ_M(-Δ)(z) = -z² + (n-1) z - ν.
  op.coeff = {Polynomial2::monomial(-1.0, 0, 1), Polynomial2::constant(n - 1.0),
              Polynomial2::constant(-1.0)};
  op.symbol = derived_symbols(2, op.coeff);
  op.shift = shift;
  validate(op);
  return op;
}

std::vector<double> conormal_polynomial(const FuchsOperator& op, std::size_t mode) {
  const double nu = op.cross_section.mode(mode).nu;
  std::vector<double> c(op.coeff.size());
  for (std::size_t k = 0; k < c.size(); ++k) c[k] = op.coeff[k](0.0, nu);
  return c;
}

cplx conormal_symbol(const FuchsOperator& op, std::size_t mode, cplx z) {
  const auto c = conormal_polynomial(op, mode);
  cplx v = 0.0;
  for (std::size_t k = c.size(); k-- > 0;) v = v * z + c[k];
  return v;
}

std::vector<IndicialRoot> polynomial_roots(const std::vector<double>& coeffs, std::size_t mode) {
  std::vector<double> c = coeffs;
  while (!c.empty() && c.back() == 0.0) c.pop_back();
  if (c.empty()) {
    throw DomainError("conormal polynomial of mode " + std::to_string(mode) +
                      " is identically zero");
  }
  const int degree = static_cast<int>(c.size()) - 1;
  if (degree == 0) return {};

  RMatrix companion = RMatrix::Zero(degree, degree);
  for (int i = 1; i < degree; ++i) companion(i, i - 1) = 1.0;
  for (int i = 0; i < degree; ++i) companion(i, degree - 1) = -c[static_cast<std::size_t>(i)] / c.back();
  Eigen::EigenSolver<RMatrix> solver(companion, false);
  if (solver.info() != Eigen::Success)
    throw NumericalError("companion eigensolver failed for mode " + std::to_string(mode));
  std::vector<cplx> raw(solver.eigenvalues().data(), solver.eigenvalues().data() + degree);
  std::sort(raw.begin(), raw.end(), [](cplx a, cplx b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });

  std::vector<bool> used(raw.size(), false);
  std::vector<IndicialRoot> roots;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (used[i]) continue;
    cplx center = 0.0;
    int members = 0;
    for (std::size_t j = i; j < raw.size(); ++j) {
      if (!used[j] && std::abs(raw[j] - raw[i]) <= kClusterTol * (1.0 + std::abs(raw[i]))) {
        used[j] = true;
        center += raw[j];
        ++members;
      }
    }
    center /= static_cast<double>(members);
    int order = 1;
    while (order < degree) {
      const auto [value, scale] = derivative(c, order, center);
      if (std::abs(value) > kOrderTol * scale) break;
      ++order;
    }
    // The root is simple for the (order-1)-th derivative; polish it there.
    for (int it = 0; it < 3; ++it) {
      const cplx f = derivative(c, order - 1, center).first;
      const cplx df = derivative(c, order, center).first;
      if (df == 0.0) break;
      const cplx step = f / df;
      if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) break;
      center -= step;
    }
    if (std::abs(center.imag()) <= 1e-12 * (1.0 + std::abs(center))) center.imag(0.0);
    roots.push_back({center, mode, order});
  }
  std::sort(roots.begin(), roots.end(), root_less);
  return roots;
}

std::vector<IndicialRoot> all_indicial_roots(const FuchsOperator& op) {
  std::vector<IndicialRoot> out;
  for (std::size_t j = 0; j < op.cross_section.mode_count(); ++j) {
    auto r = polynomial_roots(conormal_polynomial(op, j), j);
    out.insert(out.end(), r.begin(), r.end());
  }
  return out;
}

std::vector<IndicialRoot> indicial_roots(const FuchsOperator& op, double lower, double upper) {
  if (!std::isfinite(lower) || !std::isfinite(upper) || !(lower < upper))
    throw DomainError("indicial roots: strip bounds must be finite with lower < upper");
  std::vector<IndicialRoot> out;
  for (const auto& r : all_indicial_roots(op))
    if (r.z.real() > lower && r.z.real() < upper) out.push_back(r);
  return out;
}

WeightLine weight_line_invertible(const FuchsOperator& op, double gamma) {
  WeightLine w;
  w.line = (op.dimension() + 1) / 2.0 - gamma - op.mu;
  for (const auto& r : all_indicial_roots(op)) w.margin = std::min(w.margin, std::abs(r.z.real() - w.line));
  w.invertible = w.margin > kLineTol * (1.0 + std::abs(w.line));
  return w;
}

cplx symbol_eval(const FuchsOperator& op, SymbolKind kind, double t, double tau, double nu_hat) {
  if (tau == 0.0 && nu_hat == 0.0) throw DomainError("symbols are not defined at (tau, nu_hat) = (0, 0)");
  if (nu_hat < 0.0) throw DomainError("symbol evaluation needs nu_hat >= 0");
  if (kind == SymbolKind::principal && !(t > 0.0)) throw DomainError("principal symbol needs t > 0");
  const double t_coeff = kind == SymbolKind::principal ? t : 0.0;
  const cplx base = kind == SymbolKind::principal ? cplx(0.0, -t * tau) : cplx(0.0, -tau);
  cplx value = 0.0;
  cplx power = 1.0;
  for (const auto& s : op.symbol) {
    value += s(t_coeff, nu_hat) * power;
    power *= base;
  }
  if (kind == SymbolKind::principal) value *= std::pow(t, -op.mu);
  return value;
}

SymbolScan scan_symbols(const FuchsOperator& op, const Sector& sector, int resolution) {
  if (resolution < 8) throw DomainError("symbol scan resolution must be >= 8");
  SymbolScan scan;
  const auto check = [&](cplx v, const std::string& where) {
    ++scan.samples;
    const double margin = sector.theta() - std::abs(principal_arg(v));
    scan.angular_margin = std::min(scan.angular_margin, v == 0.0 ? -1.0 : margin);
    if (in_sector(v, sector) && scan.pass) {
      scan.pass = false;
      std::ostringstream s;
      s.precision(6);
      s << where << " value " << v.real() << (v.imag() < 0 ? "" : "+") << v.imag() << "i";
      scan.failure = s.str();
    }
  };
  for (int k = 0; k < resolution; ++k) {
    const double phi = pi * k / (resolution - 1);
    const double tau = std::cos(phi);
    const double nu_hat = std::abs(std::sin(phi));
    std::ostringstream where;
    where.precision(6);
    where << "rescaled (tau=" << tau << ", nu_hat=" << nu_hat << ")";
    check(symbol_eval(op, SymbolKind::rescaled, 0.0, tau, nu_hat), where.str());
    for (int m = 0; m < resolution; ++m) {
      const double t = std::exp(-12.0 * m / (resolution - 1));
      std::ostringstream w;
      w.precision(6);
      w << "principal (t=" << t << ", tau=" << tau << ", nu_hat=" << nu_hat << ")";
      check(symbol_eval(op, SymbolKind::principal, t, tau, nu_hat), w.str());
    }
  }
  return scan;
}

DomainGap domain_gap_dimension(const FuchsOperator& op, double gamma, BoundaryPolicy policy) {
  DomainGap gap;
  gap.upper = (op.dimension() + 1) / 2.0 - gamma;
  gap.lower = gap.upper - op.mu;
  const double tol = kLineTol * (1.0 + std::abs(gap.lower) + std::abs(gap.upper));
  for (const auto& r : all_indicial_roots(op)) {
    const double x = r.z.real();
    const int mult = op.cross_section.mode(r.mode).multiplicity;
    if (std::abs(x - gap.lower) <= tol || std::abs(x - gap.upper) <= tol) {
      gap.boundary_roots.push_back(r);
    } else if (x > gap.lower && x < gap.upper) {
      gap.roots.push_back(r);
      gap.dimension += r.order * mult;
    }
    if (x > gap.upper - 2.0 + tol && x < gap.upper - tol) gap.constant_strip_dimension += r.order * mult;
  }
  if (policy == BoundaryPolicy::strict && !gap.boundary_roots.empty()) {
    std::ostringstream s;
    s << "indicial root z=" << gap.boundary_roots.front().z.real() << " (mode "
      << gap.boundary_roots.front().mode << ") lies on the strip boundary; shift the weight gamma";
    throw DomainError(s.str());
  }
  return gap;
}

std::vector<SingularFunction> singular_functions(const FuchsOperator& op, double gamma,
                                                 BoundaryPolicy policy) {
  const DomainGap gap = domain_gap_dimension(op, gamma, policy);
  std::vector<SingularFunction> out;
  for (const auto& r : gap.roots) {
    const int mult = op.cross_section.mode(r.mode).multiplicity;
    for (int c = 0; c < mult; ++c)
      for (int k = 0; k < r.order; ++k) out.push_back({r.mode, c, r.z, k});
  }
  return out;
}

bool check_pq_condition(int n, double p) {
  if (!(p > 1.0) || !std::isfinite(p)) throw DomainError("p must lie in (1, inf)");
  const double dual = p / (p - 1.0);
  return 2.0 * std::max(p, dual) - 1.0 < n;
}

}  // namespace conecalc
