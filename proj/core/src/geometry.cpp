#include "conecalc/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "conecalc/error.hpp"

namespace conecalc {

namespace {

struct Ratio {
  double num;
  double den;
};

// End corrections c_i (added to the trapezoid weights at nodes 0..m-1 and
// mirrored at the other end); exact for polynomials of degree m.
constexpr std::array<Ratio, 2> kGregory2{{{-1, 12}, {1, 12}}};
constexpr std::array<Ratio, 3> kGregory3{{{-1, 8}, {1, 6}, {-1, 24}}};
constexpr std::array<Ratio, 4> kGregory4{{{-109, 720}, {59, 240}, {-29, 240}, {19, 720}}};
constexpr std::array<Ratio, 5> kGregory5{{{-49, 288}, {77, 240}, {-7, 30}, {73, 720}, {-3, 160}}};
constexpr std::array<Ratio, 6> kGregory6{{{-11153, 60480},
                                          {23719, 60480},
                                          {-11371, 30240},
                                          {7381, 30240},
                                          {-5449, 60480},
                                          {863, 60480}}};
constexpr std::array<Ratio, 7> kGregory7{{{-3383, 17280},
                                          {6961, 15120},
                                          {-66109, 120960},
                                          {33, 70},
                                          {-31523, 120960},
                                          {1247, 15120},
                                          {-275, 24192}}};
constexpr std::array<Ratio, 8> kGregory8{{{-744383, 3628800},
                                          {1908311, 3628800},
                                          {-299587, 403200},
                                          {115963, 145152},
                                          {-426809, 725760},
                                          {112477, 403200},
                                          {-278921, 3628800},
                                          {33953, 3628800}}};

template <std::size_t M>
void add_corrections(std::vector<double>& w, const std::array<Ratio, M>& c) {
  const std::size_t n = w.size();
  for (std::size_t i = 0; i < M; ++i) {
    const double v = c[i].num / c[i].den;
    w[i] += v;
    w[n - 1 - i] += v;
  }
}

void check_angle(double theta, const char* what) {
  if (!(theta > 0.0 && theta < pi))
    throw DomainError(std::string(what) + ": theta must lie in (0, pi), got " + std::to_string(theta));
}

}  // namespace

Sector::Sector(double theta) : theta_(theta) { check_angle(theta, "sector"); }

KeyholeRegion::KeyholeRegion(double delta, double theta) : delta_(delta), theta_(theta) {
  if (!(delta > 0.0)) throw DomainError("keyhole: delta must be positive");
  check_angle(theta, "keyhole");
}

double ContourQuadrature::arc_weight_sum() const {
  double s = 0.0;
  for (const auto& n : nodes)
    if (n.segment == Segment::arc) s += std::abs(n.weight);
  return s;
}

double principal_arg(cplx lambda) {
  const double a = std::arg(lambda);
  return a >= pi ? a - 2.0 * pi : a;
}

cplx principal_pow(cplx lambda, cplx z) {
  const cplx log_lambda(std::log(std::abs(lambda)), principal_arg(lambda));
  return std::exp(z * log_lambda);
}

bool in_sector(cplx lambda, const Sector& sector) {
  if (lambda == cplx(0.0, 0.0)) return true;
  return std::abs(principal_arg(lambda)) >= sector.theta();
}

std::vector<double> gregory_weights(int n) {
  if (n < 2) throw DomainError("quadrature needs at least 2 nodes");
  std::vector<double> w(static_cast<std::size_t>(n), 1.0);
  w.front() = 0.5;
  w.back() = 0.5;
  switch (std::min(8, n / 5)) {
    case 8: add_corrections(w, kGregory8); break;
    case 7: add_corrections(w, kGregory7); break;
    case 6: add_corrections(w, kGregory6); break;
    case 5: add_corrections(w, kGregory5); break;
    case 4: add_corrections(w, kGregory4); break;
    case 3: add_corrections(w, kGregory3); break;
    case 2: add_corrections(w, kGregory2); break;
    default: break;
  }
  return w;
}

double tail_bound(double delta, double s_max, double re_z, double theta, double im_z) {
  if (!(re_z < 0.0)) throw DomainError("tail bound needs Re z < 0");
  // |λ - a| >= |λ| when theta >= π/2, and >= |λ| sin(theta) otherwise.
  const double geometry = theta >= pi / 2 ? 1.0 : 1.0 / std::sin(theta);
  return 2.0 * std::pow(delta, re_z) * std::exp(s_max * re_z) / std::abs(re_z) *
         std::exp(theta * std::abs(im_z)) * geometry;
}

ContourQuadrature contour_nodes(const KeyholeRegion& region, double s_max, int n_ray, int n_arc,
                                double re_z, RaySpacing spacing, RayGrading grading) {
  if (!(s_max > 0.0)) throw DomainError("contour: s_max must be positive");
  if (n_ray < 2 || n_arc < 2) throw DomainError("contour: n_ray and n_arc must be >= 2");
  if (!(re_z < 0.0)) throw DomainError("contour: Re z must be negative for the truncated rays");

  const double delta = region.delta();
  const double theta = region.theta();
  ContourQuadrature q;
  q.delta = delta;
  q.theta = theta;
  q.s_max = s_max;
  q.n_ray = n_ray;
  q.n_arc = n_arc;
  q.spacing = spacing;
  q.tail_bound = tail_bound(delta, s_max, re_z, theta);

  // Ray parameter s and ds-weights.
  const auto nr = static_cast<std::size_t>(n_ray);
  std::vector<double> s(nr);
  std::vector<double> ws = gregory_weights(n_ray);
  const double du = 1.0 / (n_ray - 1);
  if (spacing == RaySpacing::uniform) {
    for (std::size_t k = 0; k < nr; ++k) {
      s[k] = s_max * static_cast<double>(k) * du;
      ws[k] *= s_max * du;
    }
  } else {
    if (!(grading.fine_ratio > 0.0 && grading.fine_ratio <= 1.0 && grading.width > 0.0))
      throw DomainError("contour: invalid ray grading");
    const double l = grading.width / s_max;
    const double c = 1.0 - grading.fine_ratio;
    const double scale = s_max / (1.0 - c * l * std::tanh(1.0 / l));
    for (std::size_t k = 0; k < nr; ++k) {
      const double u = k == nr - 1 ? 1.0 : static_cast<double>(k) * du;
      const double sech = 1.0 / std::cosh(u / l);
      s[k] = k == nr - 1 ? s_max : scale * (u - c * l * std::tanh(u / l));
      ws[k] *= scale * (1.0 - c * sech * sech) * du;
    }
  }

  const auto na = static_cast<std::size_t>(n_arc);
  q.nodes.reserve(2 * nr + na);
  const cplx up = std::polar(1.0, theta);
  const cplx down = std::conj(up);
  const std::size_t arc0 = nr;
  const std::size_t out0 = nr + na;
  // C1: λ = δ e^s e^{iθ}, traversed inward.
  for (std::size_t k = 0; k < nr; ++k) {
    const cplx lambda = delta * std::exp(s[k]) * up;
    q.nodes.push_back({lambda, -ws[k] * lambda, Segment::incoming_ray, out0 + k});
  }
  // C2: λ = δ e^{-it}, t in [-θ, θ].
  const std::vector<double> wa = gregory_weights(n_arc);
  const double dt = 2.0 * theta / (n_arc - 1);
  for (std::size_t k = 0; k < na; ++k) {
    double t = -theta + dt * static_cast<double>(k);
    if (k == na - 1) t = theta;
    if (2 * k + 1 == na) t = 0.0;
    const cplx lambda = k == 0 ? delta * up : (k == na - 1 ? delta * down : std::polar(delta, -t));
    q.nodes.push_back({lambda, wa[k] * dt * cplx(0.0, -1.0) * lambda, Segment::arc,
                       arc0 + (na - 1 - k)});
  }
  // C3: λ = δ e^s e^{-iθ}, traversed outward.
  for (std::size_t k = 0; k < nr; ++k) {
    const cplx lambda = delta * std::exp(s[k]) * down;
    q.nodes.push_back({lambda, ws[k] * lambda, Segment::outgoing_ray, k});
  }
  return q;
}

ContourQuadrature plan_contour(const KeyholeRegion& region, double norm_bound,
                               std::span<const cplx> zs, double tol, RayGrading grading) {
  if (zs.empty()) throw DomainError("contour plan needs at least one exponent");
  if (!(tol > 0.0 && tol < 1.0)) throw DomainError("contour plan: tol must lie in (0, 1)");
  const double delta = region.delta();
  const double theta = region.theta();
  const double digits = std::log(1.0 / tol);
  const double spectral_span = std::log(std::max(norm_bound / delta, 1.0));
  double s_max = 0.0;
  double im_max = 0.0;
  double re_closest = -std::numeric_limits<double>::infinity();
  for (const cplx z : zs) {
    if (!(z.real() < 0.0)) throw DomainError("contour plan needs Re z < 0");
    s_max = std::max(s_max, spectral_span + (digits + theta * std::abs(z.imag())) / -z.real());
    im_max = std::max(im_max, std::abs(z.imag()));
    re_closest = std::max(re_closest, z.real());
  }
  // Poles sit at distance θ from the ray in the s-plane.
  const double h_coarse = 2.0 * pi * theta / (digits + theta * im_max);
  const double l = grading.width / s_max;
  const double scale = s_max / (1.0 - (1.0 - grading.fine_ratio) * l * std::tanh(1.0 / l));
  const int n_ray = static_cast<int>(std::ceil(scale / h_coarse)) + 1;
  const int n_arc = std::max(41, static_cast<int>(std::ceil(100.0 * theta)) + 1);
  ContourQuadrature q =
      contour_nodes(region, s_max, n_ray, n_arc, re_closest, RaySpacing::graded, grading);
  double bound = 0.0;
  for (const cplx z : zs) bound = std::max(bound, tail_bound(delta, s_max, z.real(), theta, z.imag()));
  q.tail_bound = bound;
  return q;
}

}  // namespace conecalc
