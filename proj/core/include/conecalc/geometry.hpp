#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "conecalc/types.hpp"

namespace conecalc {

// Closed sector {|arg λ| >= theta} ∪ {0}.
class Sector {
 public:
  explicit Sector(double theta);
  double theta() const { return theta_; }

 private:
  double theta_;
};

// Disk of radius delta joined with the sector of angle theta.
class KeyholeRegion {
 public:
  KeyholeRegion(double delta, double theta);
  double delta() const { return delta_; }
  double theta() const { return theta_; }

 private:
  double delta_;
  double theta_;
};

enum class Segment { incoming_ray, arc, outgoing_ray };

struct ContourNode {
  cplx lambda;
  cplx weight;  // includes dλ and the orientation sign
  Segment segment;
  std::size_t mirror;  // index of the node at conj(lambda)
};

enum class RaySpacing { uniform, graded };

// Ray map s(u) = A (u - (1 - ratio) l tanh(u / l)): spacing ratio * h near the
// junction, h beyond roughly `width` log-radius units.
struct RayGrading {
  double fine_ratio = 1.0 / 16.0;
  double width = 32.0;
};

struct ContourQuadrature {
  double delta = 0.0;
  double theta = 0.0;
  double s_max = 0.0;
  int n_ray = 0;
  int n_arc = 0;
  RaySpacing spacing = RaySpacing::uniform;
  std::vector<ContourNode> nodes;
  double tail_bound = 0.0;

  // Sum of |w| over arc nodes; equals the arc length 2·theta·delta.
  double arc_weight_sum() const;
};

// arg in [-π, π).
double principal_arg(cplx lambda);
// λ^z = |λ|^z e^{i z arg λ}.
cplx principal_pow(cplx lambda, cplx z);

bool in_sector(cplx lambda, const Sector& sector);

// Trapezoid weights with Gregory end corrections (unit spacing). Orders up to
// 8 are used when n allows; n < 8 gives the plain trapezoid rule.
std::vector<double> gregory_weights(int n);

// Upper bound for the omitted part of ∫ |λ^z (λ - a)^{-1}| |dλ| beyond
// |λ| = δ e^{s_max} on both rays, for any a >= 0.
double tail_bound(double delta, double s_max, double re_z, double theta, double im_z = 0.0);

ContourQuadrature contour_nodes(const KeyholeRegion& region, double s_max, int n_ray, int n_arc,
                                double re_z, RaySpacing spacing = RaySpacing::uniform,
                                RayGrading grading = {});

// Chooses s_max, ray spacing and arc resolution for the exponents `zs` so the
// scalar quadrature error stays near `tol` for spectra inside [δ, norm_bound].
ContourQuadrature plan_contour(const KeyholeRegion& region, double norm_bound,
                               std::span<const cplx> zs, double tol = 1e-9,
                               RayGrading grading = {});

}  // namespace conecalc
