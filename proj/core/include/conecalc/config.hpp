#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "conecalc/calculus.hpp"
#include "conecalc/discretize.hpp"
#include "conecalc/pde.hpp"
#include "conecalc/symbols.hpp"

namespace conecalc {

struct OperatorSection {
  std::string preset = "laplacian";  // laplacian | custom
  int mu = 2;
  double shift = 1.0;
  std::vector<std::string> coeff;   // a_0..a_mu for custom, "P(t); Q(nu)"
  std::vector<std::string> symbol;  // optional s_0..s_mu overrides
  friend bool operator==(const OperatorSection&, const OperatorSection&) = default;
};

struct CrossSectionSection {
  std::string type = "circle";  // circle | table
  int n = 1;
  int mode_cutoff = 4;
  std::vector<double> eigenvalues;  // table
  std::vector<int> multiplicities;  // table, defaults to 1
  friend bool operator==(const CrossSectionSection&, const CrossSectionSection&) = default;
};

struct WeightSection {
  double gamma = 0.0;
  double p = 2.0;
  friend bool operator==(const WeightSection&, const WeightSection&) = default;
};

struct GridSection {
  double rmin = -12.0;
  double rmax = 12.0;
  int points = 512;
  std::string kind = "model_cone";
  friend bool operator==(const GridSection&, const GridSection&) = default;
};

struct ContourSection {
  std::optional<double> delta;  // auto
  double theta = pi / 4;
  double theta_imag = pi / 8;
  std::optional<double> smax;
  std::optional<int> nray;
  std::optional<int> narc;
  double tol = 1e-9;
  friend bool operator==(const ContourSection&, const ContourSection&) = default;
};

struct ScanSection {
  double sector_theta = pi / 2;
  std::vector<double> radii;  // empty: 10^{k/2}, k = -2..16
  std::vector<double> ps{2.0};
  double y_max = 10.0;
  int y_steps = 21;
  std::vector<double> z_re{-1.0, -0.5, -0.1};
  std::vector<double> z_im{0.0, 1.0, -1.0, 5.0, -5.0};
  int ellipticity_resolution = 64;
  int verify_points = 128;
  friend bool operator==(const ScanSection&, const ScanSection&) = default;
};

struct PdeSection {
  // heat
  double T = 1.0;
  int steps = 1000;
  std::string stepper = "bdf2";
  double r_time = 2.0;
  std::string forcing = "constant";  // none | constant | random | csv:PATH
  std::vector<double> frequencies{1.0, 10.0, 100.0, 1000.0, 10000.0};
  // quasilinear
  std::string a = "1+s^2";
  double diffusion_scale = 1.0;
  double a_range = 1e6;
  double c = 1.0;
  std::string f = "none";
  double f_power = 2.0;
  double g = 0.0;
  std::string u0 = "bump";
  double u0_value = 1.0;
  int radial_points = 128;
  int angular_points = 64;
  double r_max = 5.0;
  double q_T = 0.1;
  int q_steps = 100;
  double a_min = 1e-8;
  double q = 4.0;
  double growth_limit = 10.0;
  int max_halvings = 20;
  int snapshot_stride = 0;
  friend bool operator==(const PdeSection&, const PdeSection&) = default;
};

struct RunSection {
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  friend bool operator==(const RunSection&, const RunSection&) = default;
};

struct RunConfig {
  OperatorSection op;
  CrossSectionSection cross_section;
  WeightSection weight;
  GridSection grid;
  ContourSection contour;
  ScanSection scan;
  PdeSection pde;
  RunSection run;
  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

// INI-style text: [section] headers, key = value lines, '#' comments, strings
// optionally double-quoted, lists comma-separated. Unknown sections or keys
// and every out-of-range value are collected into one ConfigError.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
// Range checks only; throws ConfigError naming every offending section.key.
void validate(const RunConfig& config);

// Canonical text with every key; parse_config(to_text(c)) == c.
std::string to_text(const RunConfig& config);
// FNV-1a 64 of the canonical text, 16 hex digits.
std::string config_hash(const RunConfig& config);

FuchsOperator build_operator(const RunConfig& config);
LogGrid build_grid(const RunConfig& config);
ContourOptions build_contour(const RunConfig& config);
QuasilinearProblem build_quasilinear(const RunConfig& config);

}  // namespace conecalc
