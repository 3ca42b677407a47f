#include "conecalc/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <sstream>

#include "conecalc/error.hpp"
#include "conecalc/expression.hpp"

namespace conecalc {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  return s;
}

std::string format_number(double v) {
  std::ostringstream out;
  out.imbue(std::locale::classic());
  out << std::setprecision(17) << v;
  return out.str();
}

// Numbers may be written as expressions in pi, e.g. "pi/4".
double parse_number(const std::string& text) {
  const std::string s = trim(text);
  double value = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec == std::errc() && end == s.data() + s.size()) return value;
  const Expression e = Expression::parse(s, {"pi"});
  const double p = pi;
  value = e(std::span<const double>(&p, 1));
  if (!std::isfinite(value)) throw DomainError("not a finite number: " + s);
  return value;
}

template <class Int>
Int parse_integer(const std::string& text) {
  const std::string s = trim(text);
  Int value = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || end != s.data() + s.size()) throw DomainError("not an integer: " + s);
  return value;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  const std::string s = trim(text);
  if (s.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    out.push_back(trim(s.substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::vector<double> parse_numbers(const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split_list(text)) out.push_back(parse_number(item));
  return out;
}

std::vector<int> parse_integers(const std::string& text) {
  std::vector<int> out;
  for (const auto& item : split_list(text)) out.push_back(parse_integer<int>(item));
  return out;
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    if constexpr (std::is_same_v<T, double>)
      out += format_number(v[i]);
    else
      out += std::to_string(v[i]);
  }
  return out;
}

std::string quote(const std::string& s) { return "\"" + s + "\""; }

struct Key {
  std::string section;
  std::string name;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define CONECALC_NUMBER(sec, key, field)                                                     \
  Key {                                                                                      \
    sec, key, [](RunConfig& c, const std::string& v) { c.field = parse_number(v); },         \
        [](const RunConfig& c) { return format_number(c.field); }                            \
  }
#define CONECALC_INT(sec, key, field)                                                        \
  Key {                                                                                      \
    sec, key, [](RunConfig& c, const std::string& v) { c.field = parse_integer<int>(v); },   \
        [](const RunConfig& c) { return std::to_string(c.field); }                           \
  }
#define CONECALC_STRING(sec, key, field)                                                     \
  Key {                                                                                      \
    sec, key, [](RunConfig& c, const std::string& v) { c.field = v; },                       \
        [](const RunConfig& c) { return quote(c.field); }                                    \
  }
#define CONECALC_NUMBERS(sec, key, field)                                                    \
  Key {                                                                                      \
    sec, key, [](RunConfig& c, const std::string& v) { c.field = parse_numbers(v); },        \
        [](const RunConfig& c) { return quote(join(c.field)); }                              \
  }
#define CONECALC_AUTO_NUMBER(sec, key, field)                                                \
  Key {                                                                                      \
    sec, key,                                                                                \
        [](RunConfig& c, const std::string& v) {                                             \
          if (v == "auto")                                                                   \
            c.field.reset();                                                                 \
          else                                                                               \
            c.field = parse_number(v);                                                       \
        },                                                                                   \
        [](const RunConfig& c) { return c.field ? format_number(*c.field) : std::string("auto"); } \
  }
#define CONECALC_AUTO_INT(sec, key, field)                                                   \
  Key {                                                                                      \
    sec, key,                                                                                \
        [](RunConfig& c, const std::string& v) {                                             \
          if (v == "auto")                                                                   \
            c.field.reset();                                                                 \
          else                                                                               \
            c.field = parse_integer<int>(v);                                                 \
        },                                                                                   \
        [](const RunConfig& c) { return c.field ? std::to_string(*c.field) : std::string("auto"); } \
  }

const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      CONECALC_STRING("operator", "preset", op.preset),
      CONECALC_INT("operator", "mu", op.mu),
      CONECALC_NUMBER("operator", "shift", op.shift),
      CONECALC_STRING("cross_section", "type", cross_section.type),
      CONECALC_INT("cross_section", "n", cross_section.n),
      CONECALC_INT("cross_section", "mode_cutoff", cross_section.mode_cutoff),
      CONECALC_NUMBERS("cross_section", "eigenvalues", cross_section.eigenvalues),
      Key{"cross_section", "multiplicities",
          [](RunConfig& c, const std::string& v) { c.cross_section.multiplicities = parse_integers(v); },
          [](const RunConfig& c) { return quote(join(c.cross_section.multiplicities)); }},
      CONECALC_NUMBER("weight", "gamma", weight.gamma),
      CONECALC_NUMBER("weight", "p", weight.p),
      CONECALC_NUMBER("grid", "rmin", grid.rmin),
      CONECALC_NUMBER("grid", "rmax", grid.rmax),
      CONECALC_INT("grid", "points", grid.points),
      CONECALC_STRING("grid", "kind", grid.kind),
      CONECALC_AUTO_NUMBER("contour", "delta", contour.delta),
      CONECALC_NUMBER("contour", "theta", contour.theta),
      CONECALC_NUMBER("contour", "theta_imag", contour.theta_imag),
      CONECALC_AUTO_NUMBER("contour", "smax", contour.smax),
      CONECALC_AUTO_INT("contour", "nray", contour.nray),
      CONECALC_AUTO_INT("contour", "narc", contour.narc),
      CONECALC_NUMBER("contour", "tol", contour.tol),
      CONECALC_NUMBER("scan", "sector_theta", scan.sector_theta),
      CONECALC_NUMBERS("scan", "radii", scan.radii),
      CONECALC_NUMBERS("scan", "ps", scan.ps),
      CONECALC_NUMBER("scan", "y_max", scan.y_max),
      CONECALC_INT("scan", "y_steps", scan.y_steps),
      CONECALC_NUMBERS("scan", "z_re", scan.z_re),
      CONECALC_NUMBERS("scan", "z_im", scan.z_im),
      CONECALC_INT("scan", "ellipticity_resolution", scan.ellipticity_resolution),
      CONECALC_INT("scan", "verify_points", scan.verify_points),
      CONECALC_NUMBER("pde", "T", pde.T),
      CONECALC_INT("pde", "steps", pde.steps),
      CONECALC_STRING("pde", "stepper", pde.stepper),
      CONECALC_NUMBER("pde", "r_time", pde.r_time),
      CONECALC_STRING("pde", "forcing", pde.forcing),
      CONECALC_NUMBERS("pde", "frequencies", pde.frequencies),
      CONECALC_STRING("pde", "a", pde.a),
      CONECALC_NUMBER("pde", "diffusion_scale", pde.diffusion_scale),
      CONECALC_NUMBER("pde", "a_range", pde.a_range),
      CONECALC_NUMBER("pde", "c", pde.c),
      CONECALC_STRING("pde", "f", pde.f),
      CONECALC_NUMBER("pde", "f_power", pde.f_power),
      CONECALC_NUMBER("pde", "g", pde.g),
      CONECALC_STRING("pde", "u0", pde.u0),
      CONECALC_NUMBER("pde", "u0_value", pde.u0_value),
      CONECALC_INT("pde", "radial_points", pde.radial_points),
      CONECALC_INT("pde", "angular_points", pde.angular_points),
      CONECALC_NUMBER("pde", "r_max", pde.r_max),
      CONECALC_NUMBER("pde", "q_T", pde.q_T),
      CONECALC_INT("pde", "q_steps", pde.q_steps),
      CONECALC_NUMBER("pde", "a_min", pde.a_min),
      CONECALC_NUMBER("pde", "q", pde.q),
      CONECALC_NUMBER("pde", "growth_limit", pde.growth_limit),
      CONECALC_INT("pde", "max_halvings", pde.max_halvings),
      CONECALC_INT("pde", "snapshot_stride", pde.snapshot_stride),
      Key{"run", "seed", [](RunConfig& c, const std::string& v) { c.run.seed = parse_integer<std::uint64_t>(v); },
          [](const RunConfig& c) { return std::to_string(c.run.seed); }},
      CONECALC_STRING("run", "output_dir", run.output_dir),
  };
  return table;
}

#undef CONECALC_NUMBER
#undef CONECALC_INT
#undef CONECALC_STRING
#undef CONECALC_NUMBERS
#undef CONECALC_AUTO_NUMBER
#undef CONECALC_AUTO_INT

const std::vector<std::string>& section_order() {
  static const std::vector<std::string> order{"operator", "cross_section", "weight", "grid",
                                              "contour",  "scan",          "pde",    "run"};
  return order;
}

// a_0 .. a_mu and s_0 .. s_mu in [operator].
std::optional<std::pair<char, std::size_t>> indexed_key(const std::string& name) {
  if (name.size() < 3 || (name[0] != 'a' && name[0] != 's') || name[1] != '_') return std::nullopt;
  std::size_t j = 0;
  const auto [end, ec] = std::from_chars(name.data() + 2, name.data() + name.size(), j);
  if (ec != std::errc() || end != name.data() + name.size() || j > 32) return std::nullopt;
  return std::make_pair(name[0], j);
}

class Collector {
 public:
  void add(const std::string& field, const std::string& message) {
    fields_.push_back(field);
    messages_.push_back(field + ": " + message);
  }
  void raise() const {
    if (messages_.empty()) return;
    std::string text = "invalid config:";
    for (const auto& m : messages_) text += "\n  " + m;
    throw ConfigError(text, fields_);
  }

 private:
  std::vector<std::string> fields_;
  std::vector<std::string> messages_;
};

bool finite(double x) { return std::isfinite(x); }

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig config;
  Collector errors;
  std::map<std::string, const Key*> lookup;
  for (const auto& k : keys()) lookup[k.section + "." + k.name] = &k;
  std::map<std::string, int> seen;

  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    // '#' starts a comment outside quotes.
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line.resize(i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']') {
        errors.add(where, "malformed section header");
        continue;
      }
      section = trim(line.substr(1, line.size() - 2));
      if (std::find(section_order().begin(), section_order().end(), section) == section_order().end())
        errors.add(section, "unknown section");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errors.add(where, "expected key = value");
      continue;
    }
    const std::string name = trim(line.substr(0, eq));
    const std::string value = unquote(trim(line.substr(eq + 1)));
    if (section.empty()) {
      errors.add(name, "key outside any section");
      continue;
    }
    const std::string field = section + "." + name;
    if (++seen[field] > 1) {
      errors.add(field, "duplicate key");
      continue;
    }
    try {
      if (const auto it = lookup.find(field); it != lookup.end()) {
        it->second->set(config, value);
      } else if (const auto idx = indexed_key(name); section == "operator" && idx) {
        auto& list = idx->first == 'a' ? config.op.coeff : config.op.symbol;
        if (list.size() <= idx->second) list.resize(idx->second + 1);
        list[idx->second] = value;
      } else if (std::find(section_order().begin(), section_order().end(), section) != section_order().end()) {
        errors.add(field, "unknown key");
      }
    } catch (const Error& e) {
      errors.add(field, e.what());
    }
  }
  errors.raise();
  validate(config);
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string(), {"path"});
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

void validate(const RunConfig& c) {
  Collector e;
  const double pi_value = pi;
  // [operator]
  if (c.op.preset != "laplacian" && c.op.preset != "custom") e.add("operator.preset", "expected laplacian | custom");
  if (c.op.mu < 1) e.add("operator.mu", "must be >= 1");
  if (c.op.preset == "laplacian" && c.op.mu != 2) e.add("operator.mu", "the laplacian preset has mu = 2");
  if (!(c.op.shift >= 0.0) || !finite(c.op.shift)) e.add("operator.shift", "must be finite and >= 0");
  if (c.op.preset == "custom") {
    if (c.op.coeff.size() != static_cast<std::size_t>(c.op.mu) + 1) {
      e.add("operator.a_j", "custom operators need a_0 .. a_mu");
    } else {
      for (std::size_t j = 0; j < c.op.coeff.size(); ++j) {
        try {
          (void)Polynomial2::parse(c.op.coeff[j], "t", "nu");
        } catch (const Error& err) {
          e.add("operator.a_" + std::to_string(j), err.what());
        }
      }
    }
    if (!c.op.symbol.empty() && c.op.symbol.size() != static_cast<std::size_t>(c.op.mu) + 1)
      e.add("operator.s_j", "symbol overrides need s_0 .. s_mu");
  } else if (!c.op.coeff.empty() || !c.op.symbol.empty()) {
    e.add("operator.a_j", "coefficient tables need preset = custom");
  }
  // [cross_section]
  const auto& cs = c.cross_section;
  if (cs.type != "circle" && cs.type != "table") e.add("cross_section.type", "expected circle | table");
  if (cs.n < 1) e.add("cross_section.n", "must be >= 1");
  if (cs.mode_cutoff < 0) e.add("cross_section.mode_cutoff", "must be >= 0");
  if (cs.type == "circle" && cs.n != 1) e.add("cross_section.n", "the circle has n = 1");
  if (cs.type == "table") {
    if (cs.eigenvalues.empty()) e.add("cross_section.eigenvalues", "table cross sections need eigenvalues");
    bool has_zero = false;
    for (double nu : cs.eigenvalues) {
      if (!(nu <= 0.0) || !finite(nu)) e.add("cross_section.eigenvalues", "eigenvalues must be finite and <= 0");
      has_zero = has_zero || nu == 0.0;
    }
    if (!cs.eigenvalues.empty() && !has_zero) e.add("cross_section.eigenvalues", "the eigenvalue 0 must be present");
    if (!cs.multiplicities.empty() && cs.multiplicities.size() != cs.eigenvalues.size())
      e.add("cross_section.multiplicities", "one multiplicity per eigenvalue");
    for (int m : cs.multiplicities)
      if (m < 1) e.add("cross_section.multiplicities", "multiplicities must be >= 1");
  }
  // [weight]
  if (!(c.weight.p > 1.0) || !finite(c.weight.p)) e.add("weight.p", "must lie in (1, inf)");
  if (!finite(c.weight.gamma)) e.add("weight.gamma", "must be finite");
  // [grid]
  const auto& g = c.grid;
  if (g.points < 8) e.add("grid.points", "must be >= 8");
  if (!finite(g.rmin) || !finite(g.rmax) || !(g.rmin < g.rmax)) e.add("grid.rmin", "need finite rmin < rmax");
  if (g.kind != "model_cone" && g.kind != "truncated_cone") e.add("grid.kind", "expected model_cone | truncated_cone");
  if (g.kind == "model_cone" && !(g.rmin < 0.0 && g.rmax > 0.0)) e.add("grid.rmin", "model_cone needs rmin < 0 < rmax");
  if (g.kind == "truncated_cone" && g.rmin != 0.0) e.add("grid.rmin", "truncated_cone needs rmin = 0");
  // [contour]
  const auto& k = c.contour;
  if (k.delta && !(*k.delta > 0.0 && finite(*k.delta))) e.add("contour.delta", "must be positive");
  if (!(k.theta > 0.0 && k.theta < pi_value)) e.add("contour.theta", "sector must be proper: 0 < theta < pi");
  if (!(k.theta_imag > 0.0 && k.theta_imag < pi_value))
    e.add("contour.theta_imag", "sector must be proper: 0 < theta_imag < pi");
  if (k.smax && !(*k.smax > 0.0 && finite(*k.smax))) e.add("contour.smax", "must be positive");
  if (k.nray && *k.nray < 2) e.add("contour.nray", "must be >= 2");
  if (k.narc && *k.narc < 2) e.add("contour.narc", "must be >= 2");
  if (!(k.tol > 0.0 && k.tol < 1.0)) e.add("contour.tol", "must lie in (0, 1)");
  // [scan]
  const auto& s = c.scan;
  if (!(s.sector_theta > 0.0 && s.sector_theta <= pi_value)) e.add("scan.sector_theta", "must lie in (0, pi]");
  for (std::size_t i = 0; i < s.radii.size(); ++i)
    if (!(s.radii[i] > 0.0 && finite(s.radii[i])) || (i > 0 && !(s.radii[i] > s.radii[i - 1])))
      e.add("scan.radii", "radii must be positive and ascending");
  if (s.ps.empty()) e.add("scan.ps", "need at least one p");
  for (double p : s.ps)
    if (!(p > 1.0) || !finite(p)) e.add("scan.ps", "every p must lie in (1, inf)");
  if (!(s.y_max > 0.0) || !finite(s.y_max)) e.add("scan.y_max", "must be positive");
  if (s.y_steps < 2) e.add("scan.y_steps", "must be >= 2");
  if (s.z_re.empty() || s.z_im.empty()) e.add("scan.z_re", "need a nonempty z grid");
  for (double x : s.z_re)
    if (!(x < 0.0)) e.add("scan.z_re", "every Re z must be negative");
  for (double y : s.z_im)
    if (!finite(y)) e.add("scan.z_im", "must be finite");
  if (s.ellipticity_resolution < 8) e.add("scan.ellipticity_resolution", "must be >= 8");
  if (s.verify_points < 16) e.add("scan.verify_points", "must be >= 16");
  // [pde]
  const auto& p = c.pde;
  if (!(p.T > 0.0) || !finite(p.T)) e.add("pde.T", "must be positive");
  if (p.steps < 2) e.add("pde.steps", "must be >= 2");
  if (p.stepper != "bdf2" && p.stepper != "backward_euler") e.add("pde.stepper", "expected bdf2 | backward_euler");
  if (!(p.r_time >= 1.0) || !finite(p.r_time)) e.add("pde.r_time", "must be >= 1");
  if (p.forcing != "none" && p.forcing != "constant" && p.forcing != "random" && p.forcing.rfind("csv:", 0) != 0)
    e.add("pde.forcing", "expected none | constant | random | csv:PATH");
  for (double w : p.frequencies)
    if (!(w >= 0.0) || !finite(w)) e.add("pde.frequencies", "frequencies must be finite and >= 0");
  try {
    (void)Diffusivity(p.a, p.diffusion_scale, p.a_range);
  } catch (const Error& err) {
    e.add("pde.a", err.what());
  }
  if (!(p.c > 0.0) || !finite(p.c)) e.add("pde.c", "must be positive");
  if (p.f != "none" && p.f != "gl" && p.f != "power") e.add("pde.f", "expected none | gl | power");
  if (!(p.f_power >= 1.0)) e.add("pde.f_power", "must be >= 1");
  if (!finite(p.g)) e.add("pde.g", "must be finite");
  if (p.u0 != "bump" && p.u0 != "uniform") e.add("pde.u0", "expected bump | uniform");
  if (!finite(p.u0_value)) e.add("pde.u0_value", "must be finite");
  if (p.radial_points < 8) e.add("pde.radial_points", "must be >= 8");
  if (p.angular_points < 8) e.add("pde.angular_points", "must be >= 8");
  if (!(p.r_max > 0.0) || !finite(p.r_max)) e.add("pde.r_max", "must be positive");
  if (!(p.q_T > 0.0) || !finite(p.q_T)) e.add("pde.q_T", "must be positive");
  if (p.q_steps < 1) e.add("pde.q_steps", "must be >= 1");
  if (!(p.a_min > 0.0)) e.add("pde.a_min", "must be positive");
  if (!(p.q > 1.0)) e.add("pde.q", "must exceed 1");
  if (!(p.growth_limit > 1.0)) e.add("pde.growth_limit", "must exceed 1");
  if (p.max_halvings < 0) e.add("pde.max_halvings", "must be >= 0");
  if (p.snapshot_stride < 0) e.add("pde.snapshot_stride", "must be >= 0");
  // [run]
  if (c.run.output_dir.empty()) e.add("run.output_dir", "must not be empty");
  e.raise();
}

std::string to_text(const RunConfig& config) {
  std::string out;
  for (const auto& section : section_order()) {
    out += "[" + section + "]\n";
    for (const auto& k : keys())
      if (k.section == section) out += k.name + " = " + k.get(config) + "\n";
    if (section == "operator") {
      for (std::size_t j = 0; j < config.op.coeff.size(); ++j)
        out += "a_" + std::to_string(j) + " = " + quote(config.op.coeff[j]) + "\n";
      for (std::size_t j = 0; j < config.op.symbol.size(); ++j)
        out += "s_" + std::to_string(j) + " = " + quote(config.op.symbol[j]) + "\n";
    }
    out += "\n";
  }
  return out;
}

std::string config_hash(const RunConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char ch : to_text(config)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

FuchsOperator build_operator(const RunConfig& c) {
  std::vector<ModeEigenvalue> modes;
  if (c.cross_section.type == "circle") {
    for (int k = 0; k <= c.cross_section.mode_cutoff; ++k) modes.push_back({-static_cast<double>(k) * k, k == 0 ? 1 : 2});
  } else {
    for (std::size_t j = 0; j < c.cross_section.eigenvalues.size(); ++j)
      modes.push_back({c.cross_section.eigenvalues[j],
                       c.cross_section.multiplicities.empty() ? 1 : c.cross_section.multiplicities[j]});
  }
  CrossSectionSpectrum spectrum(c.cross_section.n, std::move(modes));
  if (c.cross_section.type == "table") {
    // keep the first mode_cutoff + 1 distinct eigenvalues
    auto kept = spectrum.modes();
    if (kept.size() > static_cast<std::size_t>(c.cross_section.mode_cutoff) + 1)
      kept.resize(static_cast<std::size_t>(c.cross_section.mode_cutoff) + 1);
    spectrum = CrossSectionSpectrum(c.cross_section.n, kept);
  }
  const WeightData weight{c.weight.gamma, c.weight.p};
  if (c.op.preset == "laplacian") return make_cone_laplacian(spectrum, c.op.shift, weight);

  FuchsOperator op;
  op.mu = c.op.mu;
  op.weight = weight;
  op.cross_section = spectrum;
  op.shift = c.op.shift;
  for (const auto& text : c.op.coeff) op.coeff.push_back(Polynomial2::parse(text, "t", "nu"));
  if (c.op.symbol.empty()) {
    op.symbol = derived_symbols(op.mu, op.coeff);
  } else {
    for (const auto& text : c.op.symbol) op.symbol.push_back(Polynomial2::parse(text, "t", "nu_hat"));
  }
  validate(op);
  return op;
}

LogGrid build_grid(const RunConfig& c) {
  return LogGrid(c.grid.rmin, c.grid.rmax, c.grid.points,
                 c.grid.kind == "model_cone" ? GridKind::model_cone : GridKind::truncated_cone);
}

ContourOptions build_contour(const RunConfig& c) {
  ContourOptions o;
  o.delta = c.contour.delta;
  o.theta = c.contour.theta;
  o.s_max = c.contour.smax;
  o.n_ray = c.contour.nray;
  o.n_arc = c.contour.narc;
  o.tol = c.contour.tol;
  return o;
}

QuasilinearProblem build_quasilinear(const RunConfig& c) {
  const auto& p = c.pde;
  QuasilinearProblem q;
  q.grid = Grid2d{LogGrid(0.0, p.r_max, p.radial_points, GridKind::truncated_cone), p.angular_points};
  q.a = Diffusivity(p.a, p.diffusion_scale, p.a_range);
  q.c = p.c;
  q.f = nonlinearity_preset(p.f, p.f_power);
  q.f_name = p.f;
  q.g = p.g;
  q.initial = initial_preset(q.grid, p.u0, p.u0_value);
  q.T = p.q_T;
  q.steps = p.q_steps;
  q.a_min = p.a_min;
  q.q = p.q;
  q.growth_limit = p.growth_limit;
  q.max_halvings = p.max_halvings;
  q.seed = c.run.seed;
  q.snapshot_stride = p.snapshot_stride;
  return q;
}

}  // namespace conecalc
