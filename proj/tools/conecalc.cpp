// conecalc: command-line front end. Exit status 0 iff every check passes;
// 1 when a check fails, 2 on configuration or module errors.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include "conecalc/commands.hpp"
#include "conecalc/config.hpp"
#include "conecalc/error.hpp"
#include "conecalc/parallel.hpp"

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<double> delta, theta, smax;
  std::optional<int> nray, narc;
  // heat
  std::optional<double> heat_T;
  std::optional<int> heat_steps;
  std::optional<std::string> stepper, forcing;
  // quasilinear
  std::optional<double> q_T;
  std::optional<int> q_steps;
  std::optional<std::string> a, f, u0;
  std::optional<double> c;
};

void apply(const Overrides& o, conecalc::RunConfig& cfg) {
  if (o.seed) cfg.run.seed = *o.seed;
  if (o.out) cfg.run.output_dir = *o.out;
  if (o.delta) cfg.contour.delta = *o.delta;
  if (o.theta) cfg.contour.theta = *o.theta;
  if (o.smax) cfg.contour.smax = *o.smax;
  if (o.nray) cfg.contour.nray = *o.nray;
  if (o.narc) cfg.contour.narc = *o.narc;
  if (o.heat_T) cfg.pde.T = *o.heat_T;
  if (o.heat_steps) cfg.pde.steps = *o.heat_steps;
  if (o.stepper) cfg.pde.stepper = *o.stepper == "be" ? "backward_euler" : *o.stepper;
  if (o.forcing) cfg.pde.forcing = *o.forcing;
  if (o.q_T) cfg.pde.q_T = *o.q_T;
  if (o.q_steps) cfg.pde.q_steps = *o.q_steps;
  if (o.a) cfg.pde.a = *o.a;
  if (o.c) cfg.pde.c = *o.c;
  if (o.f) cfg.pde.f = *o.f;
  if (o.u0) cfg.pde.u0 = *o.u0;
}

void print_record(const conecalc::RunRecord& record) {
  std::cout << record.command << " [" << record.config_hash << "]\n";
  for (const auto& report : record.reports)
    for (const auto& c : report.checks)
      std::cout << "  " << (c.pass ? "PASS " : "FAIL ") << report.operation << "." << c.name << "  value "
                << std::setprecision(6) << c.value << "  tol " << c.tolerance << (c.note.empty() ? "" : "  # ")
                << c.note << "\n";
  for (const auto& [kind, message] : record.errors) std::cout << "  ERROR " << kind << ": " << message << "\n";
  std::cout << (record.pass() ? "pass" : "fail") << " (" << std::fixed << std::setprecision(2) << record.seconds
            << " s)\n";
  std::cout.unsetf(std::ios::fixed);
}

int show_reports(const std::vector<std::string>& files) {
  bool all = true;
  for (const auto& file : files) {
    std::ifstream in(file);
    if (!in) {
      std::cerr << "cannot read " << file << "\n";
      return 2;
    }
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      std::cerr << file << ": " << e.what() << "\n";
      return 2;
    }
    if (j.value("schema_version", 0) != 1) {
      std::cerr << file << ": unsupported schema_version\n";
      return 2;
    }
    const bool pass = j.value("pass", false);
    all = all && pass;
    std::cout << file << "\n  command " << j.value("command", "?") << "  config " << j.value("config_hash", "?")
              << "  seed " << j.value("seed", 0) << "\n";
    for (const auto& row : j["invariants"])
      std::cout << "  " << (row["pass"].get<bool>() ? "PASS " : "FAIL ") << row["operation"].get<std::string>()
                << "." << row["check"].get<std::string>() << "\n";
    for (const auto& e : j["errors"])
      std::cout << "  ERROR " << e["kind"].get<std::string>() << ": " << e["message"].get<std::string>() << "\n";
    std::cout << "  " << (pass ? "pass" : "fail") << "\n";
  }
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Functional calculus of cone differential operators"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides o;
  std::optional<int> threads;
  bool dump_matrix = false;
  app.add_option("--config", config_path, "INI config file")->check(CLI::ExistingFile);
  app.add_option("--seed", o.seed, "random seed");
  app.add_option("--out", o.out, "output directory");
  app.add_option("--threads", threads, "worker threads")->envname("CONECALC_THREADS")->check(CLI::PositiveNumber);
  app.add_option("--delta", o.delta, "keyhole radius");
  app.add_option("--theta", o.theta, "sector angle of the contour");
  app.add_option("--smax", o.smax, "ray truncation in log-radius");
  app.add_option("--nray", o.nray, "nodes per ray");
  app.add_option("--narc", o.narc, "nodes on the arc");
  app.add_flag("--dump-matrix", dump_matrix, "write the per-mode matrices as CSV");

  std::string selected;
  for (const auto& name : conecalc::command_names()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->callback([&selected, name] { selected = name; });
    if (name == "heat") {
      sub->add_option("--T", o.heat_T, "final time");
      sub->add_option("--steps", o.heat_steps, "time steps");
      sub->add_option("--stepper", o.stepper, "bdf2 | backward_euler | be");
      sub->add_option("--forcing", o.forcing, "none | constant | random | csv:PATH");
    } else if (name == "quasilinear") {
      sub->add_option("--T", o.q_T, "final time");
      sub->add_option("--steps", o.q_steps, "time steps");
      sub->add_option("--a", o.a, "diffusivity a(s)");
      sub->add_option("--c", o.c, "exponent c in a(t^c u)");
      sub->add_option("--f", o.f, "none | gl | power");
      sub->add_option("--u0", o.u0, "bump | uniform");
    }
  }
  std::vector<std::string> report_files;
  CLI::App* report = app.add_subcommand("report", "print the pass matrix of report JSON files");
  report->add_option("files", report_files, "report.json files")->required()->check(CLI::ExistingFile);
  report->callback([&selected] { selected = "report"; });

  CLI11_PARSE(app, argc, argv);

  if (selected == "report") return show_reports(report_files);

  conecalc::RunConfig config;
  try {
    if (!config_path.empty()) config = conecalc::load_config(config_path);
    apply(o, config);
    conecalc::validate(config);
  } catch (const conecalc::ConfigError& e) {
    conecalc::RunRecord record;
    record.command = selected;
    record.config_text = conecalc::to_text(config);
    record.config_hash = conecalc::config_hash(config);
    record.seed = config.run.seed;
    record.errors.emplace_back("config", e.what());
    std::cerr << e.what() << "\n";
    try {
      conecalc::write_report(record, config.run.output_dir);
    } catch (const conecalc::Error& w) {
      std::cerr << w.what() << "\n";
    }
    return 2;
  }
  if (threads) conecalc::set_thread_count(*threads);

  try {
    if (dump_matrix)
      for (const auto& path : conecalc::dump_matrices(config, config.run.output_dir))
        std::cout << "wrote " << path.string() << "\n";
    const conecalc::RunRecord record = conecalc::run(selected, config);
    print_record(record);
    for (const auto& path : conecalc::write_report(record, config.run.output_dir))
      std::cout << "wrote " << path.string() << "\n";
    if (!record.errors.empty()) return 2;
    return record.pass() ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
