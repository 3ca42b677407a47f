#include "conecalc/report.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "conecalc/error.hpp"

namespace conecalc {

namespace {

using nlohmann::ordered_json;

ordered_json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

ordered_json to_value(const Value& v) {
  return std::visit(
      [](const auto& x) -> ordered_json {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, double>)
          return number(x);
        else
          return x;
      },
      v);
}

ordered_json entries(const std::vector<Entry>& list) {
  ordered_json out = ordered_json::object();
  for (const auto& [key, value] : list) out[key] = to_value(value);
  return out;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream out;
  out.imbue(std::locale::classic());
  out << std::setprecision(17) << v;
  return out.str();
}

}  // namespace

bool CalculusReport::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

Check& CalculusReport::check_at_most(std::string name, double value, double tolerance, std::string note) {
  checks.push_back({std::move(name), value, tolerance, value <= tolerance, std::move(note)});
  return checks.back();
}

Check& CalculusReport::check_flag(std::string name, bool pass, std::string note) {
  checks.push_back({std::move(name), pass ? 1.0 : 0.0, 1.0, pass, std::move(note)});
  return checks.back();
}

void CalculusReport::merge(const CalculusReport& other, const std::string& prefix) {
  for (const auto& [k, v] : other.results) results.emplace_back(prefix + k, v);
  for (const auto& n : other.notes) notes.push_back(prefix + n);
  for (auto t : other.tables) {
    t.name = prefix + t.name;
    tables.push_back(std::move(t));
  }
  for (auto c : other.checks) {
    c.name = prefix + c.name;
    checks.push_back(std::move(c));
  }
  seconds += other.seconds;
}

bool RunRecord::pass() const {
  return errors.empty() &&
         std::all_of(reports.begin(), reports.end(), [](const CalculusReport& r) { return r.pass(); });
}

std::string to_json(const RunRecord& record, bool include_timings) {
  ordered_json root;
  root["schema_version"] = 1;
  root["command"] = record.command;
  root["config_hash"] = record.config_hash;
  root["seed"] = record.seed;
  root["config"] = record.config_text;
  root["pass"] = record.pass();
  ordered_json results = ordered_json::array();
  ordered_json matrix = ordered_json::array();
  for (const auto& report : record.reports) {
    ordered_json r;
    r["operation"] = report.operation;
    r["parameters"] = entries(report.parameters);
    r["results"] = entries(report.results);
    r["notes"] = report.notes;
    ordered_json checks = ordered_json::array();
    for (const auto& c : report.checks) {
      ordered_json check{{"name", c.name}, {"value", number(c.value)}, {"tolerance", number(c.tolerance)},
                         {"pass", c.pass}};
      if (!c.note.empty()) check["note"] = c.note;
      checks.push_back(check);
      matrix.push_back({{"operation", report.operation}, {"check", c.name}, {"pass", c.pass}});
    }
    r["checks"] = checks;
    ordered_json tables = ordered_json::array();
    for (const auto& t : report.tables)
      tables.push_back({{"name", t.name}, {"columns", t.columns}, {"rows", t.rows.size()}});
    r["tables"] = tables;
    r["pass"] = report.pass();
    results.push_back(r);
  }
  root["results"] = results;
  root["invariants"] = matrix;
  ordered_json errors = ordered_json::array();
  for (const auto& [kind, message] : record.errors) errors.push_back({{"kind", kind}, {"message", message}});
  root["errors"] = errors;
  if (include_timings) {
    ordered_json timings;
    timings["total_seconds"] = record.seconds;
    ordered_json per = ordered_json::array();
    for (const auto& report : record.reports)
      per.push_back({{"operation", report.operation}, {"seconds", report.seconds}});
    timings["operations"] = per;
    root["timings"] = timings;
  }
  return root.dump(2) + "\n";
}

std::string to_csv(const Table& table) {
  std::string out;
  for (std::size_t c = 0; c < table.columns.size(); ++c) out += (c ? "," : "") + table.columns[c];
  out += "\n";
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out += (c ? "," : "") + format_double(row[c]);
    out += "\n";
  }
  return out;
}

std::vector<std::filesystem::path> write_report(const RunRecord& record, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
  const std::string stem = record.command + "-" + record.config_hash;
  std::vector<std::filesystem::path> paths;
  const auto write = [&](const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw Error("write failed for " + path.string());
    paths.push_back(path);
  };
  write(dir / (stem + ".report.json"), to_json(record));
  for (const auto& report : record.reports)
    for (const auto& table : report.tables) write(dir / (stem + "." + table.name + ".csv"), to_csv(table));
  return paths;
}

}  // namespace conecalc
