#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace conecalc {

using Value = std::variant<bool, std::int64_t, double, std::string>;
using Entry = std::pair<std::string, Value>;

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct Check {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string note;
};

struct CalculusReport {
  std::string operation;
  std::vector<Entry> parameters;
  std::vector<Entry> results;
  std::vector<std::string> notes;
  std::vector<Table> tables;
  std::vector<Check> checks;
  double seconds = 0.0;

  bool pass() const;
  // value <= tolerance
  Check& check_at_most(std::string name, double value, double tolerance, std::string note = {});
  Check& check_flag(std::string name, bool pass, std::string note = {});
  void merge(const CalculusReport& other, const std::string& prefix);
};

// Everything written for one command run.
struct RunRecord {
  std::string command;
  std::string config_text;  // canonical config echo
  std::string config_hash;  // 16 hex digits
  std::uint64_t seed = 0;
  std::vector<CalculusReport> reports;
  std::vector<std::pair<std::string, std::string>> errors;  // (kind, message)
  double seconds = 0.0;

  bool pass() const;
};

// Deterministic JSON; timings sit under "timings" so masking them leaves the
// rest byte-identical.
std::string to_json(const RunRecord& record, bool include_timings = true);
std::string to_csv(const Table& table);

// Writes <command>-<hash>.report.json and <command>-<hash>.<table>.csv.
std::vector<std::filesystem::path> write_report(const RunRecord& record, const std::filesystem::path& dir);

}  // namespace conecalc
