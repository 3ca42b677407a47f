#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "conecalc/config.hpp"
#include "conecalc/report.hpp"

namespace conecalc {

// indicial, extensions, ellipticity, spectrum, resolvent-scan, power,
// bip-scan, hardy-check, heat, quasilinear, verify. ("report" reads JSON and
// lives in the CLI.)
const std::vector<std::string>& command_names();

// Runs one command. Module errors are caught and recorded in
// RunRecord::errors as (kind, message); kind is config, domain, numerical or
// internal.
RunRecord run(const std::string& command, const RunConfig& config);

// Dense per-mode matrices of the assembled operator as CSV, one file per mode,
// rows of re_k,im_k column pairs.
std::vector<std::filesystem::path> dump_matrices(const RunConfig& config, const std::filesystem::path& dir);

}  // namespace conecalc
