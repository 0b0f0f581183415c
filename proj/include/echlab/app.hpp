#pragma once

#include "echlab/report.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace echlab {

inline constexpr const char* kVersion = "1.0.0";

struct RunConfig {
    std::vector<std::string> command;  // e.g. {"twist", "cd"}
    nlohmann::json params = nlohmann::json::object();
    std::uint64_t seed = 20240601;
    std::optional<double> tol;
    std::optional<std::size_t> cap;
    std::string out;  // directory; empty for stdout
    Format format = Format::Csv;
};

// Merges a --config document ({"command": "...", "params": {...}, "seed": ...})
// under the values already present in cfg.
void apply_config(RunConfig& cfg, const nlohmann::json& doc);

// Subcommand paths with their accepted parameter names.
const std::vector<std::pair<std::string, std::vector<std::string>>>& command_table();

// Throws UsageError on unknown commands or parameters.
ReportBundle run(const RunConfig& cfg);

// 0 all verdicts pass, 1 otherwise.
int exit_code(const ReportBundle& b);

}  // namespace echlab
