#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace echlab {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Shortest round-trip decimal, '.' separator, "inf"/"-inf"/"nan".
std::string format_real(double x);
std::string format_real(long double x);
std::string format_int(std::int64_t x);

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> row);
    std::size_t column(const std::string& name) const;  // throws UsageError
};

// Header plus rows, comma separated, '\n' line ends, trailing newline.
// Fields containing ',', '"' or newlines are quoted.
std::string to_csv(const Table& t);
// Array of objects; numeric-looking cells are emitted as numbers.
nlohmann::json to_json(const Table& t);

struct Verdict {
    std::string name;
    bool pass = false;
    double margin = 0;   // positive when passing with room
    std::string detail;
};

struct PlotSpec {
    std::string title;
    std::string x;
    std::vector<std::string> y;
    std::string series;  // optional column splitting rows into curves
    bool log_x = false, log_y = false;
};

// Self-contained SVG; an empty table gives axes and a "no data" label.
// Non-numeric cells in plotted columns raise UsageError.
std::string emit_svg(const Table& t, const PlotSpec& spec);

struct ReportBundle {
    std::string command;
    std::vector<Table> tables;
    std::vector<Verdict> verdicts;
    std::map<std::string, std::string> plots;  // file stem -> SVG
    nlohmann::json data;                       // structured payload, null when unused
    nlohmann::json manifest = nlohmann::json::object();

    bool all_pass() const;
    nlohmann::json to_json() const;
};

enum class Format { Csv, Json, Svg };
Format parse_format(const std::string& s);

// Writes tables (csv: <name>.csv, json: bundle.json, svg: <plot>.svg) plus
// manifest.json and verdicts.csv into dir.
void write_bundle(const ReportBundle& b, const std::string& dir, Format f);
// Stdout rendering of the bundle in the chosen format.
std::string render_bundle(const ReportBundle& b, Format f);

}  // namespace echlab
