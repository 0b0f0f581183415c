#include "echlab/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <locale>
#include <sstream>

namespace echlab {

std::string format_real(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (x == 0) return "0";
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

std::string format_real(long double x) { return format_real(static_cast<double>(x)); }

std::string format_int(std::int64_t x) {
    char buf[32];
    auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

namespace {

std::string fixed(double x, int digits) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::fixed, digits);
    std::string s(buf, r.ptr);
    if (s == "-0" || s.find_first_not_of("-0.") == std::string::npos) s = digits ? "0." + std::string(digits, '0') : "0";
    return s;
}

std::optional<double> parse_number(const std::string& s) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    double v = 0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    os << text;
}

}  // namespace

void Table::add_row(std::vector<std::string> row) {
    if (row.size() != columns.size())
        throw std::invalid_argument("table " + name + ": row has " + std::to_string(row.size()) + " cells, expected " +
                                    std::to_string(columns.size()));
    rows.push_back(std::move(row));
}

std::size_t Table::column(const std::string& c) const {
    auto it = std::find(columns.begin(), columns.end(), c);
    if (it == columns.end()) throw UsageError("table " + name + " has no column " + c);
    return static_cast<std::size_t>(it - columns.begin());
}

std::string to_csv(const Table& t) {
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += csv_field(cells[i]);
        }
        out += '\n';
    };
    line(t.columns);
    for (const auto& r : t.rows) line(r);
    return out;
}

nlohmann::json to_json(const Table& t) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : t.rows) {
        nlohmann::json o = nlohmann::json::object();
        for (std::size_t i = 0; i < t.columns.size(); ++i) {
            auto v = parse_number(r[i]);
            if (v && std::isfinite(*v))
                o[t.columns[i]] = *v;
            else
                o[t.columns[i]] = r[i];
        }
        arr.push_back(std::move(o));
    }
    return arr;
}

std::string emit_svg(const Table& t, const PlotSpec& spec) {
    constexpr double W = 640, H = 400, L = 70, R = 150, T = 40, B = 50;
    const double pw = W - L - R, ph = H - T - B;
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

    struct Curve {
        std::string label;
        std::vector<std::pair<double, double>> pts;
    };
    std::vector<Curve> curves;
    if (!t.rows.empty()) {
        std::size_t xi = t.column(spec.x);
        std::vector<std::size_t> yi;
        for (const auto& y : spec.y) yi.push_back(t.column(y));
        std::optional<std::size_t> si;
        if (!spec.series.empty()) si = t.column(spec.series);
        auto num = [&](const std::string& cell, const std::string& col) {
            auto v = parse_number(cell);
            if (!v) throw UsageError("column " + col + " is not numeric: '" + cell + "'");
            return *v;
        };
        std::map<std::string, std::size_t> index;
        for (const auto& row : t.rows) {
            double x = num(row[xi], spec.x);
            for (std::size_t j = 0; j < yi.size(); ++j) {
                double y = num(row[yi[j]], spec.y[j]);
                std::string label = spec.y[j];
                if (si) label = spec.series + "=" + row[*si] + (yi.size() > 1 ? " " + spec.y[j] : "");
                auto [it, fresh] = index.try_emplace(label, curves.size());
                if (fresh) curves.push_back({label, {}});
                bool ok = std::isfinite(x) && std::isfinite(y) && (!spec.log_x || x > 0) && (!spec.log_y || y > 0);
                if (ok) curves[it->second].pts.push_back({x, y});
            }
        }
    }

    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& c : curves)
        for (auto [x, y] : c.pts) {
            double u = spec.log_x ? std::log10(x) : x, v = spec.log_y ? std::log10(y) : y;
            x0 = std::min(x0, u), x1 = std::max(x1, u), y0 = std::min(y0, v), y1 = std::max(y1, v);
        }
    const bool empty = !(x0 <= x1);
    if (empty) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (spec.log_x) x0 = std::floor(x0), x1 = std::ceil(x1);
    if (spec.log_y) y0 = std::floor(y0), y1 = std::ceil(y1);
    if (x1 - x0 < 1e-12) spec.log_x ? (x1 += 1) : (x0 -= 0.5, x1 += 0.5);
    if (y1 - y0 < 1e-12) spec.log_y ? (y1 += 1) : (y0 -= 0.5, y1 += 0.5);
    auto px = [&](double u) { return L + (u - x0) / (x1 - x0) * pw; };
    auto py = [&](double v) { return T + ph - (v - y0) / (y1 - y0) * ph; };

    std::ostringstream os;
    os.imbue(std::locale::classic());
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
       << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    os << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    os << "<text x=\"" << fixed(W / 2, 1) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
       << xml_escape(spec.title.empty() ? t.name : spec.title) << "</text>\n";
    os << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << fixed(pw, 1) << "\" height=\"" << fixed(ph, 1)
       << "\" fill=\"none\" stroke=\"black\"/>\n";

    auto ticks = [](double lo, double hi, bool log) {
        std::vector<double> v;
        if (log) {
            int step = std::max(1, static_cast<int>(std::ceil((hi - lo) / 8)));
            for (double e = lo; e <= hi + 1e-9; e += step) v.push_back(e);
        } else {
            for (int i = 0; i <= 5; ++i) v.push_back(lo + (hi - lo) * i / 5);
        }
        return v;
    };
    auto tick_label = [](double u, bool log) {
        if (log) return "1e" + format_int(static_cast<std::int64_t>(std::lround(u)));
        double a = std::fabs(u);
        if (a != 0 && (a >= 1e5 || a < 1e-3)) {
            char buf[64];
            auto r = std::to_chars(buf, buf + sizeof buf, u, std::chars_format::scientific, 2);
            return std::string(buf, r.ptr);
        }
        return fixed(u, 3);
    };
    for (double u : ticks(x0, x1, spec.log_x)) {
        os << "<line x1=\"" << fixed(px(u), 2) << "\" y1=\"" << fixed(T + ph, 2) << "\" x2=\"" << fixed(px(u), 2)
           << "\" y2=\"" << fixed(T + ph + 5, 2) << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << fixed(px(u), 2) << "\" y=\"" << fixed(T + ph + 18, 2) << "\" text-anchor=\"middle\">"
           << tick_label(u, spec.log_x) << "</text>\n";
    }
    for (double v : ticks(y0, y1, spec.log_y)) {
        os << "<line x1=\"" << fixed(L - 5, 2) << "\" y1=\"" << fixed(py(v), 2) << "\" x2=\"" << fixed(L, 2)
           << "\" y2=\"" << fixed(py(v), 2) << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << fixed(L - 8, 2) << "\" y=\"" << fixed(py(v) + 4, 2) << "\" text-anchor=\"end\">"
           << tick_label(v, spec.log_y) << "</text>\n";
    }
    os << "<text x=\"" << fixed(L + pw / 2, 1) << "\" y=\"" << fixed(H - 10, 1) << "\" text-anchor=\"middle\">"
       << xml_escape(spec.x + (spec.log_x ? " (log)" : "")) << "</text>\n";
    std::string ylabel;
    for (const auto& y : spec.y) ylabel += (ylabel.empty() ? "" : ", ") + y;
    os << "<text transform=\"translate(16," << fixed(T + ph / 2, 1) << ") rotate(-90)\" text-anchor=\"middle\">"
       << xml_escape(ylabel + (spec.log_y ? " (log)" : "")) << "</text>\n";

    if (empty) {
        os << "<text x=\"" << fixed(L + pw / 2, 1) << "\" y=\"" << fixed(T + ph / 2, 1)
           << "\" text-anchor=\"middle\" font-size=\"16\" fill=\"#666\">no data</text>\n";
    } else {
        for (std::size_t i = 0; i < curves.size(); ++i) {
            const char* col = palette[i % 10];
            const auto& c = curves[i];
            if (c.pts.size() > 1) {
                os << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"";
                for (std::size_t k = 0; k < c.pts.size(); ++k) {
                    double u = spec.log_x ? std::log10(c.pts[k].first) : c.pts[k].first;
                    double v = spec.log_y ? std::log10(c.pts[k].second) : c.pts[k].second;
                    os << (k ? " " : "") << fixed(px(u), 2) << ',' << fixed(py(v), 2);
                }
                os << "\"/>\n";
            }
            for (auto [x, y] : c.pts) {
                double u = spec.log_x ? std::log10(x) : x, v = spec.log_y ? std::log10(y) : y;
                os << "<circle cx=\"" << fixed(px(u), 2) << "\" cy=\"" << fixed(py(v), 2) << "\" r=\"2.5\" fill=\""
                   << col << "\"/>\n";
            }
            double ly = T + 12 + 16.0 * static_cast<double>(i);
            os << "<line x1=\"" << fixed(L + pw + 10, 1) << "\" y1=\"" << fixed(ly, 1) << "\" x2=\""
               << fixed(L + pw + 28, 1) << "\" y2=\"" << fixed(ly, 1) << "\" stroke=\"" << col
               << "\" stroke-width=\"2\"/>\n";
            os << "<text x=\"" << fixed(L + pw + 32, 1) << "\" y=\"" << fixed(ly + 4, 1) << "\">"
               << xml_escape(c.label) << "</text>\n";
        }
    }
    os << "</svg>\n";
    return os.str();
}

bool ReportBundle::all_pass() const {
    return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

nlohmann::json ReportBundle::to_json() const {
    nlohmann::json j;
    j["command"] = command;
    j["manifest"] = manifest;
    if (!data.is_null()) j["data"] = data;
    j["tables"] = nlohmann::json::object();
    for (const auto& t : tables) j["tables"][t.name] = echlab::to_json(t);
    j["verdicts"] = nlohmann::json::array();
    for (const auto& v : verdicts) {
        nlohmann::json o{{"name", v.name}, {"pass", v.pass}, {"detail", v.detail}};
        if (std::isfinite(v.margin))
            o["margin"] = v.margin;
        else
            o["margin"] = format_real(v.margin);
        j["verdicts"].push_back(std::move(o));
    }
    j["all_pass"] = all_pass();
    return j;
}

Format parse_format(const std::string& s) {
    if (s == "csv") return Format::Csv;
    if (s == "json") return Format::Json;
    if (s == "svg") return Format::Svg;
    throw UsageError("unknown format " + s + " (csv, json, svg)");
}

namespace {

Table verdict_table(const ReportBundle& b) {
    Table t{"verdicts", {"name", "pass", "margin", "detail"}, {}};
    for (const auto& v : b.verdicts) t.add_row({v.name, v.pass ? "1" : "0", format_real(v.margin), v.detail});
    return t;
}

}  // namespace

void write_bundle(const ReportBundle& b, const std::string& dir, Format f) {
    namespace fs = std::filesystem;
    fs::path root(dir);
    fs::create_directories(root);
    switch (f) {
        case Format::Csv:
            for (const auto& t : b.tables) write_file(root / (t.name + ".csv"), to_csv(t));
            break;
        case Format::Json:
            write_file(root / "bundle.json", b.to_json().dump(2) + "\n");
            break;
        case Format::Svg:
            for (const auto& [stem, svg] : b.plots) write_file(root / (stem + ".svg"), svg);
            break;
    }
    write_file(root / "manifest.json", b.manifest.dump(2) + "\n");
    write_file(root / "verdicts.csv", to_csv(verdict_table(b)));
}

std::string render_bundle(const ReportBundle& b, Format f) {
    switch (f) {
        case Format::Json:
            return b.to_json().dump(2) + "\n";
        case Format::Svg:
            if (!b.plots.empty()) return b.plots.begin()->second;
            return emit_svg(Table{b.command, {"x", "y"}, {}}, PlotSpec{b.command, "x", {"y"}, "", false, false});
        case Format::Csv:
            break;
    }
    std::string out;
    if (b.tables.size() == 1) return to_csv(b.tables.front());
    for (std::size_t i = 0; i < b.tables.size(); ++i) {
        if (i) out += '\n';
        out += "# " + b.tables[i].name + "\n" + to_csv(b.tables[i]);
    }
    return out;
}

}  // namespace echlab
