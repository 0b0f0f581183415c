#include "echlab/app.hpp"

#include "echlab/cache.hpp"
#include "echlab/ellipsoid.hpp"
#include "echlab/orbit.hpp"
#include "echlab/orbit_io.hpp"
#include "echlab/rotation.hpp"
#include "echlab/twist.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace echlab {

namespace {

using nlohmann::json;

constexpr long double kPi = std::numbers::pi_v<long double>;

std::string join(const std::vector<std::string>& v, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + v[i];
    return out;
}

std::string join_ints(const std::vector<int>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? " " : "") + std::to_string(v[i]);
    return out;
}

std::string fr(long double x) { return format_real(x); }
std::string fi(std::int64_t x) { return format_int(x); }
std::string fb(bool b) { return b ? "1" : "0"; }

class Params {
public:
    Params(const json& j, const std::string& cmd, const std::vector<std::string>& allowed) : j_(j), cmd_(cmd) {
        if (!j.is_object()) throw UsageError(cmd + ": params must be an object");
        for (const auto& [k, v] : j.items())
            if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
                throw UsageError(cmd + ": unknown parameter '" + k + "'");
    }

    bool has(const std::string& k) const { return j_.contains(k) && !j_.at(k).is_null(); }

    std::string str(const std::string& k, const std::string& def) const {
        if (!has(k)) return def;
        const auto& v = j_.at(k);
        if (v.is_string()) return v.get<std::string>();
        if (v.is_object() || v.is_array()) return v.dump();
        return v.dump();
    }

    RealSpec real(const std::string& k, const std::string& def) const {
        std::string s = str(k, def);
        try {
            return parse_real(s);
        } catch (const std::exception& e) {
            throw UsageError(cmd_ + ": parameter " + k + ": cannot parse '" + s + "'");
        }
    }

    std::int64_t integer(const std::string& k, std::int64_t def) const {
        if (!has(k)) return def;
        const auto& v = j_.at(k);
        if (v.is_number_integer()) return v.get<std::int64_t>();
        std::string s = v.is_string() ? v.get<std::string>() : v.dump();
        std::int64_t x = 0;
        auto r = std::from_chars(s.data(), s.data() + s.size(), x);
        if (r.ec != std::errc() || r.ptr != s.data() + s.size())
            throw UsageError(cmd_ + ": parameter " + k + " must be an integer, got '" + s + "'");
        return x;
    }

    bool flag(const std::string& k, bool def) const {
        if (!has(k)) return def;
        const auto& v = j_.at(k);
        if (v.is_boolean()) return v.get<bool>();
        std::string s = v.is_string() ? v.get<std::string>() : v.dump();
        if (s == "1" || s == "true") return true;
        if (s == "0" || s == "false") return false;
        throw UsageError(cmd_ + ": parameter " + k + " must be a boolean, got '" + s + "'");
    }

    std::vector<int> ints(const std::string& k, const std::string& def) const {
        std::vector<int> out;
        if (has(k) && j_.at(k).is_array()) {
            for (const auto& x : j_.at(k)) {
                if (!x.is_number_integer()) throw UsageError(cmd_ + ": parameter " + k + " must list integers");
                out.push_back(x.get<int>());
            }
            return out;
        }
        std::string s = has(k) && j_.at(k).is_number_integer() ? j_.at(k).dump() : str(k, def);
        std::stringstream ss(s);
        std::string item;
        while (std::getline(ss, item, ',')) {
            int x = 0;
            auto r = std::from_chars(item.data(), item.data() + item.size(), x);
            if (item.empty() || r.ec != std::errc() || r.ptr != item.data() + item.size())
                throw UsageError(cmd_ + ": parameter " + k + " must be a comma-separated integer list");
            out.push_back(x);
        }
        if (out.empty()) throw UsageError(cmd_ + ": parameter " + k + " is empty");
        return out;
    }

private:
    const json& j_;
    std::string cmd_;
};

struct Ctx {
    const RunConfig& cfg;
    Params p;
    ReportBundle& b;
    PfhCalibration cal;
    SpectrumOptions sopt;

    double tol(double def) const { return cfg.tol.value_or(def); }
};

void verdict(ReportBundle& b, std::string name, bool pass, double margin, std::string detail = {}) {
    b.verdicts.push_back({std::move(name), pass, margin, std::move(detail)});
}

Ellipsoid ellipsoid_of(const Ctx& c) { return make_ellipsoid(c.p.real("a", "1"), c.p.real("b", "sqrt2")); }

std::string set_str(const OrbitSet& s) {
    std::vector<std::string> parts;
    for (const auto& [id, e] : s.entries()) parts.push_back(id + "^" + std::to_string(e.second));
    return parts.empty() ? "{}" : join(parts, " ");
}

std::string ends_str(const std::vector<EndGroup>& ends) {
    std::vector<std::string> parts;
    for (const auto& g : ends) parts.push_back(g.orbit + ":" + join_ints(g.mults) + (g.c0_present ? "+c0" : ""));
    return join(parts, "; ");
}

// ---- ellipsoid ----

void cmd_ellipsoid_census(Ctx& c) {
    Ellipsoid e = ellipsoid_of(c);
    long double L = c.p.has("L") ? c.p.real("L", "0").value : 100 * std::max(e.a, e.b);
    auto census = simple_orbit_census(e, L);
    Table t{"census", {"name", "action", "theta", "family", "multiple"}, {}};
    json data = json::array();
    for (const auto& o : census) {
        t.add_row({o.name, fr(o.action), o.theta.str(), fb(o.family), fi(o.multiple)});
        data.push_back({{"name", o.name},
                        {"action", static_cast<double>(o.action)},
                        {"theta", o.theta.str()},
                        {"family", o.family},
                        {"multiple", o.multiple}});
    }
    c.b.tables.push_back(std::move(t));
    c.b.data = {{"a", static_cast<double>(e.a)}, {"b", static_cast<double>(e.b)}, {"rational", e.rational},
                {"L", static_cast<double>(L)}, {"orbits", data}};
    if (!e.rational && L >= std::max(e.a, e.b)) {
        bool two = census.size() == 2 && census[0].name == "gamma1" && census[1].name == "gamma2";
        verdict(c.b, "census.two_orbits", two, two ? 0 : 1, std::to_string(census.size()) + " simple orbits");
    }
}

void cmd_ellipsoid_spectrum(Ctx& c) {
    Ellipsoid e = ellipsoid_of(c);
    SpectrumOptions opt = c.sopt;
    opt.formal = c.p.flag("formal", false);
    std::vector<SpectrumEntry> spec;
    if (c.p.has("count")) {
        std::int64_t n = c.p.integer("count", 10);
        if (n < 1) throw UsageError("ellipsoid spectrum: count must be >= 1");
        spec = cached_spectrum_prefix(e, static_cast<std::size_t>(n), opt, cache_dir_from_env());
    } else {
        long double L = c.p.has("L") ? c.p.real("L", "0").value : 10 * std::max(e.a, e.b);
        spec = action_spectrum(e, L, opt);
    }
    Table t{"spectrum", {"k", "c_k", "grading", "m", "n"}, {}};
    for (const auto& s : spec) t.add_row({fi(s.k), fr(s.c), fi(s.grading), fi(s.m), fi(s.n)});
    c.b.tables.push_back(std::move(t));
}

void cmd_ellipsoid_weyl(Ctx& c) {
    Ellipsoid e = ellipsoid_of(c);
    SpectrumOptions opt = c.sopt;
    opt.formal = c.p.flag("formal", false);
    std::int64_t kmax = c.p.integer("kmax", 100000);
    if (kmax < 1) throw UsageError("ellipsoid weyl: kmax must be >= 1");
    std::vector<std::int64_t> windows;
    for (std::int64_t K = 1000; K <= kmax; K *= 10) windows.push_back(K);
    std::int64_t need = std::max(kmax, windows.empty() ? 0 : 2 * windows.back());
    auto spec = cached_spectrum_prefix(e, static_cast<std::size_t>(need) + 1, opt, cache_dir_from_env());
    WeylTable w = weyl_table(e, spec, kmax);

    Table t{"weyl", {"k", "c_k", "ratio", "deviation"}, {}};
    for (const auto& r : w.rows) t.add_row({fi(r.k), fr(r.c), fr(r.ratio), fr(r.deviation)});
    c.b.plots["weyl"] = emit_svg(t, {"Weyl convergence", "k", {"deviation"}, "", true, true});
    c.b.tables.push_back(std::move(t));

    Table wt{"weyl_windows", {"K", "max_deviation"}, {}};
    std::vector<long double> maxima;
    for (auto K : windows) {
        maxima.push_back(weyl_max_deviation_parallel(spec, w.volume, K, 2 * K));
        wt.add_row({fi(K), fr(maxima.back())});
    }
    c.b.tables.push_back(std::move(wt));

    const double t0 = c.tol(0.02);
    const long double dev = w.rows.back().deviation;
    verdict(c.b, "weyl.deviation", dev <= t0 * w.volume, static_cast<double>(t0 * w.volume - dev),
            "k=" + fi(kmax) + " deviation " + fr(dev) + " vs " + fr(t0 * w.volume));
    if (maxima.size() >= 2) {
        bool dec = true;
        double margin = std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i < maxima.size(); ++i) {
            dec = dec && maxima[i] < maxima[i - 1];
            margin = std::min(margin, static_cast<double>(maxima[i - 1] - maxima[i]));
        }
        verdict(c.b, "weyl.window_max_decreasing", dec, margin);
    }
}

void cmd_ellipsoid_return_map(Ctx& c, std::mt19937_64& rng) {
    Ellipsoid e = ellipsoid_of(c);
    std::int64_t n = c.p.integer("points", 100), q = c.p.integer("iterates", 1);
    if (n < 0 || q < 1) throw UsageError("ellipsoid return-map: points >= 0 and iterates >= 1 required");
    std::uniform_real_distribution<long double> ur(0, 1), ua(0, 2 * kPi);
    Table t{"return_map", {"i", "radius", "angle", "image_radius", "image_angle", "time", "error"}, {}};
    long double worst = 0;
    for (std::int64_t i = 0; i < n; ++i) {
        SectionPoint s{ur(rng), ua(rng)};
        SectionPoint cur = s;
        long double time = 0;
        for (std::int64_t k = 0; k < q; ++k) {
            auto r = gss_return_map(e, cur);
            cur = r.image;
            time += r.time;
        }
        long double want = wrap_angle(s.angle + 2 * kPi * static_cast<long double>(q) * e.a / e.b);
        long double err = std::max({angle_distance(cur.angle, want), std::fabs(cur.radius - s.radius),
                                    std::fabs(time - static_cast<long double>(q) * e.a)});
        worst = std::max(worst, err);
        t.add_row({fi(i), fr(s.radius), fr(s.angle), fr(cur.radius), fr(cur.angle), fr(time), fr(err)});
    }
    c.b.tables.push_back(std::move(t));
    const double t0 = c.tol(1e-9);
    verdict(c.b, "return_map.rotation", worst <= t0, static_cast<double>(t0 - worst), "max error " + fr(worst));
}

void cmd_ellipsoid_identity(Ctx& c) {
    Ellipsoid e = ellipsoid_of(c);
    auto r = product_of_periods_check(e);
    Table t{"identity", {"a", "b", "product", "volume", "relative"}, {}};
    t.add_row({fr(e.a), fr(e.b), fr(r.product), fr(r.volume), fr(r.relative)});
    c.b.tables.push_back(std::move(t));
    const double t0 = c.tol(1e-6);
    verdict(c.b, "identity.product_of_periods", r.relative <= t0, static_cast<double>(t0 - r.relative));
}

// ---- twist ----

TwistProfile profile_of(const Ctx& c, const std::string& key, const std::string& def) {
    return TwistProfile::load(c.p.str(key, def));
}

void cmd_twist_calabi(Ctx& c) {
    TwistProfile f = profile_of(c, "profile", "lin:1");
    auto v = calabi(f);
    Table t{"calabi", {"profile", "cal", "exchanged", "rel_diff", "cal_area", "hofer_bound"}, {}};
    t.add_row({f.name(), fr(v.value), fr(v.exchanged), fr(v.rel_diff), fr(calabi_area(f)), fr(hofer_norm_bound(f))});
    c.b.tables.push_back(std::move(t));
    verdict(c.b, "calabi.fubini", v.fubini_ok, v.infinite ? 0 : 1e-9 - v.rel_diff);
}

void cmd_twist_census(Ctx& c) {
    TwistProfile f = profile_of(c, "profile", "lin:1");
    int d = static_cast<int>(c.p.integer("d", 4));
    auto circles = periodic_census(f, d, c.cal);
    Table t{"circles", {"p", "q", "level", "r", "action", "pole"}, {}};
    for (const auto& o : circles)
        t.add_row({fi(o.p), fi(o.q), fr(2 * kPi * static_cast<long double>(o.p) / static_cast<long double>(o.q)),
                   fr(o.r), fr(o.action), fb(o.pole)});
    c.b.tables.push_back(std::move(t));
}

void cmd_twist_complex(Ctx& c) {
    TwistProfile f = profile_of(c, "profile", "lin:1");
    int d = static_cast<int>(c.p.integer("d", 4));
    FilteredComplex cx = build_complex(f, d, c.cal);
    ComplexCheck ch = check_complex(cx);
    Table g{"generators", {"index", "k", "grading", "action", "path"}, {}};
    Table bd{"boundary", {"source", "target"}, {}};
    for (std::size_t i = 0; i < cx.generators.size(); ++i) {
        const auto& x = cx.generators[i];
        g.add_row({fi(static_cast<std::int64_t>(i)), fi(x.k), fi(x.grading), fr(x.action), x.str()});
        for (int j : cx.boundary[i]) bd.add_row({fi(static_cast<std::int64_t>(i)), fi(j)});
    }
    Table r{"ranks", {"grading", "rank"}, {}};
    for (auto [gr, rk] : ch.ranks) r.add_row({fi(gr), fi(rk)});
    c.b.tables.push_back(std::move(g));
    c.b.tables.push_back(std::move(bd));
    c.b.tables.push_back(std::move(r));
    verdict(c.b, "complex.d_squared_zero", ch.d_squared_zero, -static_cast<double>(ch.d_squared_failures));
    verdict(c.b, "complex.grading_drop_one", ch.grading_drop_one, 0);
    bool drop = ch.action_decreasing && ch.min_action_drop >= c.cal.positivity_floor;
    verdict(c.b, "complex.action_decreasing", drop, ch.min_action_drop - c.cal.positivity_floor);
    verdict(c.b, "complex.rank_pattern", ch.rank_pattern, 0);
}

void cmd_twist_cd(Ctx& c) {
    TwistProfile f = profile_of(c, "profile", "lin:1");
    auto ds = c.p.ints("d", "1,2,4,8,16,32,64,128");
    double cal = calabi(f).value;
    Table t{"cd", {"d", "c_d", "ratio", "cal", "deviation", "method"}, {}};
    for (int d : ds) {
        CdResult r = spectral_invariant_cd(f, d, c.cal);
        t.add_row({fi(d), fr(r.value), fr(r.value / d), fr(cal), fr(std::fabs(r.value / d - cal)), r.method});
    }
    c.b.plots["cd"] = emit_svg(t, {"c_d / d", "d", {"ratio", "cal"}, "", true, false});
    c.b.tables.push_back(std::move(t));
}

void weyl_verdicts(Ctx& c, const std::string& tag, const std::vector<AxiomRow>& rows, bool use_f, double cal) {
    if (rows.empty()) return;
    auto dev = [&](const AxiomRow& r) { return use_f ? r.weyl_f : r.weyl_g; };
    const double t0 = c.tol(0.1);
    double last = dev(rows.back());
    double rel = cal > 0 ? last / cal : last;
    verdict(c.b, "axioms.weyl_" + tag, rel <= t0, t0 - rel,
            "d=" + fi(rows.back().d) + " relative deviation " + fr(rel));
    std::vector<double> tail;
    for (const auto& r : rows)
        if (r.d >= 16) tail.push_back(dev(r));
    if (tail.size() >= 2) {
        bool dec = true;
        double margin = std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i < tail.size(); ++i) {
            dec = dec && tail[i] < tail[i - 1];
            margin = std::min(margin, tail[i - 1] - tail[i]);
        }
        verdict(c.b, "axioms.weyl_decreasing_" + tag, dec, margin);
    }
}

void cmd_twist_axioms(Ctx& c) {
    TwistProfile f = profile_of(c, "f", "lin:1"), g = profile_of(c, "g", "lin:1.5");
    auto ds = c.p.ints("d", "1,2,4,8,16,32,64,128");
    AxiomsReport rep = axioms_report(f, g, ds, c.cal);
    Table t{"axioms", {"d", "c_f", "c_g", "hofer_slack", "weyl_f", "weyl_g"}, {}};
    for (const auto& r : rep.rows)
        t.add_row({fi(r.d), fr(r.cf), fr(r.cg), fr(r.hofer_slack), fr(r.weyl_f), fr(r.weyl_g)});
    c.b.plots["axioms"] = emit_svg(t, {"Weyl deviation", "d", {"weyl_f", "weyl_g"}, "", true, true});
    c.b.tables.push_back(std::move(t));
    Table s{"axioms_summary", {"f", "g", "cal_f", "cal_g", "ordered"}, {}};
    s.add_row({f.name(), g.name(), fr(rep.cal_f), fr(rep.cal_g), fb(rep.ordered)});
    c.b.tables.push_back(std::move(s));
    verdict(c.b, "axioms.identity", rep.identity, 0);
    if (rep.ordered) verdict(c.b, "axioms.monotone", rep.monotone, 0);
    verdict(c.b, "axioms.hofer_lipschitz", rep.hofer_lipschitz, rep.min_hofer_slack);
    weyl_verdicts(c, "f", rep.rows, true, rep.cal_f);
    weyl_verdicts(c, "g", rep.rows, false, rep.cal_g);
}

void cmd_twist_infinite(Ctx& c) {
    TwistProfile f = profile_of(c, "profile", "inv-cube-compact");
    int imax = static_cast<int>(c.p.integer("imax", 20));
    auto ds = c.p.ints("d", "1,2,4,8,16,32");
    double bound = static_cast<double>(c.p.real("bound", "50").value);
    InfiniteTwistReport rep = infinite_twist_experiment(f, imax, ds, c.cal, c.p.flag("parallel", true));
    Table cells{"infinite_cells", {"i", "d", "c_d", "ratio", "cal", "hofer", "step2", "chain"}, {}};
    for (const auto& x : rep.cells)
        cells.add_row({fi(x.i), fi(x.d), fr(x.cd), fr(x.ratio), fr(x.cal), fr(x.hofer), fb(x.step2), fb(x.chain)});
    c.b.plots["infinite"] = emit_svg(cells, {"c_d/d by truncation", "d", {"ratio"}, "i", true, false});
    Table ct{"infinite_cal", {"i", "cal", "sup_ratio"}, {}};
    for (std::size_t i = 0; i < rep.cal.size(); ++i)
        ct.add_row({fi(static_cast<std::int64_t>(i + 1)), fr(rep.cal[i]), fr(rep.sup_ratio[i])});
    c.b.tables.push_back(std::move(cells));
    c.b.tables.push_back(std::move(ct));
    double top = rep.cal.empty() ? 0 : *std::max_element(rep.cal.begin(), rep.cal.end());
    verdict(c.b, "infinite.cal_increasing", rep.cal_increasing, 0);
    verdict(c.b, "infinite.cal_exceeds_bound", top > bound, top - bound,
            "max Cal " + fr(top) + " for i <= " + fi(imax));
    verdict(c.b, "infinite.chain", rep.chain_ok, 0);
    verdict(c.b, "infinite.step2", rep.step2_ok, 0);
}

// ---- partitions, score, tower ----

void cmd_partitions(Ctx& c) {
    if (!c.p.has("theta")) throw UsageError("partitions: --theta is required");
    RealSpec ts = c.p.real("theta", "0");
    Rotation th = ts.exact ? Rotation::exact(*ts.exact) : Rotation::real(ts.value);
    int m = static_cast<int>(c.p.integer("m", 1));
    int mmax = static_cast<int>(c.p.integer("mmax", m));
    if (m < 1 || mmax < m) throw UsageError("partitions: need 1 <= m <= mmax");
    Table t{"partitions", {"theta", "m", "p_plus", "p_minus", "cz", "disjoint", "one_exclusive", "small_count"}, {}};
    json rows = json::array();
    bool all = true, any = false;
    for (int k = m; k <= mmax; ++k) {
        Partition pp = partition_positive(th, k), pm = partition_negative(th, k);
        int cz = cz_index(th, k);
        std::string status = "n/a";
        std::string d1 = "", d2 = "", d3 = "";
        if (k >= 2 && !th.is_integer()) {
            PartitionReport r = partition_properties(th, k);
            status = r.all() ? "pass" : "fail";
            all = all && r.all();
            any = true;
            d1 = fb(r.disjoint), d2 = fb(r.one_exclusive), d3 = fb(r.small_count_ok);
        }
        t.add_row({th.str(), fi(k), join_ints(pp.parts), join_ints(pm.parts), fi(cz), d1, d2, d3});
        rows.push_back({{"theta", th.str()}, {"m", k}, {"p_plus", pp.parts}, {"p_minus", pm.parts}, {"cz", cz},
                        {"properties", status}});
    }
    c.b.tables.push_back(std::move(t));
    c.b.data = rows.size() == 1 ? rows.front() : rows;
    if (any) verdict(c.b, "partitions.properties", all, 0);
}

json read_json_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw UsageError("cannot open " + path);
    try {
        return json::parse(is);
    } catch (const json::parse_error& e) {
        throw UsageError(path + ": " + e.what());
    }
}

void cmd_score(Ctx& c) {
    if (c.p.flag("scan", false)) {
        ScanOptions opt;
        opt.max_mult = static_cast<int>(c.p.integer("max_mult", 3));
        RealSpec w = c.p.real("window", "0");
        if (!w.exact) throw UsageError("score: window must be an exact rational");
        opt.action_window = *w.exact;
        opt.c_tau = static_cast<int>(c.p.integer("c_tau", 0));
        ScanResult r = score_falsification_scan(scan_library(), opt);
        Table s{"scan_summary", {"max_mult", "window", "examined", "negatives"}, {}};
        s.add_row({fi(opt.max_mult), to_string(opt.action_window), fi(static_cast<std::int64_t>(r.examined)),
                   fi(static_cast<std::int64_t>(r.negatives))});
        Table h{"scan_histogram", {"T", "count"}, {}};
        for (auto [T, n] : r.t_histogram) h.add_row({fi(T), fi(static_cast<std::int64_t>(n))});
        Table w2{"scan_witnesses", {"alpha", "beta", "genus", "positive_ends", "negative_ends", "j0", "T"}, {}};
        for (const auto& x : r.witnesses)
            w2.add_row({set_str(x.alpha), set_str(x.beta), fi(x.genus), ends_str(x.positive_ends),
                        ends_str(x.negative_ends), fi(j0_of_curve(x)), fi(total_score(x))});
        c.b.tables.push_back(std::move(s));
        c.b.tables.push_back(std::move(h));
        c.b.tables.push_back(std::move(w2));
        verdict(c.b, "score.no_negative_T", r.negatives == 0, -static_cast<double>(r.negatives),
                fi(static_cast<std::int64_t>(r.negatives)) + " of " + fi(static_cast<std::int64_t>(r.examined)));
        return;
    }
    if (!c.p.has("input")) throw UsageError("score: --input or --scan is required");
    json doc = read_json_file(c.p.str("input", ""));
    OrbitLibrary lib = library_from_json(doc.at("orbits"));
    Table t{"curves",
            {"index", "genus", "positive_ends", "negative_ends", "j0", "ech_index", "score_alpha", "score_beta", "T",
             "K", "action"},
            {}};
    std::size_t i = 0;
    for (const auto& cj : doc.at("curves")) {
        CurveData cu = curve_from_json(cj, lib);
        t.add_row({fi(static_cast<std::int64_t>(i++)), fi(cu.genus), ends_str(cu.positive_ends),
                   ends_str(cu.negative_ends), fi(j0_of_curve(cu)), fi(ech_index_from_j0(cu)),
                   fi(orbit_set_score(cu.alpha)), fi(orbit_set_score(cu.beta)), fi(total_score(cu)),
                   fi(k_invariant(cu)), fr(cu.action)});
    }
    c.b.tables.push_back(std::move(t));
}

std::vector<std::string> audit_row(std::size_t idx, const TowerAudit& a) {
    return {fi(static_cast<std::int64_t>(idx)),
            fi(static_cast<std::int64_t>(a.n)),
            fi(a.sum_t),
            fi(a.score_delta),
            fi(a.sum_y),
            fb(a.score_telescopes),
            fr(a.sum_action),
            fr(a.action_delta),
            fb(a.action_telescopes),
            fi(a.total_index),
            fi(a.index_deviation),
            fi(static_cast<std::int64_t>(a.high_action)),
            fr(a.high_action_budget),
            fi(static_cast<std::int64_t>(a.t_positive)),
            fi(static_cast<std::int64_t>(a.t0_j1)),
            fi(static_cast<std::int64_t>(a.t0_j2)),
            fi(static_cast<std::int64_t>(a.falsifiers.size()))};
}

void cmd_tower(Ctx& c, std::mt19937_64& rng) {
    long double threshold = c.p.real("threshold", "1/10").value;
    std::vector<Tower> towers;
    if (c.p.has("input")) {
        towers.push_back(tower_from_json(read_json_file(c.p.str("input", ""))));
    } else {
        std::int64_t count = c.p.integer("count", 100), n = c.p.integer("n", 1000);
        if (count < 1 || n < 1) throw UsageError("tower: count and n must be >= 1");
        for (std::int64_t i = 0; i < count; ++i) towers.push_back(random_tower(rng, static_cast<std::size_t>(n)));
    }
    if (c.p.has("save")) {
        std::ofstream os(c.p.str("save", ""));
        if (!os) throw UsageError("cannot write " + c.p.str("save", ""));
        os << tower_to_json(towers.front()).dump(2) << '\n';
    }
    Table t{"towers",
            {"tower", "n", "sum_t", "score_delta", "sum_y", "score_ok", "sum_action", "action_delta", "action_ok",
             "total_index", "index_deviation", "high_action", "budget", "t_positive", "t0_j1", "t0_j2", "falsifiers"},
            {}};
    bool score = true, action = true, budget = true;
    for (std::size_t i = 0; i < towers.size(); ++i) {
        TowerAudit a = tower_audit(towers[i], threshold);
        score = score && a.score_telescopes;
        action = action && a.action_telescopes;
        budget = budget && static_cast<long double>(a.high_action) <= a.high_action_budget;
        t.add_row(audit_row(i, a));
    }
    c.b.tables.push_back(std::move(t));
    verdict(c.b, "tower.score_telescopes", score, 0);
    verdict(c.b, "tower.action_telescopes", action, 0);
    verdict(c.b, "tower.high_action_within_budget", budget, 0);
}

// ---- selftest ----

void cmd_selftest(Ctx& c, std::mt19937_64& rng) {
    ReportBundle& b = c.b;
    auto check = [&](const std::string& name, bool ok, double margin = 0, std::string detail = {}) {
        verdict(b, name, ok, margin, std::move(detail));
    };

    check("rotation.cz_examples", cz_index(Rotation::exact(3, 10), 1) == 1 && cz_index(Rotation::exact(0, 1), 5) == 0 &&
                                      cz_index(Rotation::exact(2, 3), 3) == 4);
    check("rotation.partition_examples",
          partition_positive(Rotation::exact(1, 5), 4).parts == std::vector<int>{1, 1, 1, 1} &&
              partition_positive(Rotation::exact(7, 10), 2).parts == std::vector<int>{2} &&
              partition_negative(Rotation::exact(1, 2), 4).parts == std::vector<int>{2, 2} &&
              partition_negative(Rotation::exact(1, 5), 4).parts == std::vector<int>{4});

    std::vector<Rotation> rationals, reals;
    for (int v = 1; v <= 8; ++v)
        for (int u = -v; u <= 2 * v; ++u)
            if (std::gcd(u, v) == 1) rationals.push_back(Rotation::exact(u, v));
    std::uniform_real_distribution<long double> ur(-1, 2);
    for (int i = 0; i < 100; ++i) reals.push_back(Rotation::real(ur(rng)));
    GridReport gr = partition_grid_serial(reals, 2, 20);
    GridReport gq = partition_grid_serial(rationals, 2, 20);
    check("rotation.pair_properties_irrational", gr.pair_failures == 0, 0,
          gr.pair_failures == 0 ? "100 real rotations, m <= 20" : gr.pair_witness);
    std::string czw = !gq.cz_witness.empty() ? gq.cz_witness : gr.cz_witness;
    check("rotation.cz_parity_bound", gq.cz_failures + gr.cz_failures == 0, 0, czw);

    check("orbit.forced_topology_cylinder", forced_topology(2, true) == std::set<Topology>{{0, 2, 0}});
    bool tel = true;
    for (int i = 0; i < 10; ++i) {
        TowerAudit a = tower_audit(random_tower(rng, 200), 0.1L);
        tel = tel && a.score_telescopes && a.action_telescopes;
    }
    check("orbit.tower_telescoping", tel, 0, "10 towers of 200 curves");

    std::uniform_real_distribution<long double> ua(0.5L, 3.0L);
    bool two = true;
    for (int i = 0; i < 5; ++i) {
        Ellipsoid e = make_ellipsoid(ua(rng), ua(rng));
        if (e.rational) continue;
        auto cs = simple_orbit_census(e, 100 * std::max(e.a, e.b));
        two = two && cs.size() == 2;
    }
    check("ellipsoid.census_two_orbits", two);
    Ellipsoid e = make_ellipsoid(parse_real("1"), parse_real("sqrt2"));
    WeylTable w = weyl_table(e, 10000);
    long double dev = w.rows.back().deviation, lim = 0.02L * w.volume;
    check("ellipsoid.weyl_10000", dev <= lim, static_cast<double>(lim - dev));
    long double worst = 0;
    std::uniform_real_distribution<long double> u01(0, 1), uang(0, 2 * kPi);
    for (int i = 0; i < 100; ++i) {
        SectionPoint s{u01(rng), uang(rng)};
        auto r = gss_return_map(e, s);
        worst = std::max(worst, angle_distance(r.image.angle, wrap_angle(s.angle + 2 * kPi * e.a / e.b)));
    }
    check("ellipsoid.return_map", worst <= 1e-9L, static_cast<double>(1e-9L - worst));
    auto pp = product_of_periods_check(e);
    check("ellipsoid.product_of_periods", pp.relative <= 1e-6L, static_cast<double>(1e-6L - pp.relative));

    bool fub = true;
    for (const char* name : {"lin:1", "quad:0.7", "const:2", "inv-cube-compact"}) fub = fub && calabi(TwistProfile::named(name)).fubini_ok;
    check("twist.fubini", fub);
    bool valid = true;
    for (const char* name : {"lin:1", "quad:0.7"})
        for (int d = 1; d <= 5; ++d) {
            auto ch = check_complex(build_complex(TwistProfile::named(name), d, c.cal));
            valid = valid && ch.d_squared_zero && ch.grading_drop_one && ch.action_decreasing && ch.rank_pattern;
        }
    check("twist.complex_valid", valid, 0, "lin:1, quad:0.7, d <= 5");
    bool ident = true;
    TwistProfile zero = TwistProfile::named("zero");
    for (int d = 1; d <= 8; ++d) ident = ident && spectral_invariant_cd(zero, d, c.cal).value == 0.0;
    ident = ident && cd_lattice_max(zero, 64, c.cal) == 0.0;
    check("twist.identity", ident);
    bool mono = true;
    TwistProfile icc = TwistProfile::named("inv-cube-compact");
    for (int d : {1, 2, 4, 8}) {
        double prev = -std::numeric_limits<double>::infinity();
        for (int i = 1; i <= 5; ++i) {
            double v = cd_lattice_max(truncate_profile(icc, i), d, c.cal);
            mono = mono && v >= prev;
            prev = v;
        }
    }
    check("twist.monotone_truncation", mono);
    bool agree = true;
    for (int d = 1; d <= 6; ++d) {
        TwistProfile f = TwistProfile::named("lin:1");
        agree = agree && spectral_invariant_cd(f, d, c.cal).value == cd_lattice_max(f, d, c.cal);
    }
    check("twist.lattice_max_matches_reduction", agree);

    Table t{"selftest", {"check", "pass", "margin", "detail"}, {}};
    for (const auto& v : b.verdicts) t.add_row({v.name, fb(v.pass), fr(v.margin), v.detail});
    b.tables.push_back(std::move(t));
}

using Handler = void (*)(Ctx&, std::mt19937_64&);

struct Command {
    std::string path;
    std::vector<std::string> params;
    Handler fn;
};

const std::vector<Command>& commands() {
    static const std::vector<Command> table = {
        {"ellipsoid census", {"a", "b", "L"}, [](Ctx& c, std::mt19937_64&) { cmd_ellipsoid_census(c); }},
        {"ellipsoid spectrum", {"a", "b", "L", "count", "formal"},
         [](Ctx& c, std::mt19937_64&) { cmd_ellipsoid_spectrum(c); }},
        {"ellipsoid weyl", {"a", "b", "kmax", "formal"}, [](Ctx& c, std::mt19937_64&) { cmd_ellipsoid_weyl(c); }},
        {"ellipsoid return-map", {"a", "b", "points", "iterates"},
         [](Ctx& c, std::mt19937_64& r) { cmd_ellipsoid_return_map(c, r); }},
        {"ellipsoid identity-check", {"a", "b"}, [](Ctx& c, std::mt19937_64&) { cmd_ellipsoid_identity(c); }},
        {"twist calabi", {"profile"}, [](Ctx& c, std::mt19937_64&) { cmd_twist_calabi(c); }},
        {"twist census", {"profile", "d"}, [](Ctx& c, std::mt19937_64&) { cmd_twist_census(c); }},
        {"twist complex", {"profile", "d"}, [](Ctx& c, std::mt19937_64&) { cmd_twist_complex(c); }},
        {"twist cd", {"profile", "d"}, [](Ctx& c, std::mt19937_64&) { cmd_twist_cd(c); }},
        {"twist axioms", {"f", "g", "d"}, [](Ctx& c, std::mt19937_64&) { cmd_twist_axioms(c); }},
        {"twist infinite", {"profile", "imax", "d", "bound", "parallel"},
         [](Ctx& c, std::mt19937_64&) { cmd_twist_infinite(c); }},
        {"partitions", {"theta", "m", "mmax"}, [](Ctx& c, std::mt19937_64&) { cmd_partitions(c); }},
        {"score", {"input", "scan", "max_mult", "window", "c_tau"}, [](Ctx& c, std::mt19937_64&) { cmd_score(c); }},
        {"tower", {"input", "count", "n", "threshold", "save"},
         [](Ctx& c, std::mt19937_64& r) { cmd_tower(c, r); }},
        {"selftest", {}, [](Ctx& c, std::mt19937_64& r) { cmd_selftest(c, r); }},
    };
    return table;
}

std::string format_name(Format f) {
    switch (f) {
        case Format::Csv: return "csv";
        case Format::Json: return "json";
        case Format::Svg: return "svg";
    }
    return "csv";
}

}  // namespace

const std::vector<std::pair<std::string, std::vector<std::string>>>& command_table() {
    static const auto table = [] {
        std::vector<std::pair<std::string, std::vector<std::string>>> out;
        for (const auto& c : commands()) out.push_back({c.path, c.params});
        return out;
    }();
    return table;
}

void apply_config(RunConfig& cfg, const nlohmann::json& doc) {
    if (!doc.is_object()) throw UsageError("config must be a JSON object");
    for (const auto& [k, v] : doc.items())
        if (k != "command" && k != "params" && k != "seed" && k != "tol" && k != "cap" && k != "format" && k != "out")
            throw UsageError("config: unknown key '" + k + "'");
    try {
        if (cfg.command.empty() && doc.contains("command")) {
            std::stringstream ss(doc.at("command").get<std::string>());
            std::string w;
            while (ss >> w) cfg.command.push_back(w);
        }
        if (doc.contains("params")) {
            if (!doc.at("params").is_object()) throw UsageError("config: params must be an object");
            for (const auto& [k, v] : doc.at("params").items())
                if (!cfg.params.contains(k)) cfg.params[k] = v;
        }
        if (doc.contains("seed")) cfg.seed = doc.at("seed").get<std::uint64_t>();
        if (!cfg.tol && doc.contains("tol")) cfg.tol = doc.at("tol").get<double>();
        if (!cfg.cap && doc.contains("cap")) cfg.cap = doc.at("cap").get<std::size_t>();
        if (cfg.out.empty() && doc.contains("out")) cfg.out = doc.at("out").get<std::string>();
        if (doc.contains("format")) cfg.format = parse_format(doc.at("format").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(std::string("config: ") + e.what());
    }
}

ReportBundle run(const RunConfig& cfg) {
    const std::string path = join(cfg.command, " ");
    auto it = std::find_if(commands().begin(), commands().end(), [&](const Command& c) { return c.path == path; });
    if (it == commands().end()) throw UsageError("unknown command '" + path + "'");

    ReportBundle b;
    b.command = path;
    Ctx ctx{cfg, Params(cfg.params, path, it->params), b, PfhCalibration{}, SpectrumOptions{}};
    if (cfg.cap) {
        ctx.sopt.cap = *cfg.cap;
        ctx.cal.generator_cap = *cfg.cap;
    }
    b.manifest = {{"tool", "echlab"},
                  {"version", kVersion},
                  {"command", path},
                  {"params", cfg.params},
                  {"seed", cfg.seed},
                  {"tol", cfg.tol ? json(*cfg.tol) : json(nullptr)},
                  {"cap", cfg.cap ? json(*cfg.cap) : json(nullptr)},
                  {"format", format_name(cfg.format)},
                  {"calibration", ctx.cal.to_json()},
                  {"spectrum_cap", ctx.sopt.cap},
                  {"spectrum_cache_version", kSpectrumCacheVersion},
                  {"csv", {{"decimal", "."}, {"separator", ","}, {"newline", "\\n"}}}};
    std::mt19937_64 rng(cfg.seed);
    it->fn(ctx, rng);
    return b;
}

int exit_code(const ReportBundle& b) { return b.all_pass() ? 0 : 1; }

}  // namespace echlab
