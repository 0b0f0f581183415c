// Acceptance harness: one pass/fail line per criterion, exit 1 on any failure.

#include "echlab/app.hpp"
#include "echlab/ellipsoid.hpp"
#include "echlab/orbit.hpp"
#include "echlab/report.hpp"
#include "echlab/rotation.hpp"
#include "echlab/twist.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <numeric>
#include <queue>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

using namespace echlab;

namespace {

constexpr long double kTwoPi = 2 * std::numbers::pi_v<long double>;

struct Outcome {
    bool pass = true;
    std::string detail;
};

struct Criterion {
    int id;
    std::string name;
    double budget;  // seconds
    std::function<Outcome()> run;
};

std::string slurp(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

std::string fmt(long double x) { return format_real(static_cast<double>(x)); }

// a = sqrt(k), b = sqrt(k + 1): the ratio sqrt(k / (k + 1)) is irrational.
std::vector<Ellipsoid> irrational_samples(int n) {
    std::vector<Ellipsoid> out;
    for (int k = 2; k < 2 + n; ++k)
        out.push_back(make_ellipsoid(parse_real("sqrt" + std::to_string(k)), parse_real("sqrt" + std::to_string(k + 1))));
    return out;
}

// First n elements of {m a + n b : m, n >= 0} with multiplicity, by a plain heap walk.
std::vector<std::pair<std::int64_t, std::int64_t>> heap_oracle(long double a, long double b, std::size_t count) {
    using Item = std::tuple<long double, std::int64_t, std::int64_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    std::set<std::pair<std::int64_t, std::int64_t>> seen;
    pq.push({0, 0, 0});
    seen.insert({0, 0});
    std::vector<std::pair<std::int64_t, std::int64_t>> out;
    while (out.size() < count) {
        auto [v, m, n] = pq.top();
        pq.pop();
        out.push_back({m, n});
        if (seen.insert({m + 1, n}).second) pq.push({(m + 1) * a + n * b, m + 1, n});
        if (seen.insert({m, n + 1}).second) pq.push({m * a + (n + 1) * b, m, n + 1});
    }
    return out;
}

Outcome weyl_law() {
    Ellipsoid e = make_ellipsoid(parse_real("1"), parse_real("sqrt2"));
    const std::int64_t K = 100000;
    auto spec = spectrum_prefix(e, static_cast<std::size_t>(2 * K + 1));
    const long double V = volume(e);
    Outcome o;

    auto oracle = heap_oracle(e.a, e.b, spec.size());
    std::size_t mismatches = 0;
    for (std::size_t k = 0; k < spec.size(); ++k)
        if (spec[k].m != oracle[k].first || spec[k].n != oracle[k].second) ++mismatches;
    o.pass = mismatches == 0;

    long double c = spec[static_cast<std::size_t>(K)].c;
    long double dev = std::fabs(c * c / (2 * K) - V);
    o.pass = o.pass && dev <= 0.02L * V;

    std::vector<long double> windows;
    for (std::int64_t w = 1000; w <= K; w *= 10) windows.push_back(weyl_max_deviation_parallel(spec, V, w, 2 * w));
    for (std::size_t i = 1; i < windows.size(); ++i) o.pass = o.pass && windows[i] < windows[i - 1];

    o.detail = "dev(1e5)=" + fmt(dev) + " bound=" + fmt(0.02L * V) + " windows=" + fmt(windows[0]) + "," +
               fmt(windows[1]) + "," + fmt(windows[2]) + " oracle_mismatches=" + std::to_string(mismatches);
    return o;
}

Outcome two_orbits() {
    Outcome o;
    int bad = 0;
    for (const auto& e : irrational_samples(20)) {
        auto c = simple_orbit_census(e, 100 * std::max(e.a, e.b));
        std::vector<long double> acts;
        for (const auto& x : c)
            if (!x.family) acts.push_back(x.action);
        std::sort(acts.begin(), acts.end());
        bool ok = !e.rational && c.size() == 2 && acts.size() == 2 && acts[0] == std::min(e.a, e.b) &&
                  acts[1] == std::max(e.a, e.b);
        if (!ok) ++bad;
    }
    o.pass = bad == 0;
    o.detail = "samples=20 wrong=" + std::to_string(bad);
    return o;
}

Outcome product_of_periods() {
    Outcome o;
    long double worst = 0;
    for (const auto& e : irrational_samples(10)) worst = std::max(worst, product_of_periods_check(e).relative);
    o.pass = worst <= 1e-6L;
    o.detail = "max relative=" + fmt(worst);
    return o;
}

Outcome return_map() {
    Outcome o;
    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<long double> ur(0, 0.999L), ua(0, kTwoPi);
    long double worst = 0;
    std::size_t n = 0;
    for (const auto& e : irrational_samples(20))
        for (int i = 0; i < 100; ++i, ++n) {
            SectionPoint p{ur(rng), ua(rng)};
            ReturnResult r = gss_return_map(e, p);
            // Flow from theta1 = 0 for the return time lands back on the page.
            FlowState s = reeb_flow(e, {0, p.angle, 0.5L}, r.time);
            long double err = std::max({std::fabs(r.time - e.a), angle_distance(r.image.angle, p.angle + kTwoPi * e.a / e.b),
                                        std::fabs(r.image.radius - p.radius), angle_distance(s.theta1, 0),
                                        angle_distance(s.theta2, r.image.angle)});
            worst = std::max(worst, err);
        }
    o.pass = worst <= 1e-9L;
    o.detail = "points=" + std::to_string(n) + " max error=" + fmt(worst);
    return o;
}

std::vector<Rotation> criterion_rationals() {
    std::vector<Rotation> out;
    for (int v = 2; v <= 12; ++v)
        for (int u = -2 * v; u <= 3 * v; ++u)
            if (std::gcd(u, v) == 1) out.push_back(Rotation::exact(u, v));
    return out;
}

std::vector<Rotation> criterion_reals() {
    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<long double> u(-2, 3);
    std::vector<Rotation> out;
    for (int i = 0; i < 1000; ++i) out.push_back(Rotation::real(u(rng)));
    return out;
}

std::string grid_line(const std::string& tag, const GridReport& g) {
    return tag + ": cases=" + std::to_string(g.cases) + " fail=" + std::to_string(g.pair_failures) +
           " (i)=" + std::to_string(g.disjoint_failures) + " (ii)=" + std::to_string(g.one_failures) +
           " (iii)=" + std::to_string(g.count_failures) +
           (g.pair_witness.empty() ? "" : " first " + g.pair_witness);
}

Outcome partition_rules() {
    Outcome o;
    GridReport rat = partition_grid_parallel(criterion_rationals(), 2, 50);
    GridReport irr = partition_grid_parallel(criterion_reals(), 2, 50);

    std::size_t hyper_bad = 0;
    for (int k = -3; k <= 3; ++k)
        for (int m = 1; m <= 50; ++m) {
            Rotation z = Rotation::exact(k, 1), h = Rotation::exact(2 * k + 1, 2);
            std::vector<int> ones(static_cast<std::size_t>(m), 1), twos(static_cast<std::size_t>(m / 2), 2);
            if (m % 2) twos.push_back(1);
            if (partition_positive(z, m).parts != ones || partition_negative(z, m).parts != ones) ++hyper_bad;
            if (partition_positive(h, m).parts != twos || partition_negative(h, m).parts != twos) ++hyper_bad;
        }

    std::size_t ell_bad = 0, ell_cases = 0;
    for (int m = 1; m <= 50; ++m) {
        std::vector<int> ones(static_cast<std::size_t>(m), 1);
        for (int k = -2; k <= 2; ++k) {
            for (int v = m + 1; v <= m + 40; ++v, ++ell_cases)
                if (partition_positive(Rotation::exact(Q(k) + Q(1, v)), m).parts != ones) ++ell_bad;
            for (long double t : {0.5L, 0.9L, 0.999L}) {
                ++ell_cases;
                if (partition_positive(Rotation::real(k + t / m), m).parts != ones) ++ell_bad;
            }
        }
    }

    o.pass = rat.pair_failures == 0 && irr.pair_failures == 0 && hyper_bad == 0 && ell_bad == 0;
    o.detail = grid_line("rational", rat) + "; " + grid_line("irrational", irr) +
               "; hyperbolic fail=" + std::to_string(hyper_bad) + "; elliptic cases=" + std::to_string(ell_cases) +
               " fail=" + std::to_string(ell_bad);
    return o;
}

Outcome cz_properties() {
    Outcome o;
    auto thetas = criterion_rationals();
    auto reals = criterion_reals();
    thetas.insert(thetas.end(), reals.begin(), reals.end());
    for (int k = -3; k <= 3; ++k) thetas.push_back(Rotation::exact(k, 1));
    GridReport g = partition_grid_parallel(thetas, 1, 50);
    o.pass = g.cz_failures == 0;
    o.detail = "cases=" + std::to_string(g.cases) + " fail=" + std::to_string(g.cz_failures) +
               (g.cz_witness.empty() ? "" : " first " + g.cz_witness);
    return o;
}

Outcome j0_exercise() {
    Outcome o;
    // Every genus g <= 3 and distribution of 2..6 ends over the orbits of the curve,
    // with C0 present at each orbit.
    std::set<std::pair<int, int>> hits;
    std::size_t configs = 0;
    std::function<void(int, int, std::vector<int>&)> walk = [&](int g, int left, std::vector<int>& per_orbit) {
        int E = std::accumulate(per_orbit.begin(), per_orbit.end(), 0);
        if (E >= 2) {
            ++configs;
            int j0 = -2 + 2 * g;
            for (int e : per_orbit) j0 += 2 * e;
            if (j0 == 2) hits.insert({g, E});
        }
        for (int e = 1; e <= left; ++e) {
            per_orbit.push_back(e);
            walk(g, left - e, per_orbit);
            per_orbit.pop_back();
        }
    };
    for (int g = 0; g <= 3; ++g) {
        std::vector<int> per_orbit;
        walk(g, 6, per_orbit);
    }
    std::set<std::pair<int, int>> lib;
    for (const auto& t : forced_topology(2, true)) lib.insert({t.genus, t.ends});
    o.pass = hits == std::set<std::pair<int, int>>{{0, 2}} && lib == hits;
    std::string found;
    for (auto [g, E] : hits) found += "(" + std::to_string(g) + "," + std::to_string(E) + ")";
    o.detail = "configurations=" + std::to_string(configs) + " J0=2 topologies=" + found;
    return o;
}

Outcome telescoping() {
    Outcome o;
    std::mt19937_64 rng(20240601);
    int bad = 0;
    for (int t = 0; t < 100; ++t) {
        Tower tw = random_tower(rng, 1000);
        std::int64_t sum_t = 0, sum_y = 0;
        Q sum_a(0);
        for (const auto& c : tw.curves) {
            sum_t += total_score(c);
            sum_y += j0_of_curve(c) - 2;
            sum_a += *orbit_set_action_exact(c.alpha) - *orbit_set_action_exact(c.beta);
        }
        const OrbitSet& top = tw.curves.back().alpha;
        const OrbitSet& bottom = tw.curves.front().beta;
        bool score_ok = sum_t == orbit_set_score(top) - orbit_set_score(bottom) + 3 * sum_y;
        bool action_ok = sum_a == *orbit_set_action_exact(top) - *orbit_set_action_exact(bottom);
        TowerAudit a = tower_audit(tw, 1);
        if (!score_ok || !action_ok || !a.score_telescopes || !a.action_telescopes) ++bad;
    }
    o.pass = bad == 0;
    o.detail = "towers=100 N=1000 broken=" + std::to_string(bad);
    return o;
}

Outcome score_scan() {
    Outcome o;
    ScanResult r = score_falsification_scan(scan_library(), ScanOptions{});
    o.pass = r.negatives == 0;
    std::ostringstream os;
    os << "examined=" << r.examined << " T<0=" << r.negatives;
    for (auto [j0, n] : r.negative_j0) os << " J0=" << j0 << ":" << n;
    o.detail = os.str();
    return o;
}

std::vector<TwistProfile> complex_profiles() {
    return {TwistProfile::named("lin:1"), TwistProfile::named("quad:0.7"), TwistProfile::named("lin:1.5"),
            TwistProfile::samples({0, 0.3, 0.6, 0.9, 1}, {5.0, 3.1, 1.3, 0, 0}),
            truncate_profile(TwistProfile::named("inv-cube-compact"), 3)};
}

Outcome complex_validity() {
    Outcome o;
    int bad = 0, checked = 0;
    std::string first;
    for (const auto& f : complex_profiles())
        for (int d = 1; d <= 8; ++d, ++checked) {
            ComplexCheck c = check_complex(build_complex(f, d));
            bool ok = c.d_squared_zero && c.action_decreasing && c.grading_drop_one && c.rank_pattern;
            if (!ok && first.empty()) first = " first " + f.name() + " d=" + std::to_string(d);
            bad += !ok;
        }
    o.pass = bad == 0;
    o.detail = "complexes=" + std::to_string(checked) + " invalid=" + std::to_string(bad) + first;
    return o;
}

std::string short_real(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

Outcome axioms() {
    Outcome o;
    const std::vector<int> ds = {1, 2, 4, 8, 16, 32, 64, 128};
    std::ostringstream os;

    bool identity = true;
    for (int d : ds) identity = identity && spectral_invariant_cd(TwistProfile::named("zero"), d).value == 0;

    bool monotone = true;
    auto g = TwistProfile::named("inv-cube-compact");
    for (int d : ds) {
        double prev = -INFINITY;
        for (int i = 1; i <= (d <= 4 ? 4 : d <= 8 ? 3 : 12); ++i) {
            double v = spectral_invariant_cd(truncate_profile(g, i), d).value;
            monotone = monotone && v >= prev;
            prev = v;
        }
    }

    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> uc(0.1, 2.0);
    auto sample = [&]() {
        std::string kind = rng() % 2 ? "lin:" : "quad:";
        return TwistProfile::named(kind + short_real(uc(rng)));
    };
    double slack = INFINITY;
    for (int p = 0; p < 20; ++p) {
        TwistProfile f = sample(), h = sample();
        double dist = hofer_distance(f, h);
        for (int d : ds)
            slack = std::min(slack, d * dist - std::fabs(spectral_invariant_cd(f, d).value - spectral_invariant_cd(h, d).value));
    }

    bool weyl = true;
    for (const char* name : {"lin:1", "quad:0.7"}) {
        auto f = TwistProfile::named(name);
        double cal = calabi(f).value, area = calabi_area(f);
        std::vector<double> devs, area_devs;
        for (int d : {16, 32, 64, 128}) {
            double r = spectral_invariant_cd(f, d).value / d;
            devs.push_back(std::fabs(r - cal));
            area_devs.push_back(std::fabs(r - area));
        }
        bool dec = true;
        for (std::size_t i = 1; i < devs.size(); ++i) dec = dec && devs[i] < devs[i - 1];
        double rel = devs.back() / cal;
        weyl = weyl && dec && rel <= 0.1;
        os << " weyl[" << name << "] rel=" << short_real(rel) << (dec ? " decreasing" : " not-decreasing")
           << " (area-normalized rel=" << short_real(area_devs.back() / area) << ")";
    }

    o.pass = identity && monotone && slack >= 0 && weyl;
    o.detail = std::string("identity=") + (identity ? "ok" : "FAIL") + " monotone=" + (monotone ? "ok" : "FAIL") +
               " hofer min slack=" + short_real(slack) + os.str();
    return o;
}

Outcome infinite_twist() {
    Outcome o;
    auto f = TwistProfile::named("inv-cube-compact");
    InfiniteTwistReport r = infinite_twist_experiment(f, 20, {1, 2, 4, 8, 16, 32}, {}, true);
    double top = *std::max_element(r.cal.begin(), r.cal.end());
    double literal = calabi(truncate_profile(TwistProfile::named("inv-cube"), 20)).value;
    o.pass = r.cal_increasing && top > 50 && r.chain_ok && r.step2_ok;
    o.detail = std::string("cal increasing=") + (r.cal_increasing ? "yes" : "no") + " max Cal=" + short_real(top) +
               " (literal s^-3 at i=20: " + short_real(literal) + ") chain=" + (r.chain_ok ? "ok" : "FAIL") +
               " step2=" + (r.step2_ok ? "ok" : "FAIL") + " cells=" + std::to_string(r.cells.size());
    return o;
}

Outcome determinism() {
    Outcome o;
    RunConfig cfg;
    cfg.command = {"selftest"};
    ReportBundle a = run(cfg), b = run(cfg);
    bool same = true;
    for (Format f : {Format::Csv, Format::Json, Format::Svg}) same = same && render_bundle(a, f) == render_bundle(b, f);
    const auto root = std::filesystem::temp_directory_path() / ("echlab-acceptance-" + std::to_string(::getpid()));
    std::size_t files = 0;
    for (Format f : {Format::Csv, Format::Json, Format::Svg}) {
        std::filesystem::remove_all(root);
        write_bundle(a, (root / "a").string(), f);
        write_bundle(b, (root / "b").string(), f);
        for (const auto& e : std::filesystem::directory_iterator(root / "a")) {
            ++files;
            same = same && slurp(e.path()) == slurp(root / "b" / e.path().filename());
        }
    }
    std::filesystem::remove_all(root);
    o.pass = same && a.all_pass();
    o.detail = std::to_string(files) + " bundle files " + (same ? "identical" : "differ") + ", selftest " + (a.all_pass() ? "pass" : "FAIL");
    return o;
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "ellipsoid Weyl law", 10, weyl_law},
        {2, "two-orbit census", 1, two_orbits},
        {3, "product of periods", 5, product_of_periods},
        {4, "return map", 1, return_map},
        {5, "partition rules", 5, partition_rules},
        {6, "CZ parity and bound", 1, cz_properties},
        {7, "J0 forces a cylinder", 1, j0_exercise},
        {8, "tower telescoping", 2, telescoping},
        {9, "score falsification scan", 30, score_scan},
        {10, "PFH complex validity", 60, complex_validity},
        {11, "spectral invariant axioms", 300, axioms},
        {12, "infinite twist experiment", 300, infinite_twist},
        {13, "selftest determinism", 300, determinism},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        bool in_time = secs <= c.budget;
        bool pass = o.pass && in_time;
        failed += !pass;
        std::printf("%-4s criterion %2d  %-27s %6.2fs/%gs%s  %s\n", pass ? "PASS" : "FAIL", c.id, c.name.c_str(), secs,
                    c.budget, in_time ? "" : " (over budget)", o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failed, criteria.size());
    return failed ? 1 : 0;
}
