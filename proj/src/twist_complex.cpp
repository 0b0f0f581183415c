#include "echlab/twist.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace echlab {

namespace {

constexpr double kTwoPi = 2.0 * 3.14159265358979323846;

using Slope = std::pair<std::int64_t, std::int64_t>;  // (p, q)

bool steeper(const Slope& a, const Slope& b) { return a.first * b.second > b.first * a.second; }

int pole_level(const TwistProfile& f) {
    if (f.singular_at_zero()) throw ProfileError("profile unbounded at r = 0");
    return static_cast<int>(std::ceil(f.at_zero() / kTwoPi - 1e-12));
}

void require_support(const TwistProfile& f) {
    if (!f.support_flag()) throw ProfileError("profile " + f.name() + " is not compactly supported");
}

// Unit actions of every slope below N with q <= d, on the regularized profile.
struct SlopeTable {
    int N = 0;
    std::vector<Slope> levels;  // steepest first
    std::vector<double> level_actions;  // aligned with levels
    std::map<Slope, double> unit_action;  // filled only for d <= complex_cap
    double center_action = 0;
};

SlopeTable slope_table(const TwistProfile& f, int d, const PfhCalibration& cal) {
    require_support(f);
    SlopeTable t;
    t.N = pole_level(f);
    reject_rational_plateaus(f, d);
    TwistProfile fr = regularize_pole(f, cal.pole_delta);
    HamiltonianProfile H(fr);
    auto unit = [&](std::int64_t p, std::int64_t q, double r) {
        return static_cast<double>(q) * H(r) + cal.sigma * static_cast<double>(p) * 0.5 * (1 - r * r);
    };
    std::vector<std::pair<Slope, double>> rows;
    for (std::int64_t q = 1; q <= d; ++q)
        for (std::int64_t p = 1; p < t.N * q; ++p) {
            if (std::gcd(p, q) != 1) continue;
            double r = level_radius(fr, kTwoPi * static_cast<double>(p) / static_cast<double>(q));
            rows.push_back({{p, q}, unit(p, q, r)});
        }
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return steeper(a.first, b.first); });
    for (const auto& [s, a] : rows) {
        t.levels.push_back(s);
        t.level_actions.push_back(a);
        if (d <= cal.complex_cap) t.unit_action[s] = a;
    }
    t.center_action = unit(t.N, 1, 0.0);
    return t;
}

using Path = std::vector<Segment>;

Slope slope_of(const Segment& s) { return {s.p, s.q}; }

void canonicalize(Path& g) {
    std::sort(g.begin(), g.end(), [](const Segment& a, const Segment& b) { return steeper(slope_of(a), slope_of(b)); });
}

// Merges segments of equal direction and kind; false when an h count exceeds 1.
bool merge(Path& g) {
    canonicalize(g);
    Path out;
    for (const auto& s : g) {
        if (!out.empty() && out.back().p == s.p && out.back().q == s.q && out.back().kind == s.kind) {
            out.back().m += s.m;
            out.back().h += s.h;
        } else {
            out.push_back(s);
        }
    }
    g = std::move(out);
    for (const auto& s : g)
        if (s.h > 1) return false;
    return true;
}

int lattice_points(const Path& g) {
    std::int64_t total = 1, y = 0;
    for (const auto& s : g)
        for (int u = 0; u < s.m; ++u) {
            for (std::int64_t t = 1; t <= s.q; ++t) total += y + (s.p * t) / s.q + 1;
            y += s.p;
        }
    return static_cast<int>(total);
}

int h_count(const Path& g) {
    int n = 0;
    for (const auto& s : g) n += s.h;
    return n;
}

std::int64_t cross(std::int64_t ox, std::int64_t oy, std::int64_t ax, std::int64_t ay, std::int64_t bx,
                   std::int64_t by) {
    return (ax - ox) * (by - oy) - (ay - oy) * (bx - ox);
}

struct Edge {
    std::int64_t p, q;
    int m;
};

// Upper hull of the lattice points of triangle (A, 0, B) other than the corner, from A to B.
std::vector<Edge> tri_hull(std::int64_t ax, std::int64_t ay, std::int64_t bx, std::int64_t by) {
    std::vector<std::pair<std::int64_t, std::int64_t>> pts;
    std::int64_t ylo = std::min({ay, by, std::int64_t{0}}) - 1, yhi = std::max({ay, by, std::int64_t{0}}) + 1;
    for (std::int64_t X = std::min(ax, bx); X <= std::max(ax, bx); ++X)
        for (std::int64_t Y = ylo; Y <= yhi; ++Y) {
            if (X == 0 && Y == 0) continue;
            std::int64_t d1 = cross(ax, ay, 0, 0, X, Y), d2 = cross(0, 0, bx, by, X, Y), d3 = cross(bx, by, ax, ay, X, Y);
            bool neg = d1 < 0 || d2 < 0 || d3 < 0, pos = d1 > 0 || d2 > 0 || d3 > 0;
            if (!(neg && pos)) pts.push_back({X, Y});
        }
    std::sort(pts.begin(), pts.end());
    std::vector<std::pair<std::int64_t, std::int64_t>> hull;
    for (const auto& P : pts) {
        while (hull.size() >= 2) {
            auto [x1, y1] = hull[hull.size() - 2];
            auto [x2, y2] = hull.back();
            if ((x2 - x1) * (P.second - y1) - (y2 - y1) * (P.first - x1) >= 0)
                hull.pop_back();
            else
                break;
        }
        hull.push_back(P);
    }
    std::vector<Edge> out;
    for (std::size_t j = 0; j + 1 < hull.size(); ++j) {
        std::int64_t dx = hull[j + 1].first - hull[j].first, dy = hull[j + 1].second - hull[j].second;
        std::int64_t g = std::gcd(dx, dy < 0 ? -dy : dy);
        out.push_back({dy / g, dx / g, static_cast<int>(g)});
    }
    return out;
}

struct Target {
    Path path;
    int dk;  // change of twist
};

class Rounding {
public:
    Rounding(const SlopeTable& t) : N_(t.N) {
        for (const auto& s : t.levels) levels_.insert(s);
    }

    std::vector<Target> boundary(const Path& g) const {
        std::vector<Target> out;
        for (std::size_t i = 0; i + 1 < g.size(); ++i) corner(g, i, static_cast<int>(i + 1), out);
        if (!g.empty() && g.back().kind == SegmentKind::Level) corner(g, g.size() - 1, -1, out);
        left_wall(g, out);
        return out;
    }

private:
    bool is_level(std::int64_t p, std::int64_t q) const { return levels_.count({p, q}) > 0; }

    void corner(const Path& g, std::size_t i, int j, std::vector<Target>& out) const {
        const Segment& a = g[i];
        const Segment* b = j >= 0 ? &g[static_cast<std::size_t>(j)] : nullptr;
        int hb = a.h + (b ? b->h : 0) - 1;
        if (hb < 0) return;
        auto edges = b ? tri_hull(-a.q, -a.p, b->q, b->p) : tri_hull(-a.q, -a.p, 0, -1);
        std::vector<Segment> fresh;
        for (const auto& e : edges) {
            if (e.p == 0)
                fresh.push_back({0, 1, e.m, 0, SegmentKind::Filler});
            else if (is_level(e.p, e.q))
                fresh.push_back({e.p, e.q, e.m, 0, SegmentKind::Level});
            else
                return;
        }
        Segment a2 = a, b2 = b ? *b : Segment{};
        a2.m -= 1;
        a2.h = 0;
        b2.m -= 1;
        b2.h = 0;
        // Slots able to carry the remaining h label.
        std::vector<Segment*> slots;
        if (a2.m > 0 && a2.kind == SegmentKind::Level) slots.push_back(&a2);
        if (b && b2.m > 0 && b2.kind == SegmentKind::Level) slots.push_back(&b2);
        for (auto& s : fresh)
            if (s.kind == SegmentKind::Level) slots.push_back(&s);
        auto emit = [&]() {
            Path rest;
            for (std::size_t k = 0; k < g.size(); ++k)
                if (k != i && static_cast<int>(k) != j) rest.push_back(g[k]);
            if (a2.m > 0) rest.push_back(a2);
            if (b && b2.m > 0) rest.push_back(b2);
            rest.insert(rest.end(), fresh.begin(), fresh.end());
            if (merge(rest)) out.push_back({std::move(rest), 0});
        };
        if (hb == 0) {
            emit();
        } else {
            for (auto* s : slots) {
                s->h = 1;
                emit();
                s->h = 0;
            }
        }
    }

    void left_wall(const Path& g, std::vector<Target>& out) const {
        if (g.empty() || g.front().kind != SegmentKind::Level || g.front().h != 1) return;
        const Segment& a = g.front();
        Path rest(g.begin() + 1, g.end());
        for (const auto& e : tri_hull(0, -1, a.q, a.p)) {
            if (e.p == N_ && e.q == 1)
                rest.push_back({e.p, e.q, e.m, 0, SegmentKind::Center});
            else if (is_level(e.p, e.q))
                rest.push_back({e.p, e.q, e.m, 0, SegmentKind::Level});
            else
                return;
        }
        if (a.m > 1) rest.push_back({a.p, a.q, a.m - 1, 0, SegmentKind::Level});
        if (merge(rest)) out.push_back({std::move(rest), -1});
    }

    std::int64_t N_;
    std::set<Slope> levels_;
};

void enumerate_paths(const SlopeTable& t, int d, std::size_t cap, std::size_t i, int deg, Path& cur,
                     std::vector<Path>& out) {
    if (i == t.levels.size()) {
        for (int j = 0; j <= d - deg; ++j) {
            if (j > 0 && t.N == 0) break;
            int k = d - deg - j;
            Path g;
            if (j) g.push_back({t.N, 1, j, 0, SegmentKind::Center});
            g.insert(g.end(), cur.begin(), cur.end());
            if (k) g.push_back({0, 1, k, 0, SegmentKind::Filler});
            out.push_back(std::move(g));
            if (out.size() > cap) throw ComplexSizeError("generator count exceeds cap", out.size());
        }
        return;
    }
    enumerate_paths(t, d, cap, i + 1, deg, cur, out);
    auto [p, q] = t.levels[i];
    for (int m = 1; deg + q * m <= d; ++m)
        for (int h = 0; h <= 1; ++h) {
            cur.push_back({p, q, m, h, SegmentKind::Level});
            enumerate_paths(t, d, cap, i + 1, deg + static_cast<int>(q) * m, cur, out);
            cur.pop_back();
        }
}

std::string encode(const Path& g, int k) {
    std::string s;
    auto put = [&](std::int64_t v) { s.append(reinterpret_cast<const char*>(&v), sizeof v); };
    put(k);
    for (const auto& x : g) {
        put(x.p);
        put(x.q);
        put(x.m * 4 + x.h * 2 + (x.kind == SegmentKind::Center ? 1 : 0));
    }
    return s;
}

double path_action(const SlopeTable& t, const Path& g, int k, const PfhCalibration& cal) {
    double a = 0;
    for (const auto& s : g) {
        if (s.kind == SegmentKind::Filler) continue;
        double u = s.kind == SegmentKind::Center ? t.center_action : t.unit_action.at({s.p, s.q});
        a += s.m * u;
    }
    return a - k * cal.twist_area;
}

std::vector<int> sym_diff(const std::vector<int>& a, const std::vector<int>& b) {
    std::vector<int> out;
    std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

}  // namespace

std::string LatticePathGenerator::str() const {
    std::ostringstream os;
    bool first = true;
    for (const auto& s : segments) {
        if (!first) os << " ";
        first = false;
        const char* tag = s.kind == SegmentKind::Center ? "c" : s.kind == SegmentKind::Filler ? "z" : (s.h ? "h" : "e");
        os << tag << "(" << s.q << "," << s.p << ")";
        if (s.m > 1) os << "^" << s.m;
    }
    os << " k=" << k;
    return os.str();
}

FilteredComplex build_complex(const TwistProfile& f, int d, const PfhCalibration& cal) {
    if (d < 1) throw std::invalid_argument("degree must be >= 1");
    if (d > cal.complex_cap)
        throw ComplexSizeError("degree " + std::to_string(d) + " above complex cap " + std::to_string(cal.complex_cap),
                               0);
    SlopeTable t = slope_table(f, d, cal);
    std::vector<Path> base;
    Path cur;
    enumerate_paths(t, d, cal.generator_cap, 0, 0, cur, base);

    FilteredComplex c;
    c.d = d;
    c.N = t.N;
    c.grading_lo = d - 2 * (d + 1) - 1;
    c.grading_hi = d + 2 * (d + 1) + 1;
    std::unordered_map<std::string, int> index;
    for (auto& g : base) {
        int L = lattice_points(g), nh = h_count(g);
        int top = 3 * d + 2 - 2 * L + nh;  // grading at k = 0
        const int step = 2 * (d + 1);
        auto floor_div = [](int a, int b) { return a / b - ((a % b != 0) && ((a < 0) != (b < 0))); };
        int kmin = -floor_div(c.grading_hi - top, step), kmax = floor_div(top - c.grading_lo, step);
        if (t.N == 0) kmin = kmax = 0;
        for (int k = kmin; k <= kmax; ++k) {
            int gr = top - k * step;
            if (gr < c.grading_lo || gr > c.grading_hi) continue;
            LatticePathGenerator gen;
            gen.segments = g;
            gen.k = k;
            gen.degree = d;
            gen.lattice_points = L;
            gen.grading = gr;
            gen.action = path_action(t, g, k, cal);
            index.emplace(encode(g, k), static_cast<int>(c.generators.size()));
            c.generators.push_back(std::move(gen));
            if (c.generators.size() > cal.generator_cap)
                throw ComplexSizeError("generator count exceeds cap", c.generators.size());
        }
    }
    c.boundary.assign(c.generators.size(), {});
    Rounding rounding(t);
    for (std::size_t i = 0; i < c.generators.size(); ++i) {
        const auto& gen = c.generators[i];
        for (auto& tg : rounding.boundary(gen.segments)) {
            auto it = index.find(encode(tg.path, gen.k + tg.dk));
            if (it != index.end()) c.boundary[static_cast<std::size_t>(it->second)].push_back(static_cast<int>(i));
        }
    }
    for (auto& col : c.boundary) {
        std::sort(col.begin(), col.end());
        std::vector<int> odd;
        for (std::size_t a = 0; a < col.size();) {
            std::size_t b = a;
            while (b < col.size() && col[b] == col[a]) ++b;
            if ((b - a) % 2) odd.push_back(col[a]);
            a = b;
        }
        col = std::move(odd);
    }
    return c;
}

Reduction reduce(const FilteredComplex& c) {
    const std::size_t n = c.generators.size();
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const auto &ga = c.generators[a], &gb = c.generators[b];
        if (ga.action != gb.action) return ga.action < gb.action;
        return a < b;
    });
    std::vector<int> pos(n);
    for (std::size_t k = 0; k < n; ++k) pos[order[k]] = static_cast<int>(k);
    std::vector<std::vector<int>> cols(n);
    std::vector<int> pivot_of(n, -1);
    std::vector<bool> paired(n, false);
    for (std::size_t k = 0; k < n; ++k) {
        std::vector<int> col;
        for (int i : c.boundary[order[k]]) col.push_back(pos[i]);
        std::sort(col.begin(), col.end());
        while (!col.empty() && pivot_of[col.back()] >= 0) col = sym_diff(col, cols[pivot_of[col.back()]]);
        if (!col.empty()) {
            pivot_of[col.back()] = static_cast<int>(k);
            paired[col.back()] = paired[k] = true;
        }
        cols[k] = std::move(col);
    }
    Reduction r;
    for (std::size_t k = 0; k < n; ++k)
        if (!paired[k]) {
            const auto& g = c.generators[order[k]];
            r.essential[g.grading].push_back(g.action);
        }
    return r;
}

ComplexCheck check_complex(const FilteredComplex& c) {
    ComplexCheck r;
    r.min_action_drop = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < c.boundary.size(); ++j) {
        std::vector<int> sq;
        for (int i : c.boundary[j]) {
            sq = sym_diff(sq, c.boundary[i]);
            if (c.generators[i].grading != c.generators[j].grading - 1) r.grading_drop_one = false;
            double drop = c.generators[j].action - c.generators[i].action;
            r.min_action_drop = std::min(r.min_action_drop, drop);
        }
        // entries landing below the band are dropped, so only check interior sources
        if (!sq.empty() && c.generators[j].grading - 2 >= c.grading_lo) {
            ++r.d_squared_failures;
            r.d_squared_zero = false;
        }
    }
    r.action_decreasing = r.min_action_drop > 0;
    Reduction red = reduce(c);
    for (int g = c.grading_lo + 1; g <= c.grading_hi - 1; ++g) {
        auto it = red.essential.find(g);
        int rank = it == red.essential.end() ? 0 : static_cast<int>(it->second.size());
        r.ranks[g] = rank;
        bool parity = ((g - c.d) % 2) == 0;
        int want = parity ? 1 : 0;
        if (c.N == 0) want = g == c.d ? 1 : 0;
        if (rank != want) r.rank_pattern = false;
    }
    return r;
}

double cd_lattice_max(const TwistProfile& f, int d, const PfhCalibration& cal) {
    if (d < 1) throw std::invalid_argument("degree must be >= 1");
    SlopeTable t = slope_table(f, d, cal);
    struct Item {
        std::int64_t p, q;
        double a;
    };
    std::vector<Item> items;
    items.push_back({t.N, 1, t.center_action});
    for (std::size_t i = 0; i < t.levels.size(); ++i)
        items.push_back({t.levels[i].first, t.levels[i].second, t.level_actions[i]});
    items.push_back({0, 1, 0.0});
    if (t.N == 0) items.erase(items.begin());

    const int M = d + 1;
    const double NEG = -std::numeric_limits<double>::infinity();
    struct Cell {
        double value;
        double asum;
        std::int64_t L;
    };
    std::vector<Cell> dp(static_cast<std::size_t>((d + 1) * M), Cell{NEG, 0, 0});
    auto at = [&](int x, int res) -> Cell& { return dp[static_cast<std::size_t>(x * M + res)]; };
    at(0, 1 % M) = {0, 0, 1};
    const double area = cal.twist_area;
    for (const auto& it : items) {
        const std::int64_t S = it.p > 0 ? (it.p - 1) * (it.q - 1) / 2 + it.p : 0;
        for (int x = 0; x + it.q <= d; ++x) {
            int xe = x + static_cast<int>(it.q);
            std::int64_t con = it.q + S + it.p * (d - xe);
            int shift = static_cast<int>(con % M);
            double gain = it.a + area * static_cast<double>(con) / M;
            for (int res = 0; res < M; ++res) {
                const Cell& src = at(x, res);
                if (src.value == NEG) continue;
                Cell& dst = at(xe, (res + shift) % M);
                double v = src.value + gain;
                if (v > dst.value) dst = {v, src.asum + it.a, src.L + con};
            }
        }
    }
    const Cell& end = at(d, 0);
    if (end.value == NEG) throw CalibrationError("no e-only path with L divisible by d+1");
    return end.asum + area * static_cast<double>(end.L / M - 1);
}

CdResult spectral_invariant_cd(const TwistProfile& f, int d, const PfhCalibration& cal) {
    if (d > cal.reduction_cap) return {cd_lattice_max(f, d, cal), "lattice-max"};
    FilteredComplex c = build_complex(f, d, cal);
    Reduction r = reduce(c);
    auto it = r.essential.find(d);
    if (it == r.essential.end() || it->second.size() != 1)
        throw CalibrationError("homology in grading " + std::to_string(d) + " has rank " +
                               std::to_string(it == r.essential.end() ? 0 : it->second.size()));
    return {it->second.front(), "reduction"};
}

AxiomsReport axioms_report(const TwistProfile& f, const TwistProfile& g, const std::vector<int>& ds,
                           const PfhCalibration& cal) {
    AxiomsReport rep;
    TwistProfile zero = TwistProfile::named("zero");
    rep.cal_f = calabi(f).value;
    rep.cal_g = calabi(g).value;
    rep.ordered = true;
    for (int i = 0; i <= 4000; ++i) {
        double r = i / 4000.0;
        if (r == 0) r = 1e-9;
        if (f(r) > g(r)) rep.ordered = false;
    }
    double dist = hofer_distance(regularize_pole(f, cal.pole_delta), regularize_pole(g, cal.pole_delta));
    rep.min_hofer_slack = std::numeric_limits<double>::infinity();
    for (int d : ds) {
        AxiomRow row;
        row.d = d;
        if (spectral_invariant_cd(zero, d, cal).value != 0.0) rep.identity = false;
        row.cf = spectral_invariant_cd(f, d, cal).value;
        row.cg = spectral_invariant_cd(g, d, cal).value;
        if (rep.ordered && row.cf > row.cg) rep.monotone = false;
        row.hofer_slack = d * dist - std::fabs(row.cf - row.cg);
        rep.min_hofer_slack = std::min(rep.min_hofer_slack, row.hofer_slack);
        row.weyl_f = std::fabs(row.cf / d - rep.cal_f);
        row.weyl_g = std::fabs(row.cg / d - rep.cal_g);
        rep.rows.push_back(row);
    }
    rep.hofer_lipschitz = rep.min_hofer_slack >= 0;
    return rep;
}

InfiniteTwistReport infinite_twist_experiment(const TwistProfile& f, int imax, const std::vector<int>& ds,
                                              const PfhCalibration& cal, bool parallel) {
    if (!calabi(f).infinite) throw ProfileError("infinite-twist experiment needs Cal(f) = +inf");
    if (imax < 1) throw std::invalid_argument("imax must be >= 1");
    InfiniteTwistReport rep;
    std::vector<TwistProfile> fi;
    for (int i = 1; i <= imax; ++i) {
        fi.push_back(truncate_profile(f, i));
        require_support(fi.back());
        rep.cal.push_back(calabi(fi.back()).value);
    }
    for (std::size_t i = 1; i < rep.cal.size(); ++i)
        if (!(rep.cal[i] > rep.cal[i - 1])) rep.cal_increasing = false;

    const int nd = static_cast<int>(ds.size());
    rep.cells.assign(static_cast<std::size_t>(imax * nd), {});
    const int total = imax * nd;
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1) if (parallel)
    for (int idx = 0; idx < total; ++idx) {
        try {
            int i = idx / nd, j = idx % nd;
            TwistCell& c = rep.cells[static_cast<std::size_t>(idx)];
            c.i = i + 1;
            c.d = ds[static_cast<std::size_t>(j)];
            c.cd = cd_lattice_max(fi[static_cast<std::size_t>(i)], c.d, cal);
            c.ratio = c.cd / c.d;
            c.cal = rep.cal[static_cast<std::size_t>(i)];
            c.hofer = hofer_norm_bound(fi[static_cast<std::size_t>(i)]);
            c.step2 = c.cd <= 2.0 * c.d * c.hofer;
        } catch (...) {
#pragma omp critical(echlab_infinite_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    rep.sup_ratio.assign(static_cast<std::size_t>(imax), -std::numeric_limits<double>::infinity());
    for (int idx = 0; idx < total; ++idx) {
        TwistCell& c = rep.cells[static_cast<std::size_t>(idx)];
        if (idx + nd < total) c.chain = c.cd <= rep.cells[static_cast<std::size_t>(idx + nd)].cd;
        rep.chain_ok = rep.chain_ok && c.chain;
        rep.step2_ok = rep.step2_ok && c.step2;
        auto& s = rep.sup_ratio[static_cast<std::size_t>(c.i - 1)];
        s = std::max(s, c.ratio);
    }
    return rep;
}

}  // namespace echlab
