#include "echlab/ellipsoid.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <queue>

namespace echlab {

namespace {
constexpr long double kPi = boost::math::constants::pi<long double>();
constexpr long double kTwoPi = 2 * kPi;

std::string lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}
}  // namespace

RealSpec parse_real(const std::string& raw) {
    RealSpec r;
    r.text = raw;
    std::string s = lower(raw);
    s.erase(std::remove(s.begin(), s.end(), ' '), s.end());
    if (s == "pi") {
        r.value = kPi;
        return r;
    }
    if (s == "e") {
        r.value = boost::math::constants::e<long double>();
        return r;
    }
    if (s == "golden" || s == "phi") {
        r.value = boost::math::constants::phi<long double>();
        return r;
    }
    if (s.rfind("sqrt", 0) == 0) {
        std::string arg = s.substr(4);
        if (!arg.empty() && arg.front() == '(' && arg.back() == ')') arg = arg.substr(1, arg.size() - 2);
        Q q = parse_q(arg);
        if (q < Q(0)) throw std::invalid_argument("sqrt of negative: " + raw);
        long double v = static_cast<long double>(q.numerator()) / q.denominator();
        r.value = std::sqrt(v);
        // Perfect squares stay exact.
        auto sn = static_cast<std::int64_t>(std::llround(std::sqrt(static_cast<long double>(q.numerator()))));
        auto sd = static_cast<std::int64_t>(std::llround(std::sqrt(static_cast<long double>(q.denominator()))));
        if (sn * sn == q.numerator() && sd * sd == q.denominator()) r.exact = Q(sn, sd);
        return r;
    }
    Q q = parse_q(s);
    r.exact = q;
    r.value = static_cast<long double>(q.numerator()) / q.denominator();
    return r;
}

namespace {

// Continued-fraction search for p/q with q <= qmax within tol of x.
bool near_rational(long double x, std::int64_t qmax, long double tol, std::int64_t& p, std::int64_t& q) {
    long double y = x;
    std::int64_t h0 = 1, h1 = 0, k0 = 0, k1 = 1;  // convergents h/k
    for (int it = 0; it < 64; ++it) {
        long double fl = std::floor(y);
        auto a = static_cast<std::int64_t>(fl);
        std::int64_t h2 = a * h0 + h1, k2 = a * k0 + k1;
        if (k2 > qmax) break;
        h1 = h0;
        h0 = h2;
        k1 = k0;
        k0 = k2;
        if (std::fabs(x - static_cast<long double>(h0) / k0) <= tol * std::max(1.0L, std::fabs(x))) {
            p = h0;
            q = k0;
            return true;
        }
        long double fr = y - fl;
        if (fr < 1e-30L) break;
        y = 1 / fr;
    }
    return false;
}

}  // namespace

Ellipsoid make_ellipsoid(const RealSpec& a, const RealSpec& b) {
    if (!(a.value > 0) || !(b.value > 0)) throw std::invalid_argument("ellipsoid needs a, b > 0");
    Ellipsoid e;
    e.a = a.value;
    e.b = b.value;
    if (a.exact && b.exact) {
        Q r = *a.exact / *b.exact;
        e.rational = true;
        e.p = r.numerator();
        e.q = r.denominator();
    } else {
        std::int64_t p = 0, q = 0;
        if (near_rational(e.a / e.b, 10'000, 1e-12L, p, q)) {
            e.rational = true;
            e.p = p;
            e.q = q;
        }
    }
    return e;
}

Ellipsoid make_ellipsoid(long double a, long double b) {
    RealSpec ra, rb;
    ra.value = a;
    rb.value = b;
    return make_ellipsoid(ra, rb);
}

long double wrap_angle(long double x) {
    long double r = std::fmod(x, kTwoPi);
    if (r < 0) r += kTwoPi;
    if (r >= kTwoPi) r -= kTwoPi;
    return r;
}

long double angle_distance(long double x, long double y) {
    long double d = wrap_angle(x - y);
    return std::min(d, kTwoPi - d);
}

FlowState reeb_flow(const Ellipsoid& e, const FlowState& s, long double t) {
    FlowState r = s;
    r.theta1 = wrap_angle(s.theta1 + kTwoPi * t / e.a);
    r.theta2 = wrap_angle(s.theta2 + kTwoPi * t / e.b);
    return r;
}

std::vector<CensusEntry> simple_orbit_census(const Ellipsoid& e, long double L) {
    if (!(L > 0)) throw std::invalid_argument("census needs L > 0");
    std::vector<CensusEntry> out;
    auto rot = [&](bool first) {
        if (e.rational) return first ? Rotation::exact(e.p, e.q) : Rotation::exact(e.q, e.p);
        return Rotation::real(first ? e.a / e.b : e.b / e.a);
    };
    if (e.a <= L) out.push_back({"gamma1", e.a, rot(true), false, 0});
    if (e.b <= L) out.push_back({"gamma2", e.b, rot(false), false, 0});
    if (e.rational) {
        long double T = static_cast<long double>(e.q) * e.a;
        for (int m = 1; m * T <= L * (1 + 1e-15L); ++m) out.push_back({"torus", m * T, rot(true), true, m});
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const CensusEntry& x, const CensusEntry& y) { return x.action < y.action; });
    return out;
}

namespace {

struct Node {
    long double v;
    std::int64_t m, n;
    bool operator>(const Node& o) const {
        if (v != o.v) return v > o.v;
        return m < o.m;
    }
};

template <class Stop>
std::vector<SpectrumEntry> enumerate(const Ellipsoid& e, const SpectrumOptions& opt, Stop stop) {
    if (e.rational && !opt.formal)
        throw std::invalid_argument("a/b is rational; the formal lattice spectrum must be requested");
    std::priority_queue<Node, std::vector<Node>, std::greater<>> heap;
    heap.push({0, 0, 0});
    std::vector<SpectrumEntry> out;
    while (!heap.empty()) {
        Node t = heap.top();
        if (stop(out.size(), t.v)) break;
        heap.pop();
        if (out.size() >= opt.cap)
            throw ResourceError("spectrum entry count exceeds cap " + std::to_string(opt.cap));
        auto k = static_cast<std::int64_t>(out.size());
        out.push_back({k, t.v, 2 * k, t.m, t.n});
        heap.push({(t.m + 1) * e.a + t.n * e.b, t.m + 1, t.n});
        if (t.m == 0) heap.push({(t.n + 1) * e.b, 0, t.n + 1});
    }
    return out;
}

}  // namespace

std::vector<SpectrumEntry> action_spectrum(const Ellipsoid& e, long double L, const SpectrumOptions& opt) {
    long double bound = L * (1 + 64 * std::numeric_limits<long double>::epsilon());
    return enumerate(e, opt, [&](std::size_t, long double v) { return v > bound; });
}

std::vector<SpectrumEntry> spectrum_prefix(const Ellipsoid& e, std::size_t count, const SpectrumOptions& opt) {
    if (count > opt.cap) throw ResourceError("spectrum entry count exceeds cap " + std::to_string(opt.cap));
    return enumerate(e, opt, [&](std::size_t sz, long double) { return sz >= count; });
}

SpectrumEntry spectral_invariant(const Ellipsoid& e, std::int64_t k, const SpectrumOptions& opt) {
    if (k < 0) throw std::invalid_argument("k must be >= 0");
    return spectrum_prefix(e, static_cast<std::size_t>(k) + 1, opt).back();
}

long double volume(const Ellipsoid& e) { return e.a * e.b; }

long double volume_numeric(const Ellipsoid& e, int nodes) {
    using std::cos;
    using std::sin;
    using std::sqrt;
    const double a = static_cast<double>(e.a), b = static_cast<double>(e.b);
    const double pi = boost::math::constants::pi<double>();
    // Point and tangent frame of (mu, t1, t2) -> (x1, y1, x2, y2).
    auto integrand = [&](double mu, double t1, double t2) {
        double r1 = sqrt(a * mu / pi), r2 = sqrt(b * (1 - mu) / pi);
        double dr1 = a / (2 * pi * r1), dr2 = -b / (2 * pi * r2);
        std::array<double, 4> P{r1 * cos(t1), r1 * sin(t1), r2 * cos(t2), r2 * sin(t2)};
        std::array<double, 4> U{dr1 * cos(t1), dr1 * sin(t1), dr2 * cos(t2), dr2 * sin(t2)};
        std::array<double, 4> V{-r1 * sin(t1), r1 * cos(t1), 0, 0};
        std::array<double, 4> W{0, 0, -r2 * sin(t2), r2 * cos(t2)};
        auto lam = [&](const std::array<double, 4>& X) {
            return 0.5 * (P[0] * X[1] - P[1] * X[0] + P[2] * X[3] - P[3] * X[2]);
        };
        auto om = [](const std::array<double, 4>& X, const std::array<double, 4>& Y) {
            return X[0] * Y[1] - X[1] * Y[0] + X[2] * Y[3] - X[3] * Y[2];
        };
        return lam(U) * om(V, W) - lam(V) * om(U, W) + lam(W) * om(U, V);
    };
    auto inner = [&](double mu, double t1) {
        return boost::math::quadrature::gauss<double, 20>::integrate(
            [&](double t2) { return integrand(mu, t1, t2); }, 0.0, 2 * pi);
    };
    auto middle = [&](double mu) {
        return boost::math::quadrature::gauss<double, 20>::integrate([&](double t1) { return inner(mu, t1); },
                                                                     0.0, 2 * pi);
    };
    (void)nodes;
    double v = boost::math::quadrature::gauss<double, 20>::integrate(middle, 0.0, 1.0);
    return static_cast<long double>(v);
}

long double weyl_max_deviation_serial(const std::vector<SpectrumEntry>& spec, long double V, std::int64_t k1,
                                      std::int64_t k2) {
    if (k1 < 1 || k2 >= static_cast<std::int64_t>(spec.size())) throw std::out_of_range("weyl range");
    long double best = 0;
    for (std::int64_t k = k1; k <= k2; ++k) {
        long double c = spec[static_cast<std::size_t>(k)].c;
        best = std::max(best, std::fabs(c * c / (2.0L * k) - V));
    }
    return best;
}

long double weyl_max_deviation_parallel(const std::vector<SpectrumEntry>& spec, long double V, std::int64_t k1,
                                        std::int64_t k2) {
    if (k1 < 1 || k2 >= static_cast<std::int64_t>(spec.size())) throw std::out_of_range("weyl range");
    long double best = 0;
#pragma omp parallel for reduction(max : best) schedule(static)
    for (std::int64_t k = k1; k <= k2; ++k) {
        long double c = spec[static_cast<std::size_t>(k)].c;
        long double d = std::fabs(c * c / (2.0L * k) - V);
        if (d > best) best = d;
    }
    return best;
}

WeylTable weyl_table(const Ellipsoid& e, std::int64_t kmax, const SpectrumOptions& opt) {
    if (kmax < 1) throw std::invalid_argument("kmax must be >= 1");
    return weyl_table(e, spectrum_prefix(e, static_cast<std::size_t>(kmax) + 1, opt), kmax);
}

WeylTable weyl_table(const Ellipsoid& e, const std::vector<SpectrumEntry>& spec, std::int64_t kmax) {
    if (kmax < 1) throw std::invalid_argument("kmax must be >= 1");
    if (static_cast<std::int64_t>(spec.size()) <= kmax) throw std::out_of_range("spectrum shorter than kmax");
    WeylTable t;
    t.volume = volume(e);
    std::vector<std::int64_t> ks;
    for (std::int64_t dec = 1; dec <= kmax; dec *= 10)
        for (std::int64_t f : {1, 2, 5})
            if (dec * f <= kmax) ks.push_back(dec * f);
    if (ks.empty() || ks.back() != kmax) ks.push_back(kmax);
    for (auto k : ks) {
        long double c = spec[static_cast<std::size_t>(k)].c;
        long double ratio = c * c / (2.0L * k);
        t.rows.push_back({k, c, ratio, std::fabs(ratio - t.volume)});
    }
    t.final_decade_max = weyl_max_deviation_parallel(spec, t.volume, std::max<std::int64_t>(1, kmax / 10), kmax);
    return t;
}

ReturnResult gss_return_map(const Ellipsoid& e, const SectionPoint& p) {
    if (!(p.radius >= 0) || p.radius > 1) throw std::invalid_argument("radius fraction must lie in [0, 1]");
    if (p.radius >= 1) throw std::invalid_argument("point on binding orbit");
    FlowState s{0, wrap_angle(p.angle), 1 - p.radius * p.radius};
    // theta1 returns to 0 first at t = a.
    FlowState r = reeb_flow(e, s, e.a);
    return {{std::sqrt(1 - r.mu), r.theta2}, e.a};
}

PeriodsReport product_of_periods_check(const Ellipsoid& e) {
    if (e.rational) throw std::invalid_argument("not a two-orbit flow");
    PeriodsReport r;
    r.product = e.a * e.b;
    r.volume = volume_numeric(e);
    r.difference = r.product - r.volume;
    r.relative = std::fabs(r.difference) / r.volume;
    return r;
}

}  // namespace echlab
