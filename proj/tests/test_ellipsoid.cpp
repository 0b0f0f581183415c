#include "doctest.h"

#include "echlab/cache.hpp"
#include "echlab/ellipsoid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include <unistd.h>

using namespace echlab;

namespace {

const long double kTwoPi = 2 * std::numbers::pi_v<long double>;
const long double kSqrt2 = std::sqrt(2.0L);

// Every m a + n b <= L from a full grid, sorted.
std::vector<long double> grid_values(long double a, long double b, long double L) {
    std::vector<long double> v;
    for (std::int64_t m = 0; m * a <= L; ++m)
        for (std::int64_t n = 0; m * a + n * b <= L; ++n) v.push_back(m * a + n * b);
    std::sort(v.begin(), v.end());
    return v;
}

// Smallest v with (v+1)(v+2)/2 >= k+1.
std::int64_t triangular_oracle(std::int64_t k) {
    std::int64_t v = 0;
    while ((v + 1) * (v + 2) / 2 < k + 1) ++v;
    return v;
}

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag) {
        path = std::filesystem::temp_directory_path() / ("echlab-test-" + tag + "-" + std::to_string(::getpid()));
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("parse_real forms") {
    CHECK(*parse_real("3/2").exact == Q(3, 2));
    CHECK_FALSE(parse_real("sqrt2").exact.has_value());
    CHECK(parse_real("sqrt2").value == doctest::Approx(1.4142135623730951));
    CHECK(*parse_real("sqrt(9/4)").exact == Q(3, 2));
    CHECK(parse_real("pi").value == doctest::Approx(3.141592653589793));
    CHECK(parse_real("golden").value == doctest::Approx(1.618033988749895));
    CHECK_THROWS(parse_real("sqrt(-2)"));
}

TEST_CASE("rationality detection") {
    CHECK_FALSE(make_ellipsoid(parse_real("1"), parse_real("sqrt2")).rational);
    Ellipsoid r = make_ellipsoid(parse_real("2"), parse_real("3"));
    CHECK(r.rational);
    CHECK(r.p == 2);
    CHECK(r.q == 3);
    Ellipsoid f = make_ellipsoid(0.75L, 0.5L);
    CHECK(f.rational);
    CHECK(f.p == 3);
    CHECK(f.q == 2);
    CHECK_FALSE(make_ellipsoid(1.0L, 1.0L / kSqrt2).rational);
    CHECK_FALSE(make_ellipsoid(3.0L, std::numbers::pi_v<long double>).rational);
    CHECK_THROWS(make_ellipsoid(0.0L, 1.0L));
}

TEST_CASE("reeb flow examples and group law") {
    Ellipsoid e = make_ellipsoid(parse_real("1"), parse_real("sqrt2"));
    FlowState s{0.3L, 1.1L, 0.4L};
    FlowState z = reeb_flow(e, s, 0);
    CHECK(z.theta1 == doctest::Approx(0.3));
    CHECK(z.theta2 == doctest::Approx(1.1));
    FlowState ta = reeb_flow(e, s, e.a);
    CHECK(static_cast<double>(angle_distance(ta.theta1, s.theta1)) < 1e-15);
    CHECK(static_cast<double>(angle_distance(ta.theta2, s.theta2 + kTwoPi * e.a / e.b)) < 1e-15);
    CHECK(ta.mu == s.mu);

    Ellipsoid one = make_ellipsoid(1.0L, 1.0L);
    FlowState id = reeb_flow(one, s, 1);
    CHECK(static_cast<double>(angle_distance(id.theta1, s.theta1)) < 1e-15);
    CHECK(static_cast<double>(angle_distance(id.theta2, s.theta2)) < 1e-15);

    std::mt19937_64 rng(4);
    std::uniform_real_distribution<long double> u(0, 50);
    for (int i = 0; i < 200; ++i) {
        long double t1 = u(rng), t2 = u(rng);
        FlowState a = reeb_flow(e, s, t1 + t2);
        FlowState b = reeb_flow(e, reeb_flow(e, s, t1), t2);
        REQUIRE(static_cast<double>(angle_distance(a.theta1, b.theta1)) < 1e-12);
        REQUIRE(static_cast<double>(angle_distance(a.theta2, b.theta2)) < 1e-12);
    }
}

TEST_CASE("census examples") {
    Ellipsoid e = make_ellipsoid(parse_real("1"), parse_real("sqrt2"));
    auto c = simple_orbit_census(e, 10);
    REQUIRE(c.size() == 2);
    CHECK(c[0].name == "gamma1");
    CHECK(c[0].action == doctest::Approx(1));
    CHECK(c[1].action == doctest::Approx(1.4142135623730951));
    CHECK(c[0].theta.value() == doctest::Approx(1 / 1.4142135623730951));

    CHECK(simple_orbit_census(make_ellipsoid(1.0L, 1.0L), 0.5L).empty());

    auto r = simple_orbit_census(make_ellipsoid(parse_real("1"), parse_real("2")), 4);
    std::vector<long double> fam;
    for (const auto& x : r)
        if (x.family) fam.push_back(x.action);
    CHECK(r.size() == 4);
    CHECK(fam == std::vector<long double>{2, 4});
}

TEST_CASE("census is stable in L") {
    Ellipsoid e = make_ellipsoid(parse_real("2"), parse_real("3"));
    std::size_t prev = 0;
    for (long double L : {1.0L, 3.0L, 6.0L, 12.0L, 40.0L}) {
        auto c = simple_orbit_census(e, L);
        CHECK(c.size() >= prev);
        prev = c.size();
    }
}

TEST_CASE("spectrum examples") {
    Ellipsoid e = make_ellipsoid(parse_real("1"), parse_real("sqrt2"));
    auto s = spectrum_prefix(e, 5);
    std::vector<long double> want{0, 1, kSqrt2, 2, 1 + kSqrt2};
    for (int k = 0; k < 5; ++k) CHECK(static_cast<double>(s[k].c) == doctest::Approx(static_cast<double>(want[k])));
    CHECK(s[0].m == 0);
    CHECK(s[0].n == 0);
    CHECK(spectral_invariant(e, 3).c == doctest::Approx(2));
    CHECK(spectral_invariant(e, 0).c == 0);

    Ellipsoid f = make_ellipsoid(parse_real("1"), parse_real("4"));
    CHECK_THROWS(action_spectrum(f, 4));
    SpectrumOptions formal;
    formal.formal = true;
    auto t = action_spectrum(f, 4, formal);
    std::vector<long double> got;
    for (const auto& x : t) got.push_back(x.c);
    CHECK(got == std::vector<long double>{0, 1, 2, 3, 4, 4});
}

TEST_CASE("heap enumeration matches the grid oracle") {
    for (auto [a, b] : {std::pair{"1", "sqrt2"}, {"golden", "1"}, {"3", "pi"}, {"sqrt3", "sqrt5"}}) {
        Ellipsoid e = make_ellipsoid(parse_real(a), parse_real(b));
        long double L = 40;
        auto s = action_spectrum(e, L);
        auto g = grid_values(e.a, e.b, L);
        REQUIRE(s.size() == g.size());
        for (std::size_t k = 0; k < g.size(); ++k) {
            REQUIRE(s[k].k == static_cast<std::int64_t>(k));
            REQUIRE(s[k].grading == 2 * static_cast<std::int64_t>(k));
            REQUIRE(s[k].c == g[k]);
            REQUIRE(s[k].c == s[k].m * e.a + s[k].n * e.b);
        }
    }
}

TEST_CASE("formal a = b = 1 follows triangular numbers") {
    SpectrumOptions formal;
    formal.formal = true;
    Ellipsoid e = make_ellipsoid(1.0L, 1.0L);
    auto s = spectrum_prefix(e, 5000, formal);
    for (std::int64_t k = 0; k < 5000; ++k) REQUIRE(s[k].c == triangular_oracle(k));
    WeylTable w = weyl_table(e, 100000, formal);
    CHECK(static_cast<double>(w.rows.back().ratio) == doctest::Approx(1).epsilon(0.01));
}

TEST_CASE("spectrum monotone in k, a and b; scaling law") {
    Ellipsoid e = make_ellipsoid(parse_real("1"), parse_real("sqrt2"));
    Ellipsoid ea = make_ellipsoid(1.1L, kSqrt2);
    Ellipsoid eb = make_ellipsoid(1.0L, std::sqrt(2.2L));
    auto s = spectrum_prefix(e, 2000), sa = spectrum_prefix(ea, 2000), sb = spectrum_prefix(eb, 2000);
    for (std::size_t k = 1; k < s.size(); ++k) {
        REQUIRE(s[k].c >= s[k - 1].c);
        REQUIRE(sa[k].c >= s[k].c);
        REQUIRE(sb[k].c >= s[k].c);
    }
    const long double sc = 2.5L;
    Ellipsoid es = make_ellipsoid(sc * e.a, sc * e.b);
    auto ss = spectrum_prefix(es, 2000);
    for (std::size_t k = 0; k < s.size(); ++k) {
        REQUIRE(static_cast<double>(ss[k].c) == doctest::Approx(static_cast<double>(sc * s[k].c)).epsilon(1e-15));
        REQUIRE(ss[k].grading == s[k].grading);
    }
    WeylTable w = weyl_table(e, 10000), ws = weyl_table(es, 10000);
    CHECK(static_cast<double>(ws.volume) == doctest::Approx(static_cast<double>(sc * sc * w.volume)));
    CHECK(static_cast<double>(ws.rows.back().ratio) ==
          doctest::Approx(static_cast<double>(sc * sc * w.rows.back().ratio)));
}

TEST_CASE("spectrum cap") {
    Ellipsoid e = make_ellipsoid(parse_real("1"), parse_real("sqrt2"));
    SpectrumOptions small;
    small.cap = 100;
    CHECK_THROWS_AS(action_spectrum(e, 1000, small), ResourceError);
    CHECK_THROWS_AS(spectrum_prefix(e, 101, small), ResourceError);
}

TEST_CASE("volume closed form and numeric") {
    for (auto [a, b] : {std::pair{"1", "1"}, {"1", "sqrt2"}, {"2", "3"}, {"golden", "pi"}}) {
        Ellipsoid e = make_ellipsoid(parse_real(a), parse_real(b));
        CHECK(volume(e) == e.a * e.b);
        CHECK(std::fabs(static_cast<double>(volume_numeric(e) / volume(e) - 1)) <= 1e-6);
    }
}

TEST_CASE("weyl at k = 1e5 for (1, sqrt2)") {
    Ellipsoid e = make_ellipsoid(parse_real("1"), parse_real("sqrt2"));
    WeylTable w = weyl_table(e, 100000);
    REQUIRE(!w.rows.empty());
    CHECK(w.rows.front().k == 1);
    CHECK(w.rows.front().c == std::min(e.a, e.b));
    CHECK(w.rows.back().k == 100000);
    CHECK(static_cast<double>(w.rows.back().deviation) <= 0.02 * std::sqrt(2.0));

    auto spec = spectrum_prefix(e, 200001);
    long double prev = INFINITY;
    for (std::int64_t K : {1000, 10000, 100000}) {
        long double dev = weyl_max_deviation_serial(spec, volume(e), K, 2 * K);
        CHECK(dev < prev);
        prev = dev;
    }
}

TEST_CASE("weyl window kernels agree") {
    Ellipsoid e = make_ellipsoid(parse_real("golden"), parse_real("1"));
    auto spec = spectrum_prefix(e, 50001);
    for (auto [k1, k2] : {std::pair<std::int64_t, std::int64_t>{1, 50000}, {100, 200}, {25000, 50000}})
        CHECK(weyl_max_deviation_serial(spec, volume(e), k1, k2) == weyl_max_deviation_parallel(spec, volume(e), k1, k2));
}

TEST_CASE("return map") {
    Ellipsoid one = make_ellipsoid(1.0L, 1.0L);
    ReturnResult r = gss_return_map(one, {0.3L, 2.0L});
    CHECK(r.time == 1);
    CHECK(static_cast<double>(angle_distance(r.image.angle, 2.0L)) < 1e-15);
    CHECK(static_cast<double>(r.image.radius) == doctest::Approx(0.3));

    Ellipsoid half = make_ellipsoid(parse_real("1"), parse_real("2"));
    r = gss_return_map(half, {0.5L, 0.25L});
    CHECK(static_cast<double>(angle_distance(r.image.angle, 0.25L + std::numbers::pi_v<long double>)) < 1e-15);

    Ellipsoid e = make_ellipsoid(parse_real("1"), parse_real("sqrt2"));
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<long double> ur(0, 0.999L), ua(0, kTwoPi);
    for (int i = 0; i < 100; ++i) {
        SectionPoint p{ur(rng), ua(rng)};
        ReturnResult x = gss_return_map(e, p);
        REQUIRE(x.time == e.a);
        REQUIRE(static_cast<double>(angle_distance(x.image.angle, p.angle + kTwoPi / kSqrt2)) <= 1e-9);
        REQUIRE(static_cast<double>(std::fabs(x.image.radius - p.radius)) <= 1e-9);
    }
    CHECK_THROWS(gss_return_map(e, {1.0L, 0.0L}));
}

TEST_CASE("return map iterates: rotation by 2 pi q a / b, rational points periodic") {
    Ellipsoid e = make_ellipsoid(parse_real("1"), parse_real("sqrt2"));
    SectionPoint p{0.4L, 0.7L};
    SectionPoint cur = p;
    for (int q = 1; q <= 25; ++q) {
        cur = gss_return_map(e, cur).image;
        REQUIRE(static_cast<double>(angle_distance(cur.angle, p.angle + kTwoPi * q * e.a / e.b)) <= 1e-9);
    }
    for (auto [pp, qq] : {std::pair{1, 2}, {2, 3}, {3, 5}, {4, 7}}) {
        Ellipsoid r = make_ellipsoid(static_cast<long double>(pp), static_cast<long double>(qq));
        SectionPoint x{0.25L, 1.0L};
        for (int k = 0; k < qq; ++k) x = gss_return_map(r, x).image;
        REQUIRE(static_cast<double>(angle_distance(x.angle, 1.0L)) <= 1e-12);
    }
}

TEST_CASE("product of periods") {
    for (auto [a, b] : {std::pair{"1", "sqrt2"}, {"1", "golden"}, {"3", "pi"}}) {
        PeriodsReport r = product_of_periods_check(make_ellipsoid(parse_real(a), parse_real(b)));
        CHECK(static_cast<double>(r.relative) <= 1e-6);
    }
    CHECK_THROWS(product_of_periods_check(make_ellipsoid(parse_real("1"), parse_real("2"))));
}

TEST_CASE("spectrum cache round trip") {
    TempDir dir("cache");
    Ellipsoid e = make_ellipsoid(parse_real("1"), parse_real("sqrt2"));
    auto fresh = spectrum_prefix(e, 3000);
    auto first = cached_spectrum_prefix(e, 3000, {}, dir.path);
    const auto path = spectrum_cache_path(dir.path, spectrum_cache_key(e, false));
    REQUIRE(std::filesystem::exists(path));
    CHECK(path.filename().string().rfind("spectrum-v1-", 0) == 0);
    auto second = cached_spectrum_prefix(e, 1000, {}, dir.path);
    REQUIRE(first.size() == 3000);
    REQUIRE(second.size() == 1000);
    for (std::size_t k = 0; k < 1000; ++k) {
        REQUIRE(second[k].c == fresh[k].c);
        REQUIRE(second[k].m == fresh[k].m);
        REQUIRE(second[k].grading == fresh[k].grading);
    }

    auto read = read_spectrum_file(path, e, spectrum_cache_key(e, false));
    REQUIRE(read.has_value());
    CHECK(read->size() == 3000);
    Ellipsoid other = make_ellipsoid(parse_real("1"), parse_real("sqrt3"));
    CHECK_FALSE(read_spectrum_file(path, other, spectrum_cache_key(other, false)).has_value());
}

TEST_CASE("spectrum cache rejects corrupt and stale files") {
    TempDir dir("corrupt");
    Ellipsoid e = make_ellipsoid(parse_real("1"), parse_real("sqrt2"));
    const std::string key = spectrum_cache_key(e, false);
    const auto path = spectrum_cache_path(dir.path, key);
    write_spectrum_file(path, key, false, spectrum_prefix(e, 100));
    std::string bytes;
    {
        std::ifstream is(path, std::ios::binary);
        bytes.assign(std::istreambuf_iterator<char>(is), {});
    }
    auto write = [&](const std::string& b) {
        std::ofstream os(path, std::ios::binary | std::ios::trunc);
        os << b;
    };
    std::string flipped = bytes;
    flipped[flipped.size() / 2] ^= 0x01;
    write(flipped);
    CHECK_FALSE(read_spectrum_file(path, e, key).has_value());

    write(bytes.substr(0, bytes.size() - 3));
    CHECK_FALSE(read_spectrum_file(path, e, key).has_value());

    std::string stale = bytes;
    stale[8] = 9;  // version field
    write(stale);
    CHECK_FALSE(read_spectrum_file(path, e, key).has_value());

    write(bytes + "x");
    CHECK_FALSE(read_spectrum_file(path, e, key).has_value());

    write("not a cache file");
    CHECK_FALSE(read_spectrum_file(path, e, key).has_value());
    auto healed = cached_spectrum_prefix(e, 50, {}, dir.path);
    CHECK(healed.size() == 50);
    CHECK(read_spectrum_file(path, e, key).has_value());

    write(bytes);
    CHECK(read_spectrum_file(path, e, key)->size() == 100);
}

TEST_CASE("cache directory from the environment") {
    ::setenv("ECHLAB_CACHE_DIR", "", 1);
    CHECK_FALSE(cache_dir_from_env().has_value());
    ::setenv("ECHLAB_CACHE_DIR", "/tmp/echlab-x", 1);
    CHECK(cache_dir_from_env()->string() == "/tmp/echlab-x");
    ::unsetenv("ECHLAB_CACHE_DIR");
    CHECK_FALSE(cache_dir_from_env().has_value());
}
