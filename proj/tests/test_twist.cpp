#include "doctest.h"

#include "echlab/twist.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>

using namespace echlab;

namespace {

const double kPi = std::numbers::pi;

TwistProfile samples_profile() { return TwistProfile::samples({0, 0.3, 0.6, 0.9, 1}, {5.0, 3.1, 1.3, 0, 0}); }

std::vector<TwistProfile> sample_profiles() {
    return {TwistProfile::named("lin:1"), TwistProfile::named("quad:0.7"), TwistProfile::named("lin:1.5"),
            samples_profile(), truncate_profile(TwistProfile::named("inv-cube-compact"), 3)};
}

double quad(const TwistProfile& f, double a, double b) {
    using boost::math::quadrature::gauss_kronrod;
    return gauss_kronrod<double, 61>::integrate([&](double s) { return s * f(s); }, a, b, 12, 1e-14);
}

// Dense GF(2) rank.
int gf2_rank(std::vector<std::vector<std::uint64_t>> rows, std::size_t ncols) {
    int rank = 0;
    const std::size_t words = (ncols + 63) / 64;
    for (std::size_t col = 0; col < ncols; ++col) {
        std::size_t w = col / 64;
        std::uint64_t bit = std::uint64_t{1} << (col % 64);
        auto piv = std::find_if(rows.begin() + rank, rows.end(), [&](const auto& r) { return r[w] & bit; });
        if (piv == rows.end()) continue;
        std::iter_swap(rows.begin() + rank, piv);
        for (std::size_t i = 0; i < rows.size(); ++i)
            if (i != static_cast<std::size_t>(rank) && (rows[i][w] & bit))
                for (std::size_t k = 0; k < words; ++k) rows[i][k] ^= rows[rank][k];
        ++rank;
    }
    return rank;
}

// Rank of the boundary map from grading g to g - 1.
int boundary_rank(const FilteredComplex& c, int g) {
    std::vector<int> src, dst(c.generators.size(), -1);
    int ndst = 0;
    for (std::size_t i = 0; i < c.generators.size(); ++i) {
        if (c.generators[i].grading == g) src.push_back(static_cast<int>(i));
        if (c.generators[i].grading == g - 1) dst[i] = ndst++;
    }
    std::vector<std::vector<std::uint64_t>> rows;
    for (int j : src) {
        std::vector<std::uint64_t> r((ndst + 63) / 64 + 1, 0);
        for (int i : c.boundary[j])
            if (dst[i] >= 0) r[dst[i] / 64] ^= std::uint64_t{1} << (dst[i] % 64);
        rows.push_back(r);
    }
    return gf2_rank(rows, static_cast<std::size_t>(ndst));
}

}  // namespace

TEST_CASE("hamiltonian profile examples") {
    HamiltonianProfile z = hamiltonian_profile(TwistProfile::named("zero"));
    CHECK(z(0) == 0);
    CHECK(z(0.5) == 0);
    HamiltonianProfile c = hamiltonian_profile(TwistProfile::named("const:2"));
    for (double r : {0.0, 0.3, 0.7, 1.0}) CHECK(c(r) == doctest::Approx(2 * (1 - r * r) / 2));
    HamiltonianProfile inv = hamiltonian_profile(TwistProfile::named("inv-cube"));
    CHECK(inv.infinite_at_zero());
    CHECK(std::isinf(inv(0)));
    for (double r : {0.1, 0.5, 0.9}) CHECK(inv(r) == doctest::Approx(1 / r - 1));
}

TEST_CASE("hamiltonian matches quadrature on piecewise profiles") {
    for (const auto& f : sample_profiles()) {
        HamiltonianProfile H = hamiltonian_profile(f);
        for (double r : {0.05, 0.25, 0.5, 0.75, 0.95}) CHECK(H(r) == doctest::Approx(quad(f, r, 1)).epsilon(1e-10));
    }
}

TEST_CASE("calabi examples") {
    CHECK(calabi(TwistProfile::named("zero")).value == 0);
    CHECK(calabi(TwistProfile::named("const:1.5")).value == doctest::Approx(0.5));
    CalabiValue inf = calabi(TwistProfile::named("inv-cube"));
    CHECK(inf.infinite);
    CHECK(std::isinf(inf.value));
}

TEST_CASE("fubini self-check and additivity") {
    auto ps = sample_profiles();
    for (const auto& f : ps) {
        CalabiValue v = calabi(f);
        CHECK(v.fubini_ok);
        CHECK(v.rel_diff <= 1e-9);
    }
    for (std::size_t i = 0; i < ps.size(); ++i)
        for (std::size_t j = i; j < ps.size(); ++j) {
            TwistProfile s = add_profiles(ps[i], ps[j]);
            CHECK(calabi(s).value == doctest::Approx(calabi(ps[i]).value + calabi(ps[j]).value).epsilon(1e-12));
        }
    CHECK(calabi(scale_profile(ps[0], 3)).value == doctest::Approx(3 * calabi(ps[0]).value));
}

TEST_CASE("hofer bound examples") {
    CHECK(hofer_norm_bound(TwistProfile::named("zero")) == 0);
    CHECK(hofer_norm_bound(TwistProfile::named("const:3")) == doctest::Approx(1.5));
    CHECK(std::isinf(hofer_norm_bound(TwistProfile::named("inv-cube"))));
    auto f = TwistProfile::named("lin:1");
    CHECK(hofer_distance(f, f) == 0);
    CHECK(hofer_distance(TwistProfile::named("zero"), f) == doctest::Approx(hofer_norm_bound(f)).epsilon(1e-9));
}

TEST_CASE("monotonicity is certified at construction") {
    CHECK_THROWS_AS(TwistProfile::samples({0, 0.5, 1}, {1, 2, 0}), ProfileError);
    CHECK_THROWS_AS(TwistProfile::samples({0, 0.5, 1}, {1, -1, -2}), ProfileError);
    CHECK_THROWS_AS(TwistProfile::named("spiral"), ProfileError);
}

TEST_CASE("profile JSON round trip") {
    auto f = TwistProfile::named("quad:0.7");
    auto g = TwistProfile::from_json(f.to_json());
    for (double r : {0.0, 0.2, 0.55, 0.9, 1.0}) CHECK(g(r) == f(r));
    auto s = TwistProfile::from_json(
        {{"kind", "samples"}, {"units", "turns"}, {"r", {0, 0.5, 1}}, {"f", {1, 0.25, 0}}});
    CHECK(s(0) == doctest::Approx(2 * kPi));
    CHECK(s(0.75) == doctest::Approx(2 * kPi * 0.125));
}

TEST_CASE("periodic census") {
    CHECK(periodic_census(TwistProfile::named("zero"), 5).empty());

    auto f = TwistProfile::named("lin:1.5");
    auto c = periodic_census(f, 2);
    std::vector<std::pair<std::int64_t, std::int64_t>> got;
    for (const auto& x : c) got.push_back({x.p, x.q});
    std::sort(got.begin(), got.end());
    CHECK(got == std::vector<std::pair<std::int64_t, std::int64_t>>{{1, 1}, {1, 2}, {3, 2}});
    for (const auto& x : c) {
        // f(r) = 2 pi C (1 - r / 0.9)
        double r = 0.9 * (1 - static_cast<double>(x.p) / (x.q * 1.5));
        CHECK(x.r == doctest::Approx(r).epsilon(1e-11));
        CHECK(std::gcd(x.p, x.q) == 1);
    }

    for (const auto& x : periodic_census(TwistProfile::named("lin:2.5"), 1)) CHECK(x.q == 1);
    CHECK(periodic_census(TwistProfile::named("lin:2.5"), 1).size() == 2);
}

TEST_CASE("plateaus at rational levels are rejected") {
    TwistProfile f({ProfilePiece{0, 0.5, {{0, kPi}}}, ProfilePiece{0.5, 0.9, {{0, kPi / 0.4 * 0.9}, {1, -kPi / 0.4}}},
                    ProfilePiece{0.9, 1, {}}});
    CHECK_NOTHROW(reject_rational_plateaus(f, 1));
    try {
        reject_rational_plateaus(f, 2);
        FAIL("expected PlateauError");
    } catch (const PlateauError& e) {
        CHECK(e.from == 0);
        CHECK(e.to == 0.5);
    }
    CHECK_THROWS_AS(periodic_census(f, 2), PlateauError);
}

TEST_CASE("truncation") {
    auto f = TwistProfile::named("inv-cube");
    for (int i = 1; i <= 10; ++i) {
        auto fi = truncate_profile(f, i), fj = truncate_profile(f, i + 1);
        for (double r : {0.01, 0.05, 0.1, 0.3, 0.7, 1.0}) {
            REQUIRE(fi(r) <= fj(r));
            REQUIRE(fj(r) <= f(r));
        }
        // Cal = int_0^{1/i} s^2 i^3 ds + int_{1/i}^1 s^-1 ds
        CHECK(calabi(fi).value == doctest::Approx(std::log(i) + 1.0 / 3).epsilon(1e-10));
    }
    auto g = TwistProfile::named("inv-cube-compact");
    for (int i = 2; i <= 20; ++i) CHECK(calabi(truncate_profile(g, i)).value == doctest::Approx(std::log(0.9 * i)).epsilon(1e-10));

    TwistProfile flat({ProfilePiece{0, 0.2, {{0, 5}}}, ProfilePiece{0.2, 0.9, {{0, 5 + 0.2 / 0.7 * 5}, {1, -5 / 0.7}}},
                       ProfilePiece{0.9, 1, {}}});
    auto ft = truncate_profile(flat, 6);
    for (double r : {0.01, 0.1, 0.19, 0.5, 0.95}) CHECK(ft(r) == doctest::Approx(flat(r)));
}

TEST_CASE("level action against quadrature") {
    PfhCalibration cal;
    for (const auto& f : sample_profiles())
        for (const auto& c : periodic_census(f, 4)) {
            if (c.pole) continue;
            double e = (1 - c.r * c.r) / 2;
            double want = c.q * quad(f, c.r, 1) + cal.sigma * c.p * e;
            CHECK(level_action(f, c, cal) == doctest::Approx(want).epsilon(1e-9));
        }
}

TEST_CASE("zero profile gives a single generator") {
    for (int d : {1, 3, 6}) {
        FilteredComplex c = build_complex(TwistProfile::named("zero"), d);
        CHECK(c.generators.size() == 1);
        CHECK(c.generators[0].action == 0);
        CHECK(c.boundary[0].empty());
        CHECK(check_complex(c).rank_pattern);
    }
}

TEST_CASE("complex validity against dense oracles") {
    for (const auto& f : sample_profiles())
        for (int d = 2; d <= 6; ++d) {
            INFO(f.name(), " d=", d);
            FilteredComplex c = build_complex(f, d);
            const std::size_t n = c.generators.size();
            for (std::size_t j = 0; j < n; ++j) {
                std::vector<char> sq(n, 0);
                for (int i : c.boundary[j]) {
                    REQUIRE(c.generators[i].grading == c.generators[j].grading - 1);
                    REQUIRE(c.generators[j].action - c.generators[i].action >= 1e-12);
                    for (int k : c.boundary[i]) sq[k] ^= 1;
                }
                if (c.generators[j].grading - 2 >= c.grading_lo)
                    REQUIRE(std::count(sq.begin(), sq.end(), 1) == 0);
            }
            ComplexCheck ch = check_complex(c);
            CHECK(ch.d_squared_zero);
            CHECK(ch.grading_drop_one);
            CHECK(ch.action_decreasing);
            for (int g = c.grading_lo + 1; g <= c.grading_hi - 1; ++g) {
                int dim = static_cast<int>(std::count_if(c.generators.begin(), c.generators.end(),
                                                         [&](const auto& x) { return x.grading == g; }));
                int h = dim - boundary_rank(c, g) - boundary_rank(c, g + 1);
                CHECK(h == ch.ranks[g]);
                CHECK(h == ((g - d) % 2 == 0 ? 1 : 0));
            }
            CHECK(ch.rank_pattern);
        }
}

TEST_CASE("generators are concave lattice paths of degree d") {
    auto f = TwistProfile::named("quad:0.7");
    for (int d = 1; d <= 6; ++d) {
        FilteredComplex c = build_complex(f, d);
        for (const auto& g : c.generators) {
            int deg = 0;
            for (std::size_t s = 0; s < g.segments.size(); ++s) {
                deg += static_cast<int>(g.segments[s].q) * g.segments[s].m;
                REQUIRE(g.segments[s].h <= 1);
                if (s > 0) {
                    const auto& a = g.segments[s - 1];
                    const auto& b = g.segments[s];
                    REQUIRE(a.p * b.q > b.p * a.q);
                }
            }
            REQUIRE(deg == d);
        }
    }
}

TEST_CASE("complex size cap") {
    PfhCalibration cal;
    cal.complex_cap = 4;
    CHECK_THROWS_AS(build_complex(TwistProfile::named("lin:1"), 5, cal), ComplexSizeError);
}

TEST_CASE("identity axiom") {
    auto z = TwistProfile::named("zero");
    for (int d : {1, 2, 5, 8, 16, 128}) CHECK(spectral_invariant_cd(z, d).value == 0);
}

TEST_CASE("lattice max agrees with reduction") {
    for (const auto& f : sample_profiles())
        for (int d = 1; d <= 7; ++d) {
            FilteredComplex c = build_complex(f, d);
            Reduction r = reduce(c);
            REQUIRE(r.essential.count(d));
            double red = *std::min_element(r.essential[d].begin(), r.essential[d].end());
            CHECK(cd_lattice_max(f, d) == doctest::Approx(red).epsilon(1e-12));
            CdResult x = spectral_invariant_cd(f, d);
            CHECK(x.method == "reduction");
            CHECK(x.value == doctest::Approx(red).epsilon(1e-12));
        }
    CHECK(spectral_invariant_cd(TwistProfile::named("lin:1"), 20).method == "lattice-max");
}

TEST_CASE("monotone on truncation chains") {
    auto g = TwistProfile::named("inv-cube-compact");
    for (int d : {1, 2, 3, 4, 16, 64}) {
        double prev = -INFINITY;
        for (int i = 1; i <= (d <= 4 ? 4 : 12); ++i) {
            double v = spectral_invariant_cd(truncate_profile(g, i), d).value;
            REQUIRE(v >= prev);
            prev = v;
        }
    }
}

TEST_CASE("monotone on ordered pairs") {
    auto f = TwistProfile::named("lin:1"), g = TwistProfile::named("lin:1.5");
    AxiomsReport rep = axioms_report(f, g, {1, 2, 4, 8, 16});
    CHECK(rep.ordered);
    CHECK(rep.monotone);
    for (const auto& r : rep.rows) CHECK(r.cf <= r.cg);
}

TEST_CASE("hofer lipschitz on sampled pairs") {
    std::vector<TwistProfile> ps = sample_profiles();
    ps.push_back(TwistProfile::named("zero"));
    ps.push_back(scale_profile(TwistProfile::named("lin:1"), 0.01));
    for (std::size_t i = 0; i < ps.size(); ++i)
        for (std::size_t j = i + 1; j < ps.size(); ++j)
            for (int d : {1, 3, 5, 32}) {
                double a = spectral_invariant_cd(ps[i], d).value, b = spectral_invariant_cd(ps[j], d).value;
                INFO(ps[i].name(), " vs ", ps[j].name(), " d=", d);
                CHECK(std::fabs(a - b) <= d * hofer_distance(ps[i], ps[j]) + 1e-9);
            }
}

TEST_CASE("c_d / d approaches the area-normalized Calabi value") {
    for (const char* name : {"lin:1", "quad:0.7"}) {
        auto f = TwistProfile::named(name);
        double target = calabi_area(f);
        double prev = INFINITY;
        for (int d : {16, 32, 64, 128}) {
            double dev = std::fabs(spectral_invariant_cd(f, d).value / d - target);
            CHECK(dev < prev);
            prev = dev;
        }
        CHECK(prev <= 0.1 * target);
    }
}

TEST_CASE("infinite twist experiment, small grid") {
    auto g = TwistProfile::named("inv-cube-compact");
    InfiniteTwistReport a = infinite_twist_experiment(g, 6, {1, 2, 4, 8}, {}, true);
    InfiniteTwistReport b = infinite_twist_experiment(g, 6, {1, 2, 4, 8}, {}, false);
    CHECK(a.cal_increasing);
    CHECK(a.chain_ok);
    CHECK(a.step2_ok);
    REQUIRE(a.cells.size() == b.cells.size());
    for (std::size_t k = 0; k < a.cells.size(); ++k) {
        CHECK(a.cells[k].cd == b.cells[k].cd);
        CHECK(a.cells[k].i == b.cells[k].i);
    }
    CHECK(a.sup_ratio == b.sup_ratio);
    for (int i = 2; i <= 6; ++i) CHECK(a.cal[i - 1] == doctest::Approx(std::log(0.9 * i)).epsilon(1e-10));
}
