#include "doctest.h"

#include "echlab/rotation.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

using namespace echlab;

namespace {

// Column tops (x, floor(theta x)) for p+, column bottoms (x, ceil(theta x)) for p-.
// A column point is on the hull boundary iff no chord between two other
// columns passes strictly beyond it. O(m^3), exact integer cross products.
std::vector<int> staircase_oracle(const std::vector<std::int64_t>& y, bool upper) {
    const int m = static_cast<int>(y.size()) - 1;
    std::vector<int> on;
    for (int x = 0; x <= m; ++x) {
        bool ok = true;
        for (int i = 0; i < x && ok; ++i)
            for (int j = x + 1; j <= m && ok; ++j) {
                // sign of (P_j - P_i) x (P_x - P_i)
                std::int64_t cross = (j - i) * (y[x] - y[i]) - (y[j] - y[i]) * (x - i);
                if (upper ? cross < 0 : cross > 0) ok = false;
            }
        if (ok) on.push_back(x);
    }
    std::vector<int> parts;
    for (std::size_t k = 1; k < on.size(); ++k) parts.push_back(on[k] - on[k - 1]);
    std::sort(parts.rbegin(), parts.rend());
    return parts;
}

std::vector<int> oracle_plus(const Q& th, int m) {
    std::vector<std::int64_t> y;
    for (int x = 0; x <= m; ++x) y.push_back(floor_q(th * Q(x)));
    return staircase_oracle(y, true);
}

std::vector<int> oracle_minus(const Q& th, int m) {
    std::vector<std::int64_t> y;
    for (int x = 0; x <= m; ++x) y.push_back(ceil_q(th * Q(x)));
    return staircase_oracle(y, false);
}

std::vector<int> oracle_plus(long double th, int m) {
    std::vector<std::int64_t> y;
    for (int x = 0; x <= m; ++x) y.push_back(static_cast<std::int64_t>(std::floor(th * x)));
    return staircase_oracle(y, true);
}

std::vector<int> oracle_minus(long double th, int m) {
    std::vector<std::int64_t> y;
    for (int x = 0; x <= m; ++x) y.push_back(static_cast<std::int64_t>(std::ceil(th * x)));
    return staircase_oracle(y, false);
}

std::vector<Rotation> rational_grid(int vmax) {
    std::vector<Rotation> out;
    for (int v = 2; v <= vmax; ++v)
        for (int u = -2 * v; u <= 3 * v; ++u)
            if (std::gcd(u, v) == 1) out.push_back(Rotation::exact(u, v));
    return out;
}

std::vector<Rotation> seeded_reals(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<long double> u(-2, 3);
    std::vector<Rotation> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(Rotation::real(u(rng)));
    return out;
}

}  // namespace

TEST_CASE("rotation representation") {
    Rotation a = Rotation::exact(-1, 3);
    CHECK(a.is_exact());
    CHECK(a.frac() == doctest::Approx(2.0 / 3.0));
    CHECK(Rotation::real(-0.25L).frac() == doctest::Approx(0.75));
    CHECK(Rotation::exact(4, 2).is_integer());
    CHECK(Rotation::exact(-3, 2).is_half_integer());
    CHECK_FALSE(Rotation::real(2.0L).is_integer());
    CHECK_THROWS(Rotation::real(0.5L).q());
    CHECK(a.str() == "-1/3");
}

TEST_CASE("parse_q") {
    CHECK(parse_q("7/10") == Q(7, 10));
    CHECK(parse_q("-3") == Q(-3));
    CHECK(parse_q("0.25") == Q(1, 4));
    CHECK_THROWS(parse_q("abc"));
    CHECK_THROWS(parse_q("1/0"));
}

TEST_CASE("cz_index examples") {
    CHECK(cz_index(Rotation::exact(3, 10), 1) == 1);
    CHECK(cz_index(Rotation::exact(0, 1), 5) == 0);
    CHECK(cz_index(Rotation::exact(2, 3), 3) == 4);
    CHECK(cz_index(Rotation::exact(-1, 3), 2) == -1);
}

TEST_CASE("cz_index degenerate reals") {
    Rotation r = Rotation::real(0.5L);
    CHECK_THROWS_AS(cz_index(r, 2), DegenerateRotation);
    CzOptions opt;
    opt.allow_degenerate = true;
    CzValue v = cz_index_checked(r, 2, opt);
    CHECK(v.degenerate);
    CHECK(v.value == 2);
    CHECK(cz_index(Rotation::real(0.3L), 1) == 1);
}

TEST_CASE("partition examples") {
    CHECK(partition_positive(Rotation::exact(1, 5), 4).parts == std::vector<int>{1, 1, 1, 1});
    CHECK(partition_positive(Rotation::exact(7, 10), 2).parts == std::vector<int>{2});
    CHECK(partition_negative(Rotation::exact(0, 1), 4).parts == std::vector<int>{1, 1, 1, 1});
    CHECK(partition_negative(Rotation::exact(1, 2), 4).parts == std::vector<int>{2, 2});
    CHECK(partition_negative(Rotation::exact(1, 5), 4).parts == std::vector<int>{4});
    for (auto th : {Rotation::exact(3, 7), Rotation::real(0.61803L), Rotation::exact(-5, 2)}) {
        CHECK(partition_positive(th, 1).parts == std::vector<int>{1});
        CHECK(partition_negative(th, 1).parts == std::vector<int>{1});
    }
}

TEST_CASE("partition_properties examples") {
    PartitionReport r = partition_properties(Rotation::exact(1, 5), 4);
    CHECK(r.all());
    CHECK(r.p_plus.contains(1));
    CHECK_FALSE(r.p_minus.contains(1));

    r = partition_properties(Rotation::exact(7, 10), 2);
    CHECK(r.disjoint);
    CHECK(r.one_exclusive);
    CHECK(r.p_minus.parts == std::vector<int>{1, 1});

    Rotation s = Rotation::real(1.0L / std::sqrt(2.0L));
    r = partition_properties(s, 10);
    CHECK(r.p_plus.parts == oracle_plus(s.value(), 10));
    CHECK(r.p_minus.parts == oracle_minus(s.value(), 10));
    CHECK(r.all());
}

TEST_CASE("hull construction matches the staircase oracle on rationals") {
    for (const auto& th : rational_grid(9))
        for (int m = 1; m <= 30; ++m) {
            INFO(th.str(), " m=", m);
            REQUIRE(partition_positive(th, m).parts == oracle_plus(th.q(), m));
            REQUIRE(partition_negative(th, m).parts == oracle_minus(th.q(), m));
        }
}

TEST_CASE("hull construction matches the staircase oracle on reals") {
    for (const auto& th : seeded_reals(200, 11))
        for (int m = 1; m <= 30; ++m) {
            INFO(th.str(), " m=", m);
            REQUIRE(partition_positive(th, m).parts == oracle_plus(th.value(), m));
            REQUIRE(partition_negative(th, m).parts == oracle_minus(th.value(), m));
        }
}

TEST_CASE("parts sum to m and are sorted descending") {
    for (const auto& th : rational_grid(12))
        for (int m = 1; m <= 40; ++m)
            for (const Partition& p : {partition_positive(th, m), partition_negative(th, m)}) {
                REQUIRE(p.total == m);
                REQUIRE(std::accumulate(p.parts.begin(), p.parts.end(), 0) == m);
                REQUIRE(std::is_sorted(p.parts.rbegin(), p.parts.rend()));
            }
}

TEST_CASE("elliptic clause: all ones below 1/m") {
    for (int m = 2; m <= 30; ++m)
        for (int v = m + 1; v <= 3 * m; ++v) {
            Partition p = partition_positive(Rotation::exact(1, v), m);
            REQUIRE(p.parts == std::vector<int>(m, 1));
        }
    Partition p = partition_positive(Rotation::real(0.0099L), 50);
    CHECK(p.parts == std::vector<int>(50, 1));
}

TEST_CASE("hyperbolic clauses") {
    for (int k = -3; k <= 3; ++k)
        for (int m = 1; m <= 40; ++m) {
            Rotation z = Rotation::exact(k, 1);
            REQUIRE(partition_positive(z, m).parts == std::vector<int>(m, 1));
            REQUIRE(partition_negative(z, m).parts == std::vector<int>(m, 1));
            Rotation h = Rotation::exact(2 * k + 1, 2);
            std::vector<int> want(m / 2, 2);
            if (m % 2) want.push_back(1);
            REQUIRE(partition_positive(h, m).parts == want);
            REQUIRE(partition_negative(h, m).parts == want);
        }
}

TEST_CASE("pair properties on seeded irrationals") {
    auto reals = seeded_reals(1000, 20240601);
    GridReport g = partition_grid_serial(reals, 2, 50);
    CHECK(g.cases == 1000 * 49);
    CHECK(g.pair_failures == 0);
    CHECK(g.pair_witness == "");
}

TEST_CASE("rationals: lattice points on the line are vertices of both hulls") {
    // p/q on the line y = theta x is a common vertex, so the part q appears on both sides.
    PartitionReport r = partition_properties(Rotation::exact(1, 3), 4);
    CHECK(r.p_plus.parts == std::vector<int>{3, 1});
    CHECK(r.p_minus.parts == std::vector<int>{3, 1});
    CHECK_FALSE(r.disjoint);
    CHECK(r.shared_part == 3);

    // Slightly off the rational all three properties hold again.
    for (int v = 3; v <= 12; ++v)
        for (int u = 1; u < v; ++u) {
            if (std::gcd(u, v) != 1) continue;
            for (Q eps : {Q(1, 100000 * v), Q(-1, 100000 * v)}) {
                Rotation th = Rotation::exact(Q(u, v) + eps);
                for (int m = 2; m <= 50; ++m) REQUIRE(partition_properties(th, m).all());
            }
        }
}

TEST_CASE("cz parity and length bound") {
    auto thetas = rational_grid(12);
    auto reals = seeded_reals(1000, 5);
    thetas.insert(thetas.end(), reals.begin(), reals.end());
    for (int k = -3; k <= 3; ++k) thetas.push_back(Rotation::exact(k, 1));
    GridReport g = partition_grid_serial(thetas, 1, 50);
    CHECK(g.cz_failures == 0);
    // Independent spot check against the defining formula.
    for (const auto& th : rational_grid(7))
        for (int m = 1; m <= 20; ++m) {
            Q x = th.q() * Q(m);
            REQUIRE(cz_index(th, m) == floor_q(x) + ceil_q(x));
        }
}

TEST_CASE("grid kernels agree") {
    auto thetas = rational_grid(8);
    auto reals = seeded_reals(300, 9);
    thetas.insert(thetas.end(), reals.begin(), reals.end());
    GridReport a = partition_grid_serial(thetas, 2, 30);
    GridReport b = partition_grid_parallel(thetas, 2, 30);
    CHECK(a.cases == b.cases);
    CHECK(a.pair_failures == b.pair_failures);
    CHECK(a.disjoint_failures == b.disjoint_failures);
    CHECK(a.one_failures == b.one_failures);
    CHECK(a.count_failures == b.count_failures);
    CHECK(a.cz_failures == b.cz_failures);
    CHECK(a.pair_witness == b.pair_witness);
}
