#pragma once

#include <boost/rational.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace echlab {

using Q = boost::rational<std::int64_t>;

std::int64_t floor_q(const Q& x);
std::int64_t ceil_q(const Q& x);
std::string to_string(const Q& x);
// Parses "u/v", "u" or a decimal literal without exponent.
Q parse_q(const std::string& s);

// Rotation number, one full turn = 1. Exact rational or long double,
// tagged; the two never mix silently.
class Rotation {
public:
    enum class Kind { Exact, Real };

    static Rotation exact(Q q) { return Rotation(Kind::Exact, q, 0.0L); }
    static Rotation exact(std::int64_t u, std::int64_t v) { return exact(Q(u, v)); }
    static Rotation real(long double x) { return Rotation(Kind::Real, Q(0), x); }

    Kind kind() const { return kind_; }
    bool is_exact() const { return kind_ == Kind::Exact; }
    const Q& q() const;
    long double value() const;

    // {theta} in [0,1), also for negative theta.
    long double frac() const;
    bool is_integer() const;       // exact only; reals answer false
    bool is_half_integer() const;  // theta in Z + 1/2, exact only

    std::string str() const;

private:
    Rotation(Kind k, Q q, long double x) : kind_(k), q_(q), x_(x) {}
    Kind kind_;
    Q q_;
    long double x_;
};

class DegenerateRotation : public std::runtime_error {
public:
    DegenerateRotation(const std::string& what, int m)
        : std::runtime_error(what), multiplicity(m) {}
    int multiplicity;
};

struct CzOptions {
    long double tol = 1e-12L;
    bool allow_degenerate = false;
};

struct CzValue {
    int value = 0;
    bool degenerate = false;  // m*theta treated as integral within tol
};

CzValue cz_index_checked(const Rotation& theta, int m, const CzOptions& opt = {});
int cz_index(const Rotation& theta, int m, const CzOptions& opt = {});

// Multiset of positive integers, canonical form sorted descending.
struct Partition {
    std::vector<int> parts;
    int total = 0;

    bool contains(int part) const;
    std::size_t size() const { return parts.size(); }
    bool operator==(const Partition& o) const { return parts == o.parts; }
    std::string str() const;
};

Partition make_partition(std::vector<int> parts);

// Horizontal displacements of the upper hull of {0<=x<=m, 0<=y<=theta x},
// every lattice point on the boundary counted as a vertex.
Partition partition_positive(const Rotation& theta, int m, const CzOptions& opt = {});
// Lower hull of {0<=x<=m, y>=theta x} from (0,0) to (m, ceil(m theta)).
Partition partition_negative(const Rotation& theta, int m, const CzOptions& opt = {});

struct PartitionReport {
    Partition p_plus;
    Partition p_minus;
    bool disjoint = true;           // item (i)
    int shared_part = 0;            // witness when (i) fails
    bool one_exclusive = true;      // item (ii)
    bool small_count_ok = true;     // item (iii)
    long double m_frac = 0;         // m{theta}
    long double m_cofrac = 0;       // m(1-{theta})
    bool all() const { return disjoint && one_exclusive && small_count_ok; }
};

PartitionReport partition_properties(const Rotation& theta, int m, const CzOptions& opt = {});

// Pair properties (disjoint parts, 1 on exactly one side, count bound) and the
// CZ parity/length bound over thetas x [m_lo, m_hi]. Integral thetas and m = 1
// skip the pair properties. Witnesses are the first failures in grid order, so
// both versions report identically.
struct GridReport {
    std::size_t cases = 0;
    std::size_t pair_failures = 0;
    std::size_t disjoint_failures = 0, one_failures = 0, count_failures = 0;
    std::size_t cz_failures = 0;
    std::string pair_witness, cz_witness;
};

GridReport partition_grid_serial(const std::vector<Rotation>& thetas, int m_lo, int m_hi);
GridReport partition_grid_parallel(const std::vector<Rotation>& thetas, int m_lo, int m_hi);

}  // namespace echlab
