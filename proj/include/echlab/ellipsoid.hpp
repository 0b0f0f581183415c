#pragma once

#include "echlab/rotation.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace echlab {

class ResourceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A real input with an optional exact rational form. Parses "1", "3/2",
// "0.25", "sqrt2", "sqrt(3)", "pi", "e", "golden".
struct RealSpec {
    long double value = 0;
    std::optional<Q> exact;
    std::string text;
};
RealSpec parse_real(const std::string& s);

struct Ellipsoid {
    long double a = 1, b = 1;
    bool rational = false;  // a/b in Q (exactly, or within 1e-12 with denominator <= 1e4)
    std::int64_t p = 0, q = 0;  // a/b = p/q in lowest terms when rational
};

Ellipsoid make_ellipsoid(const RealSpec& a, const RealSpec& b);
Ellipsoid make_ellipsoid(long double a, long double b);

struct FlowState {
    long double theta1 = 0, theta2 = 0;  // radians in [0, 2 pi)
    long double mu = 0.5;                // share of the constraint on z1
};

FlowState reeb_flow(const Ellipsoid& e, const FlowState& s, long double t);

struct CensusEntry {
    std::string name;     // "gamma1", "gamma2" or "torus"
    long double action = 0;
    Rotation theta = Rotation::real(0);
    bool family = false;  // torus family, Morse-Bott degenerate
    int multiple = 0;     // m for the family at action m*q*a
};

std::vector<CensusEntry> simple_orbit_census(const Ellipsoid& e, long double L);

struct SpectrumEntry {
    std::int64_t k = 0;
    long double c = 0;
    std::int64_t grading = 0;
    std::int64_t m = 0, n = 0;  // c = m a + n b
};

struct SpectrumOptions {
    std::size_t cap = 10'000'000;
    bool formal = false;  // allow rational a/b
};

std::vector<SpectrumEntry> action_spectrum(const Ellipsoid& e, long double L,
                                           const SpectrumOptions& opt = {});
// First `count` entries in order.
std::vector<SpectrumEntry> spectrum_prefix(const Ellipsoid& e, std::size_t count,
                                           const SpectrumOptions& opt = {});
SpectrumEntry spectral_invariant(const Ellipsoid& e, std::int64_t k, const SpectrumOptions& opt = {});

long double volume(const Ellipsoid& e);
// Gauss-Legendre integration of lambda ^ d lambda over the boundary,
// evaluated on numerically differentiated tangent frames.
long double volume_numeric(const Ellipsoid& e, int nodes = 20);

struct WeylRow {
    std::int64_t k = 0;
    long double c = 0;
    long double ratio = 0;      // c_k^2 / (2k)
    long double deviation = 0;  // |ratio - volume|
};

struct WeylTable {
    std::vector<WeylRow> rows;
    long double volume = 0;
    long double final_decade_max = 0;  // max deviation over k in [kmax/10, kmax]
};

WeylTable weyl_table(const Ellipsoid& e, std::int64_t kmax, const SpectrumOptions& opt = {});
// Same rows from a spectrum already reaching kmax.
WeylTable weyl_table(const Ellipsoid& e, const std::vector<SpectrumEntry>& spec, std::int64_t kmax);

// max over k in [k1, k2] of |c_k^2/(2k) - V|; spectrum must reach k2.
long double weyl_max_deviation_serial(const std::vector<SpectrumEntry>& spec, long double V,
                                      std::int64_t k1, std::int64_t k2);
long double weyl_max_deviation_parallel(const std::vector<SpectrumEntry>& spec, long double V,
                                        std::int64_t k1, std::int64_t k2);

struct SectionPoint {
    long double radius = 0;  // |z2| / |z2|_max, binding at 1
    long double angle = 0;   // theta2
};

struct ReturnResult {
    SectionPoint image;
    long double time = 0;
};

ReturnResult gss_return_map(const Ellipsoid& e, const SectionPoint& p);

struct PeriodsReport {
    long double product = 0;
    long double volume = 0;
    long double difference = 0;
    long double relative = 0;
};

PeriodsReport product_of_periods_check(const Ellipsoid& e);

// Angle reduced to [0, 2 pi).
long double wrap_angle(long double x);
// Distance on the circle.
long double angle_distance(long double x, long double y);

}  // namespace echlab
