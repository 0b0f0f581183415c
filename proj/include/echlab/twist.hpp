#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace echlab {

class ProfileError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A rational level sits on a constant piece of f.
class PlateauError : public ProfileError {
public:
    PlateauError(const std::string& msg, double from, double to) : ProfileError(msg), from(from), to(to) {}
    double from, to;
};

class CalibrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ComplexSizeError : public std::runtime_error {
public:
    ComplexSizeError(const std::string& msg, std::size_t estimate) : std::runtime_error(msg), estimate(estimate) {}
    std::size_t estimate;
};

// f(s) = sum_k coeffs[k] s^k on [from, to); negative exponents allowed.
struct ProfilePiece {
    double from = 0, to = 1;
    std::map<int, double> coeffs;

    double eval(double s) const;
    bool is_constant() const;
    bool is_zero() const;
};

// Non-increasing, nonnegative twist profile on (0, 1].
class TwistProfile {
public:
    TwistProfile() : TwistProfile(std::vector<ProfilePiece>{ProfilePiece{}}) {}
    explicit TwistProfile(std::vector<ProfilePiece> pieces, std::string name = "piecewise");

    // Linear interpolation through (r_i, f_i); r must start at 0 and end at 1.
    static TwistProfile samples(const std::vector<double>& r, const std::vector<double>& f, std::string name = "samples");
    static TwistProfile from_json(const nlohmann::json& j);
    // zero, const:c, lin:C, quad:C, inv-cube, inv-cube-compact
    static TwistProfile named(const std::string& spec);
    // Name, file path, or inline JSON.
    static TwistProfile load(const std::string& spec);

    nlohmann::json to_json() const;

    double operator()(double r) const;
    // Limit at r -> 0; +inf when singular.
    double at_zero() const;
    bool singular_at_zero() const;
    // f vanishes identically on the last piece.
    bool support_flag() const;

    const std::vector<ProfilePiece>& pieces() const { return pieces_; }
    const std::string& name() const { return name_; }
    void set_name(std::string n) { name_ = std::move(n); }

private:
    std::vector<ProfilePiece> pieces_;
    std::string name_;
};

TwistProfile add_profiles(const TwistProfile& f, const TwistProfile& g);
TwistProfile scale_profile(const TwistProfile& f, double c);
// f_i = f on [1/i, 1], f(1/i) below.
TwistProfile truncate_profile(const TwistProfile& f, int i);
// Replaces f on [0, delta] by the segment from 2 pi N down to f(delta),
// N = ceil(f(0) / 2 pi). Identity when f(0) = 0.
TwistProfile regularize_pole(const TwistProfile& f, double delta);

class HamiltonianProfile {
public:
    explicit HamiltonianProfile(const TwistProfile& f);
    // H(r) = int_r^1 s f(s) ds; +inf at r = 0 when divergent.
    double operator()(double r) const;
    bool infinite_at_zero() const { return infinite_; }

private:
    TwistProfile f_;
    std::vector<double> tail_;  // H at each piece's right end
    bool infinite_ = false;
};

HamiltonianProfile hamiltonian_profile(const TwistProfile& f);

struct CalabiValue {
    double value = 0;          // int_0^1 H(r) dr
    double exchanged = 0;      // int_0^1 s^2 f(s) ds
    double rel_diff = 0;
    bool infinite = false;
    bool fubini_ok = true;     // agreement to 1e-9 relative
};

CalabiValue calabi(const TwistProfile& f);
// 2 int_0^1 H(r) r dr = int_0^1 s^3 f(s) ds, the area-normalized average.
double calabi_area(const TwistProfile& f);
// H(0); +inf when divergent.
double hofer_norm_bound(const TwistProfile& f);
// max - min of H_f - H_g over [0, 1], sampled on a grid plus breakpoints.
double hofer_distance(const TwistProfile& f, const TwistProfile& g, int samples = 4001);

struct PfhCalibration {
    double sigma = -2.0 * 3.14159265358979323846;  // coefficient of p E(r)
    double twist_area = 3.14159265358979323846;    // action shift per twist
    double pole_delta = 1e-3;
    double positivity_floor = 1e-12;
    int reduction_cap = 8;    // largest d computed by full reduction
    int complex_cap = 12;     // largest d allowed for build_complex
    std::size_t generator_cap = 4'000'000;
    nlohmann::json to_json() const;
};

struct PeriodicCircle {
    double r = 0;
    std::int64_t p = 0, q = 1;
    double action = 0;
    bool pole = false;  // level at r = 0
    bool has_e = true, has_h = true;
};

// Largest r with f(r) >= t, to 1e-12 (1 when f(1) >= t).
double level_radius(const TwistProfile& f, double t);

// Throws PlateauError when a constant piece sits at 2 pi p / q with q <= d.
void reject_rational_plateaus(const TwistProfile& f, int d);

// 2 pi p / q in the range of f, q <= d, r solved to 1e-12.
std::vector<PeriodicCircle> periodic_census(const TwistProfile& f, int d, const PfhCalibration& cal = {});
// q H(r) + sigma p E(r), E(r) = (1 - r^2) / 2.
double level_action(const TwistProfile& f, const PeriodicCircle& c, const PfhCalibration& cal = {});

enum class SegmentKind { Center, Level, Filler };

struct Segment {
    std::int64_t p = 0, q = 1;
    int m = 1;
    int h = 0;
    SegmentKind kind = SegmentKind::Level;
    bool operator==(const Segment&) const = default;
};

struct LatticePathGenerator {
    std::vector<Segment> segments;  // slopes strictly decreasing
    int k = 0;                      // twist
    int degree = 0;
    int lattice_points = 0;
    double action = 0;
    int grading = 0;

    std::string str() const;
};

struct FilteredComplex {
    int d = 0;
    int N = 0;
    int grading_lo = 0, grading_hi = 0;  // generator band
    std::vector<LatticePathGenerator> generators;
    // boundary[j]: sorted indices i with <d j, i> = 1.
    std::vector<std::vector<int>> boundary;
};

FilteredComplex build_complex(const TwistProfile& f, int d, const PfhCalibration& cal = {});

struct ComplexCheck {
    bool d_squared_zero = true;
    std::size_t d_squared_failures = 0;
    bool grading_drop_one = true;
    bool action_decreasing = true;
    double min_action_drop = 0;
    std::map<int, int> ranks;  // gradings strictly inside the band
    bool rank_pattern = true;
};

ComplexCheck check_complex(const FilteredComplex& c);

struct Reduction {
    std::map<int, std::vector<double>> essential;  // grading -> actions of surviving classes
};

Reduction reduce(const FilteredComplex& c);

// max over e-only paths with (d+1) | L of sum m a(q,p) + Area (L/(d+1) - 1).
double cd_lattice_max(const TwistProfile& f, int d, const PfhCalibration& cal = {});

struct CdResult {
    double value = 0;
    std::string method;  // "reduction" or "lattice-max"
};

CdResult spectral_invariant_cd(const TwistProfile& f, int d, const PfhCalibration& cal = {});

struct AxiomRow {
    int d = 0;
    double cf = 0, cg = 0;
    double hofer_slack = 0;
    double weyl_f = 0, weyl_g = 0;  // |c_d/d - Cal|
};

struct AxiomsReport {
    bool identity = true;
    bool monotone = true;       // only meaningful when ordered
    bool ordered = false;       // f <= g on a sample grid
    bool hofer_lipschitz = true;
    double min_hofer_slack = 0;
    double cal_f = 0, cal_g = 0;
    std::vector<AxiomRow> rows;
};

AxiomsReport axioms_report(const TwistProfile& f, const TwistProfile& g, const std::vector<int>& ds,
                           const PfhCalibration& cal = {});

struct TwistCell {
    int i = 0, d = 0;
    double cd = 0;
    double ratio = 0;
    double cal = 0;
    double hofer = 0;
    bool step2 = true;  // c_d <= 2 d hofer
    bool chain = true;  // c_d(f_i) <= c_d(f_{i+1}) (true on the last row)
};

struct InfiniteTwistReport {
    std::vector<double> cal;          // Cal(f_i), i = 1..imax
    bool cal_increasing = true;
    std::vector<TwistCell> cells;     // row-major in i, then d
    bool chain_ok = true, step2_ok = true;
    std::vector<double> sup_ratio;    // max_d c_d/d per i
};

InfiniteTwistReport infinite_twist_experiment(const TwistProfile& f, int imax, const std::vector<int>& ds,
                                              const PfhCalibration& cal = {}, bool parallel = true);

}  // namespace echlab
