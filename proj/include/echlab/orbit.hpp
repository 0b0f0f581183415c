#pragma once

#include "echlab/rotation.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace echlab {

enum class OrbitKind { Elliptic, PositiveHyperbolic, NegativeHyperbolic };

std::string to_string(OrbitKind k);
OrbitKind parse_orbit_kind(const std::string& s);
// Kind implied by theta: integer -> h+, half-integer -> h-, else elliptic.
OrbitKind kind_from_theta(const Rotation& theta);

struct SimpleOrbit {
    std::string id;
    Q action_exact{1};
    long double action = 1;  // always set; equals action_exact when exact
    bool exact_action = false;
    Rotation theta = Rotation::exact(1, 2);
    OrbitKind kind = OrbitKind::Elliptic;
    int period_count = 1;  // q_i in the mapping-torus setting

    bool hyperbolic() const { return kind != OrbitKind::Elliptic; }
};

SimpleOrbit make_orbit(std::string id, Q action, Rotation theta, int period_count = 1);
SimpleOrbit make_orbit(std::string id, long double action, Rotation theta, int period_count = 1);
// Checks action > 0 and the theta/kind convention.
void validate_orbit(const SimpleOrbit& o);

class OrbitSet {
public:
    void add(const SimpleOrbit& o, int m);
    int multiplicity(const std::string& id) const;
    const SimpleOrbit& orbit(const std::string& id) const;
    bool empty() const { return entries_.empty(); }
    std::size_t size() const { return entries_.size(); }
    // id -> (orbit, multiplicity), ordered by id
    const std::map<std::string, std::pair<SimpleOrbit, int>>& entries() const { return entries_; }
    bool operator==(const OrbitSet& o) const;

private:
    std::map<std::string, std::pair<SimpleOrbit, int>> entries_;
};

long double orbit_set_action(const OrbitSet& a);
// Exact total when all member actions are exact.
std::optional<Q> orbit_set_action_exact(const OrbitSet& a);
int degree_abstract(const OrbitSet& a);
int degree_mapping_torus(const OrbitSet& a);
bool is_ech_generator(const OrbitSet& a);
int cz_top(const OrbitSet& a, const CzOptions& opt = {});

struct EndGroup {
    std::string orbit;
    std::vector<int> mults;
    bool c0_present = false;
};

struct CurveData {
    int genus = 0;
    std::vector<EndGroup> positive_ends;
    std::vector<EndGroup> negative_ends;
    int c_tau = 0;
    OrbitSet alpha, beta;
    long double action = 0;
};

class StructureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void validate_curve(const CurveData& c);
// Sets action = A(alpha) - A(beta).
void fill_action(CurveData& c);
int j0_of_curve(const CurveData& c);
int ech_index_from_j0(const CurveData& c, const CzOptions& opt = {});

struct Topology {
    int genus = 0;
    int ends = 0;
    int absent = 0;  // orbits where C0 is absent (0 under full coverage)
    auto operator<=>(const Topology&) const = default;
};

std::set<Topology> forced_topology(int j0, bool full_coverage);

struct ComponentClass {
    bool is_p_plus = false;
    bool is_p_minus = false;
    bool is_special = false;
};

ComponentClass component_classification(const SimpleOrbit& o, int m, const CzOptions& opt = {});
int orbit_set_score(const OrbitSet& a, const CzOptions& opt = {});
int total_score(const CurveData& c, const CzOptions& opt = {});
int k_invariant_orbits(const OrbitSet& a);
int k_invariant(const CurveData& c);

// curves[i] runs from alpha(i+1) down to alpha(i): curves[i].beta equals
// curves[i-1].alpha.
struct Tower {
    std::vector<CurveData> curves;
};

struct TowerAudit {
    std::size_t n = 0;
    bool score_telescopes = false;   // (a)
    std::int64_t sum_t = 0, score_delta = 0, sum_y = 0;
    bool action_telescopes = false;  // (b)
    long double sum_action = 0, action_delta = 0;
    std::int64_t total_index = 0;    // (c)
    std::int64_t index_deviation = 0;
    std::size_t high_action = 0;     // (d)
    long double high_action_budget = 0;
    std::size_t t_positive = 0, t0_j1 = 0, t0_j2 = 0;  // (e)
    std::vector<std::size_t> falsifiers;                // (f)
};

TowerAudit tower_audit(const Tower& t, long double threshold);

// Seeded random admissible tower over a small orbit library.
Tower random_tower(std::mt19937_64& rng, std::size_t n);

// Low-action curves from the orbit library whose ends realize the
// partition conditions and whose ECH index is 2.
struct ScanOptions {
    int max_mult = 3;
    Q action_window{0};  // A(alpha) - A(beta) in [0, window]
    int c_tau = 0;
};

struct ScanResult {
    std::size_t examined = 0;
    std::size_t negatives = 0;
    std::vector<CurveData> witnesses;
    std::map<int, std::size_t> t_histogram;
    std::map<int, std::size_t> negative_j0;  // J0 -> count among T < 0
};

std::vector<SimpleOrbit> scan_library();
ScanResult score_falsification_scan(const std::vector<SimpleOrbit>& lib, const ScanOptions& opt);

}  // namespace echlab
