#include "echlab/orbit.hpp"

#include <algorithm>
#include <numeric>

namespace echlab {

std::string to_string(OrbitKind k) {
    switch (k) {
        case OrbitKind::Elliptic: return "elliptic";
        case OrbitKind::PositiveHyperbolic: return "positive-hyperbolic";
        case OrbitKind::NegativeHyperbolic: return "negative-hyperbolic";
    }
    return "?";
}

OrbitKind parse_orbit_kind(const std::string& s) {
    if (s == "elliptic" || s == "e") return OrbitKind::Elliptic;
    if (s == "positive-hyperbolic" || s == "h+") return OrbitKind::PositiveHyperbolic;
    if (s == "negative-hyperbolic" || s == "h-") return OrbitKind::NegativeHyperbolic;
    throw std::invalid_argument("unknown orbit kind: " + s);
}

OrbitKind kind_from_theta(const Rotation& theta) {
    if (theta.is_integer()) return OrbitKind::PositiveHyperbolic;
    if (theta.is_half_integer()) return OrbitKind::NegativeHyperbolic;
    return OrbitKind::Elliptic;
}

SimpleOrbit make_orbit(std::string id, Q action, Rotation theta, int period_count) {
    SimpleOrbit o;
    o.id = std::move(id);
    o.action_exact = action;
    o.action = static_cast<long double>(action.numerator()) / action.denominator();
    o.exact_action = true;
    o.theta = theta;
    o.kind = kind_from_theta(theta);
    o.period_count = period_count;
    validate_orbit(o);
    return o;
}

SimpleOrbit make_orbit(std::string id, long double action, Rotation theta, int period_count) {
    SimpleOrbit o;
    o.id = std::move(id);
    o.action = action;
    o.exact_action = false;
    o.theta = theta;
    o.kind = kind_from_theta(theta);
    o.period_count = period_count;
    validate_orbit(o);
    return o;
}

void validate_orbit(const SimpleOrbit& o) {
    if (!(o.action > 0)) throw std::invalid_argument("orbit " + o.id + ": action must be positive");
    if (o.period_count < 1) throw std::invalid_argument("orbit " + o.id + ": period count must be >= 1");
    bool ok = true;
    switch (o.kind) {
        case OrbitKind::Elliptic:
            ok = !o.theta.is_integer() && !o.theta.is_half_integer();
            break;
        case OrbitKind::PositiveHyperbolic: ok = o.theta.is_integer(); break;
        case OrbitKind::NegativeHyperbolic: ok = o.theta.is_half_integer(); break;
    }
    if (!ok) throw std::invalid_argument("orbit " + o.id + ": kind inconsistent with theta " + o.theta.str());
}

void OrbitSet::add(const SimpleOrbit& o, int m) {
    if (m < 1) throw std::invalid_argument("multiplicity must be >= 1");
    auto it = entries_.find(o.id);
    if (it == entries_.end())
        entries_.emplace(o.id, std::make_pair(o, m));
    else
        it->second.second += m;
}

int OrbitSet::multiplicity(const std::string& id) const {
    auto it = entries_.find(id);
    return it == entries_.end() ? 0 : it->second.second;
}

const SimpleOrbit& OrbitSet::orbit(const std::string& id) const {
    auto it = entries_.find(id);
    if (it == entries_.end()) throw std::out_of_range("orbit not in set: " + id);
    return it->second.first;
}

bool OrbitSet::operator==(const OrbitSet& o) const {
    if (entries_.size() != o.entries_.size()) return false;
    for (const auto& [id, e] : entries_)
        if (o.multiplicity(id) != e.second) return false;
    return true;
}

long double orbit_set_action(const OrbitSet& a) {
    long double s = 0;
    for (const auto& [id, e] : a.entries()) s += e.second * e.first.action;
    return s;
}

std::optional<Q> orbit_set_action_exact(const OrbitSet& a) {
    Q s(0);
    for (const auto& [id, e] : a.entries()) {
        if (!e.first.exact_action) return std::nullopt;
        s += Q(e.second) * e.first.action_exact;
    }
    return s;
}

int degree_abstract(const OrbitSet& a) {
    int d = 0;
    for (const auto& [id, e] : a.entries()) d += e.second;
    return d;
}

int degree_mapping_torus(const OrbitSet& a) {
    int d = 0;
    for (const auto& [id, e] : a.entries()) d += e.first.period_count * e.second;
    return d;
}

bool is_ech_generator(const OrbitSet& a) {
    for (const auto& [id, e] : a.entries())
        if (e.first.hyperbolic() && e.second != 1) return false;
    return true;
}

int cz_top(const OrbitSet& a, const CzOptions& opt) {
    int s = 0;
    for (const auto& [id, e] : a.entries()) s += cz_index(e.first.theta, e.second, opt);
    return s;
}

namespace {

int c0_multiplicity(const std::vector<EndGroup>& groups, const OrbitSet& side, const std::string& id) {
    int m = side.multiplicity(id);
    for (const auto& g : groups)
        if (g.orbit == id) return m - std::accumulate(g.mults.begin(), g.mults.end(), 0);
    return m;
}

void check_groups(const std::vector<EndGroup>& groups, const OrbitSet& side, const char* label) {
    std::set<std::string> seen;
    for (const auto& g : groups) {
        if (!seen.insert(g.orbit).second)
            throw StructureError(std::string(label) + " ends: orbit listed twice: " + g.orbit);
        int m = side.multiplicity(g.orbit);
        if (m == 0) throw StructureError(std::string(label) + " ends at orbit outside the endpoint set: " + g.orbit);
        if (g.mults.empty()) throw StructureError(std::string(label) + " end group without ends: " + g.orbit);
        int sum = 0;
        for (int x : g.mults) {
            if (x < 1) throw StructureError(std::string(label) + " end multiplicity must be >= 1");
            sum += x;
        }
        if (sum > m) throw StructureError(std::string(label) + " ends exceed multiplicity at " + g.orbit);
        if (g.c0_present != (sum < m))
            throw StructureError(std::string(label) + " c0 flag inconsistent with deficit at " + g.orbit);
    }
}

}  // namespace

void validate_curve(const CurveData& c) {
    if (c.genus < 0) throw StructureError("genus must be >= 0");
    check_groups(c.positive_ends, c.alpha, "positive");
    check_groups(c.negative_ends, c.beta, "negative");
    std::set<std::string> ids;
    for (const auto& [id, e] : c.alpha.entries()) ids.insert(id);
    for (const auto& [id, e] : c.beta.entries()) ids.insert(id);
    for (const auto& id : ids)
        if (c0_multiplicity(c.positive_ends, c.alpha, id) != c0_multiplicity(c.negative_ends, c.beta, id))
            throw StructureError("trivial-cylinder multiplicities differ at " + id);
    auto ea = orbit_set_action_exact(c.alpha), eb = orbit_set_action_exact(c.beta);
    if (ea && eb) {
        if (*ea < *eb) throw StructureError("negative curve action");
    } else if (orbit_set_action(c.alpha) < orbit_set_action(c.beta) - 1e-12L) {
        throw StructureError("negative curve action");
    }
}

void fill_action(CurveData& c) { c.action = orbit_set_action(c.alpha) - orbit_set_action(c.beta); }

int j0_of_curve(const CurveData& c) {
    int j = -2 + 2 * c.genus;
    for (const auto* side : {&c.positive_ends, &c.negative_ends})
        for (const auto& g : *side) j += 2 * static_cast<int>(g.mults.size()) - (g.c0_present ? 0 : 1);
    return j;
}

int ech_index_from_j0(const CurveData& c, const CzOptions& opt) {
    return j0_of_curve(c) + 2 * c.c_tau + cz_top(c.alpha, opt) - cz_top(c.beta, opt);
}

std::set<Topology> forced_topology(int j0, bool full_coverage) {
    std::set<Topology> out;
    // 2E - a >= E, so E <= j0 + 2 and g <= (j0 + 2) / 2.
    for (int g = 0; 2 * g <= j0 + 2; ++g)
        for (int E = 2; E <= j0 + 2; ++E) {
            int amax = full_coverage ? 0 : E;
            for (int a = 0; a <= amax; ++a)
                if (-2 + 2 * g + 2 * E - a == j0) out.insert({g, E, a});
        }
    return out;
}

ComponentClass component_classification(const SimpleOrbit& o, int m, const CzOptions& opt) {
    Partition pp = partition_positive(o.theta, m, opt);
    Partition pm = partition_negative(o.theta, m, opt);
    ComponentClass c;
    c.is_p_plus = pp.size() == 1 && pp.parts[0] == m;
    c.is_p_minus = pm.size() == 1 && pm.parts[0] == m;
    c.is_special = m > 1 && !pp.contains(1);
    return c;
}

int orbit_set_score(const OrbitSet& a, const CzOptions& opt) {
    int s = 0;
    for (const auto& [id, e] : a.entries()) {
        ComponentClass c = component_classification(e.first, e.second, opt);
        s += (c.is_p_plus ? 1 : 0) + (c.is_special ? 1 : 0) - (c.is_p_minus ? 1 : 0);
    }
    return s;
}

int total_score(const CurveData& c, const CzOptions& opt) {
    return orbit_set_score(c.alpha, opt) - orbit_set_score(c.beta, opt) + 3 * (j0_of_curve(c) - 2);
}

int k_invariant_orbits(const OrbitSet& a) {
    int k = 0;
    for (const auto& [id, e] : a.entries())
        if (e.second > 1) --k;
    return k;
}

int k_invariant(const CurveData& c) {
    return k_invariant_orbits(c.alpha) - k_invariant_orbits(c.beta) + 2 * (j0_of_curve(c) - 2);
}

namespace {

bool is_cylinder(const CurveData& c) {
    auto count = [](const std::vector<EndGroup>& gs) {
        std::size_t n = 0;
        for (const auto& g : gs) n += g.mults.size();
        return n;
    };
    return c.genus == 0 && count(c.positive_ends) == 1 && count(c.negative_ends) == 1;
}

}  // namespace

TowerAudit tower_audit(const Tower& t, long double threshold) {
    if (!(threshold > 0)) throw std::invalid_argument("action threshold must be positive");
    TowerAudit r;
    r.n = t.curves.size();
    if (t.curves.empty()) {
        r.score_telescopes = r.action_telescopes = true;
        return r;
    }
    for (std::size_t i = 1; i < t.curves.size(); ++i)
        if (!(t.curves[i].beta == t.curves[i - 1].alpha))
            throw StructureError("tower adjacency violated at index " + std::to_string(i));

    bool exact = true;
    Q sum_q(0);
    for (const auto& c : t.curves) {
        validate_curve(c);
        int j0 = j0_of_curve(c);
        int y = j0 - 2;
        int T = total_score(c);
        r.sum_t += T;
        r.sum_y += y;
        r.total_index += ech_index_from_j0(c);
        auto ea = orbit_set_action_exact(c.alpha), eb = orbit_set_action_exact(c.beta);
        long double act = orbit_set_action(c.alpha) - orbit_set_action(c.beta);
        if (ea && eb)
            sum_q += *ea - *eb;
        else
            exact = false;
        r.sum_action += act;
        if (act > threshold) ++r.high_action;
        if (T > 0) ++r.t_positive;
        if (T == 0 && j0 == 1) ++r.t0_j1;
        if (T == 0 && j0 == 2) ++r.t0_j2;
        if (act <= threshold && !is_cylinder(c) && T < 0) r.falsifiers.push_back(static_cast<std::size_t>(&c - &t.curves[0]));
    }
    const OrbitSet& top = t.curves.back().alpha;
    const OrbitSet& bottom = t.curves.front().beta;
    r.score_delta = orbit_set_score(top) - orbit_set_score(bottom);
    r.score_telescopes = r.sum_t == r.score_delta + 3 * r.sum_y;
    r.action_delta = orbit_set_action(top) - orbit_set_action(bottom);
    auto et = orbit_set_action_exact(top), eb = orbit_set_action_exact(bottom);
    if (exact && et && eb)
        r.action_telescopes = sum_q == *et - *eb;
    else
        r.action_telescopes = std::fabs(r.sum_action - r.action_delta) <= 1e-9L * std::max(1.0L, std::fabs(r.action_delta));
    r.index_deviation = r.total_index - 2 * static_cast<std::int64_t>(r.n);
    r.high_action_budget = r.sum_action / threshold;
    return r;
}

namespace {

std::vector<SimpleOrbit> tower_library() {
    return {make_orbit("e1", Q(1), Rotation::exact(1, 5)),      make_orbit("e2", Q(1), Rotation::exact(7, 10)),
            make_orbit("e3", Q(1), Rotation::exact(2, 7)),      make_orbit("e4", Q(2), Rotation::exact(14, 11)),
            make_orbit("h0", Q(1), Rotation::exact(0, 1)),      make_orbit("h1", Q(2), Rotation::exact(1, 2)),
            make_orbit("e5", Q(3, 2), Rotation::exact(-1, 3))};
}

std::vector<int> random_split(std::mt19937_64& rng, int total) {
    std::vector<int> parts;
    while (total > 0) {
        std::uniform_int_distribution<int> d(1, total);
        int x = d(rng);
        parts.push_back(x);
        total -= x;
    }
    std::sort(parts.begin(), parts.end(), std::greater<>());
    return parts;
}

OrbitSet to_set(const std::vector<SimpleOrbit>& lib, const std::vector<int>& mult) {
    OrbitSet s;
    for (std::size_t i = 0; i < lib.size(); ++i)
        if (mult[i] > 0) s.add(lib[i], mult[i]);
    return s;
}

Q mult_action(const std::vector<SimpleOrbit>& lib, const std::vector<int>& mult) {
    Q s(0);
    for (std::size_t i = 0; i < lib.size(); ++i) s += Q(mult[i]) * lib[i].action_exact;
    return s;
}

// One admissible step upward in action from `lo`.
std::vector<int> step_up(std::mt19937_64& rng, const std::vector<SimpleOrbit>& lib, const std::vector<int>& lo) {
    std::uniform_int_distribution<std::size_t> pick(0, lib.size() - 1);
    std::uniform_int_distribution<int> coin(0, 99);
    for (;;) {
        std::vector<int> hi = lo;
        int deg = std::accumulate(hi.begin(), hi.end(), 0);
        int roll = coin(rng);
        if (roll < 8 && deg < 14) {
            hi[pick(rng)] += 1;
        } else if (roll < 20) {
            // identity endpoints
        } else {
            std::size_t from = pick(rng), to = pick(rng);
            if (hi[from] == 0) continue;
            hi[from] -= 1;
            hi[to] += 1;
        }
        bool ok = true;
        for (std::size_t i = 0; i < lib.size(); ++i)
            if (lib[i].hyperbolic() && hi[i] > 1) ok = false;
        if (!ok || mult_action(lib, hi) < mult_action(lib, lo)) continue;
        if (std::accumulate(hi.begin(), hi.end(), 0) == 0) continue;
        return hi;
    }
}

CurveData random_curve(std::mt19937_64& rng, const std::vector<SimpleOrbit>& lib, const std::vector<int>& hi,
                       const std::vector<int>& lo) {
    CurveData c;
    c.alpha = to_set(lib, hi);
    c.beta = to_set(lib, lo);
    std::uniform_int_distribution<int> g(0, 2);
    c.genus = g(rng);
    for (std::size_t i = 0; i < lib.size(); ++i) {
        int shared = std::min(hi[i], lo[i]);
        std::uniform_int_distribution<int> cd(0, shared);
        int c0 = cd(rng);
        int pos = hi[i] - c0, neg = lo[i] - c0;
        if (pos > 0) c.positive_ends.push_back({lib[i].id, random_split(rng, pos), c0 > 0});
        if (neg > 0) c.negative_ends.push_back({lib[i].id, random_split(rng, neg), c0 > 0});
    }
    fill_action(c);
    return c;
}

}  // namespace

Tower random_tower(std::mt19937_64& rng, std::size_t n) {
    auto lib = tower_library();
    std::vector<int> cur(lib.size(), 0);
    std::uniform_int_distribution<int> m0(0, 2);
    for (std::size_t i = 0; i < lib.size(); ++i) cur[i] = lib[i].hyperbolic() ? m0(rng) % 2 : m0(rng);
    if (std::accumulate(cur.begin(), cur.end(), 0) == 0) cur[0] = 1;
    Tower t;
    t.curves.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<int> next = step_up(rng, lib, cur);
        t.curves.push_back(random_curve(rng, lib, next, cur));
        cur = std::move(next);
    }
    return t;
}

}  // namespace echlab

namespace echlab {

std::vector<SimpleOrbit> scan_library() {
    return {make_orbit("e1", Q(1), Rotation::exact(1, 5)),     make_orbit("e2", Q(1), Rotation::exact(7, 10)),
            make_orbit("e3", Q(3, 2), Rotation::exact(2, 7)),  make_orbit("h0", Q(1), Rotation::exact(0, 1)),
            make_orbit("h1", Q(2), Rotation::exact(1, 2)),     make_orbit("e4", Q(2), Rotation::exact(-1, 3))};
}

namespace {

// a minus b as multisets; nullopt when b is not contained in a.
std::optional<std::vector<int>> multiset_minus(std::vector<int> a, const std::vector<int>& b) {
    for (int x : b) {
        auto it = std::find(a.begin(), a.end(), x);
        if (it == a.end()) return std::nullopt;
        a.erase(it);
    }
    return a;
}

void enumerate_mults(const std::vector<SimpleOrbit>& lib, int max_mult, std::size_t i, std::vector<int>& cur,
                     std::vector<std::vector<int>>& out) {
    if (i == lib.size()) {
        out.push_back(cur);
        return;
    }
    int top = lib[i].hyperbolic() ? 1 : max_mult;
    for (int m = 0; m <= top; ++m) {
        cur[i] = m;
        enumerate_mults(lib, max_mult, i + 1, cur, out);
    }
    cur[i] = 0;
}

std::optional<std::vector<int>> end_partition(const Rotation& th, int m, int c0, bool positive) {
    auto part = [&](int k) { return (positive ? partition_positive(th, k) : partition_negative(th, k)).parts; };
    if (c0 == 0) return part(m);
    return multiset_minus(part(m), part(c0));
}

}  // namespace

ScanResult score_falsification_scan(const std::vector<SimpleOrbit>& lib, const ScanOptions& opt) {
    for (const auto& o : lib)
        if (!o.exact_action) throw std::invalid_argument("scan library needs exact actions");
    std::vector<std::vector<int>> gens;
    std::vector<int> cur(lib.size(), 0);
    enumerate_mults(lib, opt.max_mult, 0, cur, gens);

    std::vector<Q> act(gens.size());
    std::vector<int> cz(gens.size());
    for (std::size_t g = 0; g < gens.size(); ++g) {
        act[g] = mult_action(lib, gens[g]);
        cz[g] = 0;
        for (std::size_t i = 0; i < lib.size(); ++i)
            if (gens[g][i] > 0) cz[g] += cz_index(lib[i].theta, gens[g][i]);
    }

    ScanResult res;
    const std::size_t n = lib.size();
    for (std::size_t ia = 0; ia < gens.size(); ++ia)
        for (std::size_t ib = 0; ib < gens.size(); ++ib) {
            Q diff = act[ia] - act[ib];
            if (diff < Q(0) || diff > opt.action_window) continue;
            const auto& ma = gens[ia];
            const auto& mb = gens[ib];
            // ECH index 2 fixes J0.
            int j0 = 2 - 2 * opt.c_tau - (cz[ia] - cz[ib]);
            std::vector<int> c0(n, 0);
            for (;;) {
                CurveData c;
                c.alpha = to_set(lib, ma);
                c.beta = to_set(lib, mb);
                c.c_tau = opt.c_tau;
                bool ok = true;
                for (std::size_t i = 0; i < n && ok; ++i) {
                    if (ma[i] > c0[i]) {
                        auto ends = end_partition(lib[i].theta, ma[i], c0[i], true);
                        if (!ends) ok = false;
                        else c.positive_ends.push_back({lib[i].id, *ends, c0[i] > 0});
                    }
                    if (ok && mb[i] > c0[i]) {
                        auto ends = end_partition(lib[i].theta, mb[i], c0[i], false);
                        if (!ends) ok = false;
                        else c.negative_ends.push_back({lib[i].id, *ends, c0[i] > 0});
                    }
                }
                if (ok && !(c.positive_ends.empty() && c.negative_ends.empty())) {
                    int g2 = j0 - j0_of_curve(c);
                    if (g2 >= 0 && g2 % 2 == 0) {
                        c.genus = g2 / 2;
                        fill_action(c);
                        if (!is_cylinder(c)) {
                            ++res.examined;
                            int T = total_score(c);
                            ++res.t_histogram[T];
                            if (T < 0) {
                                ++res.negatives;
                                ++res.negative_j0[j0];
                                if (res.witnesses.size() < 10) res.witnesses.push_back(c);
                            }
                        }
                    }
                }
                std::size_t k = 0;
                for (; k < n; ++k) {
                    if (c0[k] < std::min(ma[k], mb[k])) {
                        ++c0[k];
                        break;
                    }
                    c0[k] = 0;
                }
                if (k == n) break;
            }
        }
    return res;
}

}  // namespace echlab
