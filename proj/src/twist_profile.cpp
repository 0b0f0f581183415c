#include "echlab/twist.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

namespace echlab {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;
constexpr double kInf = std::numeric_limits<double>::infinity();

// int s^e ds
double prim(int e, double s) {
    if (e == -1) return std::log(s);
    return std::pow(s, e + 1) / (e + 1);
}

// int_0^b s^e ds for e > -1
double prim_from_zero(int e, double b) { return std::pow(b, e + 1) / (e + 1); }

double integral(const ProfilePiece& pc, int shift, double a, double b) {
    double s = 0;
    for (const auto& [k, c] : pc.coeffs) {
        if (c == 0) continue;
        int e = k + shift;
        s += c * (a == 0 ? prim_from_zero(e, b) : prim(e, b) - prim(e, a));
    }
    return s;
}

bool singular_piece(const ProfilePiece& pc, int shift) {
    if (pc.from != 0) return false;
    for (const auto& [k, c] : pc.coeffs)
        if (c != 0 && k + shift <= -1) return true;
    return false;
}

std::string fmt_double(double x) {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os.precision(17);
    os << x;
    return os.str();
}

void certify(const std::vector<ProfilePiece>& pcs) {
    if (pcs.empty()) throw ProfileError("profile has no pieces");
    if (pcs.front().from != 0 || pcs.back().to != 1) throw ProfileError("profile pieces must cover [0, 1]");
    for (std::size_t i = 0; i < pcs.size(); ++i) {
        if (!(pcs[i].to > pcs[i].from)) throw ProfileError("empty profile piece");
        if (i + 1 < pcs.size() && pcs[i].to != pcs[i + 1].from) throw ProfileError("profile pieces must be contiguous");
    }
    double prev = kInf;
    for (const auto& pc : pcs) {
        const int n = 256;
        for (int j = 0; j <= n; ++j) {
            double s = pc.from + (pc.to - pc.from) * j / n;
            if (s == 0) continue;
            double v = pc.eval(s);
            if (!std::isfinite(v)) throw ProfileError("profile not finite at r = " + fmt_double(s));
            double tol = 1e-12 * std::max(1.0, std::fabs(v));
            if (v < -tol) throw ProfileError("profile negative at r = " + fmt_double(s));
            if (v > prev + tol) throw ProfileError("profile not non-increasing at r = " + fmt_double(s));
            prev = v;
        }
    }
}

}  // namespace

double ProfilePiece::eval(double s) const {
    double v = 0;
    for (const auto& [k, c] : coeffs)
        if (c != 0) v += c * (k == 0 ? 1.0 : k == 1 ? s : std::pow(s, k));
    return v;
}

bool ProfilePiece::is_constant() const {
    for (const auto& [k, c] : coeffs)
        if (k != 0 && c != 0) return false;
    return true;
}

bool ProfilePiece::is_zero() const {
    for (const auto& [k, c] : coeffs)
        if (c != 0) return false;
    return true;
}

TwistProfile::TwistProfile(std::vector<ProfilePiece> pieces, std::string name)
    : pieces_(std::move(pieces)), name_(std::move(name)) {
    certify(pieces_);
}

TwistProfile TwistProfile::samples(const std::vector<double>& r, const std::vector<double>& f, std::string name) {
    if (r.size() != f.size() || r.size() < 2) throw ProfileError("sample arrays must match and have >= 2 points");
    std::vector<ProfilePiece> pcs;
    for (std::size_t i = 0; i + 1 < r.size(); ++i) {
        double a = r[i], b = r[i + 1];
        if (!(b > a)) throw ProfileError("sample radii must increase");
        double slope = (f[i + 1] - f[i]) / (b - a);
        ProfilePiece pc{a, b, {}};
        if (slope == 0) {
            pc.coeffs[0] = f[i];
        } else {
            pc.coeffs[0] = f[i] - slope * a;
            pc.coeffs[1] = slope;
        }
        pcs.push_back(pc);
    }
    return TwistProfile(std::move(pcs), std::move(name));
}

TwistProfile TwistProfile::from_json(const nlohmann::json& j) {
    std::string name = j.value("name", std::string("profile"));
    double unit = 1.0;
    std::string units = j.value("units", std::string("radians"));
    if (units == "turns") unit = kTwoPi;
    else if (units != "radians") throw ProfileError("units must be radians or turns");
    std::string kind = j.value("kind", std::string("piecewise"));
    if (kind == "named") return named(j.at("spec").get<std::string>());
    if (kind == "samples") {
        auto r = j.at("r").get<std::vector<double>>();
        auto f = j.at("f").get<std::vector<double>>();
        if (j.value("interpolation", std::string("linear")) != "linear") throw ProfileError("only linear interpolation");
        for (double& v : f) v *= unit;
        return samples(r, f, name);
    }
    if (kind != "piecewise") throw ProfileError("unknown profile kind: " + kind);
    std::vector<ProfilePiece> pcs;
    for (const auto& p : j.at("pieces")) {
        ProfilePiece pc{p.at("from").get<double>(), p.at("to").get<double>(), {}};
        for (const auto& [k, v] : p.at("coeffs").items()) pc.coeffs[std::stoi(k)] = v.get<double>() * unit;
        pcs.push_back(pc);
    }
    return TwistProfile(std::move(pcs), name);
}

TwistProfile TwistProfile::named(const std::string& spec) {
    auto colon = spec.find(':');
    std::string head = spec.substr(0, colon);
    double c = 1.0;
    if (colon != std::string::npos) {
        std::istringstream is(spec.substr(colon + 1));
        is.imbue(std::locale::classic());
        if (!(is >> c)) throw ProfileError("bad profile parameter: " + spec);
    }
    if (head == "zero") return TwistProfile({ProfilePiece{0, 1, {}}}, spec);
    if (head == "const") return TwistProfile({ProfilePiece{0, 1, {{0, c}}}}, spec);
    if (head == "lin")
        return TwistProfile({ProfilePiece{0, 0.9, {{0, kTwoPi * c}, {1, -kTwoPi * c / 0.9}}}, ProfilePiece{0.9, 1, {}}}, spec);
    if (head == "quad")
        return TwistProfile({ProfilePiece{0, 0.9, {{0, kTwoPi * c}, {2, -kTwoPi * c / 0.81}}}, ProfilePiece{0.9, 1, {}}}, spec);
    if (head == "inv-cube") return TwistProfile({ProfilePiece{0, 1, {{-3, 1}}}}, spec);
    if (head == "inv-cube-compact")
        return TwistProfile({ProfilePiece{0, 0.9, {{-3, 1}, {0, -1 / 0.729}}}, ProfilePiece{0.9, 1, {}}}, spec);
    throw ProfileError("unknown profile: " + spec);
}

TwistProfile TwistProfile::load(const std::string& spec) {
    if (!spec.empty() && spec.front() == '{') return from_json(nlohmann::json::parse(spec));
    std::ifstream in(spec);
    if (in) {
        nlohmann::json j;
        in >> j;
        return from_json(j);
    }
    return named(spec);
}

nlohmann::json TwistProfile::to_json() const {
    nlohmann::json j;
    j["name"] = name_;
    j["kind"] = "piecewise";
    j["units"] = "radians";
    j["pieces"] = nlohmann::json::array();
    for (const auto& pc : pieces_) {
        nlohmann::json c = nlohmann::json::object();
        for (const auto& [k, v] : pc.coeffs) c[std::to_string(k)] = v;
        j["pieces"].push_back({{"from", pc.from}, {"to", pc.to}, {"coeffs", c}});
    }
    return j;
}

double TwistProfile::operator()(double r) const {
    if (r <= 0) return at_zero();
    auto it = std::upper_bound(pieces_.begin(), pieces_.end(), r,
                               [](double x, const ProfilePiece& pc) { return x < pc.from; });
    const ProfilePiece& pc = *(it - 1);
    return pc.eval(r);
}

double TwistProfile::at_zero() const {
    if (singular_at_zero()) return kInf;
    const auto& pc = pieces_.front();
    auto it = pc.coeffs.find(0);
    return it == pc.coeffs.end() ? 0.0 : it->second;
}

bool TwistProfile::singular_at_zero() const {
    for (const auto& [k, c] : pieces_.front().coeffs)
        if (k < 0 && c != 0) return true;
    return false;
}

bool TwistProfile::support_flag() const { return pieces_.back().is_zero(); }

namespace {

std::vector<double> breakpoints(const TwistProfile& f) {
    std::vector<double> b;
    for (const auto& pc : f.pieces()) b.push_back(pc.from);
    b.push_back(1.0);
    return b;
}

// f restricted to [a, b], pieces clipped.
std::vector<ProfilePiece> clip(const TwistProfile& f, double a, double b) {
    std::vector<ProfilePiece> out;
    for (const auto& pc : f.pieces()) {
        double lo = std::max(pc.from, a), hi = std::min(pc.to, b);
        if (hi > lo) out.push_back(ProfilePiece{lo, hi, pc.coeffs});
    }
    return out;
}

}  // namespace

TwistProfile add_profiles(const TwistProfile& f, const TwistProfile& g) {
    auto bf = breakpoints(f), bg = breakpoints(g);
    std::set<double> all(bf.begin(), bf.end());
    all.insert(bg.begin(), bg.end());
    std::vector<double> b(all.begin(), all.end());
    std::vector<ProfilePiece> pcs;
    for (std::size_t i = 0; i + 1 < b.size(); ++i) {
        double mid = 0.5 * (b[i] + b[i + 1]);
        ProfilePiece pc{b[i], b[i + 1], {}};
        for (const auto* h : {&f, &g}) {
            auto it = std::upper_bound(h->pieces().begin(), h->pieces().end(), mid,
                                       [](double x, const ProfilePiece& p) { return x < p.from; });
            for (const auto& [k, c] : (it - 1)->coeffs) pc.coeffs[k] += c;
        }
        pcs.push_back(pc);
    }
    return TwistProfile(std::move(pcs), f.name() + "+" + g.name());
}

TwistProfile scale_profile(const TwistProfile& f, double c) {
    if (c < 0) throw ProfileError("negative scale breaks monotonicity");
    auto pcs = f.pieces();
    for (auto& pc : pcs)
        for (auto& [k, v] : pc.coeffs) v *= c;
    return TwistProfile(std::move(pcs), fmt_double(c) + "*" + f.name());
}

TwistProfile truncate_profile(const TwistProfile& f, int i) {
    if (i < 1) throw ProfileError("truncation index must be >= 1");
    if (i == 1) {
        return TwistProfile({ProfilePiece{0, 1, {{0, f(1.0)}}}}, f.name() + "|1");
    }
    double a = 1.0 / i;
    std::vector<ProfilePiece> pcs{ProfilePiece{0, a, {{0, f(a)}}}};
    auto rest = clip(f, a, 1.0);
    pcs.insert(pcs.end(), rest.begin(), rest.end());
    return TwistProfile(std::move(pcs), f.name() + "|" + std::to_string(i));
}

TwistProfile regularize_pole(const TwistProfile& f, double delta) {
    if (f.singular_at_zero()) throw ProfileError("cannot regularize a singular profile");
    double f0 = f.at_zero();
    if (f0 == 0) return f;
    if (!(delta > 0 && delta < 1)) throw ProfileError("pole delta must lie in (0, 1)");
    double top = kTwoPi * std::ceil(f0 / kTwoPi - 1e-12);
    double fd = f(delta);
    std::vector<ProfilePiece> pcs{ProfilePiece{0, delta, {{0, top}, {1, (fd - top) / delta}}}};
    auto rest = clip(f, delta, 1.0);
    pcs.insert(pcs.end(), rest.begin(), rest.end());
    return TwistProfile(std::move(pcs), f.name());
}

HamiltonianProfile::HamiltonianProfile(const TwistProfile& f) : f_(f) {
    const auto& pcs = f_.pieces();
    tail_.assign(pcs.size(), 0.0);
    double acc = 0;
    for (std::size_t i = pcs.size(); i-- > 0;) {
        tail_[i] = acc;
        if (i == 0 && singular_piece(pcs[0], 1))
            infinite_ = true;
        else
            acc += integral(pcs[i], 1, pcs[i].from, pcs[i].to);
    }
}

double HamiltonianProfile::operator()(double r) const {
    const auto& pcs = f_.pieces();
    if (r >= 1) return 0;
    if (r <= 0) {
        if (infinite_) return kInf;
        return tail_[0] + integral(pcs[0], 1, 0, pcs[0].to);
    }
    auto it = std::upper_bound(pcs.begin(), pcs.end(), r, [](double x, const ProfilePiece& pc) { return x < pc.from; });
    std::size_t i = static_cast<std::size_t>(it - pcs.begin()) - 1;
    return tail_[i] + integral(pcs[i], 1, r, pcs[i].to);
}

HamiltonianProfile hamiltonian_profile(const TwistProfile& f) { return HamiltonianProfile(f); }

namespace {

// int_a^b G(r) dr with G(r) = sum c_k prim(k + 1, r).
double integral_of_prim(const ProfilePiece& pc, double a, double b) {
    double s = 0;
    for (const auto& [k, c] : pc.coeffs) {
        if (c == 0) continue;
        int e = k + 1;
        auto F = [&](double x) -> double {
            if (x == 0) return 0.0;  // only reached for integrable terms
            if (e == -1) return x * std::log(x) - x;
            if (e == -2) return -std::log(x);
            return std::pow(x, e + 2) / ((e + 1.0) * (e + 2.0));
        };
        s += c * (F(b) - F(a));
    }
    return s;
}

double antiderivative_sf(const ProfilePiece& pc, double x) {
    double s = 0;
    for (const auto& [k, c] : pc.coeffs)
        if (c != 0) s += c * prim(k + 1, x);
    return s;
}

}  // namespace

CalabiValue calabi(const TwistProfile& f) {
    CalabiValue v;
    const auto& pcs = f.pieces();
    if (singular_piece(pcs[0], 2)) {
        v.value = v.exchanged = kInf;
        v.infinite = true;
        return v;
    }
    HamiltonianProfile H(f);
    double ex = 0, fu = 0;
    for (std::size_t i = 0; i < pcs.size(); ++i) {
        const auto& pc = pcs[i];
        ex += integral(pc, 2, pc.from, pc.to);
        double Hb = H(pc.to);
        double a = pc.from, b = pc.to;
        fu += (b - a) * (Hb + antiderivative_sf(pc, b)) - integral_of_prim(pc, a, b);
    }
    v.value = fu;
    v.exchanged = ex;
    double scale = std::max(std::fabs(fu), std::fabs(ex));
    v.rel_diff = scale == 0 ? 0 : std::fabs(fu - ex) / scale;
    v.fubini_ok = v.rel_diff <= 1e-9 || std::fabs(fu - ex) <= 1e-15;
    return v;
}

double calabi_area(const TwistProfile& f) {
    const auto& pcs = f.pieces();
    if (singular_piece(pcs[0], 3)) return kInf;
    double s = 0;
    for (const auto& pc : pcs) s += integral(pc, 3, pc.from, pc.to);
    return s;
}

double hofer_norm_bound(const TwistProfile& f) { return HamiltonianProfile(f)(0.0); }

double hofer_distance(const TwistProfile& f, const TwistProfile& g, int samples) {
    HamiltonianProfile Hf(f), Hg(g);
    if (Hf.infinite_at_zero() || Hg.infinite_at_zero()) return kInf;
    std::vector<double> rs;
    for (int i = 0; i < samples; ++i) rs.push_back(static_cast<double>(i) / (samples - 1));
    for (double b : breakpoints(f)) rs.push_back(b);
    for (double b : breakpoints(g)) rs.push_back(b);
    double lo = kInf, hi = -kInf;
    for (double r : rs) {
        double d = Hf(r) - Hg(r);
        lo = std::min(lo, d);
        hi = std::max(hi, d);
    }
    return hi - lo;
}

nlohmann::json PfhCalibration::to_json() const {
    return {{"sigma", sigma},
            {"twist_area", twist_area},
            {"pole_delta", pole_delta},
            {"positivity_floor", positivity_floor},
            {"reduction_cap", reduction_cap},
            {"complex_cap", complex_cap},
            {"generator_cap", generator_cap},
            {"filler_action", 0.0}};
}

void reject_rational_plateaus(const TwistProfile& f, int d) {
    for (const auto& pc : f.pieces()) {
        if (!pc.is_constant() || pc.is_zero()) continue;
        double t = pc.eval(0.5 * (pc.from + pc.to)) / kTwoPi;
        for (int q = 1; q <= d; ++q) {
            double p = std::round(t * q);
            if (p >= 1 && std::fabs(t * q - p) <= 1e-12 * q * std::max(1.0, t))
                throw PlateauError("plateau at rational level 2pi*" + std::to_string(static_cast<long long>(p)) + "/" +
                                       std::to_string(q) + " on [" + fmt_double(pc.from) + ", " + fmt_double(pc.to) +
                                       "]",
                                   pc.from, pc.to);
        }
    }
}

double level_radius(const TwistProfile& f, double t) {
    if (f(1.0) >= t) return 1.0;
    double lo = 0, hi = 1;
    while (hi - lo > 1e-12) {
        double mid = 0.5 * (lo + hi);
        if (mid > 0 && f(mid) >= t) lo = mid;
        else if (mid == 0) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

std::vector<PeriodicCircle> periodic_census(const TwistProfile& f, int d, const PfhCalibration& cal) {
    if (d < 1) throw ProfileError("degree bound must be >= 1");
    if (f.singular_at_zero()) throw ProfileError("profile unbounded at r = 0: infinitely many levels");
    reject_rational_plateaus(f, d);
    HamiltonianProfile H(f);
    double top = f.at_zero() / kTwoPi;
    std::vector<PeriodicCircle> out;
    for (std::int64_t q = 1; q <= d; ++q) {
        for (std::int64_t p = 1; static_cast<double>(p) <= top * q + 1e-12; ++p) {
            if (std::gcd(p, q) != 1) continue;
            double t = kTwoPi * static_cast<double>(p) / static_cast<double>(q);
            PeriodicCircle c;
            c.p = p;
            c.q = q;
            if (t >= f.at_zero()) {
                c.pole = true;
                c.r = 0;
            } else {
                c.r = level_radius(f, t);
            }
            c.action = static_cast<double>(q) * H(c.r) + cal.sigma * static_cast<double>(p) * 0.5 * (1 - c.r * c.r);
            out.push_back(c);
        }
    }
    std::sort(out.begin(), out.end(), [](const PeriodicCircle& a, const PeriodicCircle& b) {
        if (a.p * b.q != b.p * a.q) return a.p * b.q > b.p * a.q;
        return a.q < b.q;
    });
    return out;
}

double level_action(const TwistProfile& f, const PeriodicCircle& c, const PfhCalibration& cal) {
    double H = HamiltonianProfile(f)(c.r);
    return static_cast<double>(c.q) * H + cal.sigma * static_cast<double>(c.p) * 0.5 * (1 - c.r * c.r);
}

}  // namespace echlab
