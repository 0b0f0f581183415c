#include "echlab/rotation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace echlab {

std::int64_t floor_q(const Q& x) {
    std::int64_t n = x.numerator(), d = x.denominator();
    std::int64_t r = n / d;
    if ((n % d != 0) && (n < 0)) --r;
    return r;
}

std::int64_t ceil_q(const Q& x) { return -floor_q(-x); }

std::string to_string(const Q& x) {
    if (x.denominator() == 1) return std::to_string(x.numerator());
    return std::to_string(x.numerator()) + "/" + std::to_string(x.denominator());
}

Q parse_q(const std::string& s) {
    if (s.empty()) throw std::invalid_argument("empty rational");
    auto slash = s.find('/');
    try {
        if (slash != std::string::npos) {
            std::int64_t u = std::stoll(s.substr(0, slash));
            std::int64_t v = std::stoll(s.substr(slash + 1));
            if (v == 0) throw std::invalid_argument("zero denominator");
            return Q(u, v);
        }
        auto dot = s.find('.');
        if (dot == std::string::npos) return Q(std::stoll(s));
        std::string ip = s.substr(0, dot), fp = s.substr(dot + 1);
        if (fp.size() > 15) throw std::invalid_argument("too many decimals");
        bool neg = !ip.empty() && ip[0] == '-';
        std::int64_t den = 1;
        for (std::size_t i = 0; i < fp.size(); ++i) den *= 10;
        std::int64_t whole = (ip.empty() || ip == "-") ? 0 : std::llabs(std::stoll(ip));
        std::int64_t frac = fp.empty() ? 0 : std::stoll(fp);
        Q r = Q(whole) + Q(frac, den);
        return neg ? -r : r;
    } catch (const std::logic_error&) {
        throw std::invalid_argument("not a rational: " + s);
    }
}

const Q& Rotation::q() const {
    if (kind_ != Kind::Exact) throw std::logic_error("rotation is not exact");
    return q_;
}

long double Rotation::value() const {
    if (kind_ == Kind::Exact)
        return static_cast<long double>(q_.numerator()) / static_cast<long double>(q_.denominator());
    return x_;
}

long double Rotation::frac() const {
    if (kind_ == Kind::Exact) {
        Q f = q_ - Q(floor_q(q_));
        return static_cast<long double>(f.numerator()) / static_cast<long double>(f.denominator());
    }
    return x_ - std::floor(x_);
}

bool Rotation::is_integer() const { return kind_ == Kind::Exact && q_.denominator() == 1; }

bool Rotation::is_half_integer() const { return kind_ == Kind::Exact && q_.denominator() == 2; }

std::string Rotation::str() const {
    if (kind_ == Kind::Exact) return to_string(q_);
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os.precision(18);
    os << x_;
    return os.str();
}

namespace {

// floor and ceil of m*theta, with the degeneracy flag for reals.
struct FloorCeil {
    std::int64_t fl, ce;
    bool integral;
    bool snapped;
};

FloorCeil floor_ceil(const Rotation& theta, std::int64_t m, const CzOptions& opt, bool strict) {
    if (theta.is_exact()) {
        Q v = theta.q() * Q(m);
        std::int64_t f = floor_q(v), c = ceil_q(v);
        return {f, c, f == c, false};
    }
    long double v = theta.value() * static_cast<long double>(m);
    long double r = std::round(v);
    if (std::fabs(v - r) <= opt.tol) {
        if (strict && !opt.allow_degenerate)
            throw DegenerateRotation("degenerate rotation at multiplicity " + std::to_string(m),
                                     static_cast<int>(m));
        auto ri = static_cast<std::int64_t>(r);
        return {ri, ri, true, true};
    }
    return {static_cast<std::int64_t>(std::floor(v)), static_cast<std::int64_t>(std::ceil(v)), false,
            false};
}

Rotation frac_rotation(const Rotation& theta) {
    if (theta.is_exact()) return Rotation::exact(theta.q() - Q(floor_q(theta.q())));
    return Rotation::real(theta.frac());
}

// Partition from the hull vertex chain, splitting each edge at lattice points.
Partition parts_from_chain(const std::vector<std::pair<std::int64_t, std::int64_t>>& chain) {
    std::vector<int> parts;
    for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
        std::int64_t dx = chain[i + 1].first - chain[i].first;
        std::int64_t dy = chain[i + 1].second - chain[i].second;
        std::int64_t g = std::gcd(dx, dy < 0 ? -dy : dy);
        for (std::int64_t k = 0; k < g; ++k) parts.push_back(static_cast<int>(dx / g));
    }
    return make_partition(std::move(parts));
}

Partition hull_partition(const Rotation& theta, int m, const CzOptions& opt, bool upper) {
    if (m < 1) throw std::invalid_argument("multiplicity must be >= 1");
    Rotation f = frac_rotation(theta);
    std::vector<std::pair<std::int64_t, std::int64_t>> hull;
    for (int x = 0; x <= m; ++x) {
        FloorCeil fc = floor_ceil(f, x, opt, x == m && !theta.is_exact());
        std::pair<std::int64_t, std::int64_t> p{x, upper ? fc.fl : fc.ce};
        while (hull.size() >= 2) {
            auto [x1, y1] = hull[hull.size() - 2];
            auto [x2, y2] = hull.back();
            std::int64_t cr = (x2 - x1) * (p.second - y1) - (y2 - y1) * (p.first - x1);
            if (upper ? cr >= 0 : cr <= 0)
                hull.pop_back();
            else
                break;
        }
        hull.push_back(p);
    }
    return parts_from_chain(hull);
}

}  // namespace

CzValue cz_index_checked(const Rotation& theta, int m, const CzOptions& opt) {
    if (m < 1) throw std::invalid_argument("multiplicity must be >= 1");
    FloorCeil fc = floor_ceil(theta, m, opt, true);
    return {static_cast<int>(fc.fl + fc.ce), fc.snapped};
}

int cz_index(const Rotation& theta, int m, const CzOptions& opt) {
    return cz_index_checked(theta, m, opt).value;
}

bool Partition::contains(int part) const {
    return std::find(parts.begin(), parts.end(), part) != parts.end();
}

std::string Partition::str() const {
    std::string s = "(";
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(parts[i]);
    }
    return s + ")";
}

Partition make_partition(std::vector<int> parts) {
    std::sort(parts.begin(), parts.end(), std::greater<>());
    Partition p;
    p.total = std::accumulate(parts.begin(), parts.end(), 0);
    p.parts = std::move(parts);
    return p;
}

Partition partition_positive(const Rotation& theta, int m, const CzOptions& opt) {
    return hull_partition(theta, m, opt, true);
}

Partition partition_negative(const Rotation& theta, int m, const CzOptions& opt) {
    return hull_partition(theta, m, opt, false);
}

PartitionReport partition_properties(const Rotation& theta, int m, const CzOptions& opt) {
    if (m < 2) throw std::invalid_argument("partition_properties needs m >= 2");
    if (theta.is_integer()) throw std::invalid_argument("partition_properties needs non-integral theta");
    PartitionReport r;
    r.p_plus = partition_positive(theta, m, opt);
    r.p_minus = partition_negative(theta, m, opt);
    for (int a : r.p_plus.parts)
        if (r.p_minus.contains(a)) {
            r.disjoint = false;
            r.shared_part = a;
            break;
        }
    r.one_exclusive = r.p_plus.contains(1) != r.p_minus.contains(1);
    bool frac_small, cofrac_small;
    if (theta.is_exact()) {
        Q f = theta.q() - Q(floor_q(theta.q()));
        frac_small = f * Q(m) < Q(2);
        cofrac_small = (Q(1) - f) * Q(m) < Q(2);
    } else {
        long double f = theta.frac();
        frac_small = f * m < 2.0L;
        cofrac_small = (1.0L - f) * m < 2.0L;
    }
    r.m_frac = theta.frac() * m;
    r.m_cofrac = (1.0L - theta.frac()) * m;
    if (r.p_plus.size() + r.p_minus.size() <= 3) r.small_count_ok = frac_small || cofrac_small;
    return r;
}

namespace {

struct Cell {
    bool paired = false, disjoint = true, one = true, count = true, cz = true;
};

Cell grid_cell(const Rotation& th, int m) {
    Cell c;
    if (m >= 2 && !th.is_integer()) {
        c.paired = true;
        try {
            PartitionReport r = partition_properties(th, m);
            c.disjoint = r.disjoint;
            c.one = r.one_exclusive;
            c.count = r.small_count_ok;
        } catch (const DegenerateRotation&) {
            c.disjoint = c.one = c.count = false;
        }
    }
    try {
        int z = cz_index(th, m);
        if (th.is_exact()) {
            Q mt = th.q() * Q(m);
            bool integral = mt.denominator() == 1;
            Q gap = Q(z) - Q(2) * mt;
            c.cz = ((z % 2 != 0) == !integral) && gap <= Q(2) && gap >= Q(-2);
        } else {
            c.cz = (z % 2 != 0) && std::fabs(z - 2.0L * m * th.value()) <= 2.0L;
        }
    } catch (const DegenerateRotation&) {
        c.cz = false;
    }
    return c;
}

GridReport summarize(const std::vector<Rotation>& thetas, int m_lo, const std::vector<Cell>& cells, int width) {
    GridReport g;
    g.cases = cells.size();
    for (std::size_t k = 0; k < cells.size(); ++k) {
        const Cell& c = cells[k];
        auto where = [&] { return "theta=" + thetas[k / width].str() + " m=" + std::to_string(m_lo + int(k % width)); };
        bool bad = c.paired && !(c.disjoint && c.one && c.count);
        if (bad) {
            ++g.pair_failures;
            if (g.pair_witness.empty()) g.pair_witness = where();
        }
        g.disjoint_failures += !c.disjoint;
        g.one_failures += !c.one;
        g.count_failures += !c.count;
        if (!c.cz) {
            ++g.cz_failures;
            if (g.cz_witness.empty()) g.cz_witness = where();
        }
    }
    return g;
}

}  // namespace

GridReport partition_grid_serial(const std::vector<Rotation>& thetas, int m_lo, int m_hi) {
    const int width = m_hi - m_lo + 1;
    std::vector<Cell> cells(thetas.size() * width);
    for (std::size_t k = 0; k < cells.size(); ++k) cells[k] = grid_cell(thetas[k / width], m_lo + int(k % width));
    return summarize(thetas, m_lo, cells, width);
}

GridReport partition_grid_parallel(const std::vector<Rotation>& thetas, int m_lo, int m_hi) {
    const int width = m_hi - m_lo + 1;
    std::vector<Cell> cells(thetas.size() * width);
    const auto n = static_cast<std::int64_t>(cells.size());
#pragma omp parallel for schedule(dynamic, 64)
    for (std::int64_t k = 0; k < n; ++k) cells[k] = grid_cell(thetas[k / width], m_lo + int(k % width));
    return summarize(thetas, m_lo, cells, width);
}

}  // namespace echlab
