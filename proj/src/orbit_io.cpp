#include "echlab/orbit_io.hpp"

#include "echlab/ellipsoid.hpp"

namespace echlab {

namespace {

const nlohmann::json& field(const nlohmann::json& j, const char* key, const std::string& where) {
    if (!j.is_object() || !j.contains(key)) throw StructureError(where + ": missing field '" + key + "'");
    return j.at(key);
}

nlohmann::json q_to_json(const Q& q) {
    if (q.denominator() == 1) return q.numerator();
    return to_string(q);
}

std::vector<EndGroup> ends_from_json(const nlohmann::json& arr, const OrbitLibrary& lib, const std::string& where) {
    if (!arr.is_array()) throw StructureError(where + " must be an array");
    std::vector<EndGroup> out;
    for (const auto& e : arr) {
        EndGroup g;
        g.orbit = field(e, "orbit", where).get<std::string>();
        if (!lib.count(g.orbit)) throw StructureError(where + ": unknown orbit " + g.orbit);
        g.mults = field(e, "mults", where).get<std::vector<int>>();
        g.c0_present = e.value("c0", false);
        out.push_back(std::move(g));
    }
    return out;
}

nlohmann::json ends_to_json(const std::vector<EndGroup>& ends) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& g : ends) arr.push_back({{"orbit", g.orbit}, {"mults", g.mults}, {"c0", g.c0_present}});
    return arr;
}

}  // namespace

Rotation parse_rotation(const nlohmann::json& j) {
    if (j.is_number_integer()) return Rotation::exact(Q(j.get<std::int64_t>()));
    if (j.is_number()) return Rotation::real(j.get<long double>());
    if (!j.is_string()) throw StructureError("theta must be a number or a string");
    RealSpec r = parse_real(j.get<std::string>());
    return r.exact ? Rotation::exact(*r.exact) : Rotation::real(r.value);
}

nlohmann::json rotation_to_json(const Rotation& r) {
    if (r.is_exact()) return q_to_json(r.q());
    return static_cast<double>(r.value());
}

SimpleOrbit orbit_from_json(const nlohmann::json& j) {
    const std::string id = field(j, "id", "orbit").get<std::string>();
    const std::string where = "orbit " + id;
    Rotation theta = parse_rotation(field(j, "theta", where));
    int pc = j.value("period_count", 1);
    const auto& a = field(j, "action", where);
    SimpleOrbit o;
    if (a.is_number_integer()) {
        o = make_orbit(id, Q(a.get<std::int64_t>()), theta, pc);
    } else if (a.is_number()) {
        o = make_orbit(id, a.get<long double>(), theta, pc);
    } else if (a.is_string()) {
        RealSpec r = parse_real(a.get<std::string>());
        o = r.exact ? make_orbit(id, *r.exact, theta, pc) : make_orbit(id, r.value, theta, pc);
    } else {
        throw StructureError(where + ": action must be a number or a string");
    }
    if (j.contains("kind") && parse_orbit_kind(j.at("kind").get<std::string>()) != o.kind)
        throw StructureError(where + ": kind " + j.at("kind").get<std::string>() + " inconsistent with theta " +
                             theta.str());
    return o;
}

nlohmann::json to_json(const SimpleOrbit& o) {
    nlohmann::json j;
    j["id"] = o.id;
    j["action"] = o.exact_action ? q_to_json(o.action_exact) : nlohmann::json(static_cast<double>(o.action));
    j["theta"] = rotation_to_json(o.theta);
    j["kind"] = to_string(o.kind);
    if (o.period_count != 1) j["period_count"] = o.period_count;
    return j;
}

OrbitLibrary library_from_json(const nlohmann::json& orbits) {
    if (!orbits.is_array()) throw StructureError("orbits must be an array");
    OrbitLibrary lib;
    for (const auto& j : orbits) {
        SimpleOrbit o = orbit_from_json(j);
        if (!lib.emplace(o.id, o).second) throw StructureError("duplicate orbit id " + o.id);
    }
    return lib;
}

nlohmann::json library_to_json(const std::vector<SimpleOrbit>& orbits) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& o : orbits) arr.push_back(to_json(o));
    return arr;
}

OrbitSet orbit_set_from_json(const nlohmann::json& j, const OrbitLibrary& lib) {
    OrbitSet s;
    for (const auto& e : field(j, "entries", "orbit set")) {
        std::string id = field(e, "orbit", "orbit set entry").get<std::string>();
        auto it = lib.find(id);
        if (it == lib.end()) throw StructureError("orbit set: unknown orbit " + id);
        s.add(it->second, field(e, "m", "orbit set entry").get<int>());
    }
    return s;
}

nlohmann::json to_json(const OrbitSet& a) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [id, e] : a.entries()) arr.push_back({{"orbit", id}, {"m", e.second}});
    return {{"entries", arr}};
}

CurveData curve_from_json(const nlohmann::json& j, const OrbitLibrary& lib) {
    CurveData c;
    c.genus = j.value("genus", 0);
    c.c_tau = j.value("c_tau", 0);
    c.alpha = orbit_set_from_json(field(j, "alpha", "curve"), lib);
    c.beta = orbit_set_from_json(field(j, "beta", "curve"), lib);
    c.positive_ends = ends_from_json(field(j, "positive_ends", "curve"), lib, "positive_ends");
    c.negative_ends = ends_from_json(field(j, "negative_ends", "curve"), lib, "negative_ends");
    fill_action(c);
    validate_curve(c);
    return c;
}

nlohmann::json to_json(const CurveData& c) {
    return {{"genus", c.genus},
            {"c_tau", c.c_tau},
            {"alpha", to_json(c.alpha)},
            {"beta", to_json(c.beta)},
            {"positive_ends", ends_to_json(c.positive_ends)},
            {"negative_ends", ends_to_json(c.negative_ends)}};
}

Tower tower_from_json(const nlohmann::json& doc) {
    OrbitLibrary lib = library_from_json(field(doc, "orbits", "tower"));
    Tower t;
    for (const auto& cj : field(doc, "curves", "tower")) t.curves.push_back(curve_from_json(cj, lib));
    return t;
}

std::vector<SimpleOrbit> orbits_of(const std::vector<CurveData>& curves) {
    std::map<std::string, SimpleOrbit> seen;
    for (const auto& c : curves)
        for (const auto* s : {&c.alpha, &c.beta})
            for (const auto& [id, e] : s->entries()) seen.emplace(id, e.first);
    std::vector<SimpleOrbit> out;
    for (auto& [id, o] : seen) out.push_back(o);
    return out;
}

nlohmann::json tower_to_json(const Tower& t) {
    nlohmann::json curves = nlohmann::json::array();
    for (const auto& c : t.curves) curves.push_back(to_json(c));
    return {{"orbits", library_to_json(orbits_of(t.curves))}, {"curves", curves}};
}

}  // namespace echlab
