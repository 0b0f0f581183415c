#pragma once

#include "echlab/orbit.hpp"

#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace echlab {

// JSON documents for orbits, curves and towers; see docs/formats.md.

// "1/5" and integers are exact; "sqrt2", "0.7071" or a JSON float are real.
Rotation parse_rotation(const nlohmann::json& j);
nlohmann::json rotation_to_json(const Rotation& r);

using OrbitLibrary = std::map<std::string, SimpleOrbit>;

SimpleOrbit orbit_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SimpleOrbit& o);
OrbitLibrary library_from_json(const nlohmann::json& orbits);
nlohmann::json library_to_json(const std::vector<SimpleOrbit>& orbits);

OrbitSet orbit_set_from_json(const nlohmann::json& j, const OrbitLibrary& lib);
nlohmann::json to_json(const OrbitSet& a);

// Validates and fills the action.
CurveData curve_from_json(const nlohmann::json& j, const OrbitLibrary& lib);
nlohmann::json to_json(const CurveData& c);

// {"orbits": [...], "curves": [...]}; curves[i].beta must equal curves[i-1].alpha.
Tower tower_from_json(const nlohmann::json& doc);
nlohmann::json tower_to_json(const Tower& t);

// Orbits appearing in any endpoint, ordered by id.
std::vector<SimpleOrbit> orbits_of(const std::vector<CurveData>& curves);

}  // namespace echlab
