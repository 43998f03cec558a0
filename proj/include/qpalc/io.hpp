#pragma once

// JSON file formats for models, tile instances and grid truncations.

#include <cstddef>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "qpalc/error.hpp"
#include "qpalc/kripke.hpp"
#include "qpalc/tiling.hpp"

namespace qpalc::io {

using json = nlohmann::json;

namespace detail {

inline ParseError at_offset(std::string_view text, std::size_t offset, const std::string& what) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return ParseError(what, line, col);
}

inline json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::string msg = e.what();
    // Keep only nlohmann's description; the position is reported separately.
    if (auto p = msg.find(": ", msg.find("parse error")); p != std::string::npos) msg = msg.substr(p + 2);
    std::size_t off = e.byte > 0 ? e.byte - 1 : 0;
    throw at_offset(text, off, "invalid JSON: " + msg);
  }
}

template <class E>
void require_keys(const json& j, std::string_view what, std::initializer_list<std::string_view> allowed,
                  std::initializer_list<std::string_view> required) {
  if (!j.is_object()) throw E(std::string(what) + " must be a JSON object");
  for (const auto& [k, v] : j.items()) {
    bool known = false;
    for (auto a : allowed) known = known || k == a;
    if (!known) throw E(std::string(what) + ": unknown key \"" + k + "\"");
  }
  for (auto r : required)
    if (!j.contains(r)) throw E(std::string(what) + ": missing key \"" + std::string(r) + "\"");
}

template <class E>
std::vector<std::string> strings(const json& j, const std::string& where) {
  if (!j.is_array()) throw E(where + " must be an array of strings");
  std::vector<std::string> out;
  for (const auto& x : j) {
    if (!x.is_string()) throw E(where + " must be an array of strings");
    out.push_back(x.get<std::string>());
  }
  return out;
}

template <class E>
std::size_t natural(const json& j, const std::string& where) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
    throw E(where + " must be a non-negative integer");
  return j.get<std::size_t>();
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Pair lists are recognised when every entry has two elements and the
// entries, read as blocks, would overlap or leave a state uncovered.
inline bool reads_as_pairs(const std::vector<std::string>& states, const std::vector<std::vector<std::string>>& arrays) {
  if (arrays.empty()) return false;
  for (const auto& a : arrays)
    if (a.size() != 2) return false;
  std::multiset<std::string> seen;
  for (const auto& a : arrays) seen.insert(a.begin(), a.end());
  for (const auto& s : seen)
    if (seen.count(s) > 1) return true;
  for (const auto& s : states)
    if (!seen.count(s)) return true;
  return false;
}

}  // namespace detail

inline ModelData model_data_from_json(std::string_view text) {
  json j = detail::parse_json(text);
  detail::require_keys<ModelError>(j, "model", {"agents", "states", "relations", "valuation", "designated"},
                                   {"agents", "states", "relations"});
  ModelData d;
  d.agents = detail::strings<ModelError>(j["agents"], "\"agents\"");
  d.states = detail::strings<ModelError>(j["states"], "\"states\"");
  const json& rel = j["relations"];
  if (!rel.is_object()) throw ModelError("\"relations\" must be an object");
  for (const auto& [agent, arr] : rel.items()) {
    if (!arr.is_array()) throw ModelError("relation of agent '" + agent + "' must be an array of arrays");
    std::vector<std::vector<std::string>> arrays;
    for (const auto& b : arr) arrays.push_back(detail::strings<ModelError>(b, "relation entry of agent '" + agent + "'"));
    if (detail::reads_as_pairs(d.states, arrays)) {
      std::set<std::string> known(d.states.begin(), d.states.end());
      std::vector<std::pair<std::string, std::string>> pairs;
      for (const auto& a : arrays) {
        for (const auto& s : a)
          if (!known.count(s)) throw ModelError("relation of agent '" + agent + "' names unknown state '" + s + "'");
        pairs.emplace_back(a[0], a[1]);
      }
      d.relations[agent] = close_pairs(d.states, pairs);
    } else {
      d.relations[agent] = std::move(arrays);
    }
  }
  if (j.contains("valuation")) {
    const json& val = j["valuation"];
    if (!val.is_object()) throw ModelError("\"valuation\" must be an object");
    for (const auto& [p, ss] : val.items()) d.valuation[p] = detail::strings<ModelError>(ss, "valuation of '" + p + "'");
  }
  if (j.contains("designated")) {
    if (!j["designated"].is_string()) throw ModelError("\"designated\" must be a string");
    d.designated = j["designated"].get<std::string>();
  }
  return d;
}

inline Model model_from_json(std::string_view text) { return Model::from_data(model_data_from_json(text)); }
inline Model load_model(const std::string& path) { return model_from_json(detail::read_file(path)); }

inline json model_to_json_value(const Model& m) {
  ModelData d = m.to_data();
  json j;
  j["agents"] = d.agents;
  j["states"] = d.states;
  j["relations"] = json::object();
  for (const auto& [a, blocks] : d.relations) j["relations"][a] = blocks;
  j["valuation"] = json::object();
  for (const auto& [p, ss] : d.valuation) j["valuation"][p] = ss;
  if (d.designated) j["designated"] = *d.designated;
  return j;
}

inline std::string model_to_json(const Model& m) { return model_to_json_value(m).dump(2) + "\n"; }

inline tiling::TileInstance instance_from_json(std::string_view text) {
  json j = detail::parse_json(text);
  detail::require_keys<TilingError>(j, "tile instance", {"colors", "tiles", "star"}, {"colors", "tiles"});
  tiling::TileInstance inst;
  inst.colors = detail::strings<TilingError>(j["colors"], "\"colors\"");
  if (!j["tiles"].is_array()) throw TilingError("\"tiles\" must be an array");
  for (const auto& t : j["tiles"]) {
    detail::require_keys<TilingError>(t, "tile", {"north", "south", "east", "west"}, {"north", "south", "east", "west"});
    for (const char* k : {"north", "south", "east", "west"})
      if (!t[k].is_string()) throw TilingError(std::string("tile side \"") + k + "\" must be a string");
    inst.tiles.push_back({t["north"].get<std::string>(), t["south"].get<std::string>(), t["east"].get<std::string>(),
                          t["west"].get<std::string>()});
  }
  if (j.contains("star") && !j["star"].is_null()) inst.star = detail::natural<TilingError>(j["star"], "\"star\"");
  tiling::require_valid(inst);
  return inst;
}

inline tiling::TileInstance load_instance(const std::string& path) {
  return instance_from_json(detail::read_file(path));
}

inline std::string instance_to_json(const tiling::TileInstance& inst) {
  json j;
  j["colors"] = inst.colors;
  j["tiles"] = json::array();
  for (const auto& t : inst.tiles)
    j["tiles"].push_back({{"north", t.north}, {"south", t.south}, {"east", t.east}, {"west", t.west}});
  if (inst.star) j["star"] = *inst.star;
  return j.dump(2) + "\n";
}

inline tiling::GridTruncation grid_from_json(std::string_view text) {
  json j = detail::parse_json(text);
  detail::require_keys<TilingError>(j, "grid", {"width", "height", "assignment"}, {"width", "height", "assignment"});
  tiling::GridTruncation g;
  g.width = detail::natural<TilingError>(j["width"], "\"width\"");
  g.height = detail::natural<TilingError>(j["height"], "\"height\"");
  if (!j["assignment"].is_array()) throw TilingError("\"assignment\" must be an array of rows");
  for (const auto& row : j["assignment"]) {
    if (!row.is_array()) throw TilingError("\"assignment\" rows must be arrays");
    std::vector<std::size_t> r;
    for (const auto& x : row) r.push_back(detail::natural<TilingError>(x, "assignment entry"));
    g.assignment.push_back(std::move(r));
  }
  return g;
}

inline std::string grid_to_json(const tiling::GridTruncation& g) {
  json j;
  j["width"] = g.width;
  j["height"] = g.height;
  j["assignment"] = g.assignment;
  return j.dump() + "\n";
}

}  // namespace qpalc::io
