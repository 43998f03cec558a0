#pragma once

// Tiling instances, the grid-forcing formula compiler, and grid models built
// from finite tiling fragments.
//
// Proposition vocabulary: the five positions (north, south, east, west,
// centre), one atom per colour, tile_i for the i-th tile, and pstar for the
// designated tile. Agents: s (same square), v (vertical neighbours), h
// (horizontal neighbours).

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qpalc/error.hpp"
#include "qpalc/formula.hpp"
#include "qpalc/kripke.hpp"

namespace qpalc::tiling {

inline const std::string kNorth = "north", kSouth = "south", kEast = "east", kWest = "west", kCentre = "centre";
inline const std::string kStar = "pstar";
inline const std::string kH = "h", kV = "v", kS = "s";

inline const std::vector<std::string>& positions() {
  static const std::vector<std::string> p{kNorth, kSouth, kEast, kWest, kCentre};
  return p;
}

inline std::string tile_prop(std::size_t i) { return "tile_" + std::to_string(i); }

struct Tile {
  std::string north, south, east, west;

  const std::string& side(std::string_view pos) const {
    if (pos == kNorth) return north;
    if (pos == kSouth) return south;
    if (pos == kEast) return east;
    if (pos == kWest) return west;
    throw TilingError("tile has no side '" + std::string(pos) + "'");
  }
  friend bool operator==(const Tile&, const Tile&) = default;
};

struct TileInstance {
  std::vector<std::string> colors;
  std::vector<Tile> tiles;
  std::optional<std::size_t> star;
};

inline std::vector<std::string> validate(const TileInstance& inst) {
  std::vector<std::string> problems;
  std::set<std::string> palette;
  for (const auto& c : inst.colors) {
    if (!is_identifier(c)) problems.push_back("colour '" + c + "' is not an identifier");
    bool clash = c == kStar || c.rfind("tile_", 0) == 0 || c == "true" || c == "false" || c == "K" || c == "C";
    for (const auto& p : positions()) clash = clash || c == p;
    if (clash) problems.push_back("colour '" + c + "' collides with a reserved proposition name");
    if (!palette.insert(c).second) problems.push_back("colour '" + c + "' listed twice");
  }
  if (inst.tiles.empty()) problems.push_back("instance has no tiles");
  for (std::size_t i = 0; i < inst.tiles.size(); ++i) {
    const auto& t = inst.tiles[i];
    for (const auto* side : {&t.north, &t.south, &t.east, &t.west})
      if (!palette.count(*side)) problems.push_back("tile " + std::to_string(i) + " uses unknown colour '" + *side + "'");
  }
  if (inst.star && *inst.star >= inst.tiles.size())
    problems.push_back("star index " + std::to_string(*inst.star) + " out of range");
  return problems;
}

inline void require_valid(const TileInstance& inst) {
  auto p = validate(inst);
  if (!p.empty()) throw TilingError("invalid tile instance: " + p.front());
}

// Finite fragment of a tiling. assignment[j][i] is the tile at column i, row j
// (rows bottom-up).
struct GridTruncation {
  std::size_t width = 0, height = 0;
  std::vector<std::vector<std::size_t>> assignment;

  std::size_t at(std::size_t i, std::size_t j) const { return assignment.at(j).at(i); }
};

inline std::vector<std::string> validate(const TileInstance& inst, const GridTruncation& g) {
  std::vector<std::string> problems;
  if (g.width == 0 || g.height == 0) problems.push_back("grid dimensions must be positive");
  if (g.assignment.size() != g.height) {
    problems.push_back("assignment has " + std::to_string(g.assignment.size()) + " rows, expected " +
                       std::to_string(g.height));
    return problems;
  }
  for (std::size_t j = 0; j < g.height; ++j) {
    if (g.assignment[j].size() != g.width) {
      problems.push_back("row " + std::to_string(j) + " has wrong length");
      return problems;
    }
    for (std::size_t i = 0; i < g.width; ++i)
      if (g.assignment[j][i] >= inst.tiles.size()) {
        problems.push_back("cell (" + std::to_string(i) + "," + std::to_string(j) + ") names unknown tile");
        return problems;
      }
  }
  for (std::size_t j = 0; j < g.height; ++j)
    for (std::size_t i = 0; i < g.width; ++i) {
      const Tile& t = inst.tiles[g.at(i, j)];
      if (i + 1 < g.width && t.east != inst.tiles[g.at(i + 1, j)].west)
        problems.push_back("horizontal mismatch between (" + std::to_string(i) + "," + std::to_string(j) + ") and (" +
                           std::to_string(i + 1) + "," + std::to_string(j) + ")");
      if (j + 1 < g.height && t.north != inst.tiles[g.at(i, j + 1)].south)
        problems.push_back("vertical mismatch between (" + std::to_string(i) + "," + std::to_string(j) + ") and (" +
                           std::to_string(i) + "," + std::to_string(j + 1) + ")");
    }
  return problems;
}

// ---------------------------------------------------------------------------
// Compiler

enum class Flavor { Apal, Gal, Cal };

inline std::string_view to_string(Flavor f) {
  switch (f) {
    case Flavor::Apal: return "apal";
    case Flavor::Gal: return "gal";
    case Flavor::Cal: return "cal";
  }
  return "?";
}

inline Flavor parse_flavor(std::string_view s) {
  if (s == "apal") return Flavor::Apal;
  if (s == "gal") return Flavor::Gal;
  if (s == "cal") return Flavor::Cal;
  throw Error("unknown quantifier flavour '" + std::string(s) + "' (expected apal, gal or cal)");
}

inline const std::vector<std::string>& all_agents() {
  static const std::vector<std::string> g{kH, kS, kV};
  return g;
}

namespace detail {

inline Formula box_up(const Formula& f) { return know(kS, implies(atom(kNorth), know(kV, implies(atom(kSouth), f)))); }
inline Formula box_right(const Formula& f) { return know(kS, implies(atom(kEast), know(kH, implies(atom(kWest), f)))); }
inline Formula dia_up(const Formula& f) { return neg(box_up(neg(f))); }
inline Formula dia_right(const Formula& f) { return neg(box_right(neg(f))); }

inline Formula quantify(Flavor fl, const Formula& body) {
  switch (fl) {
    case Flavor::Apal: return apal_box(body);
    case Flavor::Gal: return gal_box(all_agents(), body);
    case Flavor::Cal: return cal_box(all_agents(), body);
  }
  return apal_box(body);
}

// "exactly this one of the list": x & ~y1 & ... (the negations as one conjunct).
inline Formula exactly(const std::string& x, const std::vector<std::string>& all) {
  std::vector<Formula> others;
  for (const auto& y : all)
    if (y != x) others.push_back(neg(atom(y)));
  return conj(atom(x), big_and(others));
}

}  // namespace detail

inline const std::vector<std::string>& component_tags() {
  static const std::vector<std::string> tags{"one_colour", "all_parts", "hor",      "vert",     "one_pos",
                                             "one_tile",   "state_col", "adj_tiles", "init",     "up",
                                             "right",      "right&up",  "up&right", "no_change", "tile_left"};
  return tags;
}

inline bool is_quantified_component(std::string_view tag) {
  return tag == "up" || tag == "right" || tag == "right&up" || tag == "up&right" || tag == "no_change";
}

// One named piece of the grid-forcing formula, with [!] replaced per flavour.
inline Formula compile_component(const TileInstance& inst, std::string_view tag, Flavor fl = Flavor::Apal) {
  require_valid(inst);
  using namespace detail;
  const auto& pos = positions();
  const Formula centre = atom(kCentre);

  if (tag == "one_colour") {
    std::vector<Formula> alts;
    for (const auto& c : inst.colors) alts.push_back(exactly(c, inst.colors));
    return big_or(alts);
  }
  if (tag == "all_parts") {
    std::vector<Formula> any, each;
    for (const auto& q : pos) {
      any.push_back(atom(q));
      each.push_back(possible(kS, atom(q)));
    }
    return conj(know(kS, big_or(any)), big_and(each));
  }
  if (tag == "hor" || tag == "vert") {
    bool h = tag == "hor";
    std::vector<std::string> fixed = h ? std::vector<std::string>{kNorth, kSouth, kCentre}
                                       : std::vector<std::string>{kEast, kWest, kCentre};
    std::vector<Formula> parts;
    for (const auto& q : fixed) parts.push_back(implies(atom(q), know(h ? kH : kV, atom(q))));
    return big_and(parts);
  }
  if (tag == "one_pos") {
    std::vector<Formula> alts;
    for (const auto& q : pos) alts.push_back(exactly(q, pos));
    return big_or(alts);
  }
  if (tag == "one_tile") {
    std::vector<Formula> alts;
    for (std::size_t i = 0; i < inst.tiles.size(); ++i) {
      std::vector<Formula> others;
      for (std::size_t j = 0; j < inst.tiles.size(); ++j)
        if (j != i) others.push_back(neg(atom(tile_prop(j))));
      alts.push_back(conj(conj(atom(tile_prop(i)), know(kS, atom(tile_prop(i)))), big_and(others)));
    }
    return big_or(alts);
  }
  if (tag == "state_col") {
    std::vector<Formula> alts;
    for (std::size_t i = 0; i < inst.tiles.size(); ++i) {
      std::vector<Formula> sides;
      for (const auto& q : pos)
        if (q != kCentre) sides.push_back(implies(atom(q), atom(inst.tiles[i].side(q))));
      alts.push_back(implies(atom(tile_prop(i)), big_and(sides)));
    }
    return big_or(alts);
  }
  if (tag == "adj_tiles") {
    std::vector<Formula> parts;
    for (const auto& c : inst.colors) {
      auto up = implies(conj(atom(kNorth), atom(c)), conj(possible(kV, atom(kSouth)), know(kV, atom(c))));
      auto right = implies(conj(atom(kEast), atom(c)), conj(possible(kH, atom(kWest)), know(kH, atom(c))));
      parts.push_back(conj(up, right));
    }
    return big_and(parts);
  }
  if (tag == "init") {
    auto left_edge = common({kV, kS}, implies(atom(kWest), know(kH, atom(kWest))));
    auto bottom_edge = common({kH, kS}, implies(atom(kSouth), know(kV, atom(kSouth))));
    return common_possible(all_agents(), conj(left_edge, bottom_edge));
  }
  const Formula target = possible(kS, centre);
  if (tag == "up") return quantify(fl, implies(dia_up(target), box_up(target)));
  if (tag == "right") return quantify(fl, implies(dia_right(target), box_right(target)));
  if (tag == "right&up" || tag == "right_up")
    return quantify(fl, implies(dia_right(dia_up(target)), box_up(box_right(target))));
  if (tag == "up&right" || tag == "up_right")
    return quantify(fl, implies(dia_up(dia_right(target)), box_right(box_up(target))));
  if (tag == "no_change") {
    std::vector<Formula> parts;
    for (const auto& q : pos)
      for (const auto& q2 : pos) {
        auto here = conj(atom(q), possible(kS, atom(q2)));
        auto moved = implies(atom(q), possible(kS, atom(q2)));
        parts.push_back(quantify(fl, implies(here, conj(know(kH, moved), know(kV, moved)))));
      }
    return big_and(parts);
  }
  if (tag == "tile_left") return implies(atom(kStar), know(kS, implies(atom(kWest), know(kH, atom(kWest)))));
  throw TilingError("unknown component tag '" + std::string(tag) + "'");
}

// one_colour restricted to non-centre states; centre states carry no colour
// in grid models.
inline Formula guarded_one_colour(const TileInstance& inst) {
  return implies(neg(atom(kCentre)), compile_component(inst, "one_colour"));
}

struct NamedFormula {
  std::string tag;
  Formula formula;
};

inline std::vector<NamedFormula> tile_conjuncts(const TileInstance& inst) {
  std::vector<NamedFormula> out{{"one_colour", guarded_one_colour(inst)}};
  for (const char* t : {"all_parts", "hor", "vert", "one_pos", "one_tile", "state_col"})
    out.push_back({t, compile_component(inst, t)});
  return out;
}

inline std::vector<NamedFormula> quantified_conjuncts(const TileInstance& inst, Flavor fl) {
  std::vector<NamedFormula> out;
  for (const char* t : {"up", "right", "right&up", "up&right", "no_change"})
    out.push_back({t, compile_component(inst, t, fl)});
  return out;
}

inline Formula big_and(const std::vector<NamedFormula>& parts) {
  std::vector<Formula> fs;
  for (const auto& p : parts) fs.push_back(p.formula);
  return qpalc::big_and(fs);
}

// Body of the grid formula as its five top-level groups, in order.
inline std::vector<NamedFormula> psi_body_groups(const TileInstance& inst, Flavor fl) {
  return {{"psi_tile", big_and(tile_conjuncts(inst))},
          {"adj_tiles", compile_component(inst, "adj_tiles")},
          {"init", compile_component(inst, "init")},
          {"psi_xy", big_and(quantified_conjuncts(inst, fl))},
          {"tile_left", compile_component(inst, "tile_left")}};
}

inline Formula compile_psi(const TileInstance& inst, Flavor fl = Flavor::Apal) {
  return common(all_agents(), big_and(psi_body_groups(inst, fl)));
}

// The row-deletion announcement: no star anywhere on the current row.
inline Formula star_free_rows() { return common({kH, kS}, neg(atom(kStar))); }

inline Formula compile_recurring(const TileInstance& inst, Flavor fl = Flavor::Apal) {
  if (!inst.star) throw TilingError("recurring formula needs a designated star tile");
  Formula psi = compile_psi(inst, fl);
  return conj(psi, common({kV, kS}, announce(star_free_rows(), neg(psi))));
}

// ---------------------------------------------------------------------------
// Grid models

inline std::string state_id(std::size_t i, std::size_t j, char pos) {
  return std::to_string(i) + "_" + std::to_string(j) + "_" + pos;
}

inline constexpr std::string_view kPosLetters = "nsewc";

inline std::string_view position_of_letter(char l) {
  switch (l) {
    case 'n': return kNorth;
    case 's': return kSouth;
    case 'e': return kEast;
    case 'w': return kWest;
    default: return kCentre;
  }
}

// Builds the grid model without checking colour matching; used for
// deliberately corrupted fixtures.
inline Model build_grid_model_unchecked(const TileInstance& inst, const GridTruncation& g) {
  ModelData d;
  d.agents = {kH, kS, kV};
  for (const auto& q : positions()) d.valuation[q];
  for (const auto& c : inst.colors) d.valuation[c];
  for (std::size_t k = 0; k < inst.tiles.size(); ++k) d.valuation[tile_prop(k)];
  d.valuation[kStar];

  auto& hb = d.relations[kH];
  auto& vb = d.relations[kV];
  auto& sb = d.relations[kS];
  for (std::size_t j = 0; j < g.height; ++j)
    for (std::size_t i = 0; i < g.width; ++i) {
      const std::size_t k = g.at(i, j);
      const Tile& t = inst.tiles[k];
      std::vector<std::string> square;
      for (char l : kPosLetters) {
        auto id = state_id(i, j, l);
        d.states.push_back(id);
        square.push_back(id);
        d.valuation[std::string(position_of_letter(l))].push_back(id);
        if (l != 'c') d.valuation[t.side(position_of_letter(l))].push_back(id);
        d.valuation[tile_prop(k)].push_back(id);
        if (inst.star && k == *inst.star) d.valuation[kStar].push_back(id);
      }
      sb.push_back(square);
      // v joins (i,j,n) with (i,j+1,s); h joins (i,j,e) with (i+1,j,w).
      if (j + 1 < g.height)
        vb.push_back({state_id(i, j, 'n'), state_id(i, j + 1, 's')});
      else
        vb.push_back({state_id(i, j, 'n')});
      if (j == 0) vb.push_back({state_id(i, j, 's')});
      if (i + 1 < g.width)
        hb.push_back({state_id(i, j, 'e'), state_id(i + 1, j, 'w')});
      else
        hb.push_back({state_id(i, j, 'e')});
      if (i == 0) hb.push_back({state_id(i, j, 'w')});
      for (char l : std::string_view("ewc")) vb.push_back({state_id(i, j, l)});
      for (char l : std::string_view("nsc")) hb.push_back({state_id(i, j, l)});
    }
  d.designated = state_id(0, 0, 'e');
  return Model::from_data(d);
}

inline Model build_grid_model(const TileInstance& inst, const GridTruncation& g) {
  require_valid(inst);
  auto problems = validate(inst, g);
  if (!problems.empty()) throw TilingError("invalid grid: " + problems.front());
  return build_grid_model_unchecked(inst, g);
}

// Crops the lower-left w x h corner.
inline GridTruncation crop(const GridTruncation& g, std::size_t w, std::size_t h) {
  GridTruncation out;
  out.width = std::min(w, g.width);
  out.height = std::min(h, g.height);
  for (std::size_t j = 0; j < out.height; ++j)
    out.assignment.emplace_back(g.assignment[j].begin(), g.assignment[j].begin() + static_cast<long>(out.width));
  return out;
}

// ---------------------------------------------------------------------------
// Brute-force tiler

inline constexpr std::size_t kMaxCells = 64;
inline constexpr std::size_t kMaxTiles = 8;

// First assignment in row-major lexicographic order satisfying the matching
// conditions. With `star_rows`, the star tile sits at (0, j) exactly for j in
// the set and nowhere else.
inline std::optional<GridTruncation> brute_force_tile(const TileInstance& inst, std::size_t width, std::size_t height,
                                                      const std::optional<std::set<std::size_t>>& star_rows = std::nullopt) {
  require_valid(inst);
  if (width == 0 || height == 0) throw TilingError("grid dimensions must be positive");
  if (width * height > kMaxCells || inst.tiles.size() > kMaxTiles)
    throw TilingError("brute-force bound exceeded (at most " + std::to_string(kMaxCells) + " cells and " +
                      std::to_string(kMaxTiles) + " tiles)");
  if (star_rows) {
    if (!inst.star) throw TilingError("star rows requested but the instance has no star tile");
    for (auto r : *star_rows)
      if (r >= height) throw TilingError("star row " + std::to_string(r) + " is outside the grid");
  }

  GridTruncation g;
  g.width = width;
  g.height = height;
  g.assignment.assign(height, std::vector<std::size_t>(width, 0));
  const std::size_t cells = width * height;

  auto allowed = [&](std::size_t cell, std::size_t k) {
    std::size_t i = cell % width, j = cell / width;
    const Tile& t = inst.tiles[k];
    if (i > 0 && inst.tiles[g.assignment[j][i - 1]].east != t.west) return false;
    if (j > 0 && inst.tiles[g.assignment[j - 1][i]].north != t.south) return false;
    if (star_rows) {
      bool want = i == 0 && star_rows->count(j);
      if ((k == *inst.star) != want) return false;
    }
    return true;
  };

  std::vector<std::size_t> next_choice(cells + 1, 0);
  std::size_t cell = 0;
  while (true) {
    if (cell == cells) return g;
    bool placed = false;
    for (std::size_t k = next_choice[cell]; k < inst.tiles.size(); ++k) {
      if (allowed(cell, k)) {
        g.assignment[cell / width][cell % width] = k;
        next_choice[cell] = k + 1;
        placed = true;
        break;
      }
    }
    if (placed) {
      ++cell;
      next_choice[cell] = 0;
      continue;
    }
    if (cell == 0) return std::nullopt;
    next_choice[cell] = 0;
    --cell;
  }
}

// ---------------------------------------------------------------------------
// Negative fixtures

namespace detail {

// Hand-assembled grid fragments: named squares with explicit v/h links.
class GadgetBuilder {
 public:
  void square(const std::string& id, const std::string& tile) {
    std::vector<std::string> members;
    for (char l : kPosLetters) {
      std::string s = id + "_" + l;
      d_.states.push_back(s);
      members.push_back(s);
      d_.valuation[std::string(position_of_letter(l))].push_back(s);
      d_.valuation[tile].push_back(s);
    }
    s_blocks_.push_back(members);
  }
  void vertical(const std::string& lower, const std::string& upper) { v_.emplace_back(lower + "_n", upper + "_s"); }
  void horizontal(const std::string& left, const std::string& right) { h_.emplace_back(left + "_e", right + "_w"); }

  Model build(const std::string& designated) {
    d_.agents = {kH, kS, kV};
    for (const auto& q : positions()) d_.valuation[q];
    d_.valuation[kStar];
    d_.relations[kS] = s_blocks_;
    d_.relations[kV] = close_pairs(d_.states, v_);
    d_.relations[kH] = close_pairs(d_.states, h_);
    d_.designated = designated;
    return Model::from_data(d_);
  }

 private:
  ModelData d_;
  std::vector<std::vector<std::string>> s_blocks_;
  std::vector<std::pair<std::string, std::string>> v_, h_;
};

}  // namespace detail

// Square X has two distinguishable squares A and B directly above it (both
// south parts share X's north part's v-class). `up` fails at X's states.
inline Model duplicated_north_gadget() {
  detail::GadgetBuilder b;
  b.square("X", tile_prop(0));
  b.square("A", tile_prop(1));
  b.square("B", tile_prop(2));
  b.vertical("X", "A");
  b.vertical("X", "B");
  return b.build("X_e");
}

// Right-then-up from X reaches A; up-then-right reaches a different,
// distinguishable square B. `right&up` fails at X's states.
inline Model non_commuting_gadget() {
  detail::GadgetBuilder b;
  b.square("X", tile_prop(0));
  b.square("R", tile_prop(1));
  b.square("U", tile_prop(2));
  b.square("A", tile_prop(3));
  b.square("B", tile_prop(4));
  b.horizontal("X", "R");
  b.vertical("R", "A");
  b.vertical("X", "U");
  b.horizontal("U", "B");
  return b.build("X_e");
}

// Copy of g with the tile at (1,0) replaced by one whose west colour differs
// from the east colour of (0,0). Requires width >= 2.
inline GridTruncation corrupt_adjacency(const TileInstance& inst, const GridTruncation& g) {
  if (g.width < 2) throw TilingError("adjacency corruption needs width >= 2");
  const std::string& east = inst.tiles[g.at(0, 0)].east;
  for (std::size_t k = 0; k < inst.tiles.size(); ++k)
    if (inst.tiles[k].west != east) {
      GridTruncation out = g;
      out.assignment[0][1] = k;
      return out;
    }
  throw TilingError("every tile matches (0,0) on the east; cannot corrupt the adjacency");
}

}  // namespace qpalc::tiling
