#pragma once

// Verification harness: builds a grid fixture from a tile instance and runs
// the conjunct suites, the row-deletion suite and the negative fixtures,
// collecting one record per check.

#include <chrono>
#include <cstddef>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "qpalc/bisim.hpp"
#include "qpalc/error.hpp"
#include "qpalc/formula.hpp"
#include "qpalc/kripke.hpp"
#include "qpalc/semantics.hpp"
#include "qpalc/tiling.hpp"

namespace qpalc::harness {

struct WitnessSummary {
  std::string quantifier;
  std::string state;
  std::vector<std::string> subset;
  std::string formula;
  bool reverified = false;
};

// verdict = "the check formula holds at every state in scope".
struct Record {
  std::string suite;
  std::string check;
  std::string scope;
  std::size_t states_checked = 0;
  bool expected = true;
  bool observed = true;
  bool skipped = false;
  std::vector<std::string> failing;  // states where the formula is false (first few)
  std::string detail;
  std::vector<WitnessSummary> witnesses;
  double elapsed_ms = 0;

  bool pass() const {
    if (skipped) return true;
    if (expected != observed) return false;
    for (const auto& w : witnesses)
      if (!w.reverified) return false;
    return true;
  }
};

struct Report {
  std::vector<Record> records;

  bool pass() const {
    for (const auto& r : records)
      if (!r.pass()) return false;
    return true;
  }

  std::string jsonl(bool timing = false) const {
    std::string out;
    for (std::size_t i = 0; i < records.size(); ++i) {
      const Record& r = records[i];
      nlohmann::json j;
      j["index"] = i;
      j["suite"] = r.suite;
      j["check"] = r.check;
      j["scope"] = r.scope;
      j["states_checked"] = r.states_checked;
      j["expected"] = r.expected;
      j["observed"] = r.observed;
      j["skipped"] = r.skipped;
      j["pass"] = r.pass();
      j["failing"] = r.failing;
      if (!r.detail.empty()) j["detail"] = r.detail;
      j["witnesses"] = nlohmann::json::array();
      for (const auto& w : r.witnesses)
        j["witnesses"].push_back({{"quantifier", w.quantifier},
                                  {"state", w.state},
                                  {"subset", w.subset},
                                  {"formula", w.formula},
                                  {"reverified", w.reverified}});
      if (timing) j["elapsed_ms"] = r.elapsed_ms;
      out += j.dump() + "\n";
    }
    return out;
  }

  std::string human() const {
    std::ostringstream os;
    std::size_t passed = 0;
    for (const auto& r : records) {
      os << (r.skipped ? "SKIP" : r.pass() ? "ok  " : "FAIL") << "  " << r.suite << " / " << r.check << "  ["
         << r.scope << "]";
      if (!r.skipped) {
        os << "  expected " << (r.expected ? "holds" : "fails") << ", observed " << (r.observed ? "holds" : "fails");
        os << " (" << r.states_checked << " states)";
      }
      os << "\n";
      if (!r.detail.empty()) os << "      " << r.detail << "\n";
      if (!r.failing.empty()) {
        os << "      false at:";
        for (const auto& s : r.failing) os << " " << s;
        os << "\n";
      }
      for (const auto& w : r.witnesses) {
        os << "      witness " << w.quantifier << " at " << w.state << ": {";
        for (std::size_t k = 0; k < w.subset.size(); ++k) os << (k ? "," : "") << w.subset[k];
        os << "} " << (w.reverified ? "re-verified" : "NOT re-verified") << "\n";
      }
      if (r.pass()) ++passed;
    }
    os << (pass() ? "PASS" : "FAIL") << ": " << passed << "/" << records.size() << " checks\n";
    return os.str();
  }
};

// Grid coordinates encoded in a state name "i_j_l".
struct GridPoint {
  std::size_t i = 0, j = 0;
  char pos = 'c';
};

inline std::optional<GridPoint> parse_grid_state(const std::string& name) {
  GridPoint p;
  auto u1 = name.find('_');
  auto u2 = name.find('_', u1 == std::string::npos ? u1 : u1 + 1);
  if (u1 == std::string::npos || u2 == std::string::npos || u2 + 2 != name.size()) return std::nullopt;
  try {
    p.i = std::stoul(name.substr(0, u1));
    p.j = std::stoul(name.substr(u1 + 1, u2 - u1 - 1));
  } catch (const std::exception&) {
    return std::nullopt;
  }
  p.pos = name.back();
  return p;
}

struct Options {
  tiling::Flavor flavor = tiling::Flavor::Apal;
  std::size_t budget = kDefaultBudget;
  std::size_t quantifier_crop = 3;
  std::size_t max_failing = 5;
};

namespace detail {

using Clock = std::chrono::steady_clock;

inline double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

inline std::string rows_text(std::size_t lo, std::size_t hi) {
  return lo == hi ? "row " + std::to_string(lo) : "rows " + std::to_string(lo) + ".." + std::to_string(hi);
}

// Evaluates f over `scope`, filling verdict and failing states.
inline void run_over(Checker& c, const Formula& f, const StateSet& scope, Record& r, std::size_t max_failing) {
  auto t0 = Clock::now();
  StateSet ext = c.extension(f);
  StateSet bad = scope - ext;
  r.states_checked = scope.size();
  r.observed = bad.empty();
  for (StateIdx s : bad.members()) {
    if (r.failing.size() >= max_failing) break;
    r.failing.push_back(c.model().state_name(s));
  }
  r.elapsed_ms = ms_since(t0);
}

inline std::vector<WitnessSummary> summarize(const std::vector<Witness>& ws) {
  std::vector<WitnessSummary> out;
  for (const auto& w : ws) {
    WitnessSummary s;
    s.quantifier = print(w.op == Op::ApalBox   ? apal_box(top())
                         : w.op == Op::GalBox ? gal_box(w.group, top())
                                              : cal_box(w.group, top()));
    s.quantifier = s.quantifier.substr(0, s.quantifier.size() - std::string(" true").size());
    s.state = w.state;
    s.subset = w.subset_names();
    s.formula = print(w.formula);
    s.reverified = reverify(w);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace detail

// States of a (possibly updated) grid model lying in rows lo..hi.
inline StateSet band_states(const Model& m, std::size_t lo, std::size_t hi) {
  StateSet out(m.num_states());
  for (StateIdx s = 0; s < m.num_states(); ++s)
    if (auto p = parse_grid_state(m.state_name(s)); p && p->j >= lo && p->j <= hi) out.insert(s);
  return out;
}

// Quantifier-free conjuncts of the grid formula's body at the interior states
// of rows lo..hi. adj_tiles is checked only at states with i < width-1 and
// j < height-1; the remaining conjuncts at every state of the band.
inline std::vector<Record> interior_suite(Checker& c, const tiling::TileInstance& inst, std::size_t width,
                                          std::size_t height, std::size_t lo, std::size_t hi, const std::string& suite,
                                          const Options& opt = {}) {
  std::vector<tiling::NamedFormula> checks = tiling::tile_conjuncts(inst);
  for (const char* t : {"adj_tiles", "init", "tile_left"}) checks.push_back({t, tiling::compile_component(inst, t)});
  const Model& m = c.model();
  StateSet band = band_states(m, lo, hi);
  StateSet inner(m.num_states());
  band.for_each([&](StateIdx s) {
    auto p = parse_grid_state(m.state_name(s));
    if (p->i + 1 < width && p->j + 1 < height) inner.insert(s);
  });
  std::vector<Record> out;
  for (const auto& nf : checks) {
    Record r;
    r.suite = suite;
    r.check = nf.tag;
    const bool adj = nf.tag == "adj_tiles";
    r.scope = (adj ? "interior of " : "") + detail::rows_text(lo, hi);
    detail::run_over(c, nf.formula, adj ? inner : band, r, opt.max_failing);
    out.push_back(std::move(r));
  }
  return out;
}

// The five quantified conjuncts at every state of a small grid model.
inline std::vector<Record> quantifier_suite(Checker& c, const tiling::TileInstance& inst, const std::string& scope,
                                            const Options& opt = {}) {
  std::vector<Record> out;
  for (const auto& nf : tiling::quantified_conjuncts(inst, opt.flavor)) {
    Record r;
    r.suite = "quantified";
    r.check = nf.tag;
    r.scope = scope;
    detail::run_over(c, nf.formula, c.model().all_states(), r, opt.max_failing);
    out.push_back(std::move(r));
  }
  return out;
}

// Row deletion by the star-free-rows announcement.
inline std::vector<Record> row_deletion_suite(Checker& c, const tiling::TileInstance& inst, std::size_t width,
                                              std::size_t height, const std::set<std::size_t>& star_rows,
                                              const Options& opt = {}) {
  std::vector<Record> out;
  const Model& m = c.model();
  const Formula ann = tiling::star_free_rows();

  StateSet expected_keep(m.num_states());
  for (StateIdx s = 0; s < m.num_states(); ++s)
    if (!star_rows.count(parse_grid_state(m.state_name(s))->j)) expected_keep.insert(s);

  Record ext_rec;
  ext_rec.suite = "row_deletion";
  ext_rec.check = "extension";
  ext_rec.scope = "all states";
  auto t0 = detail::Clock::now();
  StateSet ext = c.extension(ann);
  ext_rec.elapsed_ms = detail::ms_since(t0);
  ext_rec.states_checked = m.num_states();
  ext_rec.observed = ext == expected_keep;
  ext_rec.detail = print(ann) + " holds on " + std::to_string(ext.size()) + " states";
  out.push_back(ext_rec);

  Record removed;
  removed.suite = "row_deletion";
  removed.check = "removed_states";
  removed.scope = "all states";
  removed.states_checked = m.num_states();
  const std::size_t want = star_rows.size() * width * 5;
  const std::size_t got = m.num_states() - ext.size();
  removed.observed = got == want && ext == expected_keep;
  removed.detail = "update removed " + std::to_string(got) + " states, expected " + std::to_string(want) + " (" +
                   std::to_string(star_rows.size()) + " rows x " + std::to_string(width) + " columns x 5)";
  out.push_back(removed);
  if (ext.empty()) return out;

  Checker updated = c.update(ann);
  // Maximal runs of surviving rows.
  std::vector<std::pair<std::size_t, std::size_t>> bands;
  for (std::size_t j = 0; j < height; ++j) {
    if (star_rows.count(j)) continue;
    if (!bands.empty() && bands.back().second + 1 == j)
      bands.back().second = j;
    else
      bands.emplace_back(j, j);
  }
  for (auto [lo, hi] : bands) {
    if (hi + 1 == height) {
      // Nothing removed above: the band still looks like the bottom of a grid.
      auto rs = interior_suite(updated, inst, width, height, lo, hi, "row_deletion_band", opt);
      out.insert(out.end(), rs.begin(), rs.end());
    } else {
      // The row above was deleted: north parts lose their v-partners.
      Record r;
      r.suite = "row_deletion_band";
      r.check = "adj_tiles";
      r.expected = false;
      const Model& um = updated.model();
      StateSet scope(um.num_states());
      band_states(um, lo, hi).for_each([&](StateIdx s) {
        auto p = parse_grid_state(um.state_name(s));
        if (p->i + 1 < width && p->j + 1 < height) scope.insert(s);
      });
      r.scope = "interior of " + detail::rows_text(lo, hi);
      detail::run_over(updated, tiling::compile_component(inst, "adj_tiles"), scope, r, opt.max_failing);
      out.push_back(std::move(r));
    }
  }
  return out;
}

inline Record expect_false_at(const std::string& suite, const std::string& check, const Model& m,
                              const std::string& state, const Formula& f, const Options& opt) {
  Record r;
  r.suite = suite;
  r.check = check;
  r.scope = state;
  r.expected = false;
  r.states_checked = 1;
  auto t0 = detail::Clock::now();
  Checker c(m, opt.budget);
  r.observed = c.check(state, f);
  if (!r.observed) {
    r.failing.push_back(state);
    r.witnesses = detail::summarize(c.explain(state, f));
  }
  r.elapsed_ms = detail::ms_since(t0);
  return r;
}

inline std::vector<Record> gadget_suite(const tiling::TileInstance& inst, const tiling::GridTruncation& grid,
                                        const Options& opt = {}) {
  std::vector<Record> out;
  // The gadgets' tile propositions are fresh; only positions and agents matter.
  tiling::TileInstance plain{{"c"}, {{"c", "c", "c", "c"}}, std::nullopt};
  out.push_back(expect_false_at("gadget", "duplicated_north_neighbour/up", tiling::duplicated_north_gadget(), "X_e",
                                tiling::compile_component(plain, "up", opt.flavor), opt));
  out.push_back(expect_false_at("gadget", "non_commuting/right&up", tiling::non_commuting_gadget(), "X_e",
                                tiling::compile_component(plain, "right&up", opt.flavor), opt));
  try {
    auto bad = tiling::corrupt_adjacency(inst, tiling::crop(grid, 2, 1));
    out.push_back(expect_false_at("gadget", "colour_mismatch/adj_tiles", tiling::build_grid_model_unchecked(inst, bad),
                                  "0_0_e", tiling::compile_component(inst, "adj_tiles"), opt));
  } catch (const TilingError& e) {
    Record r;
    r.suite = "gadget";
    r.check = "colour_mismatch/adj_tiles";
    r.scope = "0_0_e";
    r.skipped = true;
    r.detail = e.what();
    out.push_back(std::move(r));
  }
  return out;
}

struct VerifyRequest {
  tiling::TileInstance instance;
  std::size_t width = 0, height = 0;
  std::optional<std::set<std::size_t>> star_rows;
  Options options;
};

// Full verification run. Throws TilingError if no fixture tiling exists.
inline Report verify(const VerifyRequest& req) {
  const auto& inst = req.instance;
  const Options& opt = req.options;
  auto grid = tiling::brute_force_tile(inst, req.width, req.height, req.star_rows);
  if (!grid) throw TilingError("no tiling of " + std::to_string(req.width) + "x" + std::to_string(req.height) +
                               " exists under the requested constraints");
  Report rep;
  {
    Record r;
    r.suite = "fixture";
    r.check = "grid_valid";
    r.scope = std::to_string(req.width) + "x" + std::to_string(req.height);
    auto problems = tiling::validate(inst, *grid);
    r.observed = problems.empty();
    r.states_checked = req.width * req.height * tiling::positions().size();
    r.detail = problems.empty() ? "assignment re-validated against the matching conditions" : problems.front();
    rep.records.push_back(r);
  }
  Checker full(tiling::build_grid_model(inst, *grid), opt.budget);
  auto interior = interior_suite(full, inst, req.width, req.height, 0, req.height - 1, "interior", opt);
  rep.records.insert(rep.records.end(), interior.begin(), interior.end());

  std::size_t cw = std::min(opt.quantifier_crop, req.width), ch = std::min(opt.quantifier_crop, req.height);
  Checker small(tiling::build_grid_model(inst, tiling::crop(*grid, cw, ch)), opt.budget);
  auto quant = quantifier_suite(small, inst, std::to_string(cw) + "x" + std::to_string(ch) + " crop, all states", opt);
  rep.records.insert(rep.records.end(), quant.begin(), quant.end());

  if (req.star_rows && !req.star_rows->empty()) {
    auto rows = row_deletion_suite(full, inst, req.width, req.height, *req.star_rows, opt);
    rep.records.insert(rep.records.end(), rows.begin(), rows.end());
  }
  auto gadgets = gadget_suite(inst, *grid, opt);
  rep.records.insert(rep.records.end(), gadgets.begin(), gadgets.end());
  return rep;
}

}  // namespace qpalc::harness
