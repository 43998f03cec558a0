#include <gtest/gtest.h>

#include <functional>

#include "qpalc/bisim.hpp"
#include "qpalc/harness.hpp"
#include "qpalc/io.hpp"
#include "qpalc/parser.hpp"
#include "qpalc/semantics.hpp"
#include "qpalc/tiling.hpp"

using namespace qpalc;
using namespace qpalc::tiling;

namespace {

TileInstance load(const std::string& name) { return io::load_instance(QPALC_DATA_DIR "/instances/" + name + ".json"); }

TileInstance single() { return load("single"); }

// Every quantifier node of f, in pre-order.
std::vector<Formula> quantifier_nodes(const Formula& f) {
  std::vector<Formula> out;
  std::function<void(const Formula&)> walk = [&](const Formula& g) {
    switch (g.op()) {
      case Op::Atom:
      case Op::Top: return;
      case Op::And:
        walk(g.left());
        walk(g.right());
        return;
      case Op::Announce:
        walk(g.announcement());
        walk(g.body());
        return;
      case Op::ApalBox:
      case Op::GalBox:
      case Op::CalBox: out.push_back(g); [[fallthrough]];
      default: walk(g.body());
    }
  };
  walk(f);
  return out;
}

// Matching conditions checked directly on the assignment, independent of
// tiling::validate.
bool matches(const TileInstance& inst, const GridTruncation& g) {
  for (std::size_t j = 0; j < g.height; ++j)
    for (std::size_t i = 0; i < g.width; ++i) {
      const Tile& t = inst.tiles[g.assignment[j][i]];
      if (i + 1 < g.width && t.east != inst.tiles[g.assignment[j][i + 1]].west) return false;
      if (j + 1 < g.height && t.north != inst.tiles[g.assignment[j + 1][i]].south) return false;
    }
  return true;
}

// First valid assignment by plain counting over all |T|^(w*h) assignments in
// row-major order, most significant cell first.
std::optional<GridTruncation> first_by_counting(const TileInstance& inst, std::size_t w, std::size_t h) {
  const std::size_t n = inst.tiles.size(), cells = w * h;
  std::size_t total = 1;
  for (std::size_t k = 0; k < cells; ++k) total *= n;
  for (std::size_t code = 0; code < total; ++code) {
    GridTruncation g{w, h, std::vector<std::vector<std::size_t>>(h, std::vector<std::size_t>(w))};
    std::size_t c = code;
    for (std::size_t k = cells; k-- > 0;) {
      g.assignment[k / w][k % w] = c % n;
      c /= n;
    }
    if (matches(inst, g)) return g;
  }
  return std::nullopt;
}

bool all_pass(const std::vector<harness::Record>& rs) {
  for (const auto& r : rs)
    if (!r.pass()) return false;
  return true;
}

}  // namespace

TEST(Compile, OneColourWithSingleColour) {
  EXPECT_EQ(compile_component(single(), "one_colour"), conj(atom("c"), top()));
  EXPECT_EQ(guarded_one_colour(single()), implies(neg(atom("centre")), conj(atom("c"), top())));
}

TEST(Compile, ConjunctCounts) {
  auto inst = load("checker");
  auto tile = tile_conjuncts(inst);
  ASSERT_EQ(tile.size(), 7u);
  std::vector<std::string> tags;
  for (const auto& nf : tile) tags.push_back(nf.tag);
  EXPECT_EQ(tags, (std::vector<std::string>{"one_colour", "all_parts", "hor", "vert", "one_pos", "one_tile",
                                            "state_col"}));
  EXPECT_EQ(quantified_conjuncts(inst, Flavor::Apal).size(), 5u);
  EXPECT_EQ(psi_body_groups(inst, Flavor::Apal).size(), 5u);
}

TEST(Compile, BoxUpExpansion) {
  Formula up = compile_component(single(), "up");
  ASSERT_EQ(up.op(), Op::ApalBox);
  const Formula target = possible("s", atom("centre"));
  const Formula box_up = know("s", implies(atom("north"), know("v", implies(atom("south"), target))));
  EXPECT_EQ(up.body(), implies(neg(know("s", implies(atom("north"), know("v", implies(atom("south"), neg(target)))))),
                               box_up));
  EXPECT_EQ(fragment_of(up), Fragment::APALC);
  EXPECT_EQ(quantifier_nodes(up).size(), 1u);
}

TEST(Compile, PsiShapeAndFlavours) {
  auto inst = load("checker");
  Formula psi = compile_psi(inst);
  ASSERT_EQ(psi.op(), Op::Common);
  EXPECT_EQ(psi.agents(), (std::vector<std::string>{"h", "s", "v"}));
  EXPECT_EQ(fragment_of(psi), Fragment::APALC);
  // up, right, right&up, up&right, and one per pair of positions in no_change.
  const std::size_t expected = 4 + positions().size() * positions().size();
  EXPECT_EQ(quantifier_nodes(psi).size(), expected);

  for (auto [fl, op] : {std::pair{Flavor::Gal, Op::GalBox}, std::pair{Flavor::Cal, Op::CalBox}}) {
    auto qs = quantifier_nodes(compile_psi(inst, fl));
    EXPECT_EQ(qs.size(), expected);
    for (const auto& q : qs) {
      EXPECT_EQ(q.op(), op);
      EXPECT_EQ(q.agents(), (std::vector<std::string>{"h", "s", "v"}));
    }
  }
  EXPECT_EQ(compile_psi(inst, Flavor::Gal), substitute_quantifier(psi, Op::GalBox, {"h", "s", "v"}));
}

TEST(Compile, RecurringShape) {
  auto inst = load("striped_star");
  Formula r = compile_recurring(inst);
  ASSERT_EQ(r.op(), Op::And);
  Formula psi = compile_psi(inst);
  EXPECT_EQ(r.left(), psi);
  Formula rest = r.right();
  ASSERT_EQ(rest.op(), Op::Common);
  EXPECT_EQ(rest.agents(), (std::vector<std::string>{"s", "v"}));
  ASSERT_EQ(rest.body().op(), Op::Announce);
  EXPECT_EQ(rest.body().announcement(), parse("C {h,s} ~pstar"));
  EXPECT_EQ(rest.body().body(), neg(psi));
  EXPECT_EQ(fragment_of(r), Fragment::APALC);
}

TEST(Compile, Errors) {
  EXPECT_THROW(compile_recurring(single()), TilingError);
  EXPECT_THROW(compile_component(single(), "diagonal"), TilingError);
  TileInstance bad{{"c", "north"}, {{"c", "c", "c", "c"}}, std::nullopt};
  EXPECT_THROW(compile_psi(bad), TilingError);
  TileInstance bad_star{{"c"}, {{"c", "c", "c", "c"}}, 3};
  EXPECT_FALSE(validate(bad_star).empty());
  TileInstance unknown_colour{{"c"}, {{"c", "d", "c", "c"}}, std::nullopt};
  EXPECT_FALSE(validate(unknown_colour).empty());
}

TEST(Compile, Deterministic) {
  auto inst = load("checker_star");
  EXPECT_EQ(print(compile_recurring(inst, Flavor::Cal)), print(compile_recurring(inst, Flavor::Cal)));
  EXPECT_EQ(compile_component(inst, "right_up"), compile_component(inst, "right&up"));
  EXPECT_EQ(compile_component(inst, "up_right"), compile_component(inst, "up&right"));
}

TEST(GridModel, OneByOne) {
  Model m = build_grid_model(single(), GridTruncation{1, 1, {{0}}});
  EXPECT_EQ(m.num_states(), 5u);
  EXPECT_EQ(m.blocks(m.agent_index("s")).size(), 1u);
  EXPECT_EQ(m.blocks(m.agent_index("h")).size(), 5u);
  EXPECT_EQ(m.blocks(m.agent_index("v")).size(), 5u);
  EXPECT_EQ(m.state_name(*m.designated()), "0_0_e");
  EXPECT_NO_THROW(m.prop_index("pstar"));
  EXPECT_TRUE(m.valuation("pstar").empty());
}

TEST(GridModel, TwoByTwoLinks) {
  Model m = build_grid_model(single(), *brute_force_tile(single(), 2, 2));
  EXPECT_EQ(m.num_states(), 20u);
  EXPECT_EQ(state_names(m, agent_class(m, "v", "0_0_n")), (std::vector<std::string>{"0_0_n", "0_1_s"}));
  EXPECT_EQ(state_names(m, agent_class(m, "h", "0_1_e")), (std::vector<std::string>{"0_1_e", "1_1_w"}));
  EXPECT_EQ(state_names(m, agent_class(m, "v", "0_1_n")), (std::vector<std::string>{"0_1_n"}));
  EXPECT_EQ(state_names(m, agent_class(m, "h", "0_0_n")), (std::vector<std::string>{"0_0_n"}));
}

TEST(GridModel, Valuation) {
  auto inst = load("checker");
  auto g = *brute_force_tile(inst, 2, 2);
  Model m = build_grid_model(inst, g);
  Checker c(m);
  const Tile& t = inst.tiles[g.at(0, 0)];
  EXPECT_TRUE(c.check("0_0_n", atom("north")));
  EXPECT_TRUE(c.check("0_0_n", atom(t.north)));
  EXPECT_TRUE(c.check("0_0_w", atom(t.west)));
  EXPECT_TRUE(c.check("0_0_c", parse("(~a & ~b)")));
  for (const char* l : {"n", "s", "e", "w", "c"})
    EXPECT_TRUE(c.check(std::string("1_1_") + l, atom(tile_prop(g.at(1, 1)))));
}

TEST(GridModel, RejectsMismatchedGrid) {
  auto inst = load("checker");
  auto g = *brute_force_tile(inst, 2, 2);
  auto bad = corrupt_adjacency(inst, g);
  EXPECT_FALSE(validate(inst, bad).empty());
  EXPECT_THROW(build_grid_model(inst, bad), TilingError);
  EXPECT_NO_THROW(build_grid_model_unchecked(inst, bad));
  GridTruncation ragged{2, 2, {{0, 0}, {0}}};
  EXPECT_FALSE(validate(inst, ragged).empty());
}

TEST(BruteForce, Examples) {
  auto g = brute_force_tile(single(), 5, 3);
  ASSERT_TRUE(g);
  for (const auto& row : g->assignment)
    for (auto k : row) EXPECT_EQ(k, 0u);

  TileInstance clash{{"a", "b"}, {{"a", "a", "a", "b"}, {"b", "b", "a", "b"}}, std::nullopt};
  EXPECT_FALSE(brute_force_tile(clash, 2, 1));
  EXPECT_TRUE(brute_force_tile(clash, 1, 2));

  auto checker = load("checker");
  auto c = brute_force_tile(checker, 4, 4);
  ASSERT_TRUE(c);
  EXPECT_TRUE(matches(checker, *c));
  EXPECT_TRUE(validate(checker, *c).empty());
}

TEST(BruteForce, FirstInLexicographicOrder) {
  for (const char* name : {"single", "checker", "striped_star", "checker_star"}) {
    auto inst = load(name);
    for (auto [w, h] : std::vector<std::pair<std::size_t, std::size_t>>{{1, 1}, {2, 1}, {1, 3}, {2, 2}, {3, 2}}) {
      auto got = brute_force_tile(inst, w, h);
      auto want = first_by_counting(inst, w, h);
      ASSERT_EQ(got.has_value(), want.has_value()) << name;
      if (got) {
        EXPECT_EQ(got->assignment, want->assignment) << name << " " << w << "x" << h;
      }
    }
  }
}

TEST(BruteForce, StarRows) {
  auto inst = load("striped_star");
  auto g = brute_force_tile(inst, 6, 6, std::set<std::size_t>{0, 2, 3});
  ASSERT_TRUE(g);
  EXPECT_TRUE(matches(inst, *g));
  for (std::size_t j = 0; j < 6; ++j)
    for (std::size_t i = 0; i < 6; ++i)
      EXPECT_EQ(g->at(i, j) == *inst.star, i == 0 && (j == 0 || j == 2 || j == 3));

  auto even = brute_force_tile(load("checker_star"), 6, 7, std::set<std::size_t>{0, 2, 4, 6});
  ASSERT_TRUE(even);
  // The star's east colour matches no west side, so it only fits a single column.
  TileInstance blocked{{"a", "z"}, {{"a", "a", "a", "a"}, {"a", "a", "z", "a"}}, 1};
  EXPECT_TRUE(brute_force_tile(blocked, 1, 3, std::set<std::size_t>{1}));
  EXPECT_FALSE(brute_force_tile(blocked, 2, 3, std::set<std::size_t>{1}));
}

TEST(BruteForce, Errors) {
  EXPECT_THROW(brute_force_tile(single(), 9, 8), TilingError);
  EXPECT_THROW(brute_force_tile(single(), 0, 2), TilingError);
  EXPECT_THROW(brute_force_tile(single(), 2, 2, std::set<std::size_t>{0}), TilingError);
  EXPECT_THROW(brute_force_tile(load("striped_star"), 2, 2, std::set<std::size_t>{2}), TilingError);
  TileInstance many{{"c"}, std::vector<Tile>(9, Tile{"c", "c", "c", "c"}), std::nullopt};
  EXPECT_THROW(brute_force_tile(many, 1, 1), TilingError);
}

TEST(Coherence, InteriorConjunctsHoldOnFixtures) {
  for (const char* name : {"single", "checker", "striped_star", "checker_star"}) {
    auto inst = load(name);
    for (std::size_t n = 1; n <= 5; ++n) {
      auto g = brute_force_tile(inst, n, n);
      ASSERT_TRUE(g) << name;
      Checker c(build_grid_model(inst, *g));
      auto rs = harness::interior_suite(c, inst, n, n, 0, n - 1, "interior");
      for (const auto& r : rs) EXPECT_TRUE(r.pass()) << name << " " << n << "x" << n << " " << r.check;
    }
  }
}

TEST(Coherence, QuantifiedConjunctsHoldOnSmallFixtures) {
  for (const char* name : {"single", "checker", "checker_star"}) {
    auto inst = load(name);
    for (auto [w, h] : std::vector<std::pair<std::size_t, std::size_t>>{{1, 1}, {2, 2}, {3, 2}, {3, 3}})
      for (auto fl : {Flavor::Apal, Flavor::Gal, Flavor::Cal}) {
        Checker c(build_grid_model(inst, *brute_force_tile(inst, w, h)));
        harness::Options opt;
        opt.flavor = fl;
        for (const auto& r : harness::quantifier_suite(c, inst, "all", opt))
          EXPECT_TRUE(r.pass()) << name << " " << w << "x" << h << " " << to_string(fl) << " " << r.check;
      }
  }
}

TEST(Coherence, GridFormulaBodyFailsOnlyAtBorders) {
  // The body as a whole is false somewhere on a truncation (border squares
  // lack neighbours) but holds at the interior east part of the corner.
  auto inst = load("checker");
  Model m = build_grid_model(inst, *brute_force_tile(inst, 3, 3));
  Checker c(m);
  EXPECT_FALSE(c.check("0_0_e", compile_psi(inst)));
  EXPECT_TRUE(c.check("0_0_e", compile_component(inst, "adj_tiles")));
  EXPECT_FALSE(c.check("2_0_e", compile_component(inst, "adj_tiles")));
}

TEST(Gadgets, DuplicatedNorthNeighbourFalsifiesUp) {
  Model m = duplicated_north_gadget();
  Checker c(m);
  for (auto fl : {Flavor::Apal, Flavor::Gal, Flavor::Cal}) {
    Formula up = compile_component(single(), "up", fl);
    for (const char* s : {"X_n", "X_s", "X_e", "X_w", "X_c"}) EXPECT_FALSE(c.check(s, up)) << s;
    EXPECT_TRUE(c.check("A_e", up));
  }
  // Without the quantifier the body holds: only a restriction exposes the duplicate.
  EXPECT_TRUE(c.check("X_e", compile_component(single(), "up").body()));
}

TEST(Gadgets, NonCommutingSquaresFalsifyRightUp) {
  Model m = non_commuting_gadget();
  Checker c(m);
  for (auto fl : {Flavor::Apal, Flavor::Gal, Flavor::Cal}) {
    EXPECT_FALSE(c.check("X_e", compile_component(single(), "right&up", fl)));
    EXPECT_FALSE(c.check("X_e", compile_component(single(), "up&right", fl)));
  }
}

TEST(Gadgets, ColourMismatchFalsifiesAdjacency) {
  auto inst = load("checker");
  auto g = *brute_force_tile(inst, 2, 2);
  Checker good(build_grid_model(inst, g));
  EXPECT_TRUE(good.check("0_0_e", compile_component(inst, "adj_tiles")));
  Checker bad(build_grid_model_unchecked(inst, corrupt_adjacency(inst, g)));
  EXPECT_FALSE(bad.check("0_0_e", compile_component(inst, "adj_tiles")));
  EXPECT_THROW(corrupt_adjacency(single(), *brute_force_tile(single(), 2, 1)), TilingError);
  EXPECT_THROW(corrupt_adjacency(inst, crop(g, 1, 2)), TilingError);
}

TEST(Gadgets, SuiteRecordsExpectedFailuresWithVerifiedWitnesses) {
  auto inst = load("checker");
  auto rs = harness::gadget_suite(inst, *brute_force_tile(inst, 3, 3));
  ASSERT_EQ(rs.size(), 3u);
  for (const auto& r : rs) {
    EXPECT_FALSE(r.skipped) << r.check;
    EXPECT_FALSE(r.expected);
    EXPECT_FALSE(r.observed) << r.check;
    EXPECT_TRUE(r.pass()) << r.check;
  }
  ASSERT_FALSE(rs[0].witnesses.empty());
  for (const auto& w : rs[0].witnesses) EXPECT_TRUE(w.reverified);
  auto single_rs = harness::gadget_suite(single(), *brute_force_tile(single(), 2, 2));
  EXPECT_TRUE(single_rs[2].skipped);
  EXPECT_TRUE(single_rs[2].pass());
}

TEST(RowDeletion, RemovesExactlyTheStarRows) {
  auto inst = load("striped_star");
  auto g = *brute_force_tile(inst, 6, 6, std::set<std::size_t>{0, 2, 3});
  Model m = build_grid_model(inst, g);
  Checker c(m);
  StateSet ext = c.extension(star_free_rows());
  EXPECT_EQ(m.num_states() - ext.size(), 90u);
  for (StateIdx s = 0; s < m.num_states(); ++s) {
    auto p = harness::parse_grid_state(m.state_name(s));
    ASSERT_TRUE(p);
    EXPECT_EQ(ext.contains(s), p->j != 0 && p->j != 2 && p->j != 3) << m.state_name(s);
  }
  Checker updated = c.update(star_free_rows());
  EXPECT_EQ(updated.model().num_states(), 90u);
  EXPECT_TRUE(all_pass(harness::interior_suite(updated, inst, 6, 6, 4, 5, "band")));
}

TEST(RowDeletion, SuiteOnBothFixtures) {
  auto striped = load("striped_star");
  Checker c1(build_grid_model(striped, *brute_force_tile(striped, 6, 6, std::set<std::size_t>{0, 2, 3})));
  auto rs = harness::row_deletion_suite(c1, striped, 6, 6, {0, 2, 3});
  EXPECT_TRUE(all_pass(rs));
  // extension, removed_states, the failing band at row 1, then the interior suite of rows 4..5.
  ASSERT_EQ(rs.size(), 2u + 1u + 10u);
  EXPECT_FALSE(rs[2].expected);

  auto checker = load("checker_star");
  const std::set<std::size_t> even{0, 2, 4, 6};
  Checker c2(build_grid_model(checker, *brute_force_tile(checker, 6, 7, even)));
  auto rs2 = harness::row_deletion_suite(c2, checker, 6, 7, even);
  EXPECT_TRUE(all_pass(rs2));
  std::size_t failing_bands = 0;
  for (const auto& r : rs2)
    if (r.suite == "row_deletion_band") {
      EXPECT_EQ(r.check, "adj_tiles");
      EXPECT_FALSE(r.observed);
      EXPECT_FALSE(r.failing.empty());
      ++failing_bands;
    }
  EXPECT_EQ(failing_bands, 3u);
}

TEST(Harness, VerifyReportIsDeterministic) {
  harness::VerifyRequest req{load("checker"), 4, 4, std::nullopt, {}};
  auto a = harness::verify(req);
  auto b = harness::verify(req);
  EXPECT_TRUE(a.pass());
  EXPECT_EQ(a.jsonl(), b.jsonl());
  EXPECT_EQ(a.records.size(), 1u + 10u + 5u + 3u);
  EXPECT_EQ(a.jsonl().find("elapsed_ms"), std::string::npos);
  EXPECT_NE(a.jsonl(true).find("elapsed_ms"), std::string::npos);
  EXPECT_NE(a.human().find("PASS: 19/19"), std::string::npos);
  for (auto fl : {Flavor::Gal, Flavor::Cal}) {
    req.options.flavor = fl;
    EXPECT_TRUE(harness::verify(req).pass()) << to_string(fl);
  }
}

TEST(Harness, UnsatisfiableRequestThrows) {
  harness::VerifyRequest req{load("striped_star"), 3, 3, std::set<std::size_t>{0, 5}, {}};
  EXPECT_THROW(harness::verify(req), TilingError);
  TileInstance clash{{"a", "b"}, {{"a", "a", "a", "b"}, {"b", "b", "a", "b"}}, std::nullopt};
  EXPECT_THROW(harness::verify({clash, 2, 1, std::nullopt, {}}), TilingError);
}

TEST(Harness, FailingRecordFailsReport) {
  harness::Report rep;
  harness::Record r;
  r.expected = true;
  r.observed = false;
  rep.records.push_back(r);
  EXPECT_FALSE(rep.pass());
  rep.records[0].skipped = true;
  EXPECT_TRUE(rep.pass());
  harness::Record w;
  w.expected = w.observed = false;
  w.witnesses.push_back({"[!]", "X_e", {"X_e"}, "true", false});
  rep.records.push_back(w);
  EXPECT_FALSE(rep.pass());
}

TEST(TilingJson, RoundTrip) {
  for (const char* name : {"single", "checker", "striped_star", "checker_star"}) {
    auto inst = load(name);
    auto again = io::instance_from_json(io::instance_to_json(inst));
    EXPECT_EQ(again.colors, inst.colors);
    EXPECT_EQ(again.tiles, inst.tiles);
    EXPECT_EQ(again.star, inst.star);
  }
  auto g = *brute_force_tile(load("checker"), 3, 2);
  auto h = io::grid_from_json(io::grid_to_json(g));
  EXPECT_EQ(h.width, 3u);
  EXPECT_EQ(h.height, 2u);
  EXPECT_EQ(h.assignment, g.assignment);
}

TEST(TilingJson, Errors) {
  EXPECT_THROW(io::instance_from_json(R"({"colors":["c"],"tiles":[],"extra":0})"), TilingError);
  EXPECT_THROW(io::instance_from_json(R"({"colors":["c"],"tiles":[]})"), TilingError);
  EXPECT_THROW(io::instance_from_json(R"({"colors":["c"],"tiles":[{"north":"c","south":"c","east":"c"}]})"),
               TilingError);
  EXPECT_THROW(io::instance_from_json(R"({"colors":["c"],"tiles":[{"north":"c","south":"c","east":"c","west":"c"}],
    "star":-1})"),
               TilingError);
  EXPECT_THROW(io::grid_from_json(R"({"width":1,"height":1})"), TilingError);
  EXPECT_THROW(io::instance_from_json("{\"colors\": [\"c\",]}"), ParseError);
}
