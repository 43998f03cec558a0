#include <gtest/gtest.h>

#include <random>

#include "qpalc/bisim.hpp"
#include "qpalc/semantics.hpp"
#include "qpalc/tiling.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace qpalc;
using testkit::Mask;

namespace {

Model make(std::vector<std::string> states, std::map<std::string, std::vector<std::vector<std::string>>> rel,
           std::map<std::string, std::vector<std::string>> val) {
  ModelData d;
  d.states = std::move(states);
  for (const auto& [a, b] : rel) d.agents.push_back(a);
  d.relations = std::move(rel);
  d.valuation = std::move(val);
  return Model::from_data(d);
}

// Filter of all subsets by the three domain conditions.
std::vector<Mask> brute_force_domain(const Model& m, const BisimPartition& part, const std::vector<AgentIdx>& constraint,
                                     StateIdx anchor) {
  std::vector<Mask> out;
  const Mask full = testkit::full_mask(m);
  for (Mask u = 0; u <= full; ++u) {
    if (!testkit::has(u, anchor)) continue;
    bool ok = true;
    for (const auto& b : part.blocks) {
      Mask bm = testkit::to_mask(b);
      if ((u & bm) != 0 && (u & bm) != bm) ok = false;
    }
    for (AgentIdx a : constraint)
      for (StateIdx s = 0; s < m.num_states(); ++s)
        if (testkit::has(u, s) && (testkit::class_in(m, a, s, full) & ~u) != 0) ok = false;
    if (ok) out.push_back(u);
  }
  return out;
}

std::vector<Mask> masks(const std::vector<StateSet>& sets) {
  std::vector<Mask> out;
  for (const auto& s : sets) out.push_back(testkit::to_mask(s));
  return out;
}

// Oracle classes from the naive greatest-fixpoint bisimulation.
std::vector<Mask> naive_classes(const Model& m) {
  auto z = testkit::naive_bisim(m, testkit::full_mask(m));
  std::set<Mask> out;
  for (StateIdx s = 0; s < m.num_states(); ++s) {
    Mask c = 0;
    for (StateIdx t = 0; t < m.num_states(); ++t)
      if (z[s][t]) c |= testkit::bit(t);
    out.insert(c);
  }
  return {out.begin(), out.end()};
}

}  // namespace

TEST(Partition, Examples) {
  Model same = make({"s0", "s1", "s2"}, {{"a", {{"s0", "s1", "s2"}}}}, {{"p", {"s0", "s1", "s2"}}});
  EXPECT_EQ(compute_partition(same).size(), 1u);
  Model distinct = make({"s0", "s1", "s2"}, {{"a", {{"s0", "s1", "s2"}}}}, {{"p", {"s0"}}, {"q", {"s1"}}, {"r", {"s2"}}});
  EXPECT_EQ(compute_partition(distinct).size(), 3u);
}

TEST(Partition, DistinctTilesGiveSingletonBlocks) {
  // Nine distinct tiles on a 3x3 grid: every square carries its own proposition.
  tiling::TileInstance inst;
  inst.colors = {"c"};
  tiling::GridTruncation g{3, 3, {}};
  for (std::size_t j = 0; j < 3; ++j) {
    g.assignment.emplace_back();
    for (std::size_t i = 0; i < 3; ++i) {
      g.assignment.back().push_back(inst.tiles.size());
      inst.tiles.push_back({"c", "c", "c", "c"});
    }
  }
  Model m = tiling::build_grid_model(inst, g);
  auto part = compute_partition(m);
  EXPECT_EQ(part.size(), 45u);
  // The checker instance collapses: compare against the naive oracle on a 2x2 crop.
  tiling::TileInstance checker{{"a", "b"},
                               {{"b", "a", "b", "a"}, {"b", "a", "a", "b"}, {"a", "b", "b", "a"}, {"a", "b", "a", "b"}},
                               std::nullopt};
  Model small = tiling::build_grid_model(checker, *tiling::brute_force_tile(checker, 2, 2));
  EXPECT_EQ(masks(compute_partition(small).blocks), naive_classes(small));
}

TEST(Partition, MatchesNaiveRefinementOnRandomModels) {
  std::mt19937 rng(1);
  for (int trial = 0; trial < 400; ++trial) {
    Model m = testkit::random_model(rng, {1, 9, std::size_t(1 + trial % 3), std::size_t(1 + trial % 2)});
    auto part = compute_partition(m);
    auto got = masks(part.blocks);
    std::sort(got.begin(), got.end());
    EXPECT_EQ(got, naive_classes(m));
    for (StateIdx s = 0; s < m.num_states(); ++s) EXPECT_TRUE(part.blocks[part.block_of[s]].contains(s));
    // Blocks are ordered by least member.
    for (std::size_t b = 1; b < part.size(); ++b)
      EXPECT_LT(part.blocks[b - 1].members().front(), part.blocks[b].members().front());
  }
}

TEST(Partition, QuotientIsMinimal) {
  std::mt19937 rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    Model m = testkit::random_model(rng, {1, 8, 2, 2});
    auto part = compute_partition(m);
    Model q = quotient(m, part);
    EXPECT_TRUE(validate(q).ok());
    EXPECT_EQ(q.num_states(), part.size());
    EXPECT_EQ(compute_partition(q).size(), q.num_states());
    // Idempotent on the original model too.
    EXPECT_EQ(masks(compute_partition(m).blocks), masks(part.blocks));
  }
}

TEST(Enumerate, Examples) {
  Model bisimilar = make({"s0", "s1"}, {{"a", {{"s0", "s1"}}}}, {{"p", {}}});
  auto p1 = compute_partition(bisimilar);
  EXPECT_EQ(masks(enumerate_definable(bisimilar, p1, {}, 0)), (std::vector<Mask>{0b11}));

  Model apart = make({"s0", "s1"}, {{"a", {{"s0"}, {"s1"}}}}, {{"p", {"s0"}}, {"q", {"s1"}}});
  auto p2 = compute_partition(apart);
  EXPECT_EQ(masks(enumerate_definable(apart, p2, {}, 0)), (std::vector<Mask>{0b01, 0b11}));

  Model constrained = make({"s0", "s1", "s2"}, {{"a", {{"s0", "s1"}, {"s2"}}}},
                           {{"p", {"s0"}}, {"q", {"s1"}}, {"r", {"s2"}}});
  auto p3 = compute_partition(constrained);
  EXPECT_EQ(masks(enumerate_definable(constrained, p3, {0}, 0)), (std::vector<Mask>{0b011, 0b111}));
}

TEST(Enumerate, MatchesBruteForceFilter) {
  std::mt19937 rng(4);
  for (int trial = 0; trial < 300; ++trial) {
    Model m = testkit::random_model(rng, {1, 7, 2, 2});
    auto part = compute_partition(m);
    for (const std::vector<AgentIdx>& c : std::vector<std::vector<AgentIdx>>{{}, {0}, {1}, {0, 1}}) {
      for (StateIdx s = 0; s < m.num_states(); ++s) {
        auto got = masks(enumerate_definable(m, part, c, s));
        std::sort(got.begin(), got.end());
        EXPECT_EQ(got, brute_force_domain(m, part, c, s));
        EXPECT_EQ(std::count(got.begin(), got.end(), testkit::full_mask(m)), 1);
        DefinableEnumerator e(m, part, c, s);
        EXPECT_EQ(e.count(), got.size());
      }
    }
  }
}

TEST(Enumerate, FullSetLastAndBudget) {
  Model m = make({"s0", "s1", "s2"}, {{"a", {{"s0"}, {"s1"}, {"s2"}}}}, {{"p", {"s0"}}, {"q", {"s1"}}});
  auto part = compute_partition(m);
  auto all = enumerate_definable(m, part, {}, 0);
  ASSERT_EQ(all.size(), 4u);
  EXPECT_TRUE(all.back().full());
  EXPECT_THROW(enumerate_definable(m, part, {}, 0, 3), BudgetExceeded);
  EXPECT_NO_THROW(enumerate_definable(m, part, {}, 0, 4));
}

TEST(Enumerate, CompleteForShallowElFormulas) {
  // Every EL extension of depth <= 2 appears in the domain of each state it contains.
  std::mt19937 rng(6);
  for (int trial = 0; trial < 150; ++trial) {
    Model m = testkit::random_model(rng, {1, 5, 2, 2});
    auto part = compute_partition(m);
    auto exts = testkit::el_extensions(m, testkit::full_mask(m), 2);
    for (StateIdx s = 0; s < m.num_states(); ++s) {
      auto dom = masks(enumerate_definable(m, part, {}, s));
      std::set<Mask> domain(dom.begin(), dom.end());
      for (Mask e : exts)
        if (testkit::has(e, s)) {
          EXPECT_TRUE(domain.count(e));
        }
    }
  }
}

TEST(Characteristic, Examples) {
  Model m = make({"s0", "s1", "s2"}, {{"a", {{"s0", "s1"}, {"s2"}}}}, {{"p", {"s0", "s2"}}});
  auto part = compute_partition(m);
  EXPECT_EQ(characteristic_formula(m, part, m.all_states()), top());
  Formula fp = characteristic_formula(m, part, m.valuation("p"));
  EXPECT_EQ(Checker(m).extension(fp), m.valuation("p"));
  EXPECT_EQ(fragment_of(fp), Fragment::EL);
  StateSet not_closed = state_set(m, {"s0", "s1"});
  EXPECT_THROW(characteristic_formula(m, part, state_set(m, {"s0"}), {0}), Error);
  EXPECT_NO_THROW(characteristic_formula(m, part, not_closed, {0}));
}

TEST(Characteristic, GridRow) {
  tiling::TileInstance inst{{"a", "b"},
                            {{"b", "a", "b", "a"}, {"b", "a", "a", "b"}, {"a", "b", "b", "a"}, {"a", "b", "a", "b"}},
                            std::nullopt};
  Model m = tiling::build_grid_model(inst, *tiling::brute_force_tile(inst, 3, 3));
  auto part = compute_partition(m);
  StateSet row(m.num_states());
  for (StateIdx s = 0; s < m.num_states(); ++s)
    if (m.state_name(s)[2] == '1') row.insert(s);
  ASSERT_TRUE(part.is_union_of_blocks(row));
  Formula f = characteristic_formula(m, part, row);
  EXPECT_EQ(Checker(m).extension(f), row);
  Formula g = characteristic_formula(m, part, row, agent_indices(m, {"h", "s"}));
  EXPECT_EQ(Checker(m).extension(g), row);
}

TEST(Characteristic, SoundForEveryEnumeratedSet) {
  std::mt19937 rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    Model m = testkit::random_model(rng, {1, 6, 2, 2});
    auto part = compute_partition(m);
    Checker c(m);
    for (const std::vector<AgentIdx>& con : std::vector<std::vector<AgentIdx>>{{}, {0}, {0, 1}}) {
      for (StateIdx s = 0; s < m.num_states(); ++s)
        for (const auto& u : enumerate_definable(m, part, con, s)) {
          for (AgentIdx a : con) EXPECT_EQ(c.extension(characteristic_formula(m, part, u, {a})), u);
          Formula f = characteristic_formula(m, part, u, con);
          EXPECT_EQ(c.extension(f), u) << print(f);
          if (con.empty()) {
            EXPECT_EQ(fragment_of(f), Fragment::EL);
            EXPECT_LE(modal_depth(f), m.num_states());
          }
        }
    }
  }
}

TEST(Extension, ElFastPathAgreesWithChecker) {
  std::mt19937 rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    Model m = testkit::random_model(rng, {1, 6, 2, 2});
    testkit::FormulaGen gen(rng, testkit::grammar_for(Fragment::EL, {"a", "b"}, {"p", "q"}));
    Formula f = gen(3);
    EXPECT_EQ(el_extension(m, f), Checker(m).extension(f));
  }
}
