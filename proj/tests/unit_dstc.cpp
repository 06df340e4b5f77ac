#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "clusterstore/dstc.hpp"
#include "clusterstore/rng.hpp"

using namespace cstore;

TEST_CASE("observation matrix counts directed pairs", "[dstc]") {
  ObservationMatrix m;
  SECTION("repeat traversals accumulate") {
    m.observe(1, 2);
    m.observe(1, 2);
    REQUIRE(m.count(1, 2) == 2);
  }
  SECTION("directions are distinct") {
    m.observe(1, 2);
    m.observe(2, 1);
    REQUIRE(m.count(1, 2) == 1);
    REQUIRE(m.count(2, 1) == 1);
  }
  SECTION("no traversals, empty matrix") {
    REQUIRE(m.empty());
  }
}

TEST_CASE("window selection filters and sorts", "[dstc]") {
  DstcParams params;  // threshold 2
  ObservationMatrix m;
  SECTION("below-threshold entries are dropped") {
    m.observe(1, 2);
    m.observe(1, 2);
    m.observe(1, 2);
    m.observe(3, 4);
    std::vector<WindowEntry> out = m.end_window(params);
    REQUIRE(out.size() == 1);
    REQUIRE(out[0].pair == ObjectPair{1, 2});
    REQUIRE(out[0].count == 3);
    REQUIRE(m.empty());  // window cleared
    REQUIRE(m.window_id() == 1);
  }
  SECTION("everything below threshold gives an empty result") {
    m.observe(1, 2);
    REQUIRE(m.end_window(params).empty());
  }
  SECTION("ties sort by ascending pair") {
    for (int i = 0; i < 2; ++i) {
      m.observe(5, 6);
      m.observe(1, 9);
      m.observe(1, 2);
    }
    std::vector<WindowEntry> out = m.end_window(params);
    REQUIRE(out.size() == 3);
    REQUIRE(out[0].pair == ObjectPair{1, 2});
    REQUIRE(out[1].pair == ObjectPair{1, 9});
    REQUIRE(out[2].pair == ObjectPair{5, 6});
  }
}

TEST_CASE("consolidation merges only survivors", "[dstc]") {
  DstcParams params;  // decay 1.0
  ConsolidatedMatrix c;
  SECTION("fresh entry") {
    c.consolidate({{{1, 2}, 3}}, params);
    REQUIRE(c.weight(1, 2) == 3.0);
  }
  SECTION("additive merge") {
    c.consolidate({{{1, 2}, 4}}, params);
    c.consolidate({{{1, 2}, 3}}, params);
    REQUIRE(c.weight(1, 2) == 7.0);
  }
  SECTION("filtered-out entries stay untouched") {
    c.consolidate({{{1, 2}, 4}}, params);
    c.consolidate({}, params);
    REQUIRE(c.weight(1, 2) == 4.0);
  }
  SECTION("decay discounts the old weight") {
    DstcParams half = params;
    half.consolidation_decay = 0.5;
    c.consolidate({{{1, 2}, 4}}, half);
    c.consolidate({{{1, 2}, 3}}, half);
    REQUIRE(c.weight(1, 2) == 5.0);  // 0.5*4 + 3
  }
}

TEST_CASE("unit construction is greedy over attraction weights", "[dstc]") {
  DstcParams params;
  params.unit_min_weight = 2.0;

  auto consolidated_from = [&](std::vector<std::pair<ObjectPair, std::uint64_t>> edges) {
    ConsolidatedMatrix c;
    std::vector<WindowEntry> filtered;
    for (auto& [pair, count] : edges) filtered.push_back({pair, count});
    c.consolidate(filtered, params);
    return c;
  };

  SECTION("chain with one weak link") {
    ConsolidatedMatrix c = consolidated_from({{{1, 2}, 5}, {{2, 3}, 4}, {{3, 4}, 1}});
    std::vector<ClusteringUnit> units = build_units(c, params);
    REQUIRE(units.size() == 1);
    REQUIRE(units[0].members == std::vector<ObjectId>{1, 2, 3});
  }
  SECTION("no edge reaching the bar, no units") {
    ConsolidatedMatrix c = consolidated_from({{{1, 2}, 1}, {{3, 4}, 1}});
    REQUIRE(build_units(c, params).empty());
  }
  SECTION("size cap splits a heavy chain") {
    DstcParams capped = params;
    capped.max_unit_size = 2;
    ConsolidatedMatrix c = consolidated_from({{{1, 2}, 5}, {{2, 3}, 4}, {{3, 4}, 3}});
    std::vector<ClusteringUnit> units = build_units(c, capped);
    REQUIRE(units.size() == 2);
    REQUIRE(units[0].members == std::vector<ObjectId>{1, 2});
    REQUIRE(units[1].members == std::vector<ObjectId>{3, 4});
  }
  SECTION("extension happens at both ends") {
    // 2-3 is heaviest; 1 attaches at the front end, 4 at the back.
    ConsolidatedMatrix c = consolidated_from({{{2, 3}, 9}, {{1, 2}, 8}, {{3, 4}, 7}});
    std::vector<ClusteringUnit> units = build_units(c, params);
    REQUIRE(units.size() == 1);
    REQUIRE(units[0].members == std::vector<ObjectId>{1, 2, 3, 4});
  }
  SECTION("opposite directions merge into one undirected weight") {
    ConsolidatedMatrix c = consolidated_from({{{1, 2}, 1}, {{2, 1}, 1}});
    std::vector<ClusteringUnit> units = build_units(c, params);
    REQUIRE(units.size() == 1);  // 1+1 reaches the bar
  }
  SECTION("units are vertex-disjoint") {
    ConsolidatedMatrix c = consolidated_from(
        {{{1, 2}, 5}, {{2, 3}, 5}, {{1, 3}, 5}, {{4, 5}, 4}, {{5, 6}, 3}});
    std::vector<ClusteringUnit> units = build_units(c, params);
    std::set<ObjectId> seen;
    for (const auto& u : units) {
      for (ObjectId o : u.members) REQUIRE(seen.insert(o).second);
    }
  }
}

TEST_CASE("reorganize delegates to the store", "[dstc]") {
  SECTION("no units, no moves") {
    Store s(StoreConfig{4096, 8});
    RelocationReport r = reorganize({}, s);
    REQUIRE(r.moved.empty());
    REQUIRE(s.io_report() == IoCounters{});
  }
  SECTION("an already contiguous unit writes nothing") {
    Store s(StoreConfig{4096, 8});
    ObjectId a = s.insert_object(1, 100, {});
    ObjectId b = s.insert_object(1, 100, {});
    s.flush();
    s.reset_io();
    RelocationReport r = reorganize({ClusteringUnit{{a, b}}}, s);
    REQUIRE(r.moved.empty());
    REQUIRE(s.io_report().page_writes == 0);
  }
  SECTION("scattered units pay the relocation I/O") {
    Store s(StoreConfig{4096, 8});
    std::vector<ObjectId> small;
    for (int i = 0; i < 4; ++i) {
      small.push_back(s.insert_object(1, 100, {}));
      s.insert_object(2, 3990, {});
    }
    s.flush();
    s.reset_io();
    RelocationReport r = reorganize(
        {ClusteringUnit{{small[0], small[1]}}, ClusteringUnit{{small[2], small[3]}}}, s);
    REQUIRE(r.moved.size() == 4);
    // Each unit: two cold source pages read, two source writes, one destination.
    REQUIRE(s.io_report().page_reads == 4);
    REQUIRE(s.io_report().page_writes == 6);
    REQUIRE(r.io == s.io_report());
  }
}

TEST_CASE("windows are isolated; consolidation is the only carry-over", "[dstc][property]") {
  DstcParams params;
  params.window_length = 4;
  DstcEngine engine(params);
  // Two edges traversed twice within the first window.
  engine.observe_edge(1, 2);
  engine.observe_edge(1, 2);
  engine.observe_edge(3, 4);
  engine.observe_edge(3, 4);
  for (int i = 0; i < 4; ++i) engine.on_access(1, 1, 10);  // closes the window
  REQUIRE(engine.windows_closed() == 1);
  REQUIRE(engine.observation().empty());
  REQUIRE(engine.consolidated().weight(1, 2) == 2.0);
  // The next window starts from zero counts.
  engine.observe_edge(1, 2);
  REQUIRE(engine.observation().count(1, 2) == 1);
}

TEST_CASE("identical traces give identical units", "[dstc][property]") {
  auto build = [](std::uint64_t seed) {
    DstcParams params;
    params.unit_min_weight = 2.0;
    ConsolidatedMatrix c;
    Rng rng(seed);
    std::vector<WindowEntry> entries;
    for (int i = 0; i < 40; ++i) {
      entries.push_back({{1 + rng.below(10), 1 + rng.below(10)},
                         1 + rng.below(6)});
    }
    c.consolidate(entries, params);
    return build_units(c, params);
  };
  auto a = build(31337);
  auto b = build(31337);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(a[i].members == b[i].members);
}

TEST_CASE("parameter file round trip", "[dstc]") {
  std::ostringstream out;
  DstcParams{}.write_kv(out);
  std::istringstream in(out.str());
  DstcParams p = DstcParams::from_kv(KeyValueFile::parse(in));
  REQUIRE(p.window_length == 1000);
  REQUIRE(p.selection_threshold == 2);
  REQUIRE(p.consolidation_decay == 1.0);
  REQUIRE(p.unit_min_weight == 2.0);
  REQUIRE(p.max_unit_size == 64);

  std::istringstream bad("consolidation_decay=0\n");
  REQUIRE_THROWS_AS(DstcParams::from_kv(KeyValueFile::parse(bad)), ConfigError);
}
