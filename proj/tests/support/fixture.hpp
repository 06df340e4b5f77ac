#pragma once

// Shared test fixture: a ten-object reference graph with skewed access
// frequencies whose clustering outcome is known exactly, plus a store layout
// that spreads the tracked objects across mostly-idle pages so the selection
// step fires.

#include <map>
#include <vector>

#include "clusterstore/dro.hpp"
#include "clusterstore/store.hpp"
#include "clusterstore/types.hpp"

namespace cstore::testfix {

struct WorkedExample {
  ReferenceGraph graph;
  FrequencyMap freq;                  // object 9 is untracked on purpose
  std::vector<ObjectId> sort_order;   // descending frequency, fixed tie order
  double max_dissimilarity = 0.1;
};

inline WorkedExample worked_example() {
  WorkedExample ex;
  ex.graph[1] = {3};
  ex.graph[2] = {};
  ex.graph[3] = {2, 10};
  ex.graph[4] = {7};
  ex.graph[5] = {4, 3, 8};
  ex.graph[6] = {5, 3};
  ex.graph[7] = {8};
  ex.graph[8] = {};
  ex.graph[9] = {8};
  ex.graph[10] = {9};
  ex.freq = {{1, 20}, {2, 20}, {3, 20}, {4, 60}, {5, 60},
             {6, 60}, {7, 40}, {8, 17}, {10, 18}};
  ex.sort_order = {6, 5, 4, 7, 1, 2, 3, 10, 8};
  return ex;
}

/// Store carrying the worked example: object i sits alone with one big idle
/// filler object on page i (capacity 1000), so every touched page unloads
/// with a low usage rate and the whole graph is selectable.
inline Store worked_example_store(std::size_t buffer_frames = 2) {
  WorkedExample ex = worked_example();
  std::vector<LayoutEntry> entries;
  for (ObjectId oid = 1; oid <= 10; ++oid) {
    LayoutEntry obj;
    obj.oid = oid;
    obj.class_id = 1;
    obj.size = 100;
    obj.page = oid;
    obj.slot = 0;
    obj.refs = ex.graph.at(oid);
    entries.push_back(obj);
    LayoutEntry filler;
    filler.oid = 10 + oid;
    filler.class_id = 2;
    filler.size = 700;
    filler.page = oid;
    filler.slot = 1;
    entries.push_back(filler);
  }
  StoreConfig cfg;
  cfg.page_capacity = 1000;
  cfg.buffer_frames = buffer_frames;
  return Store::from_layout(cfg, entries);
}

/// Drives accesses so the recorded frequencies equal the fixture table:
/// round r touches every object whose target frequency exceeds r.
inline void replay_fixture_accesses(Store& store) {
  WorkedExample ex = worked_example();
  std::uint64_t max_freq = 0;
  for (const auto& [oid, f] : ex.freq) max_freq = std::max(max_freq, f);
  for (std::uint64_t round = 0; round < max_freq; ++round) {
    for (const auto& [oid, f] : ex.freq) {
      if (f > round) store.access_object(oid);
    }
  }
}

}  // namespace cstore::testfix
