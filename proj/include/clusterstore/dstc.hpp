#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "clusterstore/config.hpp"
#include "clusterstore/store.hpp"
#include "clusterstore/types.hpp"

namespace cstore {

/// Knobs of the simplified DSTC baseline. All defaults are artifact choices;
/// the technique is used here as a comparison engine, not as a faithful
/// reproduction of the original system.
struct DstcParams {
  std::size_t window_length = 1000;     // object accesses per observation period
  std::uint64_t selection_threshold = 2; // minimum in-window co-usage count
  double consolidation_decay = 1.0;      // multiplied into old weights on merge
  double unit_min_weight = 2.0;          // consolidated weight bar for units
  std::size_t max_unit_size = 64;        // objects per clustering unit

  void validate() const {
    if (window_length == 0) throw ConfigError("window_length must be positive");
    if (selection_threshold == 0) throw ConfigError("selection_threshold must be positive");
    if (consolidation_decay <= 0.0 || consolidation_decay > 1.0) {
      throw ConfigError("consolidation_decay must lie in (0,1]");
    }
    if (unit_min_weight <= 0.0) throw ConfigError("unit_min_weight must be positive");
    if (max_unit_size < 2) throw ConfigError("max_unit_size must be at least 2");
  }

  static DstcParams from_kv(const KeyValueFile& kv) {
    DstcParams p;
    p.window_length = kv.get_u64("window_length", p.window_length);
    p.selection_threshold = kv.get_u64("selection_threshold", p.selection_threshold);
    p.consolidation_decay = kv.get_double("consolidation_decay", p.consolidation_decay);
    p.unit_min_weight = kv.get_double("unit_min_weight", p.unit_min_weight);
    p.max_unit_size = kv.get_u64("max_unit_size", p.max_unit_size);
    p.validate();
    return p;
  }

  void write_kv(std::ostream& out) const {
    out << "window_length=" << window_length << "\n"
        << "selection_threshold=" << selection_threshold << "\n"
        << "consolidation_decay=" << format_double(consolidation_decay) << "\n"
        << "unit_min_weight=" << format_double(unit_min_weight) << "\n"
        << "max_unit_size=" << max_unit_size << "\n";
  }
};

using ObjectPair = std::pair<ObjectId, ObjectId>;

struct WindowEntry {
  ObjectPair pair;
  std::uint64_t count = 0;
};

/// Per-window co-usage counts; (a,b) and (b,a) are distinct entries.
class ObservationMatrix {
 public:
  void observe(ObjectId from, ObjectId to) { counts_[{from, to}] += 1; }

  bool empty() const { return counts_.empty(); }
  std::size_t window_id() const { return window_id_; }
  std::uint64_t count(ObjectId from, ObjectId to) const {
    auto it = counts_.find({from, to});
    return it == counts_.end() ? 0 : it->second;
  }

  /// Selection: entries at or above the threshold, sorted by descending
  /// count, ties by ascending (from,to). Clears the window.
  std::vector<WindowEntry> end_window(const DstcParams& params) {
    std::vector<WindowEntry> survivors;
    for (const auto& [pair, count] : counts_) {
      if (count >= params.selection_threshold) survivors.push_back({pair, count});
    }
    std::stable_sort(survivors.begin(), survivors.end(),
                     [](const WindowEntry& a, const WindowEntry& b) {
                       if (a.count != b.count) return a.count > b.count;
                       return a.pair < b.pair;
                     });
    counts_.clear();
    ++window_id_;
    return survivors;
  }

 private:
  std::size_t window_id_ = 0;
  std::map<ObjectPair, std::uint64_t> counts_;
};

/// Cross-window memory: new_weight = decay * old_weight + window count, only
/// for entries that survived selection.
class ConsolidatedMatrix {
 public:
  void consolidate(const std::vector<WindowEntry>& filtered, const DstcParams& params) {
    for (const WindowEntry& e : filtered) {
      double old_weight = 0.0;
      auto it = weights_.find(e.pair);
      if (it != weights_.end()) old_weight = it->second;
      weights_[e.pair] =
          params.consolidation_decay * old_weight + static_cast<double>(e.count);
    }
  }

  double weight(ObjectId from, ObjectId to) const {
    auto it = weights_.find({from, to});
    return it == weights_.end() ? 0.0 : it->second;
  }

  bool empty() const { return weights_.empty(); }
  const std::map<ObjectPair, double>& entries() const { return weights_; }
  void clear() { weights_.clear(); }

 private:
  std::map<ObjectPair, double> weights_;
};

struct ClusteringUnit {
  std::vector<ObjectId> members;
};

/// Greedy attraction ordering. Directions are merged into undirected weights.
/// Repeatedly: seed a unit with the heaviest edge between two unassigned
/// objects (weight >= unit_min_weight), then extend at either end with the
/// heaviest qualifying edge to an unassigned object until nothing qualifies
/// or the size cap is hit. Ties break toward ascending object id.
inline std::vector<ClusteringUnit> build_units(const ConsolidatedMatrix& consolidated,
                                               const DstcParams& params) {
  std::map<ObjectPair, double> undirected;
  for (const auto& [pair, w] : consolidated.entries()) {
    ObjectPair key = pair.first < pair.second ? pair
                                              : ObjectPair{pair.second, pair.first};
    undirected[key] += w;
  }
  std::map<ObjectId, std::vector<std::pair<ObjectId, double>>> adjacency;
  for (const auto& [pair, w] : undirected) {
    adjacency[pair.first].emplace_back(pair.second, w);
    adjacency[pair.second].emplace_back(pair.first, w);
  }

  std::set<ObjectId> assigned;
  std::vector<ClusteringUnit> units;
  while (true) {
    ObjectPair seed{kNoObject, kNoObject};
    double seed_weight = 0.0;
    for (const auto& [pair, w] : undirected) {
      if (w < params.unit_min_weight) continue;
      if (assigned.count(pair.first) || assigned.count(pair.second)) continue;
      if (w > seed_weight || (w == seed_weight && pair < seed)) {
        seed = pair;
        seed_weight = w;
      }
    }
    if (seed.first == kNoObject) break;

    std::deque<ObjectId> unit{seed.first, seed.second};
    assigned.insert(seed.first);
    assigned.insert(seed.second);
    while (unit.size() < params.max_unit_size) {
      ObjectId best = kNoObject;
      double best_weight = 0.0;
      bool at_back = true;
      auto consider = [&](ObjectId end, bool back) {
        auto it = adjacency.find(end);
        if (it == adjacency.end()) return;
        for (const auto& [other, w] : it->second) {
          if (w < params.unit_min_weight || assigned.count(other)) continue;
          if (w > best_weight || (w == best_weight && other < best) ||
              (w == best_weight && other == best && back && !at_back)) {
            best = other;
            best_weight = w;
            at_back = back;
          }
        }
      };
      consider(unit.back(), true);
      consider(unit.front(), false);
      if (best == kNoObject) break;
      if (at_back) {
        unit.push_back(best);
      } else {
        unit.push_front(best);
      }
      assigned.insert(best);
    }
    units.push_back(ClusteringUnit{{unit.begin(), unit.end()}});
  }
  return units;
}

/// Writes each unit contiguously through the store; the aggregate covers all
/// units. Callers are expected to run this on a quiescent store.
inline RelocationReport reorganize(const std::vector<ClusteringUnit>& units, Store& store) {
  RelocationReport total;
  for (const ClusteringUnit& unit : units) {
    RelocationReport r = store.rewrite_placement(unit.members, store.allocate_cluster_id());
    total.moved.insert(r.moved.begin(), r.moved.end());
    total.touched_pages.insert(r.touched_pages.begin(), r.touched_pages.end());
    total.io += r.io;
  }
  return total;
}

struct DstcReport {
  std::size_t windows_closed = 0;
  std::size_t units = 0;
  std::size_t unit_objects = 0;
  std::size_t moved = 0;
  IoCounters overhead;
  std::vector<ClusteringUnit> built_units;  // kept for diagnostics dumps
};

/// Observation-driven engine: listens to store accesses to advance the
/// window clock and takes traversed reference edges from the workload.
class DstcEngine final : public StoreListener {
 public:
  explicit DstcEngine(DstcParams params) : params_(params) { params_.validate(); }

  const DstcParams& params() const { return params_; }
  const ObservationMatrix& observation() const { return observation_; }
  const ConsolidatedMatrix& consolidated() const { return consolidated_; }
  std::size_t windows_closed() const { return windows_closed_; }

  void on_access(ObjectId, PageId, std::uint64_t) override {
    if (++accesses_in_window_ >= params_.window_length) close_window();
  }

  void observe_edge(ObjectId from, ObjectId to) { observation_.observe(from, to); }

  void close_window() {
    consolidated_.consolidate(observation_.end_window(params_), params_);
    accesses_in_window_ = 0;
    ++windows_closed_;
  }

  /// Clustering pass: closes the in-progress window, builds units, empties
  /// the buffer and relocates each unit. Overhead counts all I/O in between.
  DstcReport cluster(Store& store) {
    DstcReport report;
    IoCounters before = store.io_report();
    if (accesses_in_window_ > 0 || !observation_.empty()) close_window();
    report.windows_closed = windows_closed_;
    std::vector<ClusteringUnit> units = build_units(consolidated_, params_);
    report.units = units.size();
    for (const ClusteringUnit& u : units) report.unit_objects += u.members.size();
    store.flush();
    RelocationReport relocation = reorganize(units, store);
    report.moved = relocation.moved.size();
    report.overhead = store.io_report() - before;
    report.built_units = std::move(units);
    return report;
  }

  /// Diagnostic dump of built units: `unit,index,member` rows.
  static void dump_units_csv(const std::vector<ClusteringUnit>& units, std::ostream& out) {
    out << "unit,index,member\n";
    for (std::size_t u = 0; u < units.size(); ++u) {
      for (std::size_t i = 0; i < units[u].members.size(); ++i) {
        out << u << ',' << i << ',' << units[u].members[i] << '\n';
      }
    }
  }

 private:
  DstcParams params_;
  ObservationMatrix observation_;
  ConsolidatedMatrix consolidated_;
  std::size_t accesses_in_window_ = 0;
  std::size_t windows_closed_ = 0;
};

}  // namespace cstore
