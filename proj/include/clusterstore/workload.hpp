#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "clusterstore/config.hpp"
#include "clusterstore/dro.hpp"
#include "clusterstore/rng.hpp"
#include "clusterstore/store.hpp"
#include "clusterstore/types.hpp"

namespace cstore {

/// Synthetic database shape: flat class set, seeded uniform sizes, reference
/// targets biased toward a hot subset so placement has locality to exploit.
/// hot_fraction = 1 degenerates to a uniform reference graph.
struct DatabaseSpec {
  std::size_t class_count = 50;
  std::size_t instance_count = 2000;
  std::size_t refs_per_object = 5;
  std::uint64_t size_min = 50;
  std::uint64_t size_max = 200;
  double hot_fraction = 0.2;
  std::uint64_t seed = 1;

  void validate() const {
    if (class_count == 0 || instance_count == 0) {
      throw ConfigError("class_count and instance_count must be positive");
    }
    if (size_min == 0 || size_min > size_max) {
      throw ConfigError("object size range must satisfy 0 < min <= max");
    }
    if (hot_fraction <= 0.0 || hot_fraction > 1.0) {
      throw ConfigError("hot_fraction must lie in (0,1]");
    }
    if (refs_per_object > instance_count - 1) {
      throw ConfigError("refs_per_object exceeds instance_count - 1");
    }
  }

  static DatabaseSpec from_kv(const KeyValueFile& kv) {
    DatabaseSpec s;
    s.class_count = kv.get_u64("db.classes", s.class_count);
    s.instance_count = kv.get_u64("db.objects", s.instance_count);
    s.refs_per_object = kv.get_u64("db.refs_per_object", s.refs_per_object);
    s.size_min = kv.get_u64("db.size_min", s.size_min);
    s.size_max = kv.get_u64("db.size_max", s.size_max);
    s.hot_fraction = kv.get_double("db.hot_fraction", s.hot_fraction);
    s.seed = kv.get_u64("db.seed", s.seed);
    s.validate();
    return s;
  }
};

/// Share of references aimed at the hot subset. Fixed rather than
/// configurable; hot_fraction already controls how concentrated the heat is.
inline constexpr double kHotTargetShare = 0.8;

/// Populates a store in object-id order (creation-time placement is plain
/// append). Reference targets may point forward; the graph is complete and
/// dangling-free once generation finishes.
inline Store generate_database(const DatabaseSpec& spec, StoreConfig store_cfg) {
  spec.validate();
  Store store(store_cfg);
  Rng rng(spec.seed);
  const std::uint64_t n = spec.instance_count;
  const std::uint64_t hot = std::max<std::uint64_t>(
      1, static_cast<std::uint64_t>(static_cast<double>(n) * spec.hot_fraction));
  for (std::uint64_t i = 0; i < n; ++i) {
    std::uint32_t class_id =
        static_cast<std::uint32_t>(1 + rng.below(spec.class_count));
    std::uint64_t size = rng.between(spec.size_min, spec.size_max);
    std::vector<ObjectId> refs;
    refs.reserve(spec.refs_per_object);
    for (std::size_t r = 0; r < spec.refs_per_object; ++r) {
      bool aim_hot = rng.chance(kHotTargetShare);
      refs.push_back(aim_hot ? 1 + rng.below(hot) : 1 + rng.below(n));
    }
    store.insert_object(class_id, size, std::move(refs));
  }
  return store;
}

// ---- traversals -------------------------------------------------------------

struct TraversalStep {
  ObjectId oid = kNoObject;
  ObjectId via = kNoObject;  // kNoObject marks the root visit
};

using TraversalTrace = std::vector<TraversalStep>;

/// Consumes the reference edges a traversal follows (co-usage observation).
class EdgeObserver {
 public:
  virtual ~EdgeObserver() = default;
  virtual void on_edge(ObjectId from, ObjectId to) = 0;
};

namespace detail {

inline void simple_visit(Store& store, const ReferenceGraph& graph, ObjectId oid,
                         ObjectId via, std::size_t depth_left,
                         std::set<ObjectId>& path, TraversalTrace& trace,
                         EdgeObserver* observer) {
  if (via != kNoObject && observer) observer->on_edge(via, oid);
  store.access_object(oid);
  trace.push_back({oid, via});
  if (depth_left == 0) return;
  path.insert(oid);
  auto it = graph.find(oid);
  if (it != graph.end()) {
    for (ObjectId target : it->second) {
      if (path.count(target)) continue;  // cycles cut per path
      simple_visit(store, graph, target, oid, depth_left - 1, path, trace, observer);
    }
  }
  path.erase(oid);
}

}  // namespace detail

/// Depth-first walk over every reference slot down to `depth` edges.
/// Revisits across branches are allowed; a path never loops into itself.
inline TraversalTrace simple_traversal(Store& store, const ReferenceGraph& graph,
                                       ObjectId root, std::size_t depth,
                                       EdgeObserver* observer = nullptr) {
  TraversalTrace trace;
  std::set<ObjectId> path;
  detail::simple_visit(store, graph, root, kNoObject, depth, path, trace, observer);
  return trace;
}

/// Follows one fixed reference slot down to `depth` edges, stopping early at
/// a node lacking the slot or at a cycle.
inline TraversalTrace hierarchy_traversal(Store& store, const ReferenceGraph& graph,
                                          ObjectId root, std::size_t depth,
                                          std::size_t ref_slot,
                                          EdgeObserver* observer = nullptr) {
  TraversalTrace trace;
  std::set<ObjectId> path;
  ObjectId current = root;
  ObjectId via = kNoObject;
  for (std::size_t step = 0; step <= depth; ++step) {
    if (via != kNoObject && observer) observer->on_edge(via, current);
    store.access_object(current);
    trace.push_back({current, via});
    path.insert(current);
    if (step == depth) break;
    auto it = graph.find(current);
    if (it == graph.end() || ref_slot >= it->second.size()) break;
    ObjectId next = it->second[ref_slot];
    if (path.count(next)) break;
    via = current;
    current = next;
  }
  return trace;
}

// ---- workload runs ----------------------------------------------------------

enum class WorkloadKind { kSimple, kHierarchy, kMixed };

inline const char* to_string(WorkloadKind k) {
  switch (k) {
    case WorkloadKind::kSimple: return "simple";
    case WorkloadKind::kHierarchy: return "hierarchy";
    case WorkloadKind::kMixed: return "mixed";
  }
  return "unknown";
}

inline WorkloadKind workload_kind_from(const std::string& s) {
  if (s == "simple") return WorkloadKind::kSimple;
  if (s == "hierarchy") return WorkloadKind::kHierarchy;
  if (s == "mixed") return WorkloadKind::kMixed;
  throw ConfigError("unknown workload kind: " + s);
}

/// A deterministic transaction stream. For simple/hierarchy runs every root
/// is traversed `repetitions` times at the given depth. Mixed runs draw kind,
/// root and depth (1..depth) per transaction from the seeded generator.
struct WorkloadSpec {
  WorkloadKind kind = WorkloadKind::kHierarchy;
  std::size_t depth = 3;
  std::size_t root_count = 100;
  std::size_t repetitions = 10;
  std::size_t ref_slot = 0;
  std::size_t transactions = 1000;  // mixed runs only
  std::uint64_t seed = 1;

  // Zero repetitions or transactions describe a legal empty run.
  void validate() const {
    if (root_count == 0) throw ConfigError("root_count must be positive");
    if (kind == WorkloadKind::kMixed && transactions > 0 && depth == 0) {
      throw ConfigError("mixed runs need a positive depth bound");
    }
  }

  static WorkloadSpec from_kv(const KeyValueFile& kv) {
    WorkloadSpec s;
    s.kind = workload_kind_from(kv.get_string("workload.kind", to_string(s.kind)));
    s.depth = kv.get_u64("workload.depth", s.depth);
    s.root_count = kv.get_u64("workload.root_count", s.root_count);
    s.repetitions = kv.get_u64("workload.repetitions", s.repetitions);
    s.ref_slot = kv.get_u64("workload.ref_slot", s.ref_slot);
    s.transactions = kv.get_u64("workload.transactions", s.transactions);
    s.seed = kv.get_u64("workload.seed", s.seed);
    s.validate();
    return s;
  }
};

struct WorkloadResult {
  IoCounters io;          // delta over the run
  std::uint64_t digest = 0;
  std::size_t traversals = 0;
  std::size_t visits = 0;
};

/// Roots drawn without replacement from the stored objects.
inline std::vector<ObjectId> draw_roots(const Store& store, std::size_t count,
                                        std::uint64_t seed) {
  std::vector<ObjectId> all;
  all.reserve(store.object_count());
  for (const auto& [oid, obj] : store.objects()) all.push_back(oid);
  if (count > all.size()) {
    throw ConfigError("root_count exceeds database size");
  }
  Rng rng(seed);
  return rng.sample(std::move(all), count);
}

/// Executes the stream against the store. The same (spec, store layout) pair
/// always yields the same trace digest and I/O delta. `on_transaction` fires
/// after each traversal with its 1-based index (used for periodic clustering
/// triggers); it must not touch the transaction schedule.
inline WorkloadResult run_workload(Store& store, const ReferenceGraph& graph,
                                   const WorkloadSpec& spec,
                                   EdgeObserver* observer = nullptr,
                                   const std::function<void(std::size_t)>& on_transaction = {}) {
  spec.validate();
  std::vector<ObjectId> roots = draw_roots(store, spec.root_count, spec.seed);
  IoCounters before = store.io_report();
  Fnv1a digest;
  WorkloadResult result;
  Rng rng(spec.seed ^ 0x9e3779b97f4a7c15ull);  // separate stream from root draw

  auto execute = [&](WorkloadKind kind, ObjectId root, std::size_t depth) {
    TraversalTrace trace =
        kind == WorkloadKind::kSimple
            ? simple_traversal(store, graph, root, depth, observer)
            : hierarchy_traversal(store, graph, root, depth, spec.ref_slot, observer);
    for (const TraversalStep& step : trace) {
      digest.add(step.oid);
      digest.add(step.via);
    }
    result.visits += trace.size();
    ++result.traversals;
    if (on_transaction) on_transaction(result.traversals);
  };

  if (spec.kind == WorkloadKind::kMixed) {
    for (std::size_t t = 0; t < spec.transactions; ++t) {
      WorkloadKind kind = rng.below(2) == 0 ? WorkloadKind::kSimple
                                            : WorkloadKind::kHierarchy;
      ObjectId root = roots[static_cast<std::size_t>(rng.below(roots.size()))];
      std::size_t depth = static_cast<std::size_t>(rng.between(1, spec.depth));
      execute(kind, root, depth);
    }
  } else {
    for (std::size_t rep = 0; rep < spec.repetitions; ++rep) {
      for (ObjectId root : roots) execute(spec.kind, root, spec.depth);
    }
  }

  result.io = store.io_report() - before;
  result.digest = digest.value();
  return result;
}

}  // namespace cstore
