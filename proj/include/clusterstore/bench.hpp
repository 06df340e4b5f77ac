#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "clusterstore/config.hpp"
#include "clusterstore/dro.hpp"
#include "clusterstore/dstc.hpp"
#include "clusterstore/stats.hpp"
#include "clusterstore/store.hpp"
#include "clusterstore/types.hpp"
#include "clusterstore/workload.hpp"

namespace cstore {

/// before / after; the sum of reads and writes feeds both sides. A perfect
/// post-clustering run (zero I/O) reports as infinite.
inline double gain_factor(double before_io, double after_io) {
  if (after_io == 0.0) return std::numeric_limits<double>::infinity();
  return before_io / after_io;
}

enum class Engine { kNone, kDro, kDstc };

inline const char* to_string(Engine e) {
  switch (e) {
    case Engine::kNone: return "none";
    case Engine::kDro: return "dro";
    case Engine::kDstc: return "dstc";
  }
  return "unknown";
}

inline Engine engine_from(const std::string& s) {
  if (s == "none") return Engine::kNone;
  if (s == "dro") return Engine::kDro;
  if (s == "dstc") return Engine::kDstc;
  throw ConfigError("unknown engine: " + s);
}

inline ReplacementPolicy policy_from(const std::string& s) {
  if (s == "lru") return ReplacementPolicy::kLru;
  if (s == "lru-c") return ReplacementPolicy::kLruC;
  throw ConfigError("unknown replacement policy: " + s);
}

inline std::vector<std::size_t> parse_frames_list(const std::string& csv) {
  std::vector<std::size_t> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t v = 0;
    auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || p != item.data() + item.size() || v == 0) {
      throw ConfigError("bad frame count in sweep list: '" + item + "'");
    }
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("frame sweep list is empty");
  return out;
}

/// Full experiment description; mirrors the key=value file plus CLI
/// overrides. The database seed lives in the snapshot; `seed` here drives
/// root selection and transaction draws (per iteration: seed + iteration).
struct ExperimentConfig {
  DatabaseSpec db;
  WorkloadSpec workload;
  std::uint64_t page_capacity = 4096;
  ReplacementPolicy policy = ReplacementPolicy::kLru;
  bool cluster_prefetch = false;
  Engine engine = Engine::kNone;
  DroParams dro;
  DstcParams dstc;
  std::vector<std::size_t> frames_sweep{8};
  std::size_t iterations = 10;
  std::uint64_t seed = 1;
  std::size_t cluster_every = 0;  // >0: automatic engine runs mid-workload

  StoreConfig store_config(std::size_t frames) const {
    return StoreConfig{page_capacity, frames, policy, cluster_prefetch};
  }

  static ExperimentConfig from_kv(const KeyValueFile& kv) {
    ExperimentConfig cfg;
    cfg.db = DatabaseSpec::from_kv(kv);
    cfg.workload = WorkloadSpec::from_kv(kv);
    cfg.page_capacity = kv.get_u64("store.page_capacity", cfg.page_capacity);
    cfg.policy = policy_from(kv.get_string("store.policy", "lru"));
    cfg.cluster_prefetch = kv.get_bool("store.prefetch", cfg.cluster_prefetch);
    cfg.engine = engine_from(kv.get_string("engine", "none"));
    if (kv.has("engine_params")) {
      KeyValueFile params = KeyValueFile::load(kv.get_string("engine_params", ""));
      cfg.dro = DroParams::from_kv(params);
      cfg.dstc = DstcParams::from_kv(params);
    }
    if (kv.has("frames")) cfg.frames_sweep = parse_frames_list(kv.get_string("frames", ""));
    cfg.iterations = kv.get_u64("iterations", cfg.iterations);
    cfg.seed = kv.get_u64("seed", cfg.seed);
    cfg.cluster_every = kv.get_u64("cluster_every", cfg.cluster_every);
    if (cfg.iterations == 0) throw ConfigError("iterations must be positive");
    return cfg;
  }
};

struct PhaseIo {
  double reads = 0;
  double writes = 0;
  double total() const { return reads + writes; }
};

struct SweepPoint {
  std::size_t frames = 0;
  PhaseIo pre;
  PhaseIo post;
  PhaseIo overhead;
  double gain = 0.0;
  std::string outcome = "none";
};

using StoreFactory = std::function<Store(const StoreConfig&)>;

/// One pipeline pass on a private store instance: pre-clustering workload,
/// clustering window, then the identical workload again. Both measurement
/// windows start from a cold buffer so they compare layouts, not residue.
struct PipelineResult {
  WorkloadResult pre;
  WorkloadResult post;
  IoCounters overhead;
  std::string outcome = "none";
};

inline PipelineResult run_pipeline(Store& store, const WorkloadSpec& workload,
                                   Engine engine, const DroParams& dro_params,
                                   const DstcParams& dstc_params) {
  PipelineResult out;
  ReferenceGraph graph = store.reference_graph();
  StatStore stats(store.config().page_capacity);
  DstcEngine dstc(dstc_params);
  if (engine == Engine::kDro) store.add_listener(&stats);
  if (engine == Engine::kDstc) store.add_listener(&dstc);

  struct EdgeTap final : EdgeObserver {
    DstcEngine* engine = nullptr;
    void on_edge(ObjectId from, ObjectId to) override {
      if (engine) engine->observe_edge(from, to);
    }
  } tap;
  tap.engine = engine == Engine::kDstc ? &dstc : nullptr;

  store.reset_buffer();
  store.reset_io();
  out.pre = run_workload(store, graph, workload,
                         engine == Engine::kDstc ? &tap : nullptr);

  if (engine == Engine::kDro) {
    ClusteringReport report = run_dro(store, stats, dro_params);
    out.overhead = report.overhead;
    out.outcome = to_string(report.outcome);
    store.remove_listener(&stats);
  } else if (engine == Engine::kDstc) {
    DstcReport report = dstc.cluster(store);
    out.overhead = report.overhead;
    out.outcome = report.moved > 0 ? "applied" : "no_units";
    store.remove_listener(&dstc);
  }

  store.reset_buffer();
  store.reset_io();
  out.post = run_workload(store, graph, workload);
  return out;
}

/// Sweep runner: for every frame count, averages `iterations` pipeline passes
/// (iteration i uses seed + i) on freshly restored stores.
inline std::vector<SweepPoint> run_bench(const ExperimentConfig& cfg,
                                         const StoreFactory& restore) {
  std::vector<SweepPoint> points;
  for (std::size_t frames : cfg.frames_sweep) {
    SweepPoint point;
    point.frames = frames;
    for (std::size_t iter = 0; iter < cfg.iterations; ++iter) {
      Store store = restore(cfg.store_config(frames));
      WorkloadSpec ws = cfg.workload;
      ws.seed = cfg.seed + iter;
      PipelineResult r = run_pipeline(store, ws, cfg.engine, cfg.dro, cfg.dstc);
      point.pre.reads += static_cast<double>(r.pre.io.page_reads);
      point.pre.writes += static_cast<double>(r.pre.io.page_writes);
      point.post.reads += static_cast<double>(r.post.io.page_reads);
      point.post.writes += static_cast<double>(r.post.io.page_writes);
      point.overhead.reads += static_cast<double>(r.overhead.page_reads);
      point.overhead.writes += static_cast<double>(r.overhead.page_writes);
      point.outcome = r.outcome;
    }
    double n = static_cast<double>(cfg.iterations);
    for (PhaseIo* io : {&point.pre, &point.post, &point.overhead}) {
      io->reads /= n;
      io->writes /= n;
    }
    point.gain = gain_factor(point.pre.total(), point.post.total());
    points.push_back(point);
  }
  return points;
}

// ---- result files -----------------------------------------------------------

inline constexpr const char* kResultsHeader =
    "frames,phase,reads,writes,total,gain_factor,overhead_total";

/// Two rows per sweep point; the gain factor and overhead ride on the post
/// row. Byte-deterministic for identical results.
inline void write_results_csv(const std::vector<SweepPoint>& points, std::ostream& out) {
  out << kResultsHeader << "\n";
  for (const SweepPoint& p : points) {
    out << p.frames << ",pre," << format_double(p.pre.reads) << ','
        << format_double(p.pre.writes) << ',' << format_double(p.pre.total()) << ",,\n";
    out << p.frames << ",post," << format_double(p.post.reads) << ','
        << format_double(p.post.writes) << ',' << format_double(p.post.total()) << ','
        << format_double(p.gain) << ',' << format_double(p.overhead.total()) << "\n";
  }
}

/// One whitespace-separated series file per curve, ready for generic
/// plotting tools: gain factor, pre/post workload I/O, clustering overhead.
inline void write_plot_files(const std::vector<SweepPoint>& points,
                             const std::string& dir) {
  auto open = [&](const std::string& name) {
    std::ofstream out(dir + "/" + name, std::ios::binary);
    if (!out) throw ConfigError("cannot write plot file in " + dir);
    return out;
  };
  {
    std::ofstream out = open("plot_gain_factor.dat");
    for (const SweepPoint& p : points)
      out << p.frames << ' ' << format_double(p.gain) << '\n';
  }
  {
    std::ofstream out = open("plot_io_pre.dat");
    for (const SweepPoint& p : points)
      out << p.frames << ' ' << format_double(p.pre.total()) << '\n';
  }
  {
    std::ofstream out = open("plot_io_post.dat");
    for (const SweepPoint& p : points)
      out << p.frames << ' ' << format_double(p.post.total()) << '\n';
  }
  {
    std::ofstream out = open("plot_overhead.dat");
    for (const SweepPoint& p : points)
      out << p.frames << ' ' << format_double(p.overhead.total()) << '\n';
  }
}

/// Reads a results CSV back (report command). Accepts exactly the format
/// written by write_results_csv.
inline std::vector<SweepPoint> read_results_csv(std::istream& in,
                                                const std::string& name = "<results>") {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(name + ":1: empty results file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kResultsHeader) throw ParseError(name + ":1: bad results header");
  std::map<std::size_t, SweepPoint> by_frames;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) fields.push_back(item);
    while (fields.size() < 7) fields.emplace_back();
    const std::string where = name + ":" + std::to_string(lineno);
    auto to_double = [&](const std::string& s) {
      double v = 0;
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc()) throw ParseError(where + ": bad number '" + s + "'");
      return v;
    };
    std::size_t frames = static_cast<std::size_t>(to_double(fields[0]));
    SweepPoint& point = by_frames[frames];
    point.frames = frames;
    PhaseIo io{to_double(fields[2]), to_double(fields[3])};
    if (fields[1] == "pre") {
      point.pre = io;
    } else if (fields[1] == "post") {
      point.post = io;
      if (!fields[5].empty()) point.gain = to_double(fields[5]);
      if (!fields[6].empty()) {
        point.overhead = PhaseIo{to_double(fields[6]), 0};  // total only
      }
    } else {
      throw ParseError(where + ": unknown phase '" + fields[1] + "'");
    }
  }
  std::vector<SweepPoint> points;
  for (auto& [frames, p] : by_frames) points.push_back(p);
  return points;
}

}  // namespace cstore
