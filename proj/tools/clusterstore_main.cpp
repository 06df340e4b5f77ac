// clusterstore: page-store clustering benchmark driver.
//
//   clusterstore generate --config db.conf --out DIR
//   clusterstore run      --config exp.conf --snapshot FILE --out DIR
//   clusterstore cluster  --config exp.conf --snapshot FILE --engine dro --out DIR
//   clusterstore bench    --config exp.conf [--snapshot FILE] --out DIR
//   clusterstore report   --out DIR
//
// Exit codes: 0 success, 1 usage error (bad flags, missing files), 2 runtime
// error (malformed inputs, failed runs).

#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "clusterstore/clusterstore.hpp"

namespace fs = std::filesystem;
using namespace cstore;

namespace {

struct CliOptions {
  std::string config_path;
  std::string snapshot_path;
  std::string engine;
  std::string frames;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> iterations;
};

ExperimentConfig load_experiment(const CliOptions& opt) {
  KeyValueFile kv = opt.config_path.empty() ? KeyValueFile{}
                                            : KeyValueFile::load(opt.config_path);
  ExperimentConfig cfg = ExperimentConfig::from_kv(kv);
  if (!opt.engine.empty()) cfg.engine = engine_from(opt.engine);
  if (!opt.frames.empty()) cfg.frames_sweep = parse_frames_list(opt.frames);
  if (opt.seed) cfg.seed = *opt.seed;
  if (opt.iterations) cfg.iterations = *opt.iterations;
  return cfg;
}

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory: " + dir);
}

std::string snapshot_path_in(const std::string& dir) {
  return dir + "/database.cstore";
}

int cmd_generate(const CliOptions& opt) {
  KeyValueFile kv = opt.config_path.empty() ? KeyValueFile{}
                                            : KeyValueFile::load(opt.config_path);
  DatabaseSpec spec = DatabaseSpec::from_kv(kv);
  if (opt.seed) spec.seed = *opt.seed;
  StoreConfig store_cfg;
  store_cfg.page_capacity = kv.get_u64("store.page_capacity", store_cfg.page_capacity);
  // Generation only needs one frame per page touch; a roomy buffer keeps it quick.
  store_cfg.buffer_frames = 64;
  Store store = generate_database(spec, store_cfg);
  ensure_out_dir(opt.out_dir);
  std::string path = snapshot_path_in(opt.out_dir);
  write_snapshot_file(store, path);
  std::cout << "snapshot: " << path << "\n"
            << "objects: " << store.object_count() << "\n"
            << "pages: " << store.nonempty_page_count() << "\n";
  return 0;
}

int cmd_run(const CliOptions& opt) {
  ExperimentConfig cfg = load_experiment(opt);
  if (opt.snapshot_path.empty()) throw NotFoundError("run requires --snapshot");
  Store store = restore_snapshot_file(opt.snapshot_path,
                                      cfg.store_config(cfg.frames_sweep.front()));
  ReferenceGraph graph = store.reference_graph();
  WorkloadSpec ws = cfg.workload;
  if (opt.seed) ws.seed = *opt.seed;

  StatStore stats(store.config().page_capacity);
  DstcEngine dstc(cfg.dstc);
  struct EdgeTap final : EdgeObserver {
    DstcEngine* engine = nullptr;
    void on_edge(ObjectId from, ObjectId to) override {
      if (engine) engine->observe_edge(from, to);
    }
  } tap;
  if (cfg.engine == Engine::kDro) store.add_listener(&stats);
  if (cfg.engine == Engine::kDstc) {
    store.add_listener(&dstc);
    tap.engine = &dstc;
  }

  IoCounters clustering_io;
  std::size_t clustering_runs = 0;
  std::function<void(std::size_t)> hook;
  if (cfg.cluster_every > 0 && cfg.engine != Engine::kNone) {
    hook = [&](std::size_t txn) {
      if (txn % cfg.cluster_every != 0) return;
      if (cfg.engine == Engine::kDro) {
        ClusteringReport r = run_dro(store, stats, cfg.dro, ClusteringTrigger::kAutomatic);
        clustering_io += r.overhead;
      } else {
        DstcReport r = dstc.cluster(store);
        clustering_io += r.overhead;
      }
      ++clustering_runs;
    };
  }

  store.reset_io();
  WorkloadResult result = run_workload(store, graph, ws,
                                       cfg.engine == Engine::kDstc ? &tap : nullptr, hook);

  ensure_out_dir(opt.out_dir);
  std::ofstream csv(opt.out_dir + "/io_report.csv", std::ios::binary);
  csv << "window,page_reads,page_writes\n";
  IoCounters workload_io = result.io - clustering_io;
  csv << "workload," << workload_io.page_reads << ',' << workload_io.page_writes << "\n";
  if (clustering_runs > 0) {
    csv << "clustering," << clustering_io.page_reads << ',' << clustering_io.page_writes
        << "\n";
  }
  std::cout << "traversals: " << result.traversals << "\n"
            << "visits: " << result.visits << "\n"
            << "digest: " << result.digest << "\n"
            << "reads: " << result.io.page_reads << "\n"
            << "writes: " << result.io.page_writes << "\n";
  if (clustering_runs > 0) std::cout << "clustering_runs: " << clustering_runs << "\n";
  return 0;
}

int cmd_cluster(const CliOptions& opt) {
  ExperimentConfig cfg = load_experiment(opt);
  if (opt.snapshot_path.empty()) throw NotFoundError("cluster requires --snapshot");
  if (cfg.engine == Engine::kNone) throw ConfigError("cluster requires --engine dro|dstc");
  Store store = restore_snapshot_file(opt.snapshot_path,
                                      cfg.store_config(cfg.frames_sweep.front()));
  ReferenceGraph graph = store.reference_graph();
  WorkloadSpec ws = cfg.workload;
  ws.seed = cfg.seed;

  ensure_out_dir(opt.out_dir);
  std::ofstream csv(opt.out_dir + "/cluster_report.csv", std::ios::binary);
  csv << kClusteringReportHeader << "\n";

  if (cfg.engine == Engine::kDro) {
    StatStore stats(store.config().page_capacity);
    store.add_listener(&stats);
    run_workload(store, graph, ws);  // observation pass feeding the statistics
    ClusteringReport report = run_dro(store, stats, cfg.dro);
    report.write_csv_row(csv);
    std::cout << "outcome: " << to_string(report.outcome) << "\n"
              << "candidate_pages: " << report.candidate_pages << "\n"
              << "candidate_objects: " << report.candidate_objects << "\n"
              << "resemblance: " << format_double(report.resemblance) << "\n"
              << "moved: " << report.moved << "\n"
              << "overhead: " << report.overhead.total() << "\n";
  } else {
    DstcEngine dstc(cfg.dstc);
    store.add_listener(&dstc);
    struct EdgeTap final : EdgeObserver {
      DstcEngine* engine = nullptr;
      void on_edge(ObjectId from, ObjectId to) override { engine->observe_edge(from, to); }
    } tap;
    tap.engine = &dstc;
    run_workload(store, graph, ws, &tap);
    DstcReport report = dstc.cluster(store);
    const char* outcome = report.moved > 0 ? "applied" : "no_units";
    csv << outcome << ",," << report.unit_objects << ",," << report.moved << ','
        << report.overhead.page_reads << ',' << report.overhead.page_writes << "\n";
    std::ofstream units_csv(opt.out_dir + "/units.csv", std::ios::binary);
    DstcEngine::dump_units_csv(report.built_units, units_csv);
    std::cout << "outcome: " << outcome << "\n"
              << "units: " << report.units << "\n"
              << "moved: " << report.moved << "\n"
              << "overhead: " << report.overhead.total() << "\n";
  }
  return 0;
}

int cmd_bench(const CliOptions& opt) {
  ExperimentConfig cfg = load_experiment(opt);
  ensure_out_dir(opt.out_dir);
  std::string snapshot = opt.snapshot_path;
  if (snapshot.empty()) {
    // No snapshot given: generate one from the database spec so every
    // iteration still starts from an identical restored image.
    DatabaseSpec spec = cfg.db;
    StoreConfig gen_cfg = cfg.store_config(64);
    Store store = generate_database(spec, gen_cfg);
    snapshot = snapshot_path_in(opt.out_dir);
    write_snapshot_file(store, snapshot);
  }
  StoreFactory restore = [&](const StoreConfig& sc) {
    return restore_snapshot_file(snapshot, sc);
  };
  std::vector<SweepPoint> points = run_bench(cfg, restore);
  {
    std::ofstream csv(opt.out_dir + "/results.csv", std::ios::binary);
    write_results_csv(points, csv);
  }
  write_plot_files(points, opt.out_dir);
  for (const SweepPoint& p : points) {
    std::cout << "frames=" << p.frames << " pre=" << format_double(p.pre.total())
              << " post=" << format_double(p.post.total())
              << " gain=" << format_double(p.gain)
              << " overhead=" << format_double(p.overhead.total())
              << " outcome=" << p.outcome << "\n";
  }
  return 0;
}

int cmd_report(const CliOptions& opt) {
  std::string path = opt.out_dir + "/results.csv";
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open results file: " + path);
  std::vector<SweepPoint> points = read_results_csv(in, path);
  {
    std::ofstream csv(opt.out_dir + "/report.csv", std::ios::binary);
    write_results_csv(points, csv);
  }
  write_plot_files(points, opt.out_dir);
  std::cout << "sweep points: " << points.size() << "\n"
            << "report: " << opt.out_dir << "/report.csv\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"page-store clustering benchmark"};
  app.require_subcommand(1);

  CliOptions opt;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", opt.config_path, "key=value configuration file");
    cmd->add_option("--snapshot", opt.snapshot_path, "store snapshot file");
    cmd->add_option("--engine", opt.engine, "clustering engine: none|dro|dstc");
    cmd->add_option("--frames", opt.frames, "buffer frame sweep, e.g. 5,10,20");
    cmd->add_option("--seed", opt.seed, "experiment seed");
    cmd->add_option("--iterations", opt.iterations, "pipeline iterations per point");
    cmd->add_option("--out", opt.out_dir, "output directory");
  };

  CLI::App* generate = app.add_subcommand("generate", "generate a database snapshot");
  CLI::App* run = app.add_subcommand("run", "run a workload against a snapshot");
  CLI::App* cluster = app.add_subcommand("cluster", "run one clustering pass");
  CLI::App* bench = app.add_subcommand("bench", "full pre/cluster/post sweep");
  CLI::App* report = app.add_subcommand("report", "format results and plot data");
  for (CLI::App* cmd : {generate, run, cluster, bench, report}) add_common(cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (generate->parsed()) return cmd_generate(opt);
    if (run->parsed()) return cmd_run(opt);
    if (cluster->parsed()) return cmd_cluster(opt);
    if (bench->parsed()) return cmd_bench(opt);
    if (report->parsed()) return cmd_report(opt);
    std::cerr << "no subcommand given\n";
    return 1;
  } catch (const NotFoundError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;  // missing inputs are usage errors
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
