#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "vigil/chunk.hpp"
#include "vigil/config.hpp"
#include "vigil/errors.hpp"
#include "vigil/pipeline.hpp"
#include "vigil/sink.hpp"
#include "vigil/topology.hpp"

namespace fs = std::filesystem;
using namespace vigil;
using runtime::Grouping;
using runtime::TopologySpec;
using runtime::validate_topology;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

struct RunFlags {
  std::string config_path;
  bool dry_run = false;
  bool deterministic = false;
  std::optional<uint32_t> workers;
  std::optional<uint64_t> seed;
};

std::optional<uint32_t> workers_from_env() {
  const char* raw = std::getenv("VIGIL_WORKERS");
  if (!raw || !*raw) return std::nullopt;
  char* end = nullptr;
  unsigned long value = std::strtoul(raw, &end, 10);
  if (end == raw || *end != '\0' || value < 1 || value > 1024) {
    std::cerr << "warning: ignoring invalid VIGIL_WORKERS value '" << raw << "'\n";
    return std::nullopt;
  }
  return static_cast<uint32_t>(value);
}

const char* grouping_text(const Grouping& grouping, std::string& storage) {
  if (grouping.kind == Grouping::kShuffle) return "shuffle";
  storage = "fields(" + grouping.key + ")";
  return storage.c_str();
}

int cmd_run(const RunFlags& flags) {
  config::PipelineConfig cfg;
  try {
    cfg = config::load_config_file(flags.config_path);
  } catch (const Error& e) {
    std::cerr << "vigil: " << flags.config_path << ": " << e.what() << '\n';
    return kExitConfig;
  }
  if (flags.deterministic) cfg.deterministic = true;
  if (auto env = workers_from_env()) cfg.worker_count = *env;
  if (flags.workers) cfg.worker_count = *flags.workers;
  if (flags.seed) cfg.seed = *flags.seed;

  if (flags.dry_run) {
    try {
      pipeline::PipelineSettings shape;
      shape.parallelism = cfg.parallelism;
      shape.message_timeout_ms = cfg.message_timeout_ms;
      shape.queue_capacity = cfg.queue_capacity;
      TopologySpec spec = pipeline::surveillance_topology_spec(shape);
      validate_topology(spec, runtime::frame_payload_schema().keys);
      std::map<std::string, uint32_t> parallelism;
      for (const auto& node : spec.nodes) parallelism[node.node_id] = node.parallelism;
      std::cout << "topology: " << spec.nodes.size() << " nodes, " << spec.edges.size()
                << " edges\n";
      for (const auto& edge : spec.edges) {
        std::string storage;
        std::printf("%s[x%u] --%s/%s--> %s[x%u]\n", edge.from_node.c_str(),
                    parallelism[edge.from_node], edge.stream_name.c_str(),
                    grouping_text(edge.grouping, storage), edge.to_node.c_str(),
                    parallelism[edge.to_node]);
      }
      std::cout << "videoExport[x1] polls " << cfg.sink.out_root << "/"
                << sink::category_folder(sink::Category::kEligible) << " every "
                << cfg.chunker.poll_interval_ms << " ms\n";
      return kExitOk;
    } catch (const Error& e) {
      std::cerr << "vigil: " << flags.config_path << ": " << e.what() << '\n';
      return kExitConfig;
    }
  }

  pipeline::PipelineSettings settings;
  try {
    settings = config::to_settings(cfg);
  } catch (const Error& e) {
    std::cerr << "vigil: " << flags.config_path << ": " << e.what() << '\n';
    return kExitConfig;
  }
  try {
    runtime::Topology topology = pipeline::build_surveillance_topology(settings);
    runtime::RunReport report = topology.run();
    std::string text = report.to_text();
    std::cout << text;
    std::ofstream out(fs::path(cfg.sink.out_root) / "run_report.txt",
                      std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) std::cerr << "warning: could not persist run_report.txt\n";
    return kExitOk;
  } catch (const Error& e) {
    std::cerr << "vigil: run failed: " << e.what() << '\n';
    return kExitRuntime;
  }
}

uint64_t count_ppm_files(const fs::path& folder) {
  if (!fs::is_directory(folder)) return 0;
  uint64_t count = 0;
  for (const auto& entry : fs::directory_iterator(folder)) {
    if (!entry.is_regular_file()) continue;
    if (sink::parse_frame_filename(entry.path().filename().string())) count++;
  }
  return count;
}

int cmd_stats(const std::string& out_root) {
  try {
    fs::path root(out_root);
    fs::path report_path = root / "run_report.txt";
    if (!fs::is_directory(root) || !fs::exists(report_path))
      throw NoRunFound("no completed run under " + out_root +
                       " (run_report.txt missing)");
    std::ifstream in(report_path);
    std::map<std::string, std::string> report;
    std::string line;
    while (std::getline(in, line)) {
      auto eq = line.find('=');
      if (eq != std::string::npos) report[line.substr(0, eq)] = line.substr(eq + 1);
    }
    auto it = report.find("sourceEmissions");
    if (it == report.end())
      throw NoRunFound("run_report.txt has no sourceEmissions line");
    uint64_t total = std::stoull(it->second);
    uint64_t eligible =
        count_ppm_files(root / sink::category_folder(sink::Category::kEligible));
    uint64_t faces = count_ppm_files(root / sink::category_folder(sink::Category::kFace));
    uint64_t persons = count_ppm_files(root / sink::category_folder(sink::Category::kPerson));
    auto ledger = sink::read_ledger((root / "chunks.ledger").string());
    std::printf("%-16s %12s %12s %8s %8s %8s %10s\n", "source", "totalFrames", "eligible",
                "faces", "persons", "chunks", "reduction");
    double reduction = total > 0 ? sink::reduction_stats(total, eligible) : 0.0;
    char pct[32];
    std::snprintf(pct, sizeof(pct), "%.2f%%", reduction);
    std::printf("%-16s %12llu %12llu %8llu %8llu %8zu %10s\n", out_root.c_str(),
                static_cast<unsigned long long>(total),
                static_cast<unsigned long long>(eligible),
                static_cast<unsigned long long>(faces),
                static_cast<unsigned long long>(persons), ledger.size(), pct);
    return kExitOk;
  } catch (const NoRunFound& e) {
    std::cerr << "vigil: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << "vigil: stats failed: " << e.what() << '\n';
    return kExitRuntime;
  }
}

int cmd_inspect_chunk(const std::string& path) {
  if (!fs::exists(path)) {
    std::cerr << "vigil: no such file: " << path << '\n';
    return kExitConfig;
  }
  try {
    sink::Chunk chunk = sink::read_chunk_file(path);
    const Frame& first = chunk.frames.front();
    std::printf("frames   %zu\n", chunk.frames.size());
    std::printf("fps      %.3f\n", chunk.fps);
    std::printf("size     %ux%u, %u channel%s\n", first.width, first.height, first.channels,
                first.channels == 1 ? "" : "s");
    std::printf("%10s %12s\n", "seq", "timestampMs");
    for (const Frame& frame : chunk.frames)
      std::printf("%10llu %12lld\n", static_cast<unsigned long long>(frame.sequence_nr),
                  static_cast<long long>(frame.timestamp_ms));
    std::printf("CRC OK\n");
    return kExitOk;
  } catch (const Error& e) {
    std::cerr << "vigil: " << path << ": " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"storage-efficient video surveillance pipeline"};
  app.require_subcommand(0, 1);
  bool print_default = false;
  app.add_flag("--print-default-config", print_default,
               "print the default configuration as JSON and exit");

  RunFlags run_flags;
  CLI::App* run = app.add_subcommand("run", "run the pipeline described by a config file");
  run->add_option("config", run_flags.config_path, "path to the JSON config")->required();
  run->add_flag("--dry-run", run_flags.dry_run,
                "validate the config and print the topology without executing");
  run->add_flag("--deterministic", run_flags.deterministic,
                "fixed seed plus virtual clock: reproducible output");
  uint32_t workers_flag = 0;
  CLI::Option* workers_opt =
      run->add_option("--workers", workers_flag, "worker thread count (overrides config and env)")
          ->check(CLI::Range(1u, 1024u));
  uint64_t seed_flag = 0;
  CLI::Option* seed_opt = run->add_option("--seed", seed_flag, "runtime PRNG seed");

  std::string stats_root;
  CLI::App* stats = app.add_subcommand("stats", "summarize a finished run's output folder");
  stats->add_option("outRoot", stats_root, "output root of a previous run")->required();

  std::string chunk_path;
  CLI::App* inspect = app.add_subcommand("inspect-chunk", "list a chunk file's contents");
  inspect->add_option("chunk", chunk_path, "path to a .fvc chunk")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (print_default) {
    std::cout << config::serialize_config(config::PipelineConfig{});
    return kExitOk;
  }
  if (run->parsed()) {
    if (workers_opt->count() > 0) run_flags.workers = workers_flag;
    if (seed_opt->count() > 0) run_flags.seed = seed_flag;
    return cmd_run(run_flags);
  }
  if (stats->parsed()) return cmd_stats(stats_root);
  if (inspect->parsed()) return cmd_inspect_chunk(chunk_path);
  std::cout << app.help();
  return kExitOk;
}
