#include "tlr/bench/experiment.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>

#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include "tlr/config_error.hpp"

namespace tlr {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

void ExperimentConfig::validate() const {
  if (workers.empty()) throw ConfigError("experiment: workers list is empty");
  for (int w : workers) {
    if (w < 1) throw ConfigError("experiment: worker counts must be >= 1");
  }
  if (repetitions < 1) throw ConfigError("experiment: repetitions must be >= 1");
  if (!(run.duration_s >= 1.0)) throw ConfigError("experiment: duration_s must be >= 1");
  if (out_dir.empty()) throw ConfigError("experiment: out_dir is empty");
  run.validate();
}

RunConfig ExperimentConfig::cell(int w, int repetition) const {
  RunConfig c = run;
  c.workers = w;
  c.seed = run.seed + static_cast<std::uint64_t>(repetition);
  return c;
}

ExperimentConfig parse_experiment_config(const std::string& yaml_text, const std::string& source,
                                         const fs::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(source + ": " + e.what());
  }
  if (root && !root.IsNull() && !root.IsMap()) throw ConfigError(source + ": expected a key/value map");
  if (!root || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);

  ExperimentConfig cfg;
  try {
    if (const YAML::Node w = root["workers"]) {
      cfg.workers = w.IsSequence() ? w.as<std::vector<int>>() : std::vector<int>{w.as<int>()};
      root.remove("workers");
    }
    if (const YAML::Node r = root["repetitions"]) {
      cfg.repetitions = r.as<int>();
      root.remove("repetitions");
    }
    if (const YAML::Node o = root["out_dir"]) {
      cfg.out_dir = o.as<std::string>();
      root.remove("out_dir");
      if (!base_dir.empty() && fs::path(cfg.out_dir).is_relative()) {
        cfg.out_dir = (base_dir / cfg.out_dir).lexically_normal().string();
      }
    }
  } catch (const YAML::Exception& e) {
    throw ConfigError(source + ": " + e.what());
  }
  YAML::Emitter rest;
  rest << root;
  cfg.run = parse_run_config(rest.c_str(), source, base_dir);
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open");
  std::stringstream text;
  text << in.rdbuf();
  return parse_experiment_config(text.str(), path.string(), path.parent_path());
}

ExperimentResult run_experiment(const ExperimentConfig& config,
                                const std::function<void(const ExperimentCell&)>& progress) {
  config.validate();
  ExperimentResult result{config, {}};
  // Parsed once; every cell reads the same immutable scenario.
  const Scenario scenario = load_scenario(config.run);
  for (int w : config.workers) {
    for (int rep = 0; rep < config.repetitions; ++rep) {
      ExperimentCell cell{w, rep, {}, {}};
      try {
        cell.log = run_system(config.cell(w, rep), scenario);
        cell.stats = compute_interval_stats(cell.log.records);
      } catch (const std::exception& e) {
        throw ExperimentError("cell workers=" + std::to_string(w) + " repetition=" + std::to_string(rep) + ": " +
                              e.what());
      }
      result.cells.push_back(std::move(cell));
      if (progress) progress(result.cells.back());
    }
  }
  return result;
}

std::string cell_stem(int workers, int repetition) {
  return "runlog_w" + std::to_string(workers) + "_r" + std::to_string(repetition);
}

namespace {

ordered_json stats_object(const IntervalStats& s) {
  ordered_json j;
  j["publishes"] = s.publishes;
  j["count"] = s.count;
  j["mean_ms"] = s.mean_ms;
  j["std_ms"] = s.std_ms;
  j["min_ms"] = s.min_ms;
  j["max_ms"] = s.max_ms;
  j["p50_ms"] = s.p50_ms;
  j["p95_ms"] = s.p95_ms;
  j["p99_ms"] = s.p99_ms;
  j["gate_discards"] = s.gate_discards;
  j["stale_discards"] = s.stale_discards;
  ordered_json solve = ordered_json::array();
  for (const auto& w : s.solve) {
    solve.push_back({{"worker", w.worker}, {"count", w.count}, {"mean_ms", w.mean_ms}, {"max_ms", w.max_ms}});
  }
  j["solve"] = solve;
  return j;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << content;
  out.close();
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

std::map<int, std::vector<const ExperimentCell*>> by_workers(const std::vector<ExperimentCell>& cells) {
  std::map<int, std::vector<const ExperimentCell*>> out;
  for (const auto& c : cells) out[c.workers].push_back(&c);
  return out;
}

}  // namespace

std::string stats_json(const IntervalStats& stats) { return stats_object(stats).dump(2) + "\n"; }

std::string summary_json(const std::vector<ExperimentCell>& cells) {
  ordered_json j = ordered_json::object();
  for (const auto& [w, group] : by_workers(cells)) {
    ordered_json runs = ordered_json::array();
    std::vector<std::vector<RunRecord>> records;
    for (const ExperimentCell* c : group) {
      records.push_back(c->log.records);
      ordered_json run;
      run["repetition"] = c->repetition;
      run["seed"] = c->log.header.seed;
      run["runlog"] = cell_stem(c->workers, c->repetition) + ".csv";
      run["stats"] = stats_object(compute_interval_stats(c->log.records));
      runs.push_back(run);
    }
    ordered_json entry;
    entry["runs"] = runs;
    entry["pooled"] = stats_object(compute_interval_stats(records));
    j[std::to_string(w)] = entry;
  }
  return j.dump(2) + "\n";
}

std::string summary_json_from_dir(const fs::path& dir) {
  static const std::regex name(R"(runlog_w(\d+)_r(\d+)\.csv)");
  std::vector<ExperimentCell> cells;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string file = entry.path().filename().string();
    std::smatch m;
    if (!std::regex_match(file, m, name)) continue;
    ExperimentCell c;
    c.workers = std::stoi(m[1]);
    c.repetition = std::stoi(m[2]);
    c.log.records = load_run_log_csv(entry.path());
    fs::path header = entry.path();
    header.replace_extension(".json");
    std::ifstream in(header);
    if (!in) throw std::runtime_error(header.string() + ": cannot open");
    try {
      c.log.header.seed = nlohmann::json::parse(in).at("seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error(header.string() + ": " + e.what());
    }
    cells.push_back(std::move(c));
  }
  std::sort(cells.begin(), cells.end(), [](const ExperimentCell& a, const ExperimentCell& b) {
    return std::pair(a.workers, a.repetition) < std::pair(b.workers, b.repetition);
  });
  return summary_json(cells);
}

std::string interval_histogram_csv(const std::vector<ExperimentCell>& cells) {
  std::ostringstream out;
  out << "workers,bin_ms,count\n";
  for (const auto& [w, group] : by_workers(cells)) {
    std::map<Nanos, std::uint64_t> bins;
    for (const ExperimentCell* c : group) {
      for (Nanos v : publish_intervals(c->log.records)) ++bins[v / kNanosPerMilli];
    }
    for (const auto& [bin, count] : bins) out << w << ',' << bin << ',' << count << '\n';
  }
  return out.str();
}

void export_results(const ExperimentResult& result, const fs::path& dir, bool force) {
  std::error_code ec;
  if (fs::exists(dir, ec)) {
    if (!fs::is_directory(dir, ec)) throw std::runtime_error(dir.string() + ": exists and is not a directory");
    if (!fs::is_empty(dir, ec) && !force) {
      throw std::runtime_error(dir.string() + ": directory is not empty (use --force to overwrite)");
    }
  }
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error(dir.string() + ": " + ec.message());

  for (const auto& c : result.cells) {
    const std::string stem = cell_stem(c.workers, c.repetition);
    std::ostringstream csv;
    write_run_log_csv(csv, c.log.records);
    write_file(dir / (stem + ".csv"), csv.str());
    write_file(dir / (stem + ".json"), run_header_json(c.log));
  }
  write_file(dir / "summary.json", summary_json(result.cells));
  write_file(dir / "intervals_hist.csv", interval_histogram_csv(result.cells));
}

}  // namespace tlr
