#include "tlr/runtime/run_log.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace tlr {

std::vector<RunRecord> RunLog::published() const {
  std::vector<RunRecord> out;
  for (const auto& r : records)
    if (r.flag == RecordFlag::Published) out.push_back(r);
  return out;
}

std::size_t RunLog::count(RecordFlag flag) const {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [flag](const RunRecord& r) { return r.flag == flag; }));
}

void write_run_log_csv(std::ostream& out, const std::vector<RunRecord>& records) {
  out << kRunLogCsvHeader << '\n';
  for (const auto& r : records) {
    out << r.publish_wall_ns << ',' << r.source_state_ns << ',' << r.worker_id << ',' << r.solve_ns << ','
        << r.interval_ns << ',' << static_cast<int>(r.flag) << '\n';
  }
}

namespace {

template <typename T>
T parse_field(const std::string& field, const std::string& where) {
  T v{};
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
    throw std::runtime_error(where + ": bad integer '" + field + "'");
  }
  return v;
}

}  // namespace

std::vector<RunRecord> read_run_log_csv(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(source + ": empty run log");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kRunLogCsvHeader) throw std::runtime_error(source + ": unexpected header '" + line + "'");
  std::vector<RunRecord> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(lineno);
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 6) throw std::runtime_error(where + ": expected 6 fields, got " + std::to_string(f.size()));
    RunRecord r;
    r.publish_wall_ns = parse_field<Nanos>(f[0], where);
    r.source_state_ns = parse_field<Nanos>(f[1], where);
    r.worker_id = parse_field<int>(f[2], where);
    r.solve_ns = parse_field<Nanos>(f[3], where);
    r.interval_ns = parse_field<Nanos>(f[4], where);
    const int flag = parse_field<int>(f[5], where);
    if (flag < 0 || flag > 2) throw std::runtime_error(where + ": discarded_flag must be 0, 1 or 2");
    r.flag = static_cast<RecordFlag>(flag);
    out.push_back(r);
  }
  return out;
}

std::vector<RunRecord> load_run_log_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path.string() + ": cannot open");
  return read_run_log_csv(in, path.string());
}

std::string run_header_json(const RunLog& log) {
  const RunHeader& h = log.header;
  nlohmann::ordered_json j;
  j["mode"] = h.mode;
  j["workers"] = h.workers;
  j["min_gap_ms"] = h.min_gap_ms;
  j["duration_s"] = h.duration_s;
  j["seed"] = h.seed;
  j["latency"] = h.latency;
  j["pinning"] = h.pinning;
  j["track"] = h.track;
  j["params"] = h.params;
  j["mpcc"] = h.mpcc;
  j["state_messages"] = log.state_messages;
  j["published"] = log.count(RecordFlag::Published);
  j["gate_discards"] = log.count(RecordFlag::GateDiscard);
  j["stale_discards"] = log.count(RecordFlag::StaleDiscard);
  j["solver_failures"] = log.solver_failures.size();
  j["warnings"] = log.warnings;
  return j.dump(2) + "\n";
}

std::size_t freshness_violations(const std::vector<RunRecord>& records) {
  std::size_t bad = 0;
  bool have = false;
  Nanos last = 0;
  for (const auto& r : records) {
    if (r.flag != RecordFlag::Published) continue;
    if (have && r.source_state_ns <= last) ++bad;
    last = r.source_state_ns;
    have = true;
  }
  return bad;
}

std::size_t work_conservation_violations(const RunLog& log) {
  const auto& ev = log.pool_events;
  std::vector<bool> busy(static_cast<std::size_t>(std::max(log.header.workers, 1)), false);
  std::optional<Nanos> mailbox;
  std::size_t bad = 0;
  for (std::size_t i = 0; i < ev.size(); ++i) {
    const PoolEvent& e = ev[i];
    const auto w = static_cast<std::size_t>(std::max(e.worker_id, 0));
    switch (e.kind) {
      case PoolEvent::Kind::Offer:
        mailbox = e.source_state_ns;
        break;
      case PoolEvent::Kind::Pickup:
        if (!mailbox || *mailbox != e.source_state_ns || w >= busy.size() || busy[w]) ++bad;
        mailbox.reset();
        if (w < busy.size()) busy[w] = true;
        break;
      case PoolEvent::Kind::Complete:
        if (w < busy.size()) busy[w] = false;
        break;
    }
    const bool instant_done = i + 1 == ev.size() || ev[i + 1].time != e.time;
    if (instant_done && mailbox && std::find(busy.begin(), busy.end(), false) != busy.end()) ++bad;
  }
  return bad;
}

std::size_t gate_violations(const RunLog& log, Nanos min_gap) {
  std::size_t bad = 0;
  bool have = false;
  Nanos last = 0;
  for (const auto& e : log.pool_events) {
    if (e.kind != PoolEvent::Kind::Pickup) continue;
    if (have && e.source_state_ns - last <= min_gap) ++bad;
    last = e.source_state_ns;
    have = true;
  }
  return bad;
}

std::size_t held_input_violations(const RunLog& log) {
  std::size_t bad = 0, next = 0;
  ControlInput current{};
  for (const auto& s : log.trajectory) {
    while (next < log.published_inputs.size() && log.published_inputs[next].first < s.state.timestamp) {
      current = log.published_inputs[next++].second;
    }
    if (s.applied.d != current.d || s.applied.delta != current.delta) ++bad;
  }
  return bad;
}

}  // namespace tlr
