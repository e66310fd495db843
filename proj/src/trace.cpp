#include "hicrisp/trace.hpp"

#include <chrono>
#include <fstream>
#include <map>
#include <stdexcept>

namespace hicrisp {

namespace {

const std::map<EventKind, std::string> kKindNames = {
    {EventKind::plan, "plan"},
    {EventKind::plan_invalid, "plan_invalid"},
    {EventKind::action_start, "action_start"},
    {EventKind::primitive_exec, "primitive_exec"},
    {EventKind::predefined_fix, "predefined_fix"},
    {EventKind::perception, "perception"},
    {EventKind::correction_push, "correction_push"},
    {EventKind::correction_generate, "correction_generate"},
    {EventKind::correction_retry, "correction_retry"},
    {EventKind::correction_pop, "correction_pop"},
    {EventKind::correction_exhausted, "correction_exhausted"},
    {EventKind::step_skipped, "step_skipped"},
    {EventKind::task_end, "task_end"},
};

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

}  // namespace

std::string to_string(EventKind kind) { return kKindNames.at(kind); }

EventKind event_kind_from_string(const std::string& s) {
  for (const auto& [k, name] : kKindNames)
    if (name == s) return k;
  throw std::runtime_error("unknown trace event kind: " + s);
}

std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string TraceEvent::canonical() const {
  nlohmann::json j;
  j["seq"] = seq;
  j["kind"] = to_string(kind);
  j["payload"] = payload;
  return j.dump();
}

const TraceEvent& Trace::add(EventKind kind, nlohmann::json payload) {
  TraceEvent ev;
  ev.seq = events_.size();
  ev.kind = kind;
  ev.payload = std::move(payload);
  ev.wall_time = now_seconds();
  if (!events_.empty() && events_.back().kind == EventKind::task_end)
    throw std::logic_error("trace already terminated by task_end");
  events_.push_back(std::move(ev));
  return events_.back();
}

bool Trace::complete() const {
  return !events_.empty() && events_.back().kind == EventKind::task_end;
}

std::uint64_t Trace::determinism_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const auto& ev : events_) {
    h = fnv1a64(ev.canonical(), h);
    h = fnv1a64("\n", h);
  }
  return h;
}

void Trace::write_to(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trace file: " + path);
  nlohmann::json header = header_;
  header["schema"] = "trace/1";
  out << header.dump() << '\n';
  for (const auto& ev : events_) {
    nlohmann::json j;
    j["seq"] = ev.seq;
    j["kind"] = to_string(ev.kind);
    j["payload"] = ev.payload;
    j["wall_time"] = ev.wall_time;
    out << j.dump() << '\n';
  }
  nlohmann::json trailer;
  trailer["determinism_hash"] = determinism_hash();
  out << trailer.dump() << '\n';
}

Trace Trace::read_from(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace file: " + path);
  Trace t;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    if (first) {
      if (j.value("schema", "") != "trace/1")
        throw std::runtime_error(path + ": missing trace/1 header");
      t.header_ = j;
      first = false;
      continue;
    }
    if (j.contains("determinism_hash")) {
      t.stored_hash_ = j["determinism_hash"].get<std::uint64_t>();
      continue;
    }
    TraceEvent ev;
    ev.seq = j.at("seq").get<std::uint64_t>();
    ev.kind = event_kind_from_string(j.at("kind").get<std::string>());
    ev.payload = j.at("payload");
    ev.wall_time = j.value("wall_time", 0.0);
    t.events_.push_back(std::move(ev));
  }
  if (first) throw std::runtime_error(path + ": empty trace file");
  return t;
}

}  // namespace hicrisp
