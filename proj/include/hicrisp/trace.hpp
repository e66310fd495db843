#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace hicrisp {

enum class EventKind {
  plan,
  plan_invalid,
  action_start,
  primitive_exec,
  predefined_fix,
  perception,
  correction_push,
  correction_generate,
  correction_retry,
  correction_pop,
  correction_exhausted,
  step_skipped,
  task_end,
};

std::string to_string(EventKind kind);
EventKind event_kind_from_string(const std::string& s);

struct TraceEvent {
  std::uint64_t seq = 0;
  EventKind kind = EventKind::plan;
  nlohmann::json payload;
  double wall_time = 0.0;  // excluded from the determinism hash

  // Canonical line without wall_time; hash input.
  std::string canonical() const;
};

// Append-only event log. Events accumulate in memory; write_to() persists
// them as line-delimited JSON (schema trace/1) with a header line carrying
// the inputs needed for replay, and a trailer carrying the determinism hash.
class Trace {
 public:
  void set_header(nlohmann::json header) { header_ = std::move(header); }
  const nlohmann::json& header() const { return header_; }

  const TraceEvent& add(EventKind kind, nlohmann::json payload);
  const std::vector<TraceEvent>& events() const { return events_; }
  bool complete() const;  // has a task_end event

  // FNV-1a 64 over the canonical event lines.
  std::uint64_t determinism_hash() const;

  void write_to(const std::string& path) const;
  static Trace read_from(const std::string& path);
  // Hash stored in the file trailer at write time, 0 if absent.
  std::uint64_t stored_hash() const { return stored_hash_; }

 private:
  nlohmann::json header_ = nlohmann::json::object();
  std::vector<TraceEvent> events_;
  std::uint64_t stored_hash_ = 0;
};

std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ull);

}  // namespace hicrisp
