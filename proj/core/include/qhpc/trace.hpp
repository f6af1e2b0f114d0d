#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qhpc/json.hpp"
#include "qhpc/sim_time.hpp"

namespace qhpc {

enum class TraceKind { TaskStart, TaskEnd, TaskFail, PilotAcquire, PilotRelease, Bind };

std::string_view trace_kind_str(TraceKind k);
std::optional<TraceKind> parse_trace_kind(std::string_view s);

// One run event. `detail` carries space-separated key=value tokens
// (kind=quantum, shots=1024, reason=transient, terminal=1, energy=-1.0, ...)
// so metrics stay recomputable from the trace alone.
struct TraceRecord {
    TraceKind kind = TraceKind::TaskStart;
    SimTime at;
    std::string task_id;      // empty when not applicable
    std::string resource_id;  // empty when not applicable
    int attempt = 0;          // 0 when not applicable
    std::string detail;
};

// Returns the value of `key=` inside a detail string, if present.
std::optional<std::string> detail_token(const std::string& detail, std::string_view key);

Json trace_record_to_json(const TraceRecord& r);

// Newline-delimited JSON, one record per line, stable key order.
std::string trace_to_jsonl(const std::vector<TraceRecord>& trace);

struct TraceParseResult {
    std::optional<std::vector<TraceRecord>> records;
    std::vector<std::string> errors;

    bool ok() const { return records.has_value(); }
};

TraceParseResult parse_trace_jsonl(const std::string& text);
TraceParseResult load_trace_file(const std::filesystem::path& path);

enum class RunOutcome { Success, Failed, Unsatisfiable };

std::string_view outcome_str(RunOutcome o);

struct ResourceMetrics {
    std::uint64_t busy_us = 0;
    double utilization = 0.0;  // busy / makespan, in [0, 1]
};

struct RunMetrics {
    std::uint64_t makespan_us = 0;
    std::map<std::string, ResourceMetrics> resources;
    std::uint64_t total_quantum_tasks = 0;        // quantum task_end records
    std::uint64_t total_shots = 0;                // Σ shots= over quantum task_end
    std::uint64_t total_circuit_evaluations = 0;  // quantum task_start records (attempts)
    RunOutcome outcome = RunOutcome::Success;
};

// Pure fold over trace records; the run and the report command share it.
// Busy time pairs each task_start with its task_end or task_fail (failed
// attempts occupied the resource too). Outcome is failed when some task's
// last lifecycle record is a task_fail; reason=unsatisfiable marks the
// unsatisfiable outcome.
RunMetrics compute_metrics(const std::vector<TraceRecord>& trace);

Json metrics_to_json(const RunMetrics& m);

// Per-resource table plus the metrics block, deterministic layout.
std::string render_report(const std::vector<TraceRecord>& trace);

// Gantt-ready rows: task <tab> resource <tab> start_us <tab> end_us <tab>
// attempt <tab> outcome.
std::string render_gantt_tsv(const std::vector<TraceRecord>& trace);

}  // namespace qhpc
