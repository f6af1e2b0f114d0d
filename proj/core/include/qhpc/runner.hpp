#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "qhpc/fabric.hpp"
#include "qhpc/json.hpp"
#include "qhpc/patterns.hpp"
#include "qhpc/taskmgr.hpp"
#include "qhpc/trace.hpp"
#include "qhpc/workload.hpp"

namespace qhpc {

// Synthetic background load: the resource is unavailable during [start, end).
// Deliberately invisible to the early planner (which only sees the fabric
// description) but visible to late binding through the live timelines.
struct Reservation {
    std::string resource_id;
    SimTime start;
    SimTime end;
    int cores = 1;  // clamped to 1 on QPUs (exclusive devices)
};

struct RunOptions {
    BindingMode binding = BindingMode::Early;
    std::uint64_t seed = 0;
    VqeMode default_mode = VqeMode::Exact;  // for drivers without a "mode" param
    RetryPolicy retry;
    double pilot_horizon_us = std::numeric_limits<double>::infinity();
    std::vector<Reservation> reservations;
};

// A file the run wants written. Buffered so the simulation itself stays pure;
// the caller decides whether and where to write.
struct FileArtifact {
    std::string path;  // as given by the workflow, resolved by the caller
    std::string content;
};

struct RunResult {
    int exit_code = 0;        // 0 success, 2 unsatisfiable placement, 3 task failure
    std::string diagnostic;   // first failure, empty on success
    std::vector<TraceRecord> trace;
    RunMetrics metrics;
    std::vector<ScheduleDecision> plan;   // early-mode plan; empty in late mode
    std::map<std::string, Json> outputs;  // task id -> output payload
    std::vector<FileArtifact> artifacts;
};

// Executes the workload on the simulated fabric: a single discrete event loop
// drives binding, pilots, dispatch, retries, drivers, and the trace. Runs are
// bit-reproducible for a given (workload, fabric, options) triple.
RunResult run_workload(const Workload& wl, const Fabric& fabric, const RunOptions& opts = {});

}  // namespace qhpc
