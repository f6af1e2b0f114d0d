#pragma once

#include <limits>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "qhpc/fabric.hpp"
#include "qhpc/sim_time.hpp"
#include "qhpc/workflow.hpp"

namespace qhpc {

enum class BindingMode { Early, Late };

std::string_view binding_mode_str(BindingMode m);
std::optional<BindingMode> parse_binding_mode(std::string_view s);

struct ScheduleDecision {
    std::string task_id;
    std::string resource_id;
    SimTime planned_start;
    SimTime planned_end;  // > planned_start
    SimTime bound_at;     // zero() in early mode, bind time in late mode
};

// The feasible set is empty and no pending binding could open it up.
class UnsatisfiableConstraint : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Supplies wall-clock duration estimates (µs) for a task on a resource.
class DurationEstimator {
public:
    virtual ~DurationEstimator() = default;
    virtual double duration_us(const ExecutableTask& task, const Fabric& fabric,
                               const std::string& resource_id) const = 0;
};

// qpu_exec_time_us for quantum tasks; compute_cost_us / core_speed for
// classical ones (drivers get their nominal cost — the actual lifetime is
// event-driven).
class DefaultEstimator : public DurationEstimator {
public:
    double duration_us(const ExecutableTask& task, const Fabric& fabric,
                       const std::string& resource_id) const override;
};

enum class TaskStatus { Pending, Ready, Bound, Complete, Failed, Cancelled };

struct BusyInterval {
    SimTime start;
    SimTime end;
    int cores = 1;  // cores on a node; QPU intervals are exclusive
    std::string label;
};

// Per-resource availability timelines plus DAG progress bookkeeping. Mutated
// only by one logical context (the planner, or the runner's event loop).
class SchedulerState {
public:
    SchedulerState(const Fabric& fabric, const Workload& wl);

    // Pre-loads a busy span (external reservation / background load).
    void reserve(const std::string& resource_id, SimTime start, SimTime end, int cores,
                 const std::string& label);

    // Earliest t >= ready such that `cores` fit on the resource for
    // [t, t + duration). Never fails: the timeline always opens up.
    SimTime earliest_fit(const std::string& resource_id, SimTime ready, SimTime duration,
                         int cores) const;

    // Records the decision's interval and binding. Throws std::logic_error on
    // a QPU overlap or node capacity violation (internal consistency failure).
    void admit(const ScheduleDecision& d);

    // Marks the task complete at `at`, drops its interval, and promotes
    // successors whose predecessors are all complete into the ready set.
    void complete(const std::string& task_id, SimTime at);

    // Reverts a Bound task to Ready and drops its interval. Used when a pilot
    // expires under the task before it could run: it re-enters the ready set
    // and may be bound elsewhere without consuming retry budget.
    void unbind(const std::string& task_id);

    // Takes a resource out of the feasible set (its pilot expired and will not
    // be re-acquired). select_resource skips closed resources.
    void close_resource(const std::string& resource_id);
    bool is_closed(const std::string& resource_id) const;

    // Terminal failure. Cancels all transitive successors; returns them
    // sorted.
    std::vector<std::string> mark_failed(const std::string& task_id);

    // Registers a runtime-submitted task (driver output). Ready immediately
    // unless `preds` are still outstanding.
    void add_dynamic_task(const ExecutableTask& task, const std::vector<std::string>& preds = {});

    TaskStatus status(const std::string& task_id) const;
    const ExecutableTask& task(const std::string& task_id) const;
    std::optional<std::string> binding(const std::string& task_id) const;
    std::optional<SimTime> completion_time(const std::string& task_id) const;
    std::vector<std::string> ready_tasks() const;    // sorted
    std::vector<std::string> predecessors(const std::string& task_id) const;  // sorted
    bool all_settled() const;  // every task Complete, Failed, or Cancelled
    const std::vector<BusyInterval>& timeline(const std::string& resource_id) const;

    const Fabric& fabric() const { return *fabric_; }
    const std::vector<PlacementConstraint>& constraints() const { return constraints_; }

    // Tasks whose estimated duration exceeds this never fit inside a pilot's
    // lifetime and are filtered out up front.
    double pilot_horizon_us = std::numeric_limits<double>::infinity();

private:
    struct TaskEntry {
        ExecutableTask task;
        TaskStatus status = TaskStatus::Pending;
        std::optional<std::string> resource;
        std::optional<SimTime> completed_at;
    };

    void refresh_ready(const std::string& task_id);

    const Fabric* fabric_;
    std::map<std::string, TaskEntry> tasks_;
    std::multimap<std::string, std::string> succs_;  // from -> to
    std::multimap<std::string, std::string> preds_;  // to -> from
    std::vector<PlacementConstraint> constraints_;
    std::map<std::string, std::vector<BusyInterval>> timelines_;
    std::set<std::string> closed_;
};

// Picks the feasible resource (kind, capacity, qubit count, latency bounds
// against already-bound constraint members, coherence budget, pilot horizon)
// with the earliest feasible start; ties break on lexicographic resource id.
// Fabric and constraints are read from `state`. Throws UnsatisfiableConstraint
// when no resource qualifies.
struct Selection {
    std::string resource_id;
    SimTime start;
    SimTime end;
};

Selection select_resource(const ExecutableTask& task, const SchedulerState& state,
                          SimTime ready_at, const DurationEstimator& estimator);

// List scheduling in generation order against a fresh state (no external
// reservations — deliberately "currently available information" only). Driver
// tasks get no decision; their successors plan after the driver's nominal
// cost. bound_at = 0 on every decision. Throws UnsatisfiableConstraint.
std::vector<ScheduleDecision> plan_early(
    const Workload& wl, const Fabric& fabric, const DurationEstimator& estimator,
    double pilot_horizon_us = std::numeric_limits<double>::infinity());

// Binds one ready task against live state at `now` and admits the estimated
// interval, so queue depth is visible to subsequent bindings.
ScheduleDecision bind_late(const ExecutableTask& task, SchedulerState& state, SimTime now,
                           const DurationEstimator& estimator);

}  // namespace qhpc
