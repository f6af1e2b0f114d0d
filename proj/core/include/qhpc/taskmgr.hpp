#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "qhpc/fabric.hpp"
#include "qhpc/rng.hpp"
#include "qhpc/sim_time.hpp"

namespace qhpc {

enum class PilotState { Requested, Active, Released };

// A resource lease. QPUs are leased whole (no qubit sharing); node pilots
// carry the node's core count as capacity.
struct Pilot {
    std::uint64_t id = 0;
    std::string resource_id;
    int capacity = 1;
    SimTime starts_at;
    SimTime expires_at;  // > starts_at while active; truncated to release time
    PilotState state = PilotState::Requested;
    std::uint64_t busy_core_us = 0;  // Σ cores × runtime, for utilization
};

enum class AttemptState { Pending, Staged, Running, Completed, Failed };

struct TaskAttempt {
    std::string task_id;
    int attempt_no = 1;  // 1-based
    AttemptState state = AttemptState::Pending;
    SimTime started_at;
    SimTime ended_at;            // set iff terminal
    std::string failure_reason;  // set iff Failed
};

struct RetryPolicy {
    int max_retries = 2;
    double backoff_us = 1000.0;  // delay before the next attempt
};

// Pilot window cannot fit the attempt; does not consume retry budget.
class PilotExpired : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CapacityExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The full retry saga for one task, laid out up front. Attempt k draws from
// derive_stream(seed, task_id, k): the first draw decides failure against
// failure_prob, the second places the failure uniformly inside the window.
// Retries start backoff_us after the failure point.
struct AttemptPlan {
    std::vector<TaskAttempt> attempts;  // terminal-state records, ≤ max_retries + 1
    bool completed = false;
    SimTime finished_at;  // end of the last attempt
};

AttemptPlan plan_attempts(const std::string& task_id, SimTime start, SimTime duration,
                          double failure_prob, const RetryPolicy& policy, std::uint64_t seed);

// Owns pilot lifecycles and per-pilot capacity accounting. Driven by one
// logical context (the runner's event loop).
class PilotRegistry {
public:
    // Registers an active pilot on the resource for duration_us starting at
    // `at`. Throws std::invalid_argument for an unknown resource or a QPU
    // whose window would overlap another live pilot.
    const Pilot& acquire(const Fabric& fabric, const std::string& resource_id,
                         double duration_us, SimTime at);

    // The pilot whose window contains `at`, or nullptr.
    const Pilot* active_pilot(const std::string& resource_id, SimTime at) const;

    // Throws PilotExpired when [at, at + duration) does not fit before the
    // pilot's expiry — surfaced to the workload layer for rebinding.
    void check_window(std::uint64_t pilot_id, SimTime at, SimTime duration) const;

    // Capacity bookkeeping while an attempt runs inside the pilot.
    void begin_attempt(std::uint64_t pilot_id, const std::string& task_id, int cores,
                       SimTime at);  // throws CapacityExceeded
    void end_attempt(std::uint64_t pilot_id, const std::string& task_id, SimTime at);

    // Returns the capacity. Throws std::logic_error while attempts still run.
    void release(std::uint64_t pilot_id, SimTime at);

    bool has_running_attempts(std::uint64_t pilot_id) const;
    const Pilot& pilot(std::uint64_t pilot_id) const;
    std::vector<Pilot> pilots() const;  // snapshot, in acquisition order

private:
    struct Entry {
        Pilot pilot;
        std::map<std::string, std::pair<int, SimTime>> running;  // task -> (cores, since)
        int used = 0;
    };

    Entry& entry(std::uint64_t pilot_id);
    const Entry& entry(std::uint64_t pilot_id) const;

    // deque: acquire() hands out references that must survive growth
    std::deque<Entry> entries_;
};

}  // namespace qhpc
