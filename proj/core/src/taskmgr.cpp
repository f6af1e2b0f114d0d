#include "qhpc/taskmgr.hpp"

#include <algorithm>

namespace qhpc {

AttemptPlan plan_attempts(const std::string& task_id, SimTime start, SimTime duration,
                          double failure_prob, const RetryPolicy& policy, std::uint64_t seed) {
    if (duration < SimTime{1}) duration = SimTime{1};
    AttemptPlan plan;
    SimTime t = start;
    int max_attempts = policy.max_retries + 1;
    for (int k = 1; k <= max_attempts; ++k) {
        Rng rng(derive_stream(seed, task_id, static_cast<std::uint64_t>(k)));
        TaskAttempt a;
        a.task_id = task_id;
        a.attempt_no = k;
        a.started_at = t;
        if (rng.next_double() < failure_prob) {
            double frac = rng.next_double();
            SimTime offset = std::max(
                SimTime::from_real_us(frac * static_cast<double>(duration.us)), SimTime{1});
            a.state = AttemptState::Failed;
            a.ended_at = t + offset;
            a.failure_reason = "transient";
            plan.attempts.push_back(a);
            t = a.ended_at + SimTime::from_real_us(policy.backoff_us);
        } else {
            a.state = AttemptState::Completed;
            a.ended_at = t + duration;
            plan.attempts.push_back(a);
            plan.completed = true;
            break;
        }
    }
    plan.finished_at = plan.attempts.back().ended_at;
    return plan;
}

const Pilot& PilotRegistry::acquire(const Fabric& fabric, const std::string& resource_id,
                                    double duration_us, SimTime at) {
    if (!fabric.has_resource(resource_id))
        throw std::invalid_argument("acquire: unknown resource '" + resource_id + "'");
    if (duration_us <= 0.0) throw std::invalid_argument("acquire: non-positive pilot duration");

    SimTime expires = at + std::max(SimTime::from_real_us(duration_us), SimTime{1});
    if (fabric.is_qpu(resource_id)) {
        for (const Entry& e : entries_) {
            const Pilot& p = e.pilot;
            if (p.resource_id != resource_id) continue;
            if (at < p.expires_at && p.starts_at < expires)
                throw std::invalid_argument("acquire: QPU '" + resource_id +
                                            "' already piloted for an overlapping window");
        }
    }

    Entry e;
    e.pilot.id = entries_.size() + 1;
    e.pilot.resource_id = resource_id;
    e.pilot.capacity = fabric.is_qpu(resource_id) ? 1 : fabric.find_node(resource_id)->cores;
    e.pilot.starts_at = at;
    e.pilot.expires_at = expires;
    e.pilot.state = PilotState::Active;
    entries_.push_back(std::move(e));
    return entries_.back().pilot;
}

const Pilot* PilotRegistry::active_pilot(const std::string& resource_id, SimTime at) const {
    for (const Entry& e : entries_) {
        const Pilot& p = e.pilot;
        if (p.state == PilotState::Active && p.resource_id == resource_id && p.starts_at <= at &&
            at < p.expires_at)
            return &p;
    }
    return nullptr;
}

PilotRegistry::Entry& PilotRegistry::entry(std::uint64_t pilot_id) {
    if (pilot_id == 0 || pilot_id > entries_.size())
        throw std::invalid_argument("unknown pilot id " + std::to_string(pilot_id));
    return entries_[pilot_id - 1];
}

const PilotRegistry::Entry& PilotRegistry::entry(std::uint64_t pilot_id) const {
    if (pilot_id == 0 || pilot_id > entries_.size())
        throw std::invalid_argument("unknown pilot id " + std::to_string(pilot_id));
    return entries_[pilot_id - 1];
}

void PilotRegistry::check_window(std::uint64_t pilot_id, SimTime at, SimTime duration) const {
    const Pilot& p = entry(pilot_id).pilot;
    if (at < p.starts_at || at + duration > p.expires_at)
        throw PilotExpired("pilot on '" + p.resource_id + "' expires at " + p.expires_at.str() +
                           " before task could finish");
}

void PilotRegistry::begin_attempt(std::uint64_t pilot_id, const std::string& task_id, int cores,
                                  SimTime at) {
    Entry& e = entry(pilot_id);
    if (e.pilot.state != PilotState::Active)
        throw std::logic_error("begin_attempt: pilot not active");
    if (e.used + cores > e.pilot.capacity)
        throw CapacityExceeded("pilot on '" + e.pilot.resource_id + "': " +
                               std::to_string(e.used) + "+" + std::to_string(cores) + " of " +
                               std::to_string(e.pilot.capacity) + " cores");
    e.running[task_id] = {cores, at};
    e.used += cores;
}

void PilotRegistry::end_attempt(std::uint64_t pilot_id, const std::string& task_id, SimTime at) {
    Entry& e = entry(pilot_id);
    auto it = e.running.find(task_id);
    if (it == e.running.end())
        throw std::logic_error("end_attempt: '" + task_id + "' not running in pilot");
    auto [cores, since] = it->second;
    e.used -= cores;
    e.pilot.busy_core_us += static_cast<std::uint64_t>(cores) * (at.us - since.us);
    e.running.erase(it);
}

void PilotRegistry::release(std::uint64_t pilot_id, SimTime at) {
    Entry& e = entry(pilot_id);
    if (!e.running.empty())
        throw std::logic_error("release: pilot on '" + e.pilot.resource_id +
                               "' has running attempts");
    e.pilot.state = PilotState::Released;
    e.pilot.expires_at = std::min(e.pilot.expires_at, at);
}

bool PilotRegistry::has_running_attempts(std::uint64_t pilot_id) const {
    return !entry(pilot_id).running.empty();
}

const Pilot& PilotRegistry::pilot(std::uint64_t pilot_id) const { return entry(pilot_id).pilot; }

std::vector<Pilot> PilotRegistry::pilots() const {
    std::vector<Pilot> out;
    out.reserve(entries_.size());
    for (const Entry& e : entries_) out.push_back(e.pilot);
    return out;
}

}  // namespace qhpc
