#include "qhpc/workload.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>

namespace qhpc {

std::string_view binding_mode_str(BindingMode m) {
    return m == BindingMode::Early ? "early" : "late";
}

std::optional<BindingMode> parse_binding_mode(std::string_view s) {
    if (s == "early") return BindingMode::Early;
    if (s == "late") return BindingMode::Late;
    return std::nullopt;
}

double DefaultEstimator::duration_us(const ExecutableTask& task, const Fabric& fabric,
                                     const std::string& resource_id) const {
    if (task.kind == TaskKind::Quantum) {
        const QpuDevice* q = fabric.find_qpu(resource_id);
        if (!q) throw std::invalid_argument("estimator: not a QPU: " + resource_id);
        return qpu_exec_time_us(*q, task.circuit, task.quantum.shots);
    }
    const ClassicalNode* n = fabric.find_node(resource_id);
    if (!n) throw std::invalid_argument("estimator: not a node: " + resource_id);
    return task.classical.compute_cost_us / n->core_speed;
}

namespace {

// Usage only changes at interval starts, so checking the window start and
// every interval start inside the window covers the whole [s, e).
bool fits(const std::vector<BusyInterval>& iv, SimTime s, SimTime e, int need, int capacity) {
    std::vector<SimTime> pts{s};
    for (const BusyInterval& b : iv)
        if (b.start > s && b.start < e) pts.push_back(b.start);
    for (SimTime p : pts) {
        int used = 0;
        for (const BusyInterval& b : iv)
            if (b.start <= p && p < b.end) used += b.cores;
        if (used + need > capacity) return false;
    }
    return true;
}

void insert_sorted(std::vector<BusyInterval>& iv, BusyInterval b) {
    auto pos = std::upper_bound(iv.begin(), iv.end(), b.start,
                                [](SimTime s, const BusyInterval& x) { return s < x.start; });
    iv.insert(pos, std::move(b));
}

}  // namespace

SchedulerState::SchedulerState(const Fabric& fabric, const Workload& wl)
    : fabric_(&fabric), constraints_(wl.constraints) {
    for (const std::string& r : fabric.resource_ids()) timelines_[r];
    for (const ExecutableTask& t : wl.tasks) tasks_[t.id] = TaskEntry{t};
    for (const Edge& e : wl.edges) {
        succs_.insert({e.from, e.to});
        preds_.insert({e.to, e.from});
    }
    for (auto& [id, entry] : tasks_) refresh_ready(id);
}

void SchedulerState::refresh_ready(const std::string& task_id) {
    auto it = tasks_.find(task_id);
    if (it == tasks_.end() || it->second.status != TaskStatus::Pending) return;
    auto [lo, hi] = preds_.equal_range(task_id);
    for (auto p = lo; p != hi; ++p)
        if (tasks_.at(p->second).status != TaskStatus::Complete) return;
    it->second.status = TaskStatus::Ready;
}

void SchedulerState::reserve(const std::string& resource_id, SimTime start, SimTime end,
                             int cores, const std::string& label) {
    auto it = timelines_.find(resource_id);
    if (it == timelines_.end())
        throw std::invalid_argument("reserve: unknown resource '" + resource_id + "'");
    if (end <= start) return;
    insert_sorted(it->second, BusyInterval{start, end, cores, label});
}

SimTime SchedulerState::earliest_fit(const std::string& resource_id, SimTime ready,
                                     SimTime duration, int cores) const {
    auto it = timelines_.find(resource_id);
    if (it == timelines_.end())
        throw std::invalid_argument("earliest_fit: unknown resource '" + resource_id + "'");
    int capacity = 1;
    if (const ClassicalNode* n = fabric_->find_node(resource_id)) capacity = n->cores;
    if (cores > capacity)
        throw std::logic_error("earliest_fit: request exceeds capacity on '" + resource_id + "'");

    const std::vector<BusyInterval>& iv = it->second;
    std::vector<SimTime> cands{ready};
    for (const BusyInterval& b : iv)
        if (b.end > ready) cands.push_back(b.end);
    std::sort(cands.begin(), cands.end());
    for (SimTime t : cands)
        if (fits(iv, t, t + duration, cores, capacity)) return t;
    return cands.back();  // unreachable: the latest end always fits
}

void SchedulerState::admit(const ScheduleDecision& d) {
    auto it = tasks_.find(d.task_id);
    if (it == tasks_.end()) throw std::logic_error("admit: unknown task '" + d.task_id + "'");
    if (d.planned_end <= d.planned_start)
        throw std::logic_error("admit: empty interval for '" + d.task_id + "'");
    auto tl = timelines_.find(d.resource_id);
    if (tl == timelines_.end())
        throw std::logic_error("admit: unknown resource '" + d.resource_id + "'");

    int need = 1;
    int capacity = 1;
    if (const ClassicalNode* n = fabric_->find_node(d.resource_id)) {
        capacity = n->cores;
        need = it->second.task.classical.cores;
    }
    if (!fits(tl->second, d.planned_start, d.planned_end, need, capacity))
        throw std::logic_error("admit: overlap violation on '" + d.resource_id + "' for task '" +
                               d.task_id + "'");
    insert_sorted(tl->second, BusyInterval{d.planned_start, d.planned_end, need, d.task_id});
    it->second.resource = d.resource_id;
    it->second.status = TaskStatus::Bound;
}

void SchedulerState::complete(const std::string& task_id, SimTime at) {
    auto it = tasks_.find(task_id);
    if (it == tasks_.end()) throw std::logic_error("complete: unknown task '" + task_id + "'");
    it->second.status = TaskStatus::Complete;
    it->second.completed_at = at;
    if (it->second.resource) {
        std::vector<BusyInterval>& iv = timelines_.at(*it->second.resource);
        std::erase_if(iv, [&](const BusyInterval& b) { return b.label == task_id; });
    }
    auto [lo, hi] = succs_.equal_range(task_id);
    for (auto s = lo; s != hi; ++s) refresh_ready(s->second);
}

void SchedulerState::close_resource(const std::string& resource_id) {
    if (!timelines_.count(resource_id))
        throw std::invalid_argument("close_resource: unknown resource '" + resource_id + "'");
    closed_.insert(resource_id);
}

bool SchedulerState::is_closed(const std::string& resource_id) const {
    return closed_.count(resource_id) > 0;
}

void SchedulerState::unbind(const std::string& task_id) {
    auto it = tasks_.find(task_id);
    if (it == tasks_.end()) throw std::logic_error("unbind: unknown task '" + task_id + "'");
    if (it->second.status != TaskStatus::Bound)
        throw std::logic_error("unbind: task '" + task_id + "' is not bound");
    if (it->second.resource) {
        std::vector<BusyInterval>& iv = timelines_.at(*it->second.resource);
        std::erase_if(iv, [&](const BusyInterval& b) { return b.label == task_id; });
    }
    it->second.resource.reset();
    it->second.status = TaskStatus::Ready;
}

std::vector<std::string> SchedulerState::mark_failed(const std::string& task_id) {
    auto it = tasks_.find(task_id);
    if (it == tasks_.end()) throw std::logic_error("mark_failed: unknown task '" + task_id + "'");
    it->second.status = TaskStatus::Failed;
    if (it->second.resource) {
        std::vector<BusyInterval>& iv = timelines_.at(*it->second.resource);
        std::erase_if(iv, [&](const BusyInterval& b) { return b.label == task_id; });
    }

    std::set<std::string> cancelled;
    std::deque<std::string> frontier{task_id};
    while (!frontier.empty()) {
        std::string u = frontier.front();
        frontier.pop_front();
        auto [lo, hi] = succs_.equal_range(u);
        for (auto s = lo; s != hi; ++s) {
            TaskEntry& e = tasks_.at(s->second);
            if (e.status == TaskStatus::Pending || e.status == TaskStatus::Ready ||
                e.status == TaskStatus::Bound) {
                if (e.status == TaskStatus::Bound && e.resource) {
                    std::vector<BusyInterval>& iv = timelines_.at(*e.resource);
                    std::erase_if(iv, [&](const BusyInterval& b) { return b.label == s->second; });
                }
                e.status = TaskStatus::Cancelled;
                cancelled.insert(s->second);
                frontier.push_back(s->second);
            }
        }
    }
    return {cancelled.begin(), cancelled.end()};
}

void SchedulerState::add_dynamic_task(const ExecutableTask& task,
                                      const std::vector<std::string>& preds) {
    if (tasks_.count(task.id))
        throw std::logic_error("add_dynamic_task: duplicate id '" + task.id + "'");
    tasks_[task.id] = TaskEntry{task};
    for (const std::string& p : preds) {
        if (!tasks_.count(p))
            throw std::logic_error("add_dynamic_task: unknown predecessor '" + p + "'");
        succs_.insert({p, task.id});
        preds_.insert({task.id, p});
    }
    refresh_ready(task.id);
}

TaskStatus SchedulerState::status(const std::string& task_id) const {
    return tasks_.at(task_id).status;
}

const ExecutableTask& SchedulerState::task(const std::string& task_id) const {
    return tasks_.at(task_id).task;
}

std::optional<std::string> SchedulerState::binding(const std::string& task_id) const {
    auto it = tasks_.find(task_id);
    return it == tasks_.end() ? std::nullopt : it->second.resource;
}

std::optional<SimTime> SchedulerState::completion_time(const std::string& task_id) const {
    auto it = tasks_.find(task_id);
    return it == tasks_.end() ? std::nullopt : it->second.completed_at;
}

std::vector<std::string> SchedulerState::ready_tasks() const {
    std::vector<std::string> out;
    for (const auto& [id, e] : tasks_)
        if (e.status == TaskStatus::Ready) out.push_back(id);
    return out;  // map order: already sorted
}

std::vector<std::string> SchedulerState::predecessors(const std::string& task_id) const {
    std::vector<std::string> out;
    auto [lo, hi] = preds_.equal_range(task_id);
    for (auto it = lo; it != hi; ++it) out.push_back(it->second);
    std::sort(out.begin(), out.end());
    return out;
}

bool SchedulerState::all_settled() const {
    for (const auto& [id, e] : tasks_)
        if (e.status != TaskStatus::Complete && e.status != TaskStatus::Failed &&
            e.status != TaskStatus::Cancelled)
            return false;
    return true;
}

const std::vector<BusyInterval>& SchedulerState::timeline(const std::string& resource_id) const {
    auto it = timelines_.find(resource_id);
    if (it == timelines_.end())
        throw std::invalid_argument("timeline: unknown resource '" + resource_id + "'");
    return it->second;
}

namespace {

bool constraints_ok(const std::string& task_id, const std::string& resource,
                    const SchedulerState& state) {
    for (const PlacementConstraint& c : state.constraints()) {
        if (std::find(c.members.begin(), c.members.end(), task_id) == c.members.end()) continue;
        for (const std::string& m : c.members) {
            if (m == task_id) continue;
            std::optional<std::string> bound = state.binding(m);
            if (!bound) continue;  // unbound members constrain nothing yet
            if (state.fabric().latency(resource, *bound) > c.max_latency_us) return false;
        }
    }
    return true;
}

// Round-trip latency partner for a conditioned circuit: the worst already-
// bound classical constraint partner if any, else the nearest classical node
// (optimistic — the runner's feedback really does come from somewhere).
double feedback_latency(const std::string& task_id, const std::string& resource,
                        const SchedulerState& state) {
    double worst = -1.0;
    for (const PlacementConstraint& c : state.constraints()) {
        if (std::find(c.members.begin(), c.members.end(), task_id) == c.members.end()) continue;
        for (const std::string& m : c.members) {
            if (m == task_id) continue;
            std::optional<std::string> bound = state.binding(m);
            if (bound && state.fabric().find_node(*bound))
                worst = std::max(worst, state.fabric().latency(resource, *bound));
        }
    }
    if (worst >= 0.0) return worst;
    double best = std::numeric_limits<double>::infinity();
    for (const ClassicalNode& n : state.fabric().nodes)
        best = std::min(best, state.fabric().latency(resource, n.id));
    return std::isfinite(best) ? best : 0.0;
}

}  // namespace

Selection select_resource(const ExecutableTask& task, const SchedulerState& state,
                          SimTime ready_at, const DurationEstimator& estimator) {
    const Fabric& fab = state.fabric();
    std::optional<Selection> best;
    for (const std::string& r : fab.resource_ids()) {
        if (state.is_closed(r)) continue;
        const ClassicalNode* node = fab.find_node(r);
        const QpuDevice* qpu = fab.find_qpu(r);
        int need = 1;
        if (task.kind == TaskKind::Quantum) {
            if (!qpu) continue;
            int width = std::max(task.quantum.qpu_qubits_min, task.circuit.num_qubits);
            if (qpu->num_qubits < width) continue;
        } else {
            if (!node) continue;
            if (node->cores < task.classical.cores || node->gpus < task.classical.gpus) continue;
            need = task.classical.cores;
        }
        if (!constraints_ok(task.id, r, state)) continue;
        if (task.kind == TaskKind::Quantum && task.circuit.has_condition() &&
            !coherence_budget_ok(*qpu, task.circuit, feedback_latency(task.id, r, state)))
            continue;
        double est_us = estimator.duration_us(task, fab, r);
        if (est_us > state.pilot_horizon_us) continue;
        SimTime dur = std::max(SimTime::from_real_us(est_us), SimTime{1});
        SimTime start = state.earliest_fit(r, ready_at, dur, need);
        if (!best || start < best->start ||
            (start == best->start && r < best->resource_id))
            best = Selection{r, start, start + dur};
    }
    if (!best)
        throw UnsatisfiableConstraint("task '" + task.id +
                                      "': no feasible resource on this fabric");
    return *best;
}

std::vector<ScheduleDecision> plan_early(const Workload& wl, const Fabric& fabric,
                                         const DurationEstimator& estimator,
                                         double pilot_horizon_us) {
    SchedulerState state(fabric, wl);
    state.pilot_horizon_us = pilot_horizon_us;
    std::map<std::string, SimTime> done_at;
    std::vector<ScheduleDecision> plan;
    for (const auto& gen : generations(wl)) {
        for (const std::string& id : gen) {
            const ExecutableTask& t = *wl.find_task(id);
            SimTime ready = SimTime::zero();
            for (const std::string& p : wl.predecessors(id))
                ready = std::max(ready, done_at[p]);
            if (t.is_driver) {
                // No upfront decision — lifetime is unknown. Successors plan
                // after the driver's nominal cost at reference speed.
                done_at[id] =
                    ready + std::max(SimTime::from_real_us(t.classical.compute_cost_us),
                                     SimTime{1});
                continue;
            }
            Selection sel = select_resource(t, state, ready, estimator);
            ScheduleDecision d{id, sel.resource_id, sel.start, sel.end, SimTime::zero()};
            state.admit(d);
            done_at[id] = sel.end;
            plan.push_back(d);
        }
    }
    return plan;
}

ScheduleDecision bind_late(const ExecutableTask& task, SchedulerState& state, SimTime now,
                           const DurationEstimator& estimator) {
    Selection sel = select_resource(task, state, now, estimator);
    ScheduleDecision d{task.id, sel.resource_id, sel.start, sel.end, now};
    state.admit(d);
    return d;
}

}  // namespace qhpc
