#include "qhpc/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <tuple>
#include <utility>

#include "qhpc/engine.hpp"
#include "qhpc/qsim.hpp"
#include "qhpc/rng.hpp"

namespace qhpc {
namespace {

// Stand-in lifetime for pilots when no horizon is configured.
constexpr double kOpenEndedPilotUs = 1e15;

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct Event {
    enum class Kind { AttemptStart, AttemptEnd, ReservationStart, ReservationEnd };
    Kind kind = Kind::AttemptStart;
    std::string task_id;
    int attempt_no = 0;     // absolute, 1-based across rebinds
    std::size_t index = 0;  // reservation index
};

struct QueueEntry {
    SimTime key;  // estimated start at enqueue time
    std::uint64_t seq = 0;
    std::string task_id;
};

struct ResourceRt {
    bool is_qpu = false;
    int capacity = 1;  // cores; 1 on a QPU
    int in_use = 0;    // running sagas, drivers, and reservation holds
    bool pilot_tried = false;  // one pilot per resource per run
    bool pilot_live = false;
    std::uint64_t pilot_id = 0;
    std::vector<QueueEntry> queue;  // sorted by (key, seq)
};

// A dispatched task walking its precomputed attempt plan. The resource slot
// stays held across the whole saga, backoff gaps included.
struct SagaRt {
    AttemptPlan plan;  // attempt_no values shifted to absolute
    std::string resource_id;
    int cores = 1;
    std::uint64_t pilot_id = 0;
    std::size_t next = 0;  // index of the attempt now running / about to run
};

// A live driver and its evaluation fan-out.
struct DriverRt {
    VqeEngine engine;
    std::string resource_id;
    int cores = 1;
    std::uint64_t pilot_id = 0;
    std::map<std::uint64_t, Eval> evals;            // current batch, by eval id
    std::map<std::string, std::uint64_t> child_of;  // child task id -> eval id
    std::map<std::uint64_t, double> energies;       // answered evals
    std::size_t outstanding = 0;
    bool failed = false;
};

struct Runner {
    const Workload* wl;
    const Fabric* fab;
    RunOptions opts;

    SchedulerState state;
    DefaultEstimator est;
    EventQueue<Event> events;
    PilotRegistry pilots;
    std::map<std::string, ResourceRt> rt;
    std::map<std::string, SagaRt> running;
    std::map<std::string, DriverRt> drivers;
    std::map<std::string, std::string> child_owner;   // eval task -> driver task
    std::map<std::string, int> attempts_used;         // absolute attempts that ran
    std::set<std::string> queued;
    std::map<std::string, std::string> park_reason;   // first bind failure per task
    std::map<std::string, ScheduleDecision> planned;  // early plan, pending dispatch
    RunResult res;
    std::uint64_t seq = 0;
    bool any_failed = false;

    Runner(const Workload& w, const Fabric& f, RunOptions o)
        : wl(&w), fab(&f), opts(std::move(o)), state(f, w) {}

    void push(TraceRecord r) { res.trace.push_back(std::move(r)); }

    SimTime delay_until(SimTime target) const {
        SimTime now = events.now();
        return SimTime{target.us >= now.us ? target.us - now.us : 0};
    }

    static int need_cores(const ExecutableTask& t) {
        return t.kind == TaskKind::Quantum ? 1 : t.classical.cores;
    }

    static std::string start_detail(const ExecutableTask& t) {
        if (t.kind == TaskKind::Quantum)
            return "kind=quantum shots=" + std::to_string(t.quantum.shots);
        return "kind=classical";
    }

    int reservation_cores(const Reservation& rv) const {
        return fab->is_qpu(rv.resource_id) ? 1 : rv.cores;
    }

    void cascade_failure(const std::string& task_id) {
        for (const std::string& c : state.mark_failed(task_id)) park_reason.erase(c);
    }

    // ---- setup ---------------------------------------------------------

    void init() {
        state.pilot_horizon_us = opts.pilot_horizon_us;
        for (const std::string& id : fab->resource_ids()) {
            ResourceRt r;
            if (const ClassicalNode* n = fab->find_node(id))
                r.capacity = n->cores;
            else
                r.is_qpu = true;
            rt.emplace(id, std::move(r));
        }
        for (std::size_t i = 0; i < opts.reservations.size(); ++i) {
            const Reservation& rv = opts.reservations[i];
            if (rv.end <= rv.start) continue;
            int cores = reservation_cores(rv);
            state.reserve(rv.resource_id, rv.start, rv.end, cores,
                          "$reservation" + std::to_string(i));
            if (rv.start == SimTime::zero())
                rt.at(rv.resource_id).in_use += cores;
            else
                events.schedule(delay_until(rv.start),
                                Event{Event::Kind::ReservationStart, "", 0, i});
            events.schedule(delay_until(rv.end), Event{Event::Kind::ReservationEnd, "", 0, i});
        }
    }

    void enqueue(const std::string& resource, SimTime key, const std::string& task_id) {
        std::vector<QueueEntry>& q = rt.at(resource).queue;
        QueueEntry e{key, seq++, task_id};
        auto pos = std::upper_bound(q.begin(), q.end(), e,
                                    [](const QueueEntry& a, const QueueEntry& b) {
                                        return std::tie(a.key, a.seq) < std::tie(b.key, b.seq);
                                    });
        q.insert(pos, std::move(e));
        queued.insert(task_id);
    }

    // ---- binding -------------------------------------------------------

    // Binds every ready unqueued task (drivers and dynamic tasks in early
    // mode; everything in late mode) and retries previously unsatisfiable
    // ones — a partner binding may have opened the feasible set.
    bool bind_pass() {
        bool progress = false;
        for (const std::string& id : state.ready_tasks()) {
            if (queued.count(id) || running.count(id) || drivers.count(id)) continue;
            if (opts.binding == BindingMode::Early && planned.count(id)) continue;
            const ExecutableTask& t = state.task(id);
            try {
                ScheduleDecision d = bind_late(t, state, events.now(), est);
                park_reason.erase(id);
                push({TraceKind::Bind, events.now(), id, d.resource_id, 0, ""});
                enqueue(d.resource_id, d.planned_start, id);
                progress = true;
            } catch (const UnsatisfiableConstraint& e) {
                park_reason.emplace(id, e.what());
            }
        }
        return progress;
    }

    // ---- dispatch ------------------------------------------------------

    // False once the resource's pilot window is exhausted (resource closed).
    bool ensure_pilot(const std::string& rid, ResourceRt& R) {
        SimTime now = events.now();
        if (R.pilot_live && pilots.pilot(R.pilot_id).expires_at <= now) {
            R.pilot_live = false;
            state.close_resource(rid);
        }
        if (!R.pilot_tried) {
            double dur = std::isfinite(opts.pilot_horizon_us) ? opts.pilot_horizon_us
                                                              : kOpenEndedPilotUs;
            const Pilot& p = pilots.acquire(*fab, rid, dur, now);
            R.pilot_tried = true;
            R.pilot_live = true;
            R.pilot_id = p.id;
            push({TraceKind::PilotAcquire, now, "", rid, 0,
                  "capacity=" + std::to_string(p.capacity)});
        }
        return R.pilot_live;
    }

    // Clears a closed resource's queue; everything re-enters the ready set
    // and rebinds elsewhere on the next pass.
    void evict_queue(ResourceRt& R) {
        std::vector<QueueEntry> q = std::move(R.queue);
        R.queue.clear();
        for (const QueueEntry& e : q) {
            queued.erase(e.task_id);
            planned.erase(e.task_id);
            if (state.status(e.task_id) == TaskStatus::Bound) state.unbind(e.task_id);
        }
    }

    bool dispatch_pass() {
        bool progress = false;
        for (auto& [rid, R] : rt) {
            bool again = true;
            while (again) {
                again = false;
                for (std::size_t i = 0; i < R.queue.size(); ++i) {
                    const std::string task_id = R.queue[i].task_id;
                    TaskStatus st = state.status(task_id);
                    if (st == TaskStatus::Complete || st == TaskStatus::Failed ||
                        st == TaskStatus::Cancelled) {
                        queued.erase(task_id);
                        R.queue.erase(R.queue.begin() + i);
                        again = true;
                        break;
                    }
                    const ExecutableTask& t = state.task(task_id);
                    if (planned.count(task_id) && st != TaskStatus::Ready)
                        continue;  // predecessors outstanding
                    if (R.in_use + need_cores(t) > R.capacity) continue;
                    if (!ensure_pilot(rid, R)) {
                        evict_queue(R);
                        again = true;
                        break;
                    }
                    dispatch(rid, R, i);
                    again = true;
                    break;
                }
                progress = progress || again;
            }
        }
        return progress;
    }

    void dispatch(const std::string& rid, ResourceRt& R, std::size_t qi) {
        const std::string task_id = R.queue[qi].task_id;
        const ExecutableTask& t = state.task(task_id);
        SimTime now = events.now();
        if (t.is_driver) {
            R.queue.erase(R.queue.begin() + qi);
            queued.erase(task_id);
            dispatch_driver(rid, R, task_id, t);
            return;
        }
        SimTime dur = std::max(SimTime::from_real_us(est.duration_us(t, *fab, rid)), SimTime{1});
        double fp = R.is_qpu ? fab->find_qpu(rid)->failure_prob : 0.0;
        int used = attempts_used.count(task_id) ? attempts_used.at(task_id) : 0;
        RetryPolicy pol = opts.retry;
        pol.max_retries = opts.retry.max_retries - used;  // remaining budget
        AttemptPlan saga = plan_attempts(task_id, now, dur, fp, pol, opts.seed);
        for (TaskAttempt& a : saga.attempts) a.attempt_no += used;

        const TaskAttempt& first = saga.attempts.front();
        try {
            pilots.check_window(R.pilot_id, first.started_at,
                                SimTime{first.ended_at.us - first.started_at.us});
        } catch (const PilotExpired&) {
            // The window's tail cannot fit this task and only shrinks from
            // here: retire the pilot and rebind the whole queue.
            R.pilot_live = false;
            state.close_resource(rid);
            evict_queue(R);
            return;
        }

        R.in_use += need_cores(t);
        queued.erase(task_id);
        R.queue.erase(R.queue.begin() + qi);
        if (auto it = planned.find(task_id); it != planned.end()) {
            state.admit({task_id, rid, now, saga.finished_at, SimTime::zero()});
            planned.erase(it);
        }
        int first_no = first.attempt_no;
        int cores = need_cores(t);
        running.emplace(task_id, SagaRt{std::move(saga), rid, cores, R.pilot_id, 0});
        events.schedule(SimTime::zero(), Event{Event::Kind::AttemptStart, task_id, first_no, 0});
    }

    // ---- attempt lifecycle ----------------------------------------------

    void on_attempt_start(const Event& ev) {
        auto it = running.find(ev.task_id);
        if (it == running.end()) return;
        SagaRt& S = it->second;
        const TaskAttempt& a = S.plan.attempts[S.next];
        if (a.attempt_no != ev.attempt_no) return;
        SimTime now = events.now();
        try {
            pilots.check_window(S.pilot_id, now, SimTime{a.ended_at.us - a.started_at.us});
        } catch (const PilotExpired&) {
            // Back to the ready set; attempts that never ran cost no budget.
            rt.at(S.resource_id).in_use -= S.cores;
            attempts_used[ev.task_id] = a.attempt_no - 1;
            if (state.status(ev.task_id) == TaskStatus::Bound) state.unbind(ev.task_id);
            running.erase(it);
            return;
        }
        const ExecutableTask& t = state.task(ev.task_id);
        pilots.begin_attempt(S.pilot_id, ev.task_id, S.cores, now);
        push({TraceKind::TaskStart, now, ev.task_id, S.resource_id, ev.attempt_no,
              start_detail(t)});
        events.schedule(delay_until(a.ended_at),
                        Event{Event::Kind::AttemptEnd, ev.task_id, ev.attempt_no, 0});
    }

    void on_attempt_end(const Event& ev) {
        auto it = running.find(ev.task_id);
        if (it == running.end()) return;
        SagaRt& S = it->second;
        const TaskAttempt& a = S.plan.attempts[S.next];
        if (a.attempt_no != ev.attempt_no) return;
        SimTime now = events.now();
        pilots.end_attempt(S.pilot_id, ev.task_id, now);
        attempts_used[ev.task_id] = a.attempt_no;
        const ExecutableTask& t = state.task(ev.task_id);
        if (a.state == AttemptState::Failed) {
            bool terminal = S.next + 1 == S.plan.attempts.size();
            std::string d = start_detail(t) + " reason=transient";
            if (terminal) d += " terminal=1";
            push({TraceKind::TaskFail, now, ev.task_id, S.resource_id, ev.attempt_no, d});
            if (terminal) {
                rt.at(S.resource_id).in_use -= S.cores;
                running.erase(it);
                fail_task(ev.task_id, "task '" + ev.task_id + "' failed after " +
                                          std::to_string(a.attempt_no) + " attempt(s)");
            } else {
                S.next++;
                const TaskAttempt& nxt = S.plan.attempts[S.next];
                events.schedule(delay_until(nxt.started_at),
                                Event{Event::Kind::AttemptStart, ev.task_id, nxt.attempt_no, 0});
            }
        } else {
            std::string rid = S.resource_id;
            int cores = S.cores;
            running.erase(it);
            finish_task(ev.task_id, ev.attempt_no, rid, cores);
        }
    }

    // Terminal-failure bookkeeping shared by sagas, actions, and drivers.
    // The caller emits the task_fail record and releases the resource slot.
    void fail_task(const std::string& task_id, std::string diag) {
        any_failed = true;
        if (res.diagnostic.empty()) res.diagnostic = std::move(diag);
        cascade_failure(task_id);
        if (auto o = child_owner.find(task_id); o != child_owner.end())
            driver_child_failed(o->second);
    }

    void finish_task(const std::string& task_id, int attempt_no, const std::string& rid,
                     int cores) {
        SimTime now = events.now();
        const ExecutableTask& t = state.task(task_id);
        Json out = Json::object();
        std::string err;
        if (t.kind == TaskKind::Quantum) {
            if (auto o = child_owner.find(task_id); o != child_owner.end()) {
                const DriverRt& D = drivers.at(o->second);
                const Eval& ev = D.evals.at(D.child_of.at(task_id));
                const VqeConfig& cfg = D.engine.config();
                out["energy"] = VqeEngine::evaluate(ev, cfg.hamiltonian, cfg.mode, cfg.shots);
            } else {
                ShotResult r = run_shots(t.circuit, t.quantum.shots,
                                         derive_stream(opts.seed, task_id,
                                                       static_cast<std::uint64_t>(attempt_no)));
                out["counts"] = r.counts;
                out["shots"] = r.shots;
            }
        } else {
            err = run_action(t, out);
        }
        rt.at(rid).in_use -= cores;
        if (!err.empty()) {
            push({TraceKind::TaskFail, now, task_id, rid, attempt_no,
                  "kind=classical reason=action terminal=1"});
            fail_task(task_id, "task '" + task_id + "': " + err);
            return;
        }
        std::string extra;
        if (out.contains("energy") && out["energy"].is_number())
            extra = " energy=" + fmt_double(out["energy"].get<double>());
        push({TraceKind::TaskEnd, now, task_id, rid, attempt_no, start_detail(t) + extra});
        res.outputs[task_id] = std::move(out);
        state.complete(task_id, now);
        if (child_owner.count(task_id)) child_finished(task_id);
    }

    // ---- drivers ---------------------------------------------------------

    void dispatch_driver(const std::string& rid, ResourceRt& R, const std::string& task_id,
                         const ExecutableTask& t) {
        SimTime now = events.now();
        std::string err;
        std::optional<VqeConfig> cfg = driver_config(t, err);
        if (!cfg) {
            push({TraceKind::TaskStart, now, task_id, rid, 1, "kind=classical"});
            push({TraceKind::TaskFail, now, task_id, rid, 1,
                  "kind=classical reason=action terminal=1"});
            fail_task(task_id, "task '" + task_id + "': " + err);
            return;
        }
        int cores = need_cores(t);
        R.in_use += cores;
        pilots.begin_attempt(R.pilot_id, task_id, cores, now);
        push({TraceKind::TaskStart, now, task_id, rid, 1, "kind=classical"});
        auto it = drivers
                      .emplace(task_id, DriverRt{VqeEngine(std::move(*cfg)), rid, cores,
                                                 R.pilot_id, {}, {}, {}, 0, false})
                      .first;
        submit_batch(task_id, it->second);
    }

    void submit_batch(const std::string& driver_id, DriverRt& D) {
        std::vector<Eval> batch = D.engine.next_batch();
        if (batch.empty()) {  // engine finished without further work
            finish_driver(driver_id);
            return;
        }
        for (Eval& ev : batch) {
            std::string cid = driver_id + "/eval" + std::to_string(ev.eval_id);
            ExecutableTask child;
            child.id = cid;
            child.kind = TaskKind::Quantum;
            child.quantum.qpu_qubits_min = ev.circuit.num_qubits;
            child.quantum.shots = D.engine.config().shots;
            child.circuit = ev.circuit;
            child_owner[cid] = driver_id;
            D.child_of[cid] = ev.eval_id;
            std::uint64_t eid = ev.eval_id;
            D.evals.emplace(eid, std::move(ev));
            D.outstanding++;
            state.add_dynamic_task(child);
        }
        // the next bind pass places the batch
    }

    void child_finished(const std::string& child_id) {
        const std::string owner = child_owner.at(child_id);
        DriverRt& D = drivers.at(owner);
        std::uint64_t eid = D.child_of.at(child_id);
        D.energies[eid] = res.outputs.at(child_id)["energy"].get<double>();
        if (D.outstanding > 0) D.outstanding--;
        if (D.outstanding == 0 && !D.failed) advance_driver(owner, D);
    }

    void advance_driver(const std::string& driver_id, DriverRt& D) {
        std::vector<Eval> batch = D.engine.next_batch();  // cached: same as submitted
        std::vector<double> energies;
        energies.reserve(batch.size());
        for (const Eval& ev : batch) energies.push_back(D.energies.at(ev.eval_id));
        D.engine.submit_results(energies);
        D.evals.clear();
        D.child_of.clear();
        D.energies.clear();
        if (D.engine.done())
            finish_driver(driver_id);
        else
            submit_batch(driver_id, D);
    }

    void finish_driver(const std::string& driver_id) {
        DriverRt& D = drivers.at(driver_id);
        SimTime now = events.now();
        const VqeResult& r = D.engine.result();
        pilots.end_attempt(D.pilot_id, driver_id, now);
        rt.at(D.resource_id).in_use -= D.cores;
        Json out;
        out["energy"] = r.final_energy;
        out["params"] = r.final_params;
        out["iterations"] = r.iterations_used;
        out["circuit_evaluations"] = r.circuit_evaluations;
        out["energy_trace"] = r.energy_trace;
        res.outputs[driver_id] = std::move(out);
        push({TraceKind::TaskEnd, now, driver_id, D.resource_id, 1,
              "kind=classical energy=" + fmt_double(r.final_energy)});
        drivers.erase(driver_id);
        state.complete(driver_id, now);
    }

    void driver_child_failed(const std::string& driver_id) {
        auto it = drivers.find(driver_id);
        if (it == drivers.end() || it->second.failed) return;
        DriverRt& D = it->second;
        D.failed = true;
        D.engine.fail();
        SimTime now = events.now();
        pilots.end_attempt(D.pilot_id, driver_id, now);
        rt.at(D.resource_id).in_use -= D.cores;
        push({TraceKind::TaskFail, now, driver_id, D.resource_id, 1,
              "kind=classical reason=child terminal=1"});
        any_failed = true;
        if (res.diagnostic.empty())
            res.diagnostic = "task '" + driver_id + "': evaluation task failed";
        cascade_failure(driver_id);
    }

    std::optional<VqeConfig> driver_config(const ExecutableTask& t, std::string& err) {
        const Json params = t.params.is_object() ? t.params : Json::object();
        std::optional<std::string> h_text;
        std::optional<std::vector<double>> init;
        if (params.contains("hamiltonian") && params["hamiltonian"].is_string())
            h_text = params["hamiltonian"].get<std::string>();
        if (params.contains("initial_params") && params["initial_params"].is_array())
            init = params["initial_params"].get<std::vector<double>>();
        for (const std::string& p : state.predecessors(t.id)) {
            auto it = res.outputs.find(p);
            if (it == res.outputs.end()) continue;
            const Json& o = it->second;
            if (!h_text && o.contains("hamiltonian") && o["hamiltonian"].is_string())
                h_text = o["hamiltonian"].get<std::string>();
            if (!init && o.contains("initial_params") && o["initial_params"].is_array())
                init = o["initial_params"].get<std::vector<double>>();
        }
        if (!h_text) {
            err = "no hamiltonian available (param or upstream output)";
            return std::nullopt;
        }
        VqeConfig cfg;
        try {
            cfg.hamiltonian = Observable::parse(*h_text);
        } catch (const SimulationError& e) {
            err = "hamiltonian: " + std::string(e.what());
            return std::nullopt;
        }
        cfg.ansatz = ry_linear(cfg.hamiltonian.num_qubits());
        if (params.contains("learning_rate")) cfg.learning_rate = params["learning_rate"].get<double>();
        if (params.contains("tol")) cfg.tol = params["tol"].get<double>();
        if (params.contains("max_iters")) cfg.max_iters = params["max_iters"].get<int>();
        if (params.contains("shots")) cfg.shots = params["shots"].get<std::uint64_t>();
        cfg.mode = opts.default_mode;
        if (params.contains("mode") && params["mode"].is_string())
            cfg.mode = params["mode"].get<std::string>() == "sampled" ? VqeMode::Sampled
                                                                      : VqeMode::Exact;
        cfg.seed = params.contains("seed") ? params["seed"].get<std::uint64_t>()
                                           : derive_stream(opts.seed, t.id, 0);
        if (init) {
            if (static_cast<int>(init->size()) != cfg.ansatz.param_count) {
                err = "initial_params has " + std::to_string(init->size()) + " entries for a " +
                      std::to_string(cfg.ansatz.param_count) + "-parameter ansatz";
                return std::nullopt;
            }
            cfg.initial_params = *init;
        } else if (params.contains("warm_start") && params["warm_start"].is_boolean() &&
                   params["warm_start"].get<bool>()) {
            cfg.initial_params = warm_start(cfg.hamiltonian);
        } else {
            cfg.initial_params.assign(static_cast<std::size_t>(cfg.ansatz.param_count), 0.0);
        }
        return cfg;
    }

    // ---- classical actions ----------------------------------------------

    // Returns error text; empty means success. Fills the output payload.
    std::string run_action(const ExecutableTask& t, Json& out) {
        const std::string& a = t.action;
        if (a.empty()) return "";
        if (a == "chem_prepare") return act_chem_prepare(t, out);
        if (a == "write_report") return act_write_report(t, out);
        if (a == "select_min") return act_select_min(t, out);
        if (a == "assert_counts_zero") return act_assert_counts_zero(t, out);
        if (a == "vqe_driver") return "action 'vqe_driver' requires a driver task";
        return "unknown action '" + a + "'";
    }

    std::string act_chem_prepare(const ExecutableTask& t, Json& out) {
        if (!t.params.is_object() || !t.params.contains("hamiltonian_file") ||
            !t.params["hamiltonian_file"].is_string())
            return "chem_prepare needs a 'hamiltonian_file' param";
        std::filesystem::path p(t.params["hamiltonian_file"].get<std::string>());
        if (p.is_relative()) p = wl->base_dir / p;
        std::ifstream in(p);
        if (!in) return "cannot read hamiltonian file '" + p.string() + "'";
        std::ostringstream text;
        text << in.rdbuf();
        try {
            Observable obs = Observable::parse(text.str());
            out["hamiltonian"] = hamiltonian_text(obs);
            if (t.params.contains("warm_start") && t.params["warm_start"].is_boolean() &&
                t.params["warm_start"].get<bool>())
                out["initial_params"] = warm_start(obs);
        } catch (const SimulationError& e) {
            return p.string() + ": " + std::string(e.what());
        }
        return "";
    }

    std::string act_write_report(const ExecutableTask& t, Json& out) {
        std::string path = "report.json";
        if (t.params.is_object() && t.params.contains("path") && t.params["path"].is_string())
            path = t.params["path"].get<std::string>();
        const Json* src = nullptr;
        std::string src_id;
        for (const std::string& p : state.predecessors(t.id)) {
            auto it = res.outputs.find(p);
            if (it != res.outputs.end() && it->second.contains("energy")) {
                src = &it->second;
                src_id = p;
                break;
            }
        }
        if (!src) return "write_report: no predecessor produced an energy";
        out["workflow"] = wl->name;
        out["task"] = src_id;
        out["energy"] = (*src)["energy"];
        if (src->contains("params")) out["parameters"] = (*src)["params"];
        if (src->contains("iterations")) out["iterations"] = (*src)["iterations"];
        if (src->contains("circuit_evaluations"))
            out["circuit_evaluations"] = (*src)["circuit_evaluations"];
        res.artifacts.push_back({path, out.dump(2) + "\n"});
        return "";
    }

    std::string act_select_min(const ExecutableTask& t, Json& out) {
        std::string best;
        double best_e = 0.0;
        for (const std::string& p : state.predecessors(t.id)) {
            auto it = res.outputs.find(p);
            if (it == res.outputs.end() || !it->second.contains("energy")) continue;
            double e = it->second["energy"].get<double>();
            if (best.empty() || e < best_e) {
                best = p;
                best_e = e;
            }
        }
        if (best.empty()) return "select_min: no predecessor produced an energy";
        out["best_task"] = best;
        out["energy"] = best_e;
        return "";
    }

    std::string act_assert_counts_zero(const ExecutableTask& t, Json& out) {
        const Json* counts = nullptr;
        for (const std::string& p : state.predecessors(t.id)) {
            auto it = res.outputs.find(p);
            if (it != res.outputs.end() && it->second.contains("counts")) {
                counts = &it->second["counts"];
                break;
            }
        }
        if (!counts) return "assert_counts_zero: no predecessor produced counts";
        std::uint64_t total = 0;
        for (auto it = counts->begin(); it != counts->end(); ++it) {
            std::uint64_t n = it.value().get<std::uint64_t>();
            if (n == 0) continue;
            if (it.key().find_first_not_of('0') != std::string::npos)
                return "assert_counts_zero: observed non-zero outcome '" + it.key() + "' (" +
                       std::to_string(n) + " shots)";
            total += n;
        }
        out["checked_shots"] = total;
        return "";
    }

    // ---- main loop -------------------------------------------------------

    void pump() {
        bool progress = true;
        while (progress) {
            progress = bind_pass();
            progress = dispatch_pass() || progress;
        }
    }

    void handle(const Event& ev) {
        switch (ev.kind) {
            case Event::Kind::AttemptStart:
                on_attempt_start(ev);
                break;
            case Event::Kind::AttemptEnd:
                on_attempt_end(ev);
                break;
            case Event::Kind::ReservationStart:
                rt.at(opts.reservations[ev.index].resource_id).in_use +=
                    reservation_cores(opts.reservations[ev.index]);
                break;
            case Event::Kind::ReservationEnd:
                rt.at(opts.reservations[ev.index].resource_id).in_use -=
                    reservation_cores(opts.reservations[ev.index]);
                break;
        }
    }

    void drain() {
        SimTime now = events.now();
        if (!park_reason.empty()) {
            res.exit_code = 2;
            for (const auto& [id, why] : park_reason) {
                if (res.diagnostic.empty()) res.diagnostic = why;
                push({TraceKind::TaskFail, now, id, "", 0, "reason=unsatisfiable terminal=1"});
            }
            // cancel downstream work; cascades do not reopen parked entries
            std::vector<std::string> parked;
            parked.reserve(park_reason.size());
            for (const auto& [id, why] : park_reason) parked.push_back(id);
            for (const std::string& id : parked) cascade_failure(id);
        }
        if (res.exit_code == 0 && any_failed) res.exit_code = 3;
        if (res.exit_code == 0 && !state.all_settled()) {
            res.exit_code = 3;
            res.diagnostic = "internal: run stalled before all tasks settled";
        }
        for (auto& [rid, R] : rt) {
            if (!R.pilot_tried) continue;
            try {
                pilots.release(R.pilot_id, now);
                push({TraceKind::PilotRelease, now, "", rid, 0, ""});
            } catch (const std::logic_error&) {
                // stalled run left attempts open; already reported above
            }
        }
        res.metrics = compute_metrics(res.trace);
    }

    RunResult run() {
        init();
        if (opts.binding == BindingMode::Early) {
            try {
                res.plan = plan_early(*wl, *fab, est, opts.pilot_horizon_us);
            } catch (const UnsatisfiableConstraint& e) {
                res.exit_code = 2;
                res.diagnostic = e.what();
                push({TraceKind::TaskFail, SimTime::zero(), "", "", 0,
                      "reason=unsatisfiable terminal=1"});
                res.metrics = compute_metrics(res.trace);
                return std::move(res);
            }
            for (const ScheduleDecision& d : res.plan) {
                push({TraceKind::Bind, SimTime::zero(), d.task_id, d.resource_id, 0, ""});
                planned.emplace(d.task_id, d);
                enqueue(d.resource_id, d.planned_start, d.task_id);
            }
        }
        pump();
        while (auto ev = events.advance()) {
            handle(ev->second);
            pump();
        }
        drain();
        return std::move(res);
    }
};

}  // namespace

RunResult run_workload(const Workload& wl, const Fabric& fabric, const RunOptions& opts) {
    Runner r(wl, fabric, opts);
    return r.run();
}

}  // namespace qhpc
