#include "qhpc/patterns.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "json_util.hpp"
#include "qhpc/rng.hpp"

namespace qhpc {

using namespace jsonutil;

Circuit AnsatzTemplate::instantiate(const std::vector<double>& theta) const {
    if (static_cast<int>(theta.size()) != param_count)
        throw std::invalid_argument("ansatz expects " + std::to_string(param_count) +
                                    " parameters, got " + std::to_string(theta.size()));
    if (slots.size() != skeleton.instructions.size())
        throw std::invalid_argument("ansatz slots out of step with the skeleton");
    Circuit c = skeleton;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        const int s = slots[i];
        if (s < 0) continue;
        if (s >= param_count)
            throw std::invalid_argument("ansatz slot " + std::to_string(s) + " out of range");
        if (c.instructions[i].params.empty())
            throw std::invalid_argument("ansatz slot on a non-rotation instruction");
        c.instructions[i].params[0] = theta[s];
    }
    return c;
}

AnsatzTemplate ry_linear(int num_qubits) {
    if (num_qubits < 1) throw std::invalid_argument("ry_linear needs at least one qubit");
    AnsatzTemplate a;
    a.skeleton.num_qubits = num_qubits;
    a.skeleton.name = "ry_linear";
    a.param_count = num_qubits;
    for (int q = 0; q < num_qubits; ++q) {
        a.skeleton.instructions.push_back(Instruction::rotation(GateName::Ry, 0.0, q));
        a.slots.push_back(q);
    }
    for (int q = 0; q + 1 < num_qubits; ++q) {
        a.skeleton.instructions.push_back(Instruction::cx(q, q + 1));
        a.slots.push_back(-1);
    }
    return a;
}

VqeEngine::VqeEngine(VqeConfig cfg) : cfg_(std::move(cfg)) {
    const int p = cfg_.ansatz.param_count;
    if (p < 1) throw std::invalid_argument("vqe: ansatz has no parameters");
    if (static_cast<int>(cfg_.initial_params.size()) != p)
        throw std::invalid_argument("vqe: " + std::to_string(cfg_.initial_params.size()) +
                                    " initial parameters for a " + std::to_string(p) +
                                    "-parameter ansatz");
    if (!(cfg_.learning_rate > 0)) throw std::invalid_argument("vqe: learning_rate must be > 0");
    if (!(cfg_.tol > 0)) throw std::invalid_argument("vqe: tol must be > 0");
    if (cfg_.max_iters < 1) throw std::invalid_argument("vqe: max_iters must be >= 1");
    if (cfg_.mode == VqeMode::Sampled && cfg_.shots == 0)
        throw std::invalid_argument("vqe: sampled mode needs shots >= 1");
    validate_observable(cfg_.ansatz.skeleton, cfg_.hamiltonian);
    theta_ = cfg_.initial_params;
}

bool VqeEngine::done() const { return phase_ == Phase::Done; }

Eval VqeEngine::make_eval(const std::vector<double>& theta) {
    Eval e;
    e.eval_id = next_eval_id_++;
    e.circuit = cfg_.ansatz.instantiate(theta);
    e.seed = derive_stream(cfg_.seed, "eval", e.eval_id);
    return e;
}

std::vector<Eval> VqeEngine::next_batch() {
    if (phase_ == Phase::Done) return {};
    if (pending_valid_) return pending_;
    constexpr double kShift = std::numbers::pi / 2;
    switch (phase_) {
        case Phase::FirstEnergy:
        case Phase::Energy:
            pending_.push_back(make_eval(theta_));
            break;
        case Phase::Gradient:
            for (int j = 0; j < cfg_.ansatz.param_count; ++j) {
                std::vector<double> shifted = theta_;
                shifted[j] += kShift;
                pending_.push_back(make_eval(shifted));
                shifted[j] = theta_[j] - kShift;
                pending_.push_back(make_eval(shifted));
            }
            break;
        case Phase::Done:
            break;
    }
    pending_valid_ = true;
    return pending_;
}

void VqeEngine::submit_results(const std::vector<double>& energies) {
    if (phase_ == Phase::Done) throw std::logic_error("vqe: run already finished");
    if (!pending_valid_) throw std::logic_error("vqe: no batch outstanding");
    if (energies.size() != pending_.size())
        throw std::logic_error("vqe: batch of " + std::to_string(pending_.size()) +
                               " answered with " + std::to_string(energies.size()) + " results");
    evals_done_ += energies.size();
    pending_.clear();
    pending_valid_ = false;

    switch (phase_) {
        case Phase::FirstEnergy:
            trace_.push_back(energies[0]);
            phase_ = Phase::Gradient;
            break;
        case Phase::Gradient:
            // energies are frozen at the pre-update theta, so the per-j
            // updates are order-independent
            for (int j = 0; j < cfg_.ansatz.param_count; ++j)
                theta_[j] -= cfg_.learning_rate * (energies[2 * j] - energies[2 * j + 1]) / 2.0;
            phase_ = Phase::Energy;
            break;
        case Phase::Energy: {
            ++iterations_;
            const double prev = trace_.back();
            trace_.push_back(energies[0]);
            // shot noise breaks strict |dE| tests; widen in sampled mode
            const double tol = cfg_.mode == VqeMode::Sampled ? 10.0 * cfg_.tol : cfg_.tol;
            phase_ = (std::abs(energies[0] - prev) < tol || iterations_ >= cfg_.max_iters)
                         ? Phase::Done
                         : Phase::Gradient;
            break;
        }
        case Phase::Done:
            break;
    }
}

void VqeEngine::fail() {
    failed_ = true;
    phase_ = Phase::Done;
    pending_.clear();
    pending_valid_ = false;
}

VqeResult VqeEngine::result() const {
    VqeResult r;
    r.energy_trace = trace_;
    r.final_params = theta_;
    r.final_energy = trace_.empty() ? 0.0 : trace_.back();
    r.iterations_used = iterations_;
    r.circuit_evaluations = evals_done_;
    r.failed = failed_;
    return r;
}

double VqeEngine::evaluate(const Eval& eval, const Observable& hamiltonian, VqeMode mode,
                           std::uint64_t shots) {
    if (mode == VqeMode::Exact) return expectation(eval.circuit, hamiltonian);
    return sample_expectation(eval.circuit, hamiltonian, shots, eval.seed);
}

VqeResult vqe_driver(const VqeConfig& cfg, const EvalFn& submit) {
    VqeEngine engine(cfg);
    while (!engine.done()) {
        const std::vector<Eval> batch = engine.next_batch();
        std::vector<double> energies;
        energies.reserve(batch.size());
        for (const Eval& e : batch)
            energies.push_back(submit ? submit(e)
                                      : VqeEngine::evaluate(e, cfg.hamiltonian, cfg.mode,
                                                            cfg.shots));
        engine.submit_results(energies);
    }
    return engine.result();
}

std::vector<double> warm_start(const Observable& hamiltonian) {
    const int n = hamiltonian.num_qubits();
    std::vector<int> bits(n, 0);
    for (int q = 0; q < n; ++q) {
        double best = std::numeric_limits<double>::infinity();
        int best_bit = 0;
        for (int v = 0; v <= 1; ++v) {
            bits[q] = v;
            // energy of the diagonal terms fully decided by qubits 0..q
            double e = 0.0;
            for (const PauliTerm& t : hamiltonian.terms) {
                bool diagonal = true;
                int last_z = -1;
                for (int k = 0; k < static_cast<int>(t.paulis.size()); ++k) {
                    if (t.paulis[k] == 'Z')
                        last_z = k;
                    else if (t.paulis[k] != 'I') {
                        diagonal = false;
                        break;
                    }
                }
                if (!diagonal || last_z < 0 || last_z > q) continue;
                double sign = 1.0;
                for (int k = 0; k <= last_z; ++k)
                    if (t.paulis[k] == 'Z') sign *= 1.0 - 2.0 * bits[k];
                e += t.coeff * sign;
            }
            if (e < best) {  // strict: ties keep bit 0
                best = e;
                best_bit = v;
            }
        }
        bits[q] = best_bit;
    }
    std::vector<double> theta(n, 0.0);
    for (int q = 0; q < n; ++q) theta[q] = std::numbers::pi * bits[q];
    return theta;
}

std::string hamiltonian_text(const Observable& obs) {
    std::ostringstream os;
    for (const PauliTerm& t : obs.terms) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.17g", t.coeff);
        os << buf << ' ' << t.paulis << '\n';
    }
    return os.str();
}

namespace {

// Normalizes and validates the "vqe" composite's params, then emits the
// single long-lived driver task. The driver needs a Hamiltonian from its
// params or from an upstream task at run time.
ExpandedComposite expand_vqe(const TaskSpec& task, const WorkflowSpec& spec,
                             std::vector<std::string>& errors) {
    const std::string ctx = "task '" + task.id + "'";
    ExpandedComposite out;

    Json params = task.params.is_null() ? Json::object() : task.params;
    if (!params.is_object()) {
        errors.push_back(ctx + ": params must be an object");
        return out;
    }
    reject_unknown_keys(params,
                        {"hamiltonian", "hamiltonian_file", "learning_rate", "tol", "max_iters",
                         "mode", "shots", "seed", "warm_start", "initial_params"},
                        ctx + " params", errors);

    const bool has_h = params.contains("hamiltonian");
    const bool has_file = params.contains("hamiltonian_file");
    if (has_h && has_file)
        errors.push_back(ctx + ": give at most one of 'hamiltonian' and 'hamiltonian_file'");

    std::optional<Observable> obs;
    if (has_file && !has_h) {
        if (auto rel = get_string(params, "hamiltonian_file", ctx, errors)) {
            std::filesystem::path path(*rel);
            if (path.is_relative()) path = spec.base_dir / path;
            std::ifstream in(path);
            if (!in) {
                errors.push_back(ctx + ": cannot read hamiltonian file '" + path.string() + "'");
            } else {
                std::ostringstream text;
                text << in.rdbuf();
                try {
                    obs = Observable::parse(text.str());
                    params.erase("hamiltonian_file");
                    params["hamiltonian"] = hamiltonian_text(*obs);
                } catch (const SimulationError& e) {
                    errors.push_back(ctx + ": " + path.string() + ": " + e.what());
                }
            }
        }
    } else if (has_h) {
        if (auto text = get_string(params, "hamiltonian", ctx, errors)) {
            try {
                obs = Observable::parse(*text);
            } catch (const SimulationError& e) {
                errors.push_back(ctx + ": hamiltonian: " + std::string(e.what()));
            }
        }
    } else {
        const bool has_input = std::any_of(spec.edges.begin(), spec.edges.end(),
                                           [&](const Edge& e) { return e.to == task.id; });
        if (!has_input)
            errors.push_back(ctx +
                             ": vqe needs a 'hamiltonian' or 'hamiltonian_file' param, or an "
                             "upstream task supplying one");
    }

    if (auto lr = get_number(params, "learning_rate", ctx, errors, false); lr && !(*lr > 0))
        errors.push_back(ctx + ": 'learning_rate' must be > 0");
    if (auto tol = get_number(params, "tol", ctx, errors, false); tol && !(*tol > 0))
        errors.push_back(ctx + ": 'tol' must be > 0");
    if (auto iters = get_int(params, "max_iters", ctx, errors, false); iters && *iters < 1)
        errors.push_back(ctx + ": 'max_iters' must be >= 1");
    if (auto shots = get_int(params, "shots", ctx, errors, false); shots && *shots < 1)
        errors.push_back(ctx + ": 'shots' must be >= 1");
    if (auto seed = get_int(params, "seed", ctx, errors, false); seed && *seed < 0)
        errors.push_back(ctx + ": 'seed' must be >= 0");
    if (auto mode = get_string(params, "mode", ctx, errors, false);
        mode && *mode != "exact" && *mode != "sampled")
        errors.push_back(ctx + ": 'mode' must be \"exact\" or \"sampled\"");
    if (params.contains("warm_start") && !params["warm_start"].is_boolean())
        errors.push_back(ctx + ": 'warm_start' must be a boolean");
    if (params.contains("initial_params")) {
        const Json& arr = params["initial_params"];
        bool numeric = arr.is_array();
        if (numeric)
            for (const Json& v : arr) numeric = numeric && v.is_number();
        if (!numeric)
            errors.push_back(ctx + ": 'initial_params' must be an array of numbers");
        else if (obs && static_cast<int>(arr.size()) != obs->num_qubits())
            errors.push_back(ctx + ": 'initial_params' has " + std::to_string(arr.size()) +
                             " entries for a " + std::to_string(obs->num_qubits()) +
                             "-qubit hamiltonian");
    }

    ExecutableTask driver;
    driver.id = task.id + ".driver";
    driver.kind = TaskKind::Classical;
    driver.is_driver = true;
    driver.classical = task.classical;
    driver.action = "vqe_driver";
    driver.params = std::move(params);
    out.tasks.push_back(std::move(driver));
    out.sources = {task.id + ".driver"};
    out.sinks = {task.id + ".driver"};
    return out;
}

Circuit must_parse(std::string_view qasm, std::string name) {
    ParseResult r = parse_qasm(qasm, std::move(name));
    if (!r.ok()) throw std::logic_error("built-in circuit failed to parse");
    return std::move(*r.circuit);
}

Json vqe_params(const VqeConfig& base) {
    Json p = Json::object();
    p["hamiltonian"] = hamiltonian_text(base.hamiltonian);
    p["learning_rate"] = base.learning_rate;
    p["tol"] = base.tol;
    p["max_iters"] = base.max_iters;
    p["mode"] = base.mode == VqeMode::Sampled ? "sampled" : "exact";
    p["shots"] = base.shots;
    p["seed"] = base.seed;
    p["initial_params"] = base.initial_params;
    return p;
}

}  // namespace

TemplateRegistry default_registry() {
    TemplateRegistry reg;
    reg.add("vqe", expand_vqe);
    return reg;
}

WorkflowSpec build_dynamic_workload() {
    WorkflowSpec spec;
    spec.name = "dynamic-correction";
    spec.base_dir = ".";

    TaskSpec correct;
    correct.id = "correct";
    correct.kind = TaskKind::Quantum;
    correct.quantum.qpu_qubits_min = 1;
    correct.quantum.shots = 256;
    correct.circuit = must_parse(
        "OPENQASM 2.0;\n"
        "include \"qelib1.inc\";\n"
        "qreg q[1];\n"
        "creg c[1];\n"
        "h q[0];\n"
        "measure q[0] -> c[0];\n"
        "if(c==1) x q[0];\n"
        "measure q[0] -> c[0];\n",
        "correct");

    TaskSpec feedback;
    feedback.id = "feedback";
    feedback.kind = TaskKind::Classical;
    feedback.action = "assert_counts_zero";
    feedback.classical.cores = 1;
    feedback.classical.compute_cost_us = 50.0;

    spec.tasks = {std::move(correct), std::move(feedback)};
    spec.edges = {{"correct", "feedback", Coupling::Tight}};
    return spec;
}

WorkflowSpec build_chemistry_workflow(const ChemistryConfig& cfg) {
    WorkflowSpec spec;
    spec.name = cfg.name;
    spec.base_dir = cfg.base_dir;

    TaskSpec prepare;
    prepare.id = "prepare";
    prepare.kind = TaskKind::Classical;
    prepare.action = "chem_prepare";
    prepare.classical.compute_cost_us = 200.0;
    prepare.params = Json::object();
    prepare.params["hamiltonian_file"] = cfg.hamiltonian_file.string();
    prepare.params["warm_start"] = cfg.warm_start;

    TaskSpec vqe;
    vqe.id = "vqe";
    vqe.kind = TaskKind::Composite;
    vqe.template_name = "vqe";
    vqe.classical.compute_cost_us = 1000.0;  // planning estimate for the driver
    vqe.params = Json::object();
    vqe.params["learning_rate"] = cfg.learning_rate;
    vqe.params["tol"] = cfg.tol;
    vqe.params["max_iters"] = cfg.max_iters;
    vqe.params["mode"] = cfg.mode;
    vqe.params["shots"] = cfg.shots;
    vqe.params["seed"] = cfg.seed;

    TaskSpec report;
    report.id = "report";
    report.kind = TaskKind::Classical;
    report.action = "write_report";
    report.classical.compute_cost_us = 100.0;
    report.params = Json::object();
    report.params["path"] = cfg.report_path;

    spec.tasks = {std::move(prepare), std::move(vqe), std::move(report)};
    spec.edges = {{"prepare", "vqe", Coupling::Loose}, {"vqe", "report", Coupling::Loose}};
    return spec;
}

WorkflowSpec build_hyperparameter_ensemble(const VqeConfig& base,
                                           const std::vector<double>& learning_rates) {
    if (learning_rates.size() < 2)
        throw std::invalid_argument("ensemble needs at least two learning rates");

    WorkflowSpec spec;
    spec.name = "vqe-ensemble";
    spec.base_dir = ".";

    for (std::size_t i = 0; i < learning_rates.size(); ++i) {
        TaskSpec member;
        member.id = "vqe" + std::to_string(i);
        member.kind = TaskKind::Composite;
        member.template_name = "vqe";
        member.classical.compute_cost_us = 1000.0;
        member.params = vqe_params(base);
        member.params["learning_rate"] = learning_rates[i];
        spec.edges.push_back({member.id, "select", Coupling::Loose});
        spec.tasks.push_back(std::move(member));
    }

    TaskSpec reducer;
    reducer.id = "select";
    reducer.kind = TaskKind::Classical;
    reducer.action = "select_min";
    reducer.classical.compute_cost_us = 100.0;
    spec.tasks.push_back(std::move(reducer));
    return spec;
}

}  // namespace qhpc
