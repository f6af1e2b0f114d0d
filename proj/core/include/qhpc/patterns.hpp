#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "qhpc/qasm.hpp"
#include "qhpc/qsim.hpp"
#include "qhpc/workflow.hpp"

namespace qhpc {

// Parameterized circuit: a gate skeleton whose rotation angles may be bound
// to parameter slots. slots[i] names the parameter feeding instruction i, or
// -1 when the angle is fixed.
struct AnsatzTemplate {
    Circuit skeleton;
    std::vector<int> slots;  // aligned with skeleton.instructions
    int param_count = 0;

    // Substitutes theta into the slots. Throws std::invalid_argument when
    // theta.size() != param_count or a slot index is out of range.
    Circuit instantiate(const std::vector<double>& theta) const;
};

// ry(theta_j) on each qubit, then a cx chain 0->1->...->n-1.
AnsatzTemplate ry_linear(int num_qubits);

enum class VqeMode { Exact, Sampled };

struct VqeConfig {
    Observable hamiltonian;
    AnsatzTemplate ansatz;
    std::vector<double> initial_params;
    double learning_rate = 0.1;
    double tol = 1e-5;
    int max_iters = 100;
    VqeMode mode = VqeMode::Exact;
    std::uint64_t shots = 4096;  // sampled mode only
    std::uint64_t seed = 0;
};

struct VqeResult {
    std::vector<double> energy_trace;  // iterations_used + 1 entries
    std::vector<double> final_params;
    double final_energy = 0.0;
    int iterations_used = 0;
    std::uint64_t circuit_evaluations = 0;
    bool failed = false;  // abandoned mid-run; trace may stop short
};

// One quantum evaluation request. seed is the rng stream for sampled mode,
// derive_stream(cfg.seed, "eval", eval_id).
struct Eval {
    std::uint64_t eval_id = 0;
    Circuit circuit;
    std::uint64_t seed = 0;
};

// Batch-driven VQE optimizer. The engine never runs circuits itself: it
// hands out evaluation batches and consumes their energies, so a scheduler
// can run each evaluation as an independent quantum task. Protocol:
// repeatedly take next_batch(), answer it with submit_results() in the same
// order, until done(). Batches alternate energy -> gradient -> energy...;
// the gradient batch holds the +pi/2 then -pi/2 shift per parameter.
class VqeEngine {
public:
    explicit VqeEngine(VqeConfig cfg);  // throws std::invalid_argument on bad cfg

    bool done() const;
    std::vector<Eval> next_batch();  // cached until answered; empty once done
    void submit_results(const std::vector<double>& energies);
    void fail();  // abandon the run; result() reports failed = true

    VqeResult result() const;
    const VqeConfig& config() const { return cfg_; }

    // Runs one evaluation: exact expectation or shot-based estimate.
    static double evaluate(const Eval& eval, const Observable& hamiltonian, VqeMode mode,
                           std::uint64_t shots);

private:
    enum class Phase { FirstEnergy, Gradient, Energy, Done };

    Eval make_eval(const std::vector<double>& theta);

    VqeConfig cfg_;
    Phase phase_ = Phase::FirstEnergy;
    std::vector<double> theta_;
    std::vector<double> trace_;
    std::vector<Eval> pending_;
    bool pending_valid_ = false;
    int iterations_ = 0;
    std::uint64_t next_eval_id_ = 0;
    std::uint64_t evals_done_ = 0;
    bool failed_ = false;
};

// In-process driver loop: feeds every batch through submit (or the built-in
// evaluate() when submit is null) until the engine finishes.
using EvalFn = std::function<double(const Eval&)>;
VqeResult vqe_driver(const VqeConfig& cfg, const EvalFn& submit = nullptr);

// Classical pre-computation of theta0 for the per-qubit ry layer: greedy
// bit-by-bit minimization of the Z-only (diagonal) part, ties prefer bit 0;
// theta_j = pi * b_j. All-zero when no Z terms exist.
std::vector<double> warm_start(const Observable& hamiltonian);

// One "<coeff> <paulis>" line per term — the Hamiltonian file format, which
// Observable::parse round-trips (unlike the display form Observable::str()).
std::string hamiltonian_text(const Observable& obs);

// Composite templates shipped with the library (currently "vqe").
TemplateRegistry default_registry();

// Quantum task with mid-circuit measurement + conditional correction, tied
// to a classical feedback check by a tight edge.
WorkflowSpec build_dynamic_workload();

struct ChemistryConfig {
    std::string name = "chemistry";
    std::filesystem::path hamiltonian_file;  // resolved against base_dir
    std::filesystem::path base_dir = ".";
    double learning_rate = 0.1;
    double tol = 1e-6;
    int max_iters = 150;
    std::string mode = "exact";
    std::uint64_t shots = 4096;
    std::uint64_t seed = 7;
    bool warm_start = true;
    std::string report_path = "chemistry_report.json";
};

// prepare (load Hamiltonian, pre-compute theta0) -> vqe composite -> report
// writer; loose edges throughout.
WorkflowSpec build_chemistry_workflow(const ChemistryConfig& cfg);

// One vqe composite per learning rate, all in one generation, plus a
// reducer selecting the minimum final energy. Requires >= 2 rates.
WorkflowSpec build_hyperparameter_ensemble(const VqeConfig& base,
                                           const std::vector<double>& learning_rates);

}  // namespace qhpc
