#pragma once

#include <complex>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qhpc/qasm.hpp"
#include "qhpc/rng.hpp"

namespace qhpc {

struct SimulationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Full statevector over n <= kMaxSimQubits qubits. Amplitude index bit i is
// qubit i, i.e. qubit 0 is the least significant bit of the index.
class StateVector {
public:
    explicit StateVector(int n);  // |0...0>

    int num_qubits() const { return n_; }
    std::size_t size() const { return amps_.size(); }
    std::complex<double>& amp(std::size_t i) { return amps_[i]; }
    const std::complex<double>& amp(std::size_t i) const { return amps_[i]; }
    const std::vector<std::complex<double>>& amplitudes() const { return amps_; }

    double norm() const;
    std::complex<double> inner(const StateVector& other) const;  // <this|other>

    void apply_gate(GateName g, const std::vector<int>& qubits,
                    const std::vector<double>& params);

    // Projects qubit onto outcome and renormalizes. Throws SimulationError if
    // the branch norm is below 1e-12 (measuring an impossible branch).
    void project(int qubit, int outcome);

    // Born-rule measurement: draws from rng, projects, returns the outcome.
    int measure(int qubit, Rng& rng);

private:
    int n_;
    std::vector<std::complex<double>> amps_;

    void apply_matrix1(int qubit, const std::complex<double> m[2][2]);
};

struct ClassicalRegister {
    std::vector<std::uint8_t> bits;  // bit j = clbit j

    ClassicalRegister() = default;
    explicit ClassicalRegister(int n) : bits(static_cast<size_t>(n), 0) {}

    int size() const { return static_cast<int>(bits.size()); }
    void set(int j, int v) { bits[static_cast<size_t>(j)] = static_cast<std::uint8_t>(v & 1); }
    std::uint64_t value() const;
    std::string key() const;  // key[j] = '0' + bit j
};

// Applies one instruction. Conditioned instructions are skipped unless the
// register value equals the condition value. Measure draws from rng and
// writes the outcome to its clbit. Barriers are no-ops here.
void apply(StateVector& state, const Instruction& inst, ClassicalRegister& clbits, Rng& rng);

struct ShotResult {
    std::map<std::string, std::uint64_t> counts;  // key as ClassicalRegister::key()
    std::uint64_t shots = 0;
};

// Executes c once per shot from |0...0> with the per-shot rng stream
// derive_stream(seed, shot_index); deterministic for fixed (c, shots, seed).
ShotResult run_shots(const Circuit& c, std::uint64_t shots, std::uint64_t seed);

struct PauliTerm {
    double coeff = 0.0;
    std::string paulis;  // length num_qubits over {I,X,Y,Z}; paulis[k] acts on qubit k

    bool operator==(const PauliTerm&) const = default;
};

struct Observable {
    std::vector<PauliTerm> terms;

    bool operator==(const Observable&) const = default;

    int num_qubits() const;

    // Text form: one term per line, "<coeff> <paulis>"; '#' starts a comment.
    static Observable parse(std::string_view text);
    std::string str() const;
};

// Throws SimulationError if the observable does not fit the circuit width or
// has no terms.
void validate_observable(const Circuit& c, const Observable& obs);

// <psi|H|psi> on the final statevector. Exact mode: rejects circuits with
// measure instructions. Each Pauli term is applied as a gate sequence to a
// copy of the state; no dense matrices are built.
double expectation(const Circuit& c, const Observable& obs);

// Shot-based estimator: per term, appends basis changes (h for X, rz(-pi/2)
// then h for Y) plus measurement of every qubit, runs the augmented circuit,
// and averages the +-1 eigenvalue samples. Term k uses rng stream
// derive_stream(seed, k). Requires a measurement-free circuit.
double sample_expectation(const Circuit& c, const Observable& obs, std::uint64_t shots,
                          std::uint64_t seed);

}  // namespace qhpc
