#include "qhpc/qsim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

namespace qhpc {

namespace {

using cd = std::complex<double>;

constexpr double kDegenerateNorm = 1e-12;

}  // namespace

StateVector::StateVector(int n) : n_(n) {
    if (n < 1 || n > kMaxSimQubits)
        throw SimulationError("qubit count out of range: " + std::to_string(n));
    amps_.assign(std::size_t{1} << n, cd{0.0, 0.0});
    amps_[0] = cd{1.0, 0.0};
}

double StateVector::norm() const {
    double s = 0.0;
    for (const cd& a : amps_) s += std::norm(a);
    return std::sqrt(s);
}

std::complex<double> StateVector::inner(const StateVector& other) const {
    cd s{0.0, 0.0};
    for (std::size_t i = 0; i < amps_.size(); ++i) s += std::conj(amps_[i]) * other.amps_[i];
    return s;
}

void StateVector::apply_matrix1(int qubit, const cd m[2][2]) {
    const std::size_t stride = std::size_t{1} << qubit;
    for (std::size_t base = 0; base < amps_.size(); base += 2 * stride) {
        for (std::size_t i = base; i < base + stride; ++i) {
            const cd a0 = amps_[i];
            const cd a1 = amps_[i + stride];
            amps_[i] = m[0][0] * a0 + m[0][1] * a1;
            amps_[i + stride] = m[1][0] * a0 + m[1][1] * a1;
        }
    }
}

void StateVector::apply_gate(GateName g, const std::vector<int>& qubits,
                             const std::vector<double>& params) {
    static const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    switch (g) {
        case GateName::H: {
            const cd m[2][2] = {{{inv_sqrt2, 0}, {inv_sqrt2, 0}},
                                {{inv_sqrt2, 0}, {-inv_sqrt2, 0}}};
            apply_matrix1(qubits[0], m);
            return;
        }
        case GateName::X: {
            const cd m[2][2] = {{{0, 0}, {1, 0}}, {{1, 0}, {0, 0}}};
            apply_matrix1(qubits[0], m);
            return;
        }
        case GateName::Y: {
            const cd m[2][2] = {{{0, 0}, {0, -1}}, {{0, 1}, {0, 0}}};
            apply_matrix1(qubits[0], m);
            return;
        }
        case GateName::Z: {
            const cd m[2][2] = {{{1, 0}, {0, 0}}, {{0, 0}, {-1, 0}}};
            apply_matrix1(qubits[0], m);
            return;
        }
        case GateName::Rx: {
            const double c = std::cos(params[0] / 2), s = std::sin(params[0] / 2);
            const cd m[2][2] = {{{c, 0}, {0, -s}}, {{0, -s}, {c, 0}}};
            apply_matrix1(qubits[0], m);
            return;
        }
        case GateName::Ry: {
            const double c = std::cos(params[0] / 2), s = std::sin(params[0] / 2);
            const cd m[2][2] = {{{c, 0}, {-s, 0}}, {{s, 0}, {c, 0}}};
            apply_matrix1(qubits[0], m);
            return;
        }
        case GateName::Rz: {
            const double h = params[0] / 2;
            const cd m[2][2] = {{{std::cos(h), -std::sin(h)}, {0, 0}},
                                {{0, 0}, {std::cos(h), std::sin(h)}}};
            apply_matrix1(qubits[0], m);
            return;
        }
        case GateName::Cx: {
            const std::size_t cbit = std::size_t{1} << qubits[0];
            const std::size_t tbit = std::size_t{1} << qubits[1];
            for (std::size_t i = 0; i < amps_.size(); ++i)
                if ((i & cbit) && !(i & tbit)) std::swap(amps_[i], amps_[i | tbit]);
            return;
        }
    }
}

void StateVector::project(int qubit, int outcome) {
    const std::size_t bit = std::size_t{1} << qubit;
    double p = 0.0;
    for (std::size_t i = 0; i < amps_.size(); ++i)
        if (((i & bit) != 0) == (outcome == 1)) p += std::norm(amps_[i]);
    if (std::sqrt(p) < kDegenerateNorm)
        throw SimulationError("post-measurement norm below 1e-12 on qubit " +
                              std::to_string(qubit));
    const double scale = 1.0 / std::sqrt(p);
    for (std::size_t i = 0; i < amps_.size(); ++i) {
        if (((i & bit) != 0) == (outcome == 1))
            amps_[i] *= scale;
        else
            amps_[i] = cd{0.0, 0.0};
    }
}

int StateVector::measure(int qubit, Rng& rng) {
    const std::size_t bit = std::size_t{1} << qubit;
    double p1 = 0.0;
    for (std::size_t i = 0; i < amps_.size(); ++i)
        if (i & bit) p1 += std::norm(amps_[i]);
    const int outcome = rng.next_double() < p1 ? 1 : 0;
    project(qubit, outcome);
    return outcome;
}

std::uint64_t ClassicalRegister::value() const {
    std::uint64_t v = 0;
    for (size_t j = 0; j < bits.size(); ++j)
        if (bits[j]) v |= std::uint64_t{1} << j;
    return v;
}

std::string ClassicalRegister::key() const {
    std::string s(bits.size(), '0');
    for (size_t j = 0; j < bits.size(); ++j)
        if (bits[j]) s[j] = '1';
    return s;
}

void apply(StateVector& state, const Instruction& inst, ClassicalRegister& clbits, Rng& rng) {
    if (inst.condition && clbits.value() != inst.condition->value) return;
    switch (inst.kind) {
        case InstrKind::Gate:
            state.apply_gate(inst.gate, inst.qubits, inst.params);
            return;
        case InstrKind::Measure:
            clbits.set(inst.clbit, state.measure(inst.qubits[0], rng));
            return;
        case InstrKind::Barrier:
            return;
    }
}

namespace {

// A circuit whose measures form a pure suffix (and that never branches on
// clbits) can evolve the gate prefix once and replay only the measures per
// shot. Identical rng consumption: gates draw nothing.
bool measure_suffix_only(const Circuit& c, size_t& first_measure) {
    if (c.has_condition()) return false;
    first_measure = c.instructions.size();
    for (size_t i = 0; i < c.instructions.size(); ++i) {
        const Instruction& inst = c.instructions[i];
        if (inst.kind == InstrKind::Measure) {
            first_measure = std::min(first_measure, i);
        } else if (inst.kind == InstrKind::Gate && first_measure < i) {
            return false;
        }
    }
    return true;
}

}  // namespace

ShotResult run_shots(const Circuit& c, std::uint64_t shots, std::uint64_t seed) {
    if (shots < 1) throw SimulationError("shots must be >= 1");
    ShotResult result;
    result.shots = shots;

    size_t first_measure = 0;
    if (measure_suffix_only(c, first_measure)) {
        StateVector prepared(c.num_qubits);
        ClassicalRegister scratch(c.num_clbits);
        Rng unused(0);
        for (size_t i = 0; i < first_measure; ++i)
            apply(prepared, c.instructions[i], scratch, unused);
        for (std::uint64_t s = 0; s < shots; ++s) {
            Rng rng(derive_stream(seed, s));
            StateVector state = prepared;
            ClassicalRegister clbits(c.num_clbits);
            for (size_t i = first_measure; i < c.instructions.size(); ++i)
                apply(state, c.instructions[i], clbits, rng);
            ++result.counts[clbits.key()];
        }
        return result;
    }

    for (std::uint64_t s = 0; s < shots; ++s) {
        Rng rng(derive_stream(seed, s));
        StateVector state(c.num_qubits);
        ClassicalRegister clbits(c.num_clbits);
        for (const Instruction& inst : c.instructions) apply(state, inst, clbits, rng);
        ++result.counts[clbits.key()];
    }
    return result;
}

int Observable::num_qubits() const {
    return terms.empty() ? 0 : static_cast<int>(terms.front().paulis.size());
}

Observable Observable::parse(std::string_view text) {
    Observable obs;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        std::istringstream ls(line);
        double coeff;
        std::string paulis;
        if (!(ls >> coeff)) {
            std::string word;
            if (std::istringstream(line) >> word)  // non-blank garbage
                throw SimulationError("observable line " + std::to_string(lineno) +
                                      ": expected '<coeff> <paulis>'");
            continue;  // blank / comment-only line
        }
        if (!(ls >> paulis))
            throw SimulationError("observable line " + std::to_string(lineno) +
                                  ": missing pauli string");
        for (char ch : paulis)
            if (ch != 'I' && ch != 'X' && ch != 'Y' && ch != 'Z')
                throw SimulationError("observable line " + std::to_string(lineno) +
                                      ": invalid pauli character '" + std::string(1, ch) + "'");
        std::string extra;
        if (ls >> extra)
            throw SimulationError("observable line " + std::to_string(lineno) +
                                  ": trailing content '" + extra + "'");
        obs.terms.push_back({coeff, std::move(paulis)});
    }
    if (obs.terms.empty()) throw SimulationError("observable has no terms");
    for (const PauliTerm& t : obs.terms)
        if (t.paulis.size() != obs.terms.front().paulis.size())
            throw SimulationError("observable terms have mismatched widths");
    return obs;
}

std::string Observable::str() const {
    std::ostringstream os;
    for (size_t k = 0; k < terms.size(); ++k) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.12g", terms[k].coeff);
        os << (k ? " + " : "") << buf << "*" << terms[k].paulis;
    }
    return os.str();
}

void validate_observable(const Circuit& c, const Observable& obs) {
    if (obs.terms.empty()) throw SimulationError("observable has no terms");
    for (const PauliTerm& t : obs.terms)
        if (static_cast<int>(t.paulis.size()) != c.num_qubits)
            throw SimulationError("observable width " + std::to_string(t.paulis.size()) +
                                  " does not match circuit width " +
                                  std::to_string(c.num_qubits));
}

double expectation(const Circuit& c, const Observable& obs) {
    if (c.has_measurement())
        throw SimulationError("exact expectation requires a measurement-free circuit");
    validate_observable(c, obs);

    StateVector psi(c.num_qubits);
    ClassicalRegister clbits(c.num_clbits);
    Rng unused(0);
    for (const Instruction& inst : c.instructions) apply(psi, inst, clbits, unused);

    cd total{0.0, 0.0};
    for (const PauliTerm& term : obs.terms) {
        StateVector phi = psi;
        for (size_t q = 0; q < term.paulis.size(); ++q) {
            switch (term.paulis[q]) {
                case 'X': phi.apply_gate(GateName::X, {static_cast<int>(q)}, {}); break;
                case 'Y': phi.apply_gate(GateName::Y, {static_cast<int>(q)}, {}); break;
                case 'Z': phi.apply_gate(GateName::Z, {static_cast<int>(q)}, {}); break;
                default: break;
            }
        }
        total += term.coeff * psi.inner(phi);
    }
    return total.real();
}

double sample_expectation(const Circuit& c, const Observable& obs, std::uint64_t shots,
                          std::uint64_t seed) {
    if (c.has_measurement())
        throw SimulationError("sampled expectation requires a measurement-free circuit");
    validate_observable(c, obs);

    double total = 0.0;
    for (size_t k = 0; k < obs.terms.size(); ++k) {
        const PauliTerm& term = obs.terms[k];
        const bool identity =
            term.paulis.find_first_not_of('I') == std::string::npos;
        if (identity) {
            total += term.coeff;
            continue;
        }
        Circuit aug = c;
        aug.num_clbits = aug.num_qubits;
        for (int q = 0; q < aug.num_qubits; ++q) {
            switch (term.paulis[static_cast<size_t>(q)]) {
                case 'X':
                    aug.instructions.push_back(Instruction::gate1(GateName::H, q));
                    break;
                case 'Y':
                    aug.instructions.push_back(
                        Instruction::rotation(GateName::Rz, -std::numbers::pi / 2, q));
                    aug.instructions.push_back(Instruction::gate1(GateName::H, q));
                    break;
                default:
                    break;
            }
        }
        for (int q = 0; q < aug.num_qubits; ++q)
            aug.instructions.push_back(Instruction::measure(q, q));

        ShotResult res = run_shots(aug, shots, derive_stream(seed, k));
        double sum = 0.0;
        for (const auto& [key, cnt] : res.counts) {
            int eigen = 1;
            for (size_t q = 0; q < term.paulis.size(); ++q)
                if (term.paulis[q] != 'I' && key[q] == '1') eigen = -eigen;
            sum += static_cast<double>(eigen) * static_cast<double>(cnt);
        }
        total += term.coeff * sum / static_cast<double>(shots);
    }
    return total;
}

}  // namespace qhpc
