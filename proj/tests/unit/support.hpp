// Test-side oracles, deliberately independent of the library's execution
// paths: dense matrix-vector linear algebra instead of amplitude strides,
// longest-path search instead of greedy layering.
#pragma once

#include <complex>
#include <random>
#include <vector>

#include "qhpc/qasm.hpp"
#include "qhpc/qsim.hpp"

namespace oracle {

using cd = std::complex<double>;
using Matrix = std::vector<std::vector<cd>>;
using Vector = std::vector<cd>;

inline Matrix identity(size_t dim) {
    Matrix m(dim, Vector(dim, cd{0, 0}));
    for (size_t i = 0; i < dim; ++i) m[i][i] = cd{1, 0};
    return m;
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
    const size_t ra = a.size(), ca = a[0].size(), rb = b.size(), cb = b[0].size();
    Matrix m(ra * rb, Vector(ca * cb, cd{0, 0}));
    for (size_t i = 0; i < ra; ++i)
        for (size_t j = 0; j < ca; ++j)
            for (size_t k = 0; k < rb; ++k)
                for (size_t l = 0; l < cb; ++l) m[i * rb + k][j * cb + l] = a[i][j] * b[k][l];
    return m;
}

inline Matrix pauli_matrix(char p) {
    switch (p) {
        case 'X': return {{cd{0, 0}, cd{1, 0}}, {cd{1, 0}, cd{0, 0}}};
        case 'Y': return {{cd{0, 0}, cd{0, -1}}, {cd{0, 1}, cd{0, 0}}};
        case 'Z': return {{cd{1, 0}, cd{0, 0}}, {cd{0, 0}, cd{-1, 0}}};
        default: return identity(2);
    }
}

inline Matrix gate_matrix2(qhpc::GateName g, double angle) {
    using qhpc::GateName;
    const double s = 1.0 / std::sqrt(2.0);
    switch (g) {
        case GateName::H: return {{cd{s, 0}, cd{s, 0}}, {cd{s, 0}, cd{-s, 0}}};
        case GateName::X: return pauli_matrix('X');
        case GateName::Y: return pauli_matrix('Y');
        case GateName::Z: return pauli_matrix('Z');
        case GateName::Rx:
            return {{cd{std::cos(angle / 2), 0}, cd{0, -std::sin(angle / 2)}},
                    {cd{0, -std::sin(angle / 2)}, cd{std::cos(angle / 2), 0}}};
        case GateName::Ry:
            return {{cd{std::cos(angle / 2), 0}, cd{-std::sin(angle / 2), 0}},
                    {cd{std::sin(angle / 2), 0}, cd{std::cos(angle / 2), 0}}};
        case GateName::Rz:
            return {{std::exp(cd{0, -angle / 2}), cd{0, 0}}, {cd{0, 0}, std::exp(cd{0, angle / 2})}};
        default: throw std::logic_error("gate_matrix2: cx has no 2x2 form");
    }
}

// Full 2^n x 2^n unitary for a single-qubit gate. Qubit 0 is the least
// significant amplitude-index bit, so the gate sits at the low end of the
// kron chain: I_(high) (x) g (x) I_(low).
inline Matrix embed1(int n, int qubit, const Matrix& g) {
    Matrix m = identity(size_t{1} << qubit);
    m = kron(g, m);
    m = kron(identity(size_t{1} << (n - 1 - qubit)), m);
    return m;
}

inline Matrix cx_matrix(int n, int control, int target) {
    const size_t dim = size_t{1} << n;
    Matrix m(dim, Vector(dim, cd{0, 0}));
    for (size_t i = 0; i < dim; ++i) {
        size_t j = i;
        if (i & (size_t{1} << control)) j ^= size_t{1} << target;
        m[j][i] = cd{1, 0};
    }
    return m;
}

inline Vector matvec(const Matrix& m, const Vector& v) {
    Vector out(m.size(), cd{0, 0});
    for (size_t i = 0; i < m.size(); ++i)
        for (size_t j = 0; j < v.size(); ++j) out[i] += m[i][j] * v[j];
    return out;
}

// Dense-path final state of a measurement-free circuit.
inline Vector dense_statevector(const qhpc::Circuit& c) {
    Vector v(size_t{1} << c.num_qubits, cd{0, 0});
    v[0] = cd{1, 0};
    for (const qhpc::Instruction& inst : c.instructions) {
        if (inst.kind != qhpc::InstrKind::Gate) continue;
        Matrix m = inst.gate == qhpc::GateName::Cx
                       ? cx_matrix(c.num_qubits, inst.qubits[0], inst.qubits[1])
                       : embed1(c.num_qubits, inst.qubits[0],
                                gate_matrix2(inst.gate, inst.params.empty() ? 0 : inst.params[0]));
        v = matvec(m, v);
    }
    return v;
}

inline Matrix observable_matrix(const qhpc::Observable& obs, int n) {
    const size_t dim = size_t{1} << n;
    Matrix h(dim, Vector(dim, cd{0, 0}));
    for (const qhpc::PauliTerm& term : obs.terms) {
        Matrix m = pauli_matrix(term.paulis[0]);
        for (size_t q = 1; q < term.paulis.size(); ++q) m = kron(pauli_matrix(term.paulis[q]), m);
        for (size_t i = 0; i < dim; ++i)
            for (size_t j = 0; j < dim; ++j) h[i][j] += term.coeff * m[i][j];
    }
    return h;
}

inline double dense_expectation(const qhpc::Circuit& c, const qhpc::Observable& obs) {
    Vector psi = dense_statevector(c);
    Vector hpsi = matvec(observable_matrix(obs, c.num_qubits), psi);
    cd e{0, 0};
    for (size_t i = 0; i < psi.size(); ++i) e += std::conj(psi[i]) * hpsi[i];
    return e.real();
}

// Longest path over the qubit-sharing dependency DAG, counting every
// non-barrier instruction as weight 1. Conditioned instructions depend on
// (and feed) everything, mirroring the documented depth semantics.
inline int longest_path_depth(const qhpc::Circuit& c) {
    const auto& ins = c.instructions;
    std::vector<int> dist(ins.size(), 0);
    auto touches_all = [](const qhpc::Instruction& i) { return i.condition.has_value(); };
    auto shares = [&](size_t a, size_t b) {
        if (touches_all(ins[a]) || touches_all(ins[b])) return true;
        for (int qa : ins[a].qubits)
            for (int qb : ins[b].qubits)
                if (qa == qb) return true;
        return false;
    };
    int best = 0;
    for (size_t i = 0; i < ins.size(); ++i) {
        if (ins[i].kind == qhpc::InstrKind::Barrier && !ins[i].condition) continue;
        int d = 1;
        for (size_t j = 0; j < i; ++j) {
            if (ins[j].kind == qhpc::InstrKind::Barrier && !ins[j].condition) continue;
            if (shares(j, i)) d = std::max(d, dist[j] + 1);
        }
        dist[i] = d;
        best = std::max(best, d);
    }
    return best;
}

// Deterministic random circuits (std::mt19937_64 raw draws only, so the
// sequence is identical on every platform).
inline qhpc::Circuit random_circuit(std::mt19937_64& gen, int num_qubits, int num_instructions,
                                    bool allow_measure = false, bool allow_condition = false) {
    qhpc::Circuit c;
    c.num_qubits = num_qubits;
    c.num_clbits = allow_measure || allow_condition ? num_qubits : 0;
    auto pick = [&](int n) { return static_cast<int>(gen() % static_cast<std::uint64_t>(n)); };
    for (int i = 0; i < num_instructions; ++i) {
        int what = pick(allow_measure ? 10 : 8);
        qhpc::Instruction inst;
        if (what < 4) {
            constexpr qhpc::GateName g1[] = {qhpc::GateName::H, qhpc::GateName::X,
                                             qhpc::GateName::Y, qhpc::GateName::Z};
            inst = qhpc::Instruction::gate1(g1[pick(4)], pick(num_qubits));
        } else if (what < 7) {
            constexpr qhpc::GateName gr[] = {qhpc::GateName::Rx, qhpc::GateName::Ry,
                                             qhpc::GateName::Rz};
            double angle = (static_cast<double>(gen() % 20000) - 10000.0) / 1000.0;
            inst = qhpc::Instruction::rotation(gr[pick(3)], angle, pick(num_qubits));
        } else if (what < 8) {
            if (num_qubits < 2) {
                inst = qhpc::Instruction::gate1(qhpc::GateName::H, 0);
            } else {
                int a = pick(num_qubits), b = pick(num_qubits - 1);
                if (b >= a) ++b;
                inst = qhpc::Instruction::cx(a, b);
            }
        } else {
            int q = pick(num_qubits);
            inst = qhpc::Instruction::measure(q, q);
        }
        if (allow_condition && inst.kind == qhpc::InstrKind::Gate && pick(8) == 0)
            inst = inst.with_condition(gen() % 4);
        c.instructions.push_back(inst);
    }
    return c;
}

}  // namespace oracle
