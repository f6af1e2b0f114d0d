#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qhpc {

inline constexpr int kMaxSimQubits = 20;  // statevector capacity bound

enum class InstrKind { Gate, Measure, Barrier };

enum class GateName { H, X, Y, Z, Rx, Ry, Rz, Cx };

std::string_view gate_name_str(GateName g);
bool gate_takes_angle(GateName g);

// Whole-register equality test gating an instruction: if(c==value).
struct Condition {
    std::uint64_t value = 0;
    bool operator==(const Condition&) const = default;
};

struct Instruction {
    InstrKind kind = InstrKind::Gate;
    GateName gate = GateName::H;
    std::vector<int> qubits;     // 1 entry for single-qubit gates, {control, target} for cx
    std::vector<double> params;  // exactly 1 angle for rx/ry/rz, else empty
    int clbit = -1;              // measure target
    std::optional<Condition> condition;

    bool operator==(const Instruction&) const = default;

    static Instruction gate1(GateName g, int q);
    static Instruction rotation(GateName g, double angle, int q);
    static Instruction cx(int control, int target);
    static Instruction measure(int q, int c);
    static Instruction barrier(std::vector<int> qubits = {});
    Instruction with_condition(std::uint64_t value) const;
};

struct Circuit {
    int num_qubits = 0;
    int num_clbits = 0;
    std::string name = "main";
    std::string qreg_name = "q";
    std::string creg_name = "c";
    std::vector<Instruction> instructions;

    bool has_measurement() const;
    bool has_condition() const;
};

// Structural equality: registers, sizes and instruction stream. The circuit
// name is metadata and deliberately not part of it.
bool structurally_equal(const Circuit& a, const Circuit& b);

struct ParseDiagnostic {
    enum class Severity { Error, Warning };
    int line = 0;    // 1-based
    int column = 0;  // 1-based, points inside the offending token
    std::string message;
    Severity severity = Severity::Error;

    std::string str() const;
};

struct ParseResult {
    std::optional<Circuit> circuit;
    std::vector<ParseDiagnostic> diagnostics;

    bool ok() const { return circuit.has_value(); }
};

// Parses the OpenQASM 2.0 subset: header, optional qelib1 include, one qreg,
// at most one creg, gates h/x/y/z/rx/ry/rz/cx, measure, barrier, and
// if(c==v) prefixes on gate statements. Angles are decimal literals, pi, or
// pi/k. Statement order is preserved.
ParseResult parse_qasm(std::string_view text, std::string name = "main");

// Canonical printer: one statement per line, 12 significant digits for
// angles, pi/k literals restored where the stored value is bit-exact for
// k <= 16. parse(emit(c)) is structurally stable.
std::string emit_qasm(const Circuit& c);

std::string format_angle(double v);

// Longest chain of instructions sharing qubits, by greedy layering.
// Barriers close all layers without occupying one; conditioned gates occupy
// a layer on every qubit because classical feedback serializes the circuit.
int depth(const Circuit& c);

}  // namespace qhpc
