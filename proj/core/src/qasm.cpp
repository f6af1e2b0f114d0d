#include "qhpc/qasm.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <numbers>
#include <sstream>

namespace qhpc {

namespace {

constexpr std::array<std::pair<GateName, std::string_view>, 8> kGateNames{{
    {GateName::H, "h"},
    {GateName::X, "x"},
    {GateName::Y, "y"},
    {GateName::Z, "z"},
    {GateName::Rx, "rx"},
    {GateName::Ry, "ry"},
    {GateName::Rz, "rz"},
    {GateName::Cx, "cx"},
}};

std::optional<GateName> lookup_gate(std::string_view s) {
    for (auto [g, n] : kGateNames)
        if (n == s) return g;
    return std::nullopt;
}

}  // namespace

std::string_view gate_name_str(GateName g) {
    for (auto [gg, n] : kGateNames)
        if (gg == g) return n;
    return "?";
}

bool gate_takes_angle(GateName g) {
    return g == GateName::Rx || g == GateName::Ry || g == GateName::Rz;
}

Instruction Instruction::gate1(GateName g, int q) {
    Instruction i;
    i.kind = InstrKind::Gate;
    i.gate = g;
    i.qubits = {q};
    return i;
}

Instruction Instruction::rotation(GateName g, double angle, int q) {
    Instruction i = gate1(g, q);
    i.params = {angle};
    return i;
}

Instruction Instruction::cx(int control, int target) {
    Instruction i;
    i.kind = InstrKind::Gate;
    i.gate = GateName::Cx;
    i.qubits = {control, target};
    return i;
}

Instruction Instruction::measure(int q, int c) {
    Instruction i;
    i.kind = InstrKind::Measure;
    i.qubits = {q};
    i.clbit = c;
    return i;
}

Instruction Instruction::barrier(std::vector<int> qubits) {
    Instruction i;
    i.kind = InstrKind::Barrier;
    i.qubits = std::move(qubits);
    return i;
}

Instruction Instruction::with_condition(std::uint64_t value) const {
    Instruction i = *this;
    i.condition = Condition{value};
    return i;
}

bool Circuit::has_measurement() const {
    return std::any_of(instructions.begin(), instructions.end(),
                       [](const Instruction& i) { return i.kind == InstrKind::Measure; });
}

bool Circuit::has_condition() const {
    return std::any_of(instructions.begin(), instructions.end(),
                       [](const Instruction& i) { return i.condition.has_value(); });
}

bool structurally_equal(const Circuit& a, const Circuit& b) {
    return a.num_qubits == b.num_qubits && a.num_clbits == b.num_clbits &&
           a.qreg_name == b.qreg_name && a.creg_name == b.creg_name &&
           a.instructions == b.instructions;
}

std::string ParseDiagnostic::str() const {
    std::ostringstream os;
    os << (severity == Severity::Error ? "error" : "warning") << " at " << line << ":" << column
       << ": " << message;
    return os.str();
}

// ---------------------------------------------------------------------------
// Lexer

namespace {

struct Token {
    enum class Type { Ident, Number, String, Sym, End };
    Type type = Type::End;
    std::string_view text;
    int line = 1;
    int col = 1;
};

std::vector<Token> lex(std::string_view src, std::vector<ParseDiagnostic>& diags) {
    std::vector<Token> out;
    size_t i = 0;
    int line = 1, col = 1;
    auto advance = [&](size_t n) {
        for (size_t k = 0; k < n; ++k) {
            if (src[i + k] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        i += n;
    };
    while (i < src.size()) {
        char ch = src[i];
        if (ch == ' ' || ch == '\t' || ch == '\r' || ch == '\n') {
            advance(1);
            continue;
        }
        if (ch == '/' && i + 1 < src.size() && src[i + 1] == '/') {
            while (i < src.size() && src[i] != '\n') advance(1);
            continue;
        }
        Token t;
        t.line = line;
        t.col = col;
        if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
            size_t n = 1;
            while (i + n < src.size() &&
                   (std::isalnum(static_cast<unsigned char>(src[i + n])) || src[i + n] == '_'))
                ++n;
            t.type = Token::Type::Ident;
            t.text = src.substr(i, n);
            advance(n);
        } else if (std::isdigit(static_cast<unsigned char>(ch)) ||
                   (ch == '.' && i + 1 < src.size() &&
                    std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
            size_t n = 0;
            while (i + n < src.size() &&
                   (std::isdigit(static_cast<unsigned char>(src[i + n])) || src[i + n] == '.'))
                ++n;
            if (i + n < src.size() && (src[i + n] == 'e' || src[i + n] == 'E')) {
                size_t m = n + 1;
                if (i + m < src.size() && (src[i + m] == '+' || src[i + m] == '-')) ++m;
                if (i + m < src.size() && std::isdigit(static_cast<unsigned char>(src[i + m]))) {
                    n = m;
                    while (i + n < src.size() &&
                           std::isdigit(static_cast<unsigned char>(src[i + n])))
                        ++n;
                }
            }
            t.type = Token::Type::Number;
            t.text = src.substr(i, n);
            advance(n);
        } else if (ch == '"') {
            size_t n = 1;
            while (i + n < src.size() && src[i + n] != '"' && src[i + n] != '\n') ++n;
            if (i + n < src.size() && src[i + n] == '"') {
                t.type = Token::Type::String;
                t.text = src.substr(i + 1, n - 1);  // contents only
                advance(n + 1);
            } else {
                diags.push_back({t.line, t.col, "unterminated string literal",
                                 ParseDiagnostic::Severity::Error});
                advance(n);
                continue;
            }
        } else if (ch == '-' && i + 1 < src.size() && src[i + 1] == '>') {
            t.type = Token::Type::Sym;
            t.text = src.substr(i, 2);
            advance(2);
        } else if (ch == '=' && i + 1 < src.size() && src[i + 1] == '=') {
            t.type = Token::Type::Sym;
            t.text = src.substr(i, 2);
            advance(2);
        } else {
            t.type = Token::Type::Sym;
            t.text = src.substr(i, 1);
            advance(1);
        }
        out.push_back(t);
    }
    Token end;
    end.type = Token::Type::End;
    end.line = line;
    end.col = col;
    out.push_back(end);
    return out;
}

// ---------------------------------------------------------------------------
// Parser: recursive descent with skip-to-semicolon recovery.

struct SyntaxError {};

class Parser {
public:
    Parser(std::string_view src, std::string name) {
        circuit_.name = std::move(name);
        toks_ = lex(src, diags_);
    }

    ParseResult run() {
        parse_header();
        while (peek().type != Token::Type::End) {
            try {
                parse_statement();
            } catch (const SyntaxError&) {
                recover();
            }
        }
        if (!have_qreg_ && !has_errors())
            diags_.push_back({1, 1, "missing qreg declaration", ParseDiagnostic::Severity::Error});
        ParseResult r;
        r.diagnostics = std::move(diags_);
        if (!std::any_of(r.diagnostics.begin(), r.diagnostics.end(), [](const ParseDiagnostic& d) {
                return d.severity == ParseDiagnostic::Severity::Error;
            }))
            r.circuit = std::move(circuit_);
        return r;
    }

private:
    std::vector<Token> toks_;
    size_t pos_ = 0;
    Circuit circuit_;
    bool have_qreg_ = false;
    bool have_creg_ = false;
    std::vector<ParseDiagnostic> diags_;

    const Token& peek(size_t k = 0) const {
        size_t p = std::min(pos_ + k, toks_.size() - 1);
        return toks_[p];
    }
    const Token& get() {
        const Token& t = toks_[pos_];
        if (pos_ + 1 < toks_.size()) ++pos_;
        return t;
    }

    bool has_errors() const {
        return std::any_of(diags_.begin(), diags_.end(), [](const ParseDiagnostic& d) {
            return d.severity == ParseDiagnostic::Severity::Error;
        });
    }

    [[noreturn]] void error(const Token& at, std::string msg) {
        diags_.push_back({at.line, at.col, std::move(msg), ParseDiagnostic::Severity::Error});
        throw SyntaxError{};
    }
    void warn(const Token& at, std::string msg) {
        diags_.push_back({at.line, at.col, std::move(msg), ParseDiagnostic::Severity::Warning});
    }

    void recover() {
        while (peek().type != Token::Type::End) {
            const Token& t = get();
            if (t.type == Token::Type::Sym && t.text == ";") return;
        }
    }

    bool accept_sym(std::string_view s) {
        if (peek().type == Token::Type::Sym && peek().text == s) {
            get();
            return true;
        }
        return false;
    }
    void expect_sym(std::string_view s, const char* what) {
        if (!accept_sym(s)) error(peek(), std::string("expected '") + std::string(s) + "' " + what);
    }
    void expect_semicolon() {
        if (!accept_sym(";")) error(peek(), "missing semicolon");
    }

    std::uint64_t parse_uint(const char* what) {
        const Token& t = peek();
        if (t.type != Token::Type::Number ||
            t.text.find_first_not_of("0123456789") != std::string_view::npos)
            error(t, std::string("expected integer ") + what);
        get();
        return std::strtoull(std::string(t.text).c_str(), nullptr, 10);
    }

    void parse_header() {
        try {
            const Token& kw = peek();
            if (kw.type != Token::Type::Ident || kw.text != "OPENQASM")
                error(kw, "expected 'OPENQASM 2.0;' header");
            get();
            const Token& ver = peek();
            if (ver.type != Token::Type::Number || ver.text != "2.0")
                error(ver, "unsupported OPENQASM version (only 2.0)");
            get();
            expect_semicolon();
        } catch (const SyntaxError&) {
            recover();
        }
    }

    void parse_statement() {
        const Token& t = peek();
        if (t.type != Token::Type::Ident) error(t, "expected statement");
        if (t.text == "include") {
            get();
            const Token& file = peek();
            if (file.type != Token::Type::String) error(file, "expected include file string");
            get();
            if (file.text != "qelib1.inc")
                warn(file, "unrecognized include '" + std::string(file.text) + "' ignored");
            expect_semicolon();
            return;
        }
        if (t.text == "qreg" || t.text == "creg") {
            parse_register_decl(t.text == "qreg");
            return;
        }
        if (t.text == "if") {
            parse_conditioned();
            return;
        }
        if (t.text == "measure") {
            parse_measure();
            return;
        }
        if (t.text == "barrier") {
            parse_barrier();
            return;
        }
        Instruction instr = parse_gate_statement();
        expect_semicolon();
        circuit_.instructions.push_back(std::move(instr));
    }

    void parse_register_decl(bool quantum) {
        const Token& kw = get();
        const Token& name = peek();
        if (name.type != Token::Type::Ident) error(name, "expected register name");
        get();
        expect_sym("[", "in register declaration");
        const Token& size_tok = peek();
        std::uint64_t size = parse_uint("register size");
        expect_sym("]", "in register declaration");
        expect_semicolon();
        if (quantum) {
            if (have_qreg_) error(kw, "duplicate qreg declaration");
            if (size < 1) error(size_tok, "qreg size must be positive");
            if (size > static_cast<std::uint64_t>(kMaxSimQubits))
                error(size_tok, "qreg size exceeds simulator capacity (" +
                                    std::to_string(kMaxSimQubits) + ")");
            have_qreg_ = true;
            circuit_.qreg_name = std::string(name.text);
            circuit_.num_qubits = static_cast<int>(size);
        } else {
            if (have_creg_) error(kw, "duplicate creg declaration");
            have_creg_ = true;
            circuit_.creg_name = std::string(name.text);
            circuit_.num_clbits = static_cast<int>(size);
        }
    }

    int parse_operand(bool quantum) {
        const Token& name = peek();
        if (name.type != Token::Type::Ident) error(name, "expected register operand");
        bool declared = quantum ? have_qreg_ : have_creg_;
        const std::string& expect_name = quantum ? circuit_.qreg_name : circuit_.creg_name;
        if (!declared || name.text != expect_name)
            error(name, "undeclared register '" + std::string(name.text) + "'");
        get();
        expect_sym("[", "in operand");
        const Token& idx_tok = peek();
        std::uint64_t idx = parse_uint("index");
        int size = quantum ? circuit_.num_qubits : circuit_.num_clbits;
        if (idx >= static_cast<std::uint64_t>(size))
            error(idx_tok, "index out of range: " + std::string(name.text) + "[" +
                               std::to_string(idx) + "] (size " + std::to_string(size) + ")");
        expect_sym("]", "in operand");
        return static_cast<int>(idx);
    }

    double parse_angle() {
        const Token& first = peek();
        double sign = 1.0;
        if (accept_sym("-")) sign = -1.0;
        const Token& t = peek();
        if (t.type == Token::Type::Ident && t.text == "pi") {
            get();
            double v = std::numbers::pi;
            if (accept_sym("/")) {
                std::uint64_t k = parse_uint("divisor in pi/k");
                if (k == 0) error(t, "malformed angle: division by zero");
                v /= static_cast<double>(k);
            }
            return sign * v;
        }
        if (t.type == Token::Type::Number) {
            get();
            std::string s(t.text);
            char* end = nullptr;
            double v = std::strtod(s.c_str(), &end);
            if (end != s.c_str() + s.size()) error(t, "malformed angle");
            return sign * v;
        }
        error(first, "malformed angle");
    }

    Instruction parse_gate_statement() {
        const Token& t = peek();
        if (t.type != Token::Type::Ident) error(t, "expected gate statement");
        auto g = lookup_gate(t.text);
        if (!g) error(t, "unsupported gate name '" + std::string(t.text) + "'");
        get();
        Instruction instr;
        instr.kind = InstrKind::Gate;
        instr.gate = *g;
        if (gate_takes_angle(*g)) {
            expect_sym("(", "before rotation angle");
            instr.params.push_back(parse_angle());
            expect_sym(")", "after rotation angle");
        } else if (peek().type == Token::Type::Sym && peek().text == "(") {
            error(peek(), "gate '" + std::string(gate_name_str(*g)) + "' takes no parameters");
        }
        if (*g == GateName::Cx) {
            const Token& ctl_tok = peek();
            int control = parse_operand(true);
            expect_sym(",", "between cx operands");
            int target = parse_operand(true);
            if (control == target) error(ctl_tok, "cx control and target must differ");
            instr.qubits = {control, target};
        } else {
            instr.qubits = {parse_operand(true)};
        }
        return instr;
    }

    void parse_measure() {
        get();  // measure
        int q = parse_operand(true);
        expect_sym("->", "in measure statement");
        int c = parse_operand(false);
        expect_semicolon();
        circuit_.instructions.push_back(Instruction::measure(q, c));
    }

    void parse_barrier() {
        get();  // barrier
        std::vector<int> qubits;
        bool whole_register = false;
        if (!(peek().type == Token::Type::Sym && peek().text == ";")) {
            while (true) {
                const Token& name = peek();
                if (name.type != Token::Type::Ident) error(name, "expected register operand");
                if (!have_qreg_ || name.text != circuit_.qreg_name)
                    error(name, "undeclared register '" + std::string(name.text) + "'");
                if (peek(1).type == Token::Type::Sym && peek(1).text == "[") {
                    qubits.push_back(parse_operand(true));
                } else {
                    get();
                    whole_register = true;
                }
                if (!accept_sym(",")) break;
            }
        } else {
            whole_register = true;
        }
        expect_semicolon();
        if (whole_register) qubits.clear();  // empty list = all qubits
        circuit_.instructions.push_back(Instruction::barrier(std::move(qubits)));
    }

    void parse_conditioned() {
        get();  // if
        expect_sym("(", "after if");
        const Token& name = peek();
        if (name.type != Token::Type::Ident) error(name, "expected classical register in condition");
        if (!have_creg_ || name.text != circuit_.creg_name)
            error(name, "undeclared register '" + std::string(name.text) + "'");
        get();
        expect_sym("==", "in condition");
        std::uint64_t value = parse_uint("condition value");
        expect_sym(")", "after condition");
        const Token& stmt = peek();
        if (stmt.type == Token::Type::Ident && (stmt.text == "measure" || stmt.text == "barrier"))
            error(stmt, "only gate statements can be conditioned");
        Instruction instr = parse_gate_statement();
        expect_semicolon();
        instr.condition = Condition{value};
        circuit_.instructions.push_back(std::move(instr));
    }
};

}  // namespace

ParseResult parse_qasm(std::string_view text, std::string name) {
    return Parser(text, std::move(name)).run();
}

// ---------------------------------------------------------------------------
// Printer

std::string format_angle(double v) {
    for (int k = 1; k <= 16; ++k) {
        if (v == std::numbers::pi / k) return k == 1 ? "pi" : "pi/" + std::to_string(k);
        if (v == -std::numbers::pi / k) return k == 1 ? "-pi" : "-pi/" + std::to_string(k);
    }
    // 12 significant digits, escalating only when that loses the exact value.
    char buf[64];
    for (int prec = 12; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

std::string emit_qasm(const Circuit& c) {
    std::ostringstream os;
    os << "OPENQASM 2.0;\n";
    os << "qreg " << c.qreg_name << "[" << c.num_qubits << "];\n";
    if (c.num_clbits > 0) os << "creg " << c.creg_name << "[" << c.num_clbits << "];\n";
    for (const Instruction& i : c.instructions) {
        if (i.condition) os << "if(" << c.creg_name << "==" << i.condition->value << ") ";
        switch (i.kind) {
            case InstrKind::Gate:
                os << gate_name_str(i.gate);
                if (!i.params.empty()) os << "(" << format_angle(i.params[0]) << ")";
                os << " " << c.qreg_name << "[" << i.qubits[0] << "]";
                if (i.qubits.size() == 2) os << "," << c.qreg_name << "[" << i.qubits[1] << "]";
                break;
            case InstrKind::Measure:
                os << "measure " << c.qreg_name << "[" << i.qubits[0] << "] -> " << c.creg_name
                   << "[" << i.clbit << "]";
                break;
            case InstrKind::Barrier:
                os << "barrier";
                if (i.qubits.empty()) {
                    os << " " << c.qreg_name;
                } else {
                    for (size_t k = 0; k < i.qubits.size(); ++k)
                        os << (k == 0 ? " " : ",") << c.qreg_name << "[" << i.qubits[k] << "]";
                }
                break;
        }
        os << ";\n";
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Depth by greedy layering.

int depth(const Circuit& c) {
    std::vector<int> level(static_cast<size_t>(c.num_qubits), 0);
    int max_level = 0;
    for (const Instruction& i : c.instructions) {
        if (i.kind == InstrKind::Barrier && !i.condition) {
            // Barriers close every open layer without occupying one.
            std::fill(level.begin(), level.end(), max_level);
            continue;
        }
        int base = 0;
        if (i.condition) {
            // Classical feedback serializes against everything.
            base = max_level;
            std::fill(level.begin(), level.end(), base + 1);
        } else {
            for (int q : i.qubits) base = std::max(base, level[static_cast<size_t>(q)]);
            for (int q : i.qubits) level[static_cast<size_t>(q)] = base + 1;
        }
        max_level = std::max(max_level, base + 1);
    }
    return max_level;
}

}  // namespace qhpc
