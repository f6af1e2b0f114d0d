#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "qhpc/fabric.hpp"
#include "qhpc/qasm.hpp"

using namespace qhpc;

namespace {

Json minimal_fabric_doc() {
    return Json::parse(R"({
      "nodes": [
        {"id": "n1", "cores": 8, "gpus": 1, "core_speed": 1.0},
        {"id": "n2", "cores": 4, "gpus": 0, "core_speed": 2.0}
      ],
      "qpus": [
        {"id": "q1", "num_qubits": 5, "modality": "superconducting",
         "coherence_time_us": 100.0, "gate_time_1q_us": 0.05, "gate_time_2q_us": 0.3,
         "readout_time_us": 1.0, "shot_overhead_us": 10.0, "compile_overhead_us": 1000.0,
         "failure_prob": 0.0}
      ],
      "links": [
        {"a": "n1", "b": "q1", "latency_us": 0.5}
      ],
      "default_latency_us": 10000.0
    })");
}

Circuit bell_with_measures() {
    ParseResult r = parse_qasm(
        "OPENQASM 2.0; qreg q[2]; creg c[2]; h q[0]; cx q[0],q[1];"
        " measure q[0] -> c[0]; measure q[1] -> c[1];");
    REQUIRE(r.ok());
    return *r.circuit;
}

}  // namespace

TEST_SUITE("fabric") {

TEST_CASE("loads two nodes and one qpu") {
    FabricLoadResult r = parse_fabric(minimal_fabric_doc());
    REQUIRE(r.ok());
    CHECK(r.fabric->resource_ids().size() == 3);
    CHECK(r.fabric->find_node("n1") != nullptr);
    CHECK(r.fabric->find_qpu("q1") != nullptr);
    CHECK(r.fabric->find_qpu("q1")->modality == QpuModality::Superconducting);
    CHECK_FALSE(r.fabric->is_qpu("n1"));
}

TEST_CASE("duplicate id is a validation error naming the id") {
    Json doc = minimal_fabric_doc();
    doc["qpus"][0]["id"] = "n1";
    FabricLoadResult r = parse_fabric(doc);
    CHECK_FALSE(r.ok());
    bool found = false;
    for (const std::string& e : r.errors)
        if (e.find("duplicate id 'n1'") != std::string::npos) found = true;
    CHECK(found);
}

TEST_CASE("dangling link endpoint is a validation error") {
    Json doc = minimal_fabric_doc();
    doc["links"][0]["b"] = "ghost";
    FabricLoadResult r = parse_fabric(doc);
    CHECK_FALSE(r.ok());
    CHECK(r.errors[0].find("ghost") != std::string::npos);
}

TEST_CASE("unknown keys are rejected at every level") {
    Json doc = minimal_fabric_doc();
    doc["nodes"][0]["speeed"] = 2.0;
    FabricLoadResult r = parse_fabric(doc);
    CHECK_FALSE(r.ok());
    CHECK(r.errors[0].find("unknown key 'speeed'") != std::string::npos);

    Json doc2 = minimal_fabric_doc();
    doc2["defautl_latency_us"] = 3.0;
    CHECK_FALSE(parse_fabric(doc2).ok());
}

TEST_CASE("non-positive times are validation errors") {
    Json doc = minimal_fabric_doc();
    doc["qpus"][0]["gate_time_1q_us"] = 0.0;
    CHECK_FALSE(parse_fabric(doc).ok());
    Json doc2 = minimal_fabric_doc();
    doc2["qpus"][0]["failure_prob"] = 1.5;
    CHECK_FALSE(parse_fabric(doc2).ok());
}

TEST_CASE("latency: self, listed, default, unknown") {
    Fabric f = *parse_fabric(minimal_fabric_doc()).fabric;
    CHECK(f.latency("q1", "q1") == 0.0);
    CHECK(f.latency("n1", "q1") == 0.5);
    CHECK(f.latency("q1", "n1") == 0.5);       // symmetry of a listed link
    CHECK(f.latency("n2", "q1") == 10000.0);   // unlisted pair falls back
    CHECK_THROWS_AS(f.latency("n1", "nope"), std::invalid_argument);
}

TEST_CASE("latency symmetry and zero self-latency across all pairs") {
    Fabric f = *parse_fabric(minimal_fabric_doc()).fabric;
    for (const std::string& a : f.resource_ids())
        for (const std::string& b : f.resource_ids()) {
            CHECK(f.latency(a, b) == f.latency(b, a));
            if (a == b) CHECK(f.latency(a, b) == 0.0);
        }
}

TEST_CASE("qpu execution time matches the documented arithmetic") {
    Fabric f = *parse_fabric(minimal_fabric_doc()).fabric;
    const QpuDevice& q = *f.find_qpu("q1");
    Circuit bell = bell_with_measures();
    // compile 1000 + 1000 shots x (10 + 0.05 + 0.3 + 1 + 1)
    CHECK(qpu_exec_time_us(q, bell, 1000) == doctest::Approx(13350.0));
}

TEST_CASE("qpu execution time boundaries") {
    Fabric f = *parse_fabric(minimal_fabric_doc()).fabric;
    const QpuDevice& q = *f.find_qpu("q1");
    Circuit bell = bell_with_measures();
    CHECK_THROWS_AS(qpu_exec_time_us(q, bell, 0), std::invalid_argument);
    CHECK(qpu_exec_time_us(q, bell, 1) == doctest::Approx(1000.0 + 12.35));

    Circuit empty;
    empty.num_qubits = 2;
    CHECK(qpu_exec_time_us(q, empty, 10) == doctest::Approx(1000.0 + 10 * 10.0));

    Circuit wide;
    wide.num_qubits = 6;  // device has 5
    CHECK_THROWS_AS(qpu_exec_time_us(q, wide, 1), std::invalid_argument);
}

TEST_CASE("qpu execution time is monotone in shots and instruction count") {
    Fabric f = *parse_fabric(minimal_fabric_doc()).fabric;
    const QpuDevice& q = *f.find_qpu("q1");
    Circuit c = bell_with_measures();
    for (std::uint64_t shots = 1; shots < 40; shots += 7)
        CHECK(qpu_exec_time_us(q, c, shots) < qpu_exec_time_us(q, c, shots + 1));
    Circuit longer = c;
    for (int i = 0; i < 5; ++i) {
        longer.instructions.push_back(Instruction::gate1(GateName::X, 0));
        CHECK(qpu_exec_time_us(q, c, 10) < qpu_exec_time_us(q, longer, 10));
    }
}

TEST_CASE("coherence budget matches the documented arithmetic") {
    QpuDevice q;
    q.coherence_time_us = 100.0;
    q.gate_time_1q_us = 1.0;
    q.gate_time_2q_us = 1.0;
    q.readout_time_us = 1.0;
    // Two 1q gates (one conditioned): per-shot 2 us.
    Circuit c;
    c.num_qubits = 1;
    c.num_clbits = 1;
    c.instructions.push_back(Instruction::gate1(GateName::H, 0));
    c.instructions.push_back(Instruction::gate1(GateName::X, 0).with_condition(1));
    CHECK(coherence_budget_ok(q, c, 0.5));       // 2 + 1*2*0.5 = 3 <= 100
    CHECK_FALSE(coherence_budget_ok(q, c, 10000.0));  // 20002 > 100
}

TEST_CASE("without conditions coherence reduces to per-shot time") {
    QpuDevice q;
    q.coherence_time_us = 5.0;
    q.gate_time_1q_us = 1.0;
    q.gate_time_2q_us = 1.0;
    q.readout_time_us = 1.0;
    Circuit c;
    c.num_qubits = 1;
    for (int i = 0; i < 5; ++i) c.instructions.push_back(Instruction::gate1(GateName::X, 0));
    CHECK(coherence_budget_ok(q, c, 1e9));  // feedback latency is irrelevant
    c.instructions.push_back(Instruction::gate1(GateName::X, 0));
    CHECK_FALSE(coherence_budget_ok(q, c, 0.0));  // 6 > 5
}

TEST_CASE("decreasing feedback latency never flips the budget to false") {
    std::mt19937_64 gen(55);
    for (int rep = 0; rep < 50; ++rep) {
        QpuDevice q;
        q.coherence_time_us = 1.0 + static_cast<double>(gen() % 1000) / 10.0;
        q.gate_time_1q_us = 0.1 + static_cast<double>(gen() % 100) / 100.0;
        q.gate_time_2q_us = q.gate_time_1q_us * 3;
        q.readout_time_us = 1.0;
        Circuit c;
        c.num_qubits = 2;
        c.num_clbits = 1;
        int n = 1 + static_cast<int>(gen() % 10);
        for (int i = 0; i < n; ++i) {
            Instruction inst = Instruction::gate1(GateName::X, 0);
            if (gen() % 3 == 0) inst = inst.with_condition(1);
            c.instructions.push_back(inst);
        }
        double f_low = static_cast<double>(gen() % 100) / 10.0;
        double f_high = f_low + static_cast<double>(gen() % 100) / 10.0;
        if (coherence_budget_ok(q, c, f_high)) CHECK(coherence_budget_ok(q, c, f_low));
    }
}

TEST_CASE("load_fabric_file reads and validates a file") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "qhpc_fabric_test";
    fs::create_directories(dir);
    fs::path good = dir / "good.json";
    std::ofstream(good) << minimal_fabric_doc().dump(2);
    FabricLoadResult r = load_fabric_file(good);
    CHECK(r.ok());

    fs::path bad = dir / "bad.json";
    std::ofstream(bad) << "{ not json";
    CHECK_FALSE(load_fabric_file(bad).ok());

    CHECK_FALSE(load_fabric_file(dir / "missing.json").ok());
}

}  // TEST_SUITE
