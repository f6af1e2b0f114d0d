#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qhpc/json.hpp"
#include "qhpc/qasm.hpp"

namespace qhpc {

struct ClassicalNode {
    std::string id;
    int cores = 1;
    int gpus = 0;
    double core_speed = 1.0;  // relative throughput, 1.0 = reference
};

enum class QpuModality { Simulated, Superconducting, IonTrap };

std::string_view modality_str(QpuModality m);
std::optional<QpuModality> parse_modality(std::string_view s);

struct QpuDevice {
    std::string id;
    int num_qubits = 1;
    QpuModality modality = QpuModality::Simulated;
    double coherence_time_us = 1.0;
    double gate_time_1q_us = 1.0;
    double gate_time_2q_us = 1.0;
    double readout_time_us = 1.0;
    double shot_overhead_us = 0.0;
    double compile_overhead_us = 0.0;
    double failure_prob = 0.0;  // per task attempt
};

struct Link {
    std::string a;
    std::string b;
    double latency_us = 0.0;
};

class Fabric {
public:
    std::vector<ClassicalNode> nodes;
    std::vector<QpuDevice> qpus;
    std::vector<Link> links;
    double default_latency_us = 0.0;

    bool has_resource(const std::string& id) const;
    bool is_qpu(const std::string& id) const;
    const ClassicalNode* find_node(const std::string& id) const;
    const QpuDevice* find_qpu(const std::string& id) const;

    // Declaration order: nodes first, then QPUs.
    std::vector<std::string> resource_ids() const;

    // 0 for r1 == r2, the listed link latency, or default_latency_us.
    // Symmetric by construction. Throws std::invalid_argument on unknown ids.
    double latency(const std::string& r1, const std::string& r2) const;
};

struct FabricLoadResult {
    std::optional<Fabric> fabric;
    std::vector<std::string> errors;

    bool ok() const { return fabric.has_value(); }
};

FabricLoadResult parse_fabric(const Json& doc);
FabricLoadResult load_fabric_file(const std::filesystem::path& path);

// Per-shot instruction time on this device: gate_time_1q_us per single-qubit
// gate, gate_time_2q_us per cx, readout_time_us per measure, 0 for barriers.
double per_shot_instruction_time_us(const QpuDevice& q, const Circuit& c);

// compile_overhead_us + shots * (shot_overhead_us + per-shot instruction
// time). Throws std::invalid_argument for shots < 1 or a circuit wider than
// the device.
double qpu_exec_time_us(const QpuDevice& q, const Circuit& c, std::uint64_t shots);

// True iff per-shot time + #conditioned * 2 * feedback one-way latency fits
// in the device coherence window.
bool coherence_budget_ok(const QpuDevice& q, const Circuit& c, double feedback_latency_us);

}  // namespace qhpc
