#include "qhpc/fabric.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "json_util.hpp"

namespace qhpc {

using namespace jsonutil;

std::string_view modality_str(QpuModality m) {
    switch (m) {
        case QpuModality::Simulated: return "simulated";
        case QpuModality::Superconducting: return "superconducting";
        case QpuModality::IonTrap: return "ion_trap";
    }
    return "?";
}

std::optional<QpuModality> parse_modality(std::string_view s) {
    if (s == "simulated") return QpuModality::Simulated;
    if (s == "superconducting") return QpuModality::Superconducting;
    if (s == "ion_trap") return QpuModality::IonTrap;
    return std::nullopt;
}

bool Fabric::has_resource(const std::string& id) const {
    return find_node(id) != nullptr || find_qpu(id) != nullptr;
}

bool Fabric::is_qpu(const std::string& id) const { return find_qpu(id) != nullptr; }

const ClassicalNode* Fabric::find_node(const std::string& id) const {
    for (const ClassicalNode& n : nodes)
        if (n.id == id) return &n;
    return nullptr;
}

const QpuDevice* Fabric::find_qpu(const std::string& id) const {
    for (const QpuDevice& q : qpus)
        if (q.id == id) return &q;
    return nullptr;
}

std::vector<std::string> Fabric::resource_ids() const {
    std::vector<std::string> ids;
    ids.reserve(nodes.size() + qpus.size());
    for (const ClassicalNode& n : nodes) ids.push_back(n.id);
    for (const QpuDevice& q : qpus) ids.push_back(q.id);
    return ids;
}

double Fabric::latency(const std::string& r1, const std::string& r2) const {
    if (!has_resource(r1)) throw std::invalid_argument("unknown resource id: " + r1);
    if (!has_resource(r2)) throw std::invalid_argument("unknown resource id: " + r2);
    if (r1 == r2) return 0.0;
    for (const Link& l : links)
        if ((l.a == r1 && l.b == r2) || (l.a == r2 && l.b == r1)) return l.latency_us;
    return default_latency_us;
}

namespace {

ClassicalNode parse_node(const Json& obj, const std::string& ctx,
                         std::vector<std::string>& errors) {
    ClassicalNode n;
    if (!require_object(obj, ctx, errors)) return n;
    reject_unknown_keys(obj, {"id", "cores", "gpus", "core_speed"}, ctx, errors);
    n.id = get_string(obj, "id", ctx, errors).value_or("");
    if (auto v = get_int(obj, "cores", ctx, errors)) {
        if (*v < 1)
            errors.push_back(ctx + ": cores must be >= 1");
        else
            n.cores = static_cast<int>(*v);
    }
    if (auto v = get_int(obj, "gpus", ctx, errors)) {
        if (*v < 0)
            errors.push_back(ctx + ": gpus must be >= 0");
        else
            n.gpus = static_cast<int>(*v);
    }
    if (auto v = get_number(obj, "core_speed", ctx, errors)) {
        if (*v <= 0)
            errors.push_back(ctx + ": core_speed must be > 0");
        else
            n.core_speed = *v;
    }
    return n;
}

QpuDevice parse_qpu(const Json& obj, const std::string& ctx, std::vector<std::string>& errors) {
    QpuDevice q;
    if (!require_object(obj, ctx, errors)) return q;
    reject_unknown_keys(obj,
                        {"id", "num_qubits", "modality", "coherence_time_us", "gate_time_1q_us",
                         "gate_time_2q_us", "readout_time_us", "shot_overhead_us",
                         "compile_overhead_us", "failure_prob"},
                        ctx, errors);
    q.id = get_string(obj, "id", ctx, errors).value_or("");
    if (auto v = get_int(obj, "num_qubits", ctx, errors)) {
        if (*v < 1)
            errors.push_back(ctx + ": num_qubits must be >= 1");
        else
            q.num_qubits = static_cast<int>(*v);
    }
    if (auto v = get_string(obj, "modality", ctx, errors)) {
        if (auto m = parse_modality(*v))
            q.modality = *m;
        else
            errors.push_back(ctx + ": unknown modality '" + *v + "'");
    }
    auto positive_time = [&](const char* key, double& field) {
        if (auto v = get_number(obj, key, ctx, errors)) {
            if (*v <= 0)
                errors.push_back(ctx + ": " + key + " must be > 0");
            else
                field = *v;
        }
    };
    positive_time("coherence_time_us", q.coherence_time_us);
    positive_time("gate_time_1q_us", q.gate_time_1q_us);
    positive_time("gate_time_2q_us", q.gate_time_2q_us);
    positive_time("readout_time_us", q.readout_time_us);
    auto nonneg_time = [&](const char* key, double& field) {
        if (auto v = get_number(obj, key, ctx, errors)) {
            if (*v < 0)
                errors.push_back(ctx + ": " + key + " must be >= 0");
            else
                field = *v;
        }
    };
    nonneg_time("shot_overhead_us", q.shot_overhead_us);
    nonneg_time("compile_overhead_us", q.compile_overhead_us);
    if (auto v = get_number(obj, "failure_prob", ctx, errors)) {
        if (*v < 0.0 || *v > 1.0)
            errors.push_back(ctx + ": failure_prob must be in [0,1]");
        else
            q.failure_prob = *v;
    }
    return q;
}

Link parse_link(const Json& obj, const std::string& ctx, std::vector<std::string>& errors) {
    Link l;
    if (!require_object(obj, ctx, errors)) return l;
    reject_unknown_keys(obj, {"a", "b", "latency_us"}, ctx, errors);
    l.a = get_string(obj, "a", ctx, errors).value_or("");
    l.b = get_string(obj, "b", ctx, errors).value_or("");
    if (auto v = get_number(obj, "latency_us", ctx, errors)) {
        if (*v < 0)
            errors.push_back(ctx + ": latency_us must be >= 0");
        else
            l.latency_us = *v;
    }
    return l;
}

}  // namespace

FabricLoadResult parse_fabric(const Json& doc) {
    FabricLoadResult result;
    std::vector<std::string>& errors = result.errors;
    if (!require_object(doc, "fabric", errors)) return result;
    reject_unknown_keys(doc, {"nodes", "qpus", "links", "default_latency_us"}, "fabric", errors);

    Fabric f;
    if (const Json* arr = get_array(doc, "nodes", "fabric", errors, false))
        for (size_t i = 0; i < arr->size(); ++i)
            f.nodes.push_back(parse_node((*arr)[i], "nodes[" + std::to_string(i) + "]", errors));
    if (const Json* arr = get_array(doc, "qpus", "fabric", errors, false))
        for (size_t i = 0; i < arr->size(); ++i)
            f.qpus.push_back(parse_qpu((*arr)[i], "qpus[" + std::to_string(i) + "]", errors));
    if (const Json* arr = get_array(doc, "links", "fabric", errors, false))
        for (size_t i = 0; i < arr->size(); ++i)
            f.links.push_back(parse_link((*arr)[i], "links[" + std::to_string(i) + "]", errors));
    if (doc.contains("default_latency_us")) {
        if (auto v = get_number(doc, "default_latency_us", "fabric", errors)) {
            if (*v < 0)
                errors.push_back("fabric: default_latency_us must be >= 0");
            else
                f.default_latency_us = *v;
        }
    }

    if (f.nodes.empty() && f.qpus.empty()) errors.push_back("fabric: no resources declared");

    std::set<std::string> seen;
    for (const std::string& id : f.resource_ids()) {
        if (id.empty()) continue;  // already reported as missing key
        if (!seen.insert(id).second) errors.push_back("fabric: duplicate id '" + id + "'");
    }
    for (const Link& l : f.links) {
        if (!l.a.empty() && !f.has_resource(l.a))
            errors.push_back("fabric: link endpoint '" + l.a + "' does not resolve");
        if (!l.b.empty() && !f.has_resource(l.b))
            errors.push_back("fabric: link endpoint '" + l.b + "' does not resolve");
        if (!l.a.empty() && l.a == l.b)
            errors.push_back("fabric: self-link on '" + l.a + "' (self-latency is always 0)");
    }

    if (errors.empty()) result.fabric = std::move(f);
    return result;
}

FabricLoadResult load_fabric_file(const std::filesystem::path& path) {
    FabricLoadResult result;
    Json doc = load_json_file(path, result.errors);
    if (!result.errors.empty()) return result;
    return parse_fabric(doc);
}

double per_shot_instruction_time_us(const QpuDevice& q, const Circuit& c) {
    double t = 0.0;
    for (const Instruction& inst : c.instructions) {
        switch (inst.kind) {
            case InstrKind::Gate:
                t += inst.gate == GateName::Cx ? q.gate_time_2q_us : q.gate_time_1q_us;
                break;
            case InstrKind::Measure:
                t += q.readout_time_us;
                break;
            case InstrKind::Barrier:
                break;
        }
    }
    return t;
}

double qpu_exec_time_us(const QpuDevice& q, const Circuit& c, std::uint64_t shots) {
    if (shots < 1) throw std::invalid_argument("shots must be >= 1");
    if (c.num_qubits > q.num_qubits)
        throw std::invalid_argument("circuit needs " + std::to_string(c.num_qubits) +
                                    " qubits but device '" + q.id + "' has " +
                                    std::to_string(q.num_qubits));
    return q.compile_overhead_us +
           static_cast<double>(shots) * (q.shot_overhead_us + per_shot_instruction_time_us(q, c));
}

bool coherence_budget_ok(const QpuDevice& q, const Circuit& c, double feedback_latency_us) {
    std::uint64_t conditioned = 0;
    for (const Instruction& inst : c.instructions)
        if (inst.condition) ++conditioned;
    const double budget = per_shot_instruction_time_us(q, c) +
                          static_cast<double>(conditioned) * 2.0 * feedback_latency_us;
    return budget <= q.coherence_time_us;
}

}  // namespace qhpc
