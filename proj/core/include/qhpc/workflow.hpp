#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qhpc/json.hpp"
#include "qhpc/qasm.hpp"

namespace qhpc {

enum class TaskKind { Classical, Quantum, Composite };
enum class Coupling { Tight, Medium, Loose };

std::string_view task_kind_str(TaskKind k);
std::string_view coupling_str(Coupling c);

struct ClassicalRequirements {
    int cores = 1;
    int gpus = 0;
    double compute_cost_us = 0.0;  // work at reference core speed 1.0
};

struct QuantumRequirements {
    int qpu_qubits_min = 1;
    std::uint64_t shots = 1024;
};

// One task as written in the workflow file. Exactly the payload fields of
// its kind are populated; loaders reject mixed payloads.
struct TaskSpec {
    std::string id;
    TaskKind kind = TaskKind::Classical;
    ClassicalRequirements classical;
    QuantumRequirements quantum;

    std::string action;         // classical: registered action name
    Json params;                // classical action / composite template parameters
    Circuit circuit;            // quantum: parsed from qasm / qasm_file
    std::string template_name;  // composite
};

struct Edge {
    std::string from;
    std::string to;
    Coupling coupling = Coupling::Loose;

    bool operator==(const Edge&) const = default;
};

struct WorkflowDefaults {
    double tight_latency_us = 1.0;
    double medium_latency_us = 1000.0;
};

struct WorkflowSpec {
    std::string name;
    WorkflowDefaults defaults;
    std::vector<TaskSpec> tasks;
    std::vector<Edge> edges;
    std::filesystem::path base_dir;  // qasm_file / data paths resolve against this

    const TaskSpec* find_task(const std::string& id) const;
};

// Composite-free, schedulable task.
struct ExecutableTask {
    std::string id;
    TaskKind kind = TaskKind::Classical;  // Classical or Quantum only
    bool is_driver = false;               // long-lived controller, may submit tasks
    ClassicalRequirements classical;
    QuantumRequirements quantum;
    std::string action;
    Json params;
    Circuit circuit;
};

struct PlacementConstraint {
    std::vector<std::string> members;  // >= 2 task ids
    double max_latency_us = 0.0;
};

struct Workload {
    std::string name;
    std::vector<ExecutableTask> tasks;
    std::vector<Edge> edges;
    std::vector<PlacementConstraint> constraints;
    std::filesystem::path base_dir;

    const ExecutableTask* find_task(const std::string& id) const;
    std::vector<std::string> predecessors(const std::string& id) const;
    std::vector<std::string> successors(const std::string& id) const;
    std::vector<std::string> driver_tasks() const;  // long-lived controllers
};

struct WorkflowLoadResult {
    std::optional<WorkflowSpec> spec;
    std::vector<std::string> errors;

    bool ok() const { return spec.has_value(); }
};

WorkflowLoadResult parse_workflow(const Json& doc, const std::filesystem::path& base_dir);
WorkflowLoadResult load_workflow_file(const std::filesystem::path& path);

// A template expands one composite TaskSpec into a sub-DAG. Ids must be
// namespaced as "<parent>.<child>". Sources/sinks receive the composite's
// inbound/outbound edges.
struct ExpandedComposite {
    std::vector<ExecutableTask> tasks;
    std::vector<Edge> inner_edges;
    std::vector<std::string> sources;
    std::vector<std::string> sinks;
};

using TemplateFn = std::function<ExpandedComposite(const TaskSpec&, const WorkflowSpec&,
                                                   std::vector<std::string>& errors)>;

class TemplateRegistry {
public:
    void add(const std::string& name, TemplateFn fn);
    bool has(const std::string& name) const;
    const TemplateFn& get(const std::string& name) const;

private:
    std::map<std::string, TemplateFn> templates_;
};

struct CompileResult {
    std::optional<Workload> workload;
    std::vector<std::string> errors;

    bool ok() const { return workload.has_value(); }
};

// Expands composites, reattaches edges, and turns tight/medium edges into
// PlacementConstraints at the workflow's thresholds. Deterministic: the same
// spec and registry always produce a structurally identical workload.
CompileResult compile(const WorkflowSpec& spec, const TemplateRegistry& registry);

// Topological layering: generation k holds the tasks whose longest
// predecessor chain has length k. Ids within a generation are sorted.
std::vector<std::vector<std::string>> generations(const Workload& wl);

}  // namespace qhpc
