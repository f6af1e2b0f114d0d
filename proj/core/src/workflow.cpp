#include "qhpc/workflow.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json_util.hpp"

namespace qhpc {

using namespace jsonutil;

std::string_view task_kind_str(TaskKind k) {
    switch (k) {
        case TaskKind::Classical: return "classical";
        case TaskKind::Quantum: return "quantum";
        case TaskKind::Composite: return "composite";
    }
    return "?";
}

std::string_view coupling_str(Coupling c) {
    switch (c) {
        case Coupling::Tight: return "tight";
        case Coupling::Medium: return "medium";
        case Coupling::Loose: return "loose";
    }
    return "?";
}

const TaskSpec* WorkflowSpec::find_task(const std::string& id) const {
    for (const TaskSpec& t : tasks)
        if (t.id == id) return &t;
    return nullptr;
}

const ExecutableTask* Workload::find_task(const std::string& id) const {
    for (const ExecutableTask& t : tasks)
        if (t.id == id) return &t;
    return nullptr;
}

std::vector<std::string> Workload::predecessors(const std::string& id) const {
    std::vector<std::string> out;
    for (const Edge& e : edges)
        if (e.to == id) out.push_back(e.from);
    return out;
}

std::vector<std::string> Workload::successors(const std::string& id) const {
    std::vector<std::string> out;
    for (const Edge& e : edges)
        if (e.from == id) out.push_back(e.to);
    return out;
}

std::vector<std::string> Workload::driver_tasks() const {
    std::vector<std::string> out;
    for (const ExecutableTask& t : tasks)
        if (t.is_driver) out.push_back(t.id);
    return out;
}

namespace {

ClassicalRequirements parse_classical_reqs(const Json& obj, const std::string& ctx,
                                           std::vector<std::string>& errors) {
    ClassicalRequirements r;
    if (!require_object(obj, ctx, errors)) return r;
    reject_unknown_keys(obj, {"cores", "gpus", "compute_cost_us"}, ctx, errors);
    if (auto v = get_int(obj, "cores", ctx, errors, false)) {
        if (*v < 1)
            errors.push_back(ctx + ": cores must be >= 1");
        else
            r.cores = static_cast<int>(*v);
    }
    if (auto v = get_int(obj, "gpus", ctx, errors, false)) {
        if (*v < 0)
            errors.push_back(ctx + ": gpus must be >= 0");
        else
            r.gpus = static_cast<int>(*v);
    }
    if (auto v = get_number(obj, "compute_cost_us", ctx, errors, false)) {
        if (*v < 0)
            errors.push_back(ctx + ": compute_cost_us must be >= 0");
        else
            r.compute_cost_us = *v;
    }
    return r;
}

QuantumRequirements parse_quantum_reqs(const Json& obj, const std::string& ctx,
                                       std::vector<std::string>& errors) {
    QuantumRequirements r;
    if (!require_object(obj, ctx, errors)) return r;
    reject_unknown_keys(obj, {"qpu_qubits_min", "shots"}, ctx, errors);
    if (auto v = get_int(obj, "qpu_qubits_min", ctx, errors, false)) {
        if (*v < 1)
            errors.push_back(ctx + ": qpu_qubits_min must be >= 1");
        else
            r.qpu_qubits_min = static_cast<int>(*v);
    }
    if (auto v = get_int(obj, "shots", ctx, errors, false)) {
        if (*v < 1)
            errors.push_back(ctx + ": shots must be >= 1");
        else
            r.shots = static_cast<std::uint64_t>(*v);
    }
    return r;
}

TaskSpec parse_task(const Json& obj, const std::filesystem::path& base_dir,
                    std::vector<std::string>& errors) {
    TaskSpec t;
    std::string ctx = "task";
    if (!require_object(obj, ctx, errors)) return t;
    t.id = get_string(obj, "id", ctx, errors).value_or("");
    if (!t.id.empty()) ctx = "task '" + t.id + "'";

    auto kind_str = get_string(obj, "kind", ctx, errors);
    if (!kind_str) return t;
    if (*kind_str == "classical") {
        t.kind = TaskKind::Classical;
        reject_unknown_keys(obj, {"id", "kind", "requirements", "action", "params"}, ctx, errors);
        if (obj.contains("requirements"))
            t.classical = parse_classical_reqs(obj["requirements"], ctx + ".requirements", errors);
        t.action = get_string(obj, "action", ctx, errors).value_or("");
        if (obj.contains("params")) {
            if (!obj["params"].is_object())
                errors.push_back(ctx + ": 'params' must be an object");
            else
                t.params = obj["params"];
        }
    } else if (*kind_str == "quantum") {
        t.kind = TaskKind::Quantum;
        reject_unknown_keys(obj, {"id", "kind", "requirements", "qasm", "qasm_file"}, ctx, errors);
        if (obj.contains("requirements"))
            t.quantum = parse_quantum_reqs(obj["requirements"], ctx + ".requirements", errors);
        bool inline_qasm = obj.contains("qasm");
        bool file_qasm = obj.contains("qasm_file");
        if (inline_qasm == file_qasm) {
            errors.push_back(ctx + ": quantum tasks need exactly one of 'qasm' or 'qasm_file'");
            return t;
        }
        std::string source;
        if (inline_qasm) {
            if (auto v = get_string(obj, "qasm", ctx, errors)) source = *v;
        } else if (auto rel = get_string(obj, "qasm_file", ctx, errors)) {
            std::filesystem::path p = base_dir / *rel;
            std::ifstream in(p);
            if (!in) {
                errors.push_back(ctx + ": cannot open qasm_file '" + p.string() + "'");
                return t;
            }
            std::ostringstream buf;
            buf << in.rdbuf();
            source = buf.str();
        }
        if (!source.empty()) {
            ParseResult r = parse_qasm(source, t.id);
            for (const ParseDiagnostic& d : r.diagnostics)
                if (d.severity == ParseDiagnostic::Severity::Error)
                    errors.push_back(ctx + ": " + d.str());
            if (r.ok()) {
                t.circuit = std::move(*r.circuit);
                // Declared minimum may exceed the circuit width (head-room)
                // but never undercut it.
                t.quantum.qpu_qubits_min = std::max(t.quantum.qpu_qubits_min, t.circuit.num_qubits);
            }
        }
    } else if (*kind_str == "composite") {
        t.kind = TaskKind::Composite;
        reject_unknown_keys(obj, {"id", "kind", "requirements", "template", "params"}, ctx, errors);
        if (obj.contains("requirements"))
            t.classical = parse_classical_reqs(obj["requirements"], ctx + ".requirements", errors);
        else
            t.classical.compute_cost_us = 1000.0;  // planning estimate for the driver
        t.template_name = get_string(obj, "template", ctx, errors).value_or("");
        if (obj.contains("params")) {
            if (!obj["params"].is_object())
                errors.push_back(ctx + ": 'params' must be an object");
            else
                t.params = obj["params"];
        }
    } else {
        errors.push_back(ctx + ": unknown kind '" + *kind_str + "'");
    }
    return t;
}

// Returns one cycle's member ids, or empty if the edge set is acyclic.
std::vector<std::string> find_cycle(const std::vector<std::string>& ids,
                                    const std::vector<Edge>& edges) {
    std::map<std::string, std::vector<std::string>> adj;
    for (const Edge& e : edges) adj[e.from].push_back(e.to);
    std::map<std::string, int> color;  // 0 white, 1 on stack, 2 done
    std::vector<std::string> stack;
    std::vector<std::string> cycle;

    std::function<bool(const std::string&)> dfs = [&](const std::string& u) {
        color[u] = 1;
        stack.push_back(u);
        for (const std::string& v : adj[u]) {
            if (color[v] == 1) {
                auto it = std::find(stack.begin(), stack.end(), v);
                cycle.assign(it, stack.end());
                return true;
            }
            if (color[v] == 0 && dfs(v)) return true;
        }
        stack.pop_back();
        color[u] = 2;
        return false;
    };
    for (const std::string& id : ids)
        if (color[id] == 0 && dfs(id)) return cycle;
    return {};
}

}  // namespace

WorkflowLoadResult parse_workflow(const Json& doc, const std::filesystem::path& base_dir) {
    WorkflowLoadResult result;
    std::vector<std::string>& errors = result.errors;
    if (!require_object(doc, "workflow", errors)) return result;
    reject_unknown_keys(doc, {"name", "defaults", "tasks", "edges"}, "workflow", errors);

    WorkflowSpec spec;
    spec.base_dir = base_dir;
    spec.name = get_string(doc, "name", "workflow", errors).value_or("");

    if (doc.contains("defaults")) {
        const Json& d = doc["defaults"];
        if (require_object(d, "defaults", errors)) {
            reject_unknown_keys(d, {"tight_latency_us", "medium_latency_us"}, "defaults", errors);
            if (auto v = get_number(d, "tight_latency_us", "defaults", errors, false)) {
                if (*v <= 0)
                    errors.push_back("defaults: tight_latency_us must be > 0");
                else
                    spec.defaults.tight_latency_us = *v;
            }
            if (auto v = get_number(d, "medium_latency_us", "defaults", errors, false)) {
                if (*v <= 0)
                    errors.push_back("defaults: medium_latency_us must be > 0");
                else
                    spec.defaults.medium_latency_us = *v;
            }
        }
    }

    if (const Json* arr = get_array(doc, "tasks", "workflow", errors))
        for (const Json& t : *arr) spec.tasks.push_back(parse_task(t, base_dir, errors));

    std::set<std::string> ids;
    for (const TaskSpec& t : spec.tasks) {
        if (t.id.empty()) continue;
        if (!ids.insert(t.id).second)
            errors.push_back("workflow: duplicate task id '" + t.id + "'");
    }

    if (const Json* arr = get_array(doc, "edges", "workflow", errors, false)) {
        for (size_t i = 0; i < arr->size(); ++i) {
            const Json& e = (*arr)[i];
            std::string ctx = "edges[" + std::to_string(i) + "]";
            if (!require_object(e, ctx, errors)) continue;
            reject_unknown_keys(e, {"from", "to", "coupling"}, ctx, errors);
            Edge edge;
            edge.from = get_string(e, "from", ctx, errors).value_or("");
            edge.to = get_string(e, "to", ctx, errors).value_or("");
            if (auto c = get_string(e, "coupling", ctx, errors)) {
                if (*c == "tight")
                    edge.coupling = Coupling::Tight;
                else if (*c == "medium")
                    edge.coupling = Coupling::Medium;
                else if (*c == "loose")
                    edge.coupling = Coupling::Loose;
                else
                    errors.push_back(ctx + ": unknown coupling '" + *c + "'");
            }
            if (!edge.from.empty() && !ids.count(edge.from))
                errors.push_back(ctx + ": dangling edge endpoint '" + edge.from + "'");
            if (!edge.to.empty() && !ids.count(edge.to))
                errors.push_back(ctx + ": dangling edge endpoint '" + edge.to + "'");
            if (!edge.from.empty() && edge.from == edge.to)
                errors.push_back(ctx + ": self-loop on '" + edge.from + "'");
            spec.edges.push_back(std::move(edge));
        }
    }

    if (errors.empty()) {
        std::vector<std::string> all_ids(ids.begin(), ids.end());
        std::vector<std::string> cycle = find_cycle(all_ids, spec.edges);
        if (!cycle.empty()) {
            std::string msg = "workflow: cycle detected: {";
            std::vector<std::string> sorted = cycle;
            std::sort(sorted.begin(), sorted.end());
            for (size_t i = 0; i < sorted.size(); ++i) msg += (i ? ", " : "") + sorted[i];
            errors.push_back(msg + "}");
        }
    }

    if (errors.empty()) result.spec = std::move(spec);
    return result;
}

WorkflowLoadResult load_workflow_file(const std::filesystem::path& path) {
    WorkflowLoadResult result;
    Json doc = load_json_file(path, result.errors);
    if (!result.errors.empty()) return result;
    return parse_workflow(doc, path.parent_path());
}

void TemplateRegistry::add(const std::string& name, TemplateFn fn) {
    templates_[name] = std::move(fn);
}

bool TemplateRegistry::has(const std::string& name) const { return templates_.count(name) > 0; }

const TemplateFn& TemplateRegistry::get(const std::string& name) const {
    return templates_.at(name);
}

CompileResult compile(const WorkflowSpec& spec, const TemplateRegistry& registry) {
    CompileResult result;
    std::vector<std::string>& errors = result.errors;

    Workload wl;
    wl.name = spec.name;
    wl.base_dir = spec.base_dir;

    // Composite id -> its expansion's sources / sinks for edge reattachment.
    std::map<std::string, std::vector<std::string>> sources;
    std::map<std::string, std::vector<std::string>> sinks;

    for (const TaskSpec& t : spec.tasks) {
        if (t.kind == TaskKind::Composite) {
            if (!registry.has(t.template_name)) {
                errors.push_back("task '" + t.id + "': unknown template '" + t.template_name +
                                 "'");
                continue;
            }
            ExpandedComposite exp = registry.get(t.template_name)(t, spec, errors);
            for (ExecutableTask& et : exp.tasks) wl.tasks.push_back(std::move(et));
            for (Edge& e : exp.inner_edges) wl.edges.push_back(std::move(e));
            sources[t.id] = std::move(exp.sources);
            sinks[t.id] = std::move(exp.sinks);
        } else {
            ExecutableTask et;
            et.id = t.id;
            et.kind = t.kind;
            et.classical = t.classical;
            et.quantum = t.quantum;
            et.action = t.action;
            et.params = t.params;
            et.circuit = t.circuit;
            wl.tasks.push_back(std::move(et));
            sources[t.id] = {t.id};
            sinks[t.id] = {t.id};
        }
    }

    for (const Edge& e : spec.edges) {
        for (const std::string& from : sinks[e.from])
            for (const std::string& to : sources[e.to])
                wl.edges.push_back(Edge{from, to, e.coupling});
    }

    if (!errors.empty()) return result;

    for (const Edge& e : wl.edges) {
        double bound = 0.0;
        switch (e.coupling) {
            case Coupling::Tight: bound = spec.defaults.tight_latency_us; break;
            case Coupling::Medium: bound = spec.defaults.medium_latency_us; break;
            case Coupling::Loose: continue;
        }
        wl.constraints.push_back(PlacementConstraint{{e.from, e.to}, bound});
    }

    std::vector<std::string> ids;
    std::set<std::string> seen;
    for (const ExecutableTask& t : wl.tasks) {
        ids.push_back(t.id);
        if (!seen.insert(t.id).second)
            errors.push_back("compile: duplicate expanded task id '" + t.id + "'");
        if (t.kind == TaskKind::Composite)
            errors.push_back("compile: template left composite task '" + t.id + "'");
    }
    for (const Edge& e : wl.edges) {
        if (!seen.count(e.from) || !seen.count(e.to))
            errors.push_back("compile: expansion produced dangling edge " + e.from + " -> " +
                             e.to);
    }
    if (errors.empty()) {
        std::vector<std::string> cycle = find_cycle(ids, wl.edges);
        if (!cycle.empty()) {
            std::string msg = "compile: expansion produced a cycle: {";
            std::sort(cycle.begin(), cycle.end());
            for (size_t i = 0; i < cycle.size(); ++i) msg += (i ? ", " : "") + cycle[i];
            errors.push_back(msg + "}");
        }
    }

    if (errors.empty()) result.workload = std::move(wl);
    return result;
}

std::vector<std::vector<std::string>> generations(const Workload& wl) {
    std::map<std::string, int> level;
    std::map<std::string, std::vector<std::string>> preds;
    for (const Edge& e : wl.edges) preds[e.to].push_back(e.from);

    // Longest predecessor chain; tasks are listed in an order that may not be
    // topological, so iterate to a fixed point (the DAG is small and acyclic).
    bool changed = true;
    while (changed) {
        changed = false;
        for (const ExecutableTask& t : wl.tasks) {
            int lv = 0;
            for (const std::string& p : preds[t.id]) lv = std::max(lv, level[p] + 1);
            if (level[t.id] != lv) {
                level[t.id] = lv;
                changed = true;
            }
        }
    }

    int max_level = 0;
    for (const ExecutableTask& t : wl.tasks) max_level = std::max(max_level, level[t.id]);
    std::vector<std::vector<std::string>> gens(static_cast<size_t>(max_level) + 1);
    if (wl.tasks.empty()) return {};
    for (const ExecutableTask& t : wl.tasks)
        gens[static_cast<size_t>(level[t.id])].push_back(t.id);
    for (auto& g : gens) std::sort(g.begin(), g.end());
    return gens;
}

}  // namespace qhpc
