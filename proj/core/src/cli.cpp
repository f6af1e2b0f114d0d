#include "qhpc/cli.hpp"

#include <fstream>
#include <ostream>

#include "qhpc/fabric.hpp"
#include "qhpc/patterns.hpp"
#include "qhpc/runner.hpp"
#include "qhpc/trace.hpp"
#include "qhpc/workflow.hpp"

namespace qhpc {

namespace {

struct LoadedInputs {
    std::optional<Workload> workload;
    std::optional<Fabric> fabric;
    std::vector<std::string> errors;
};

LoadedInputs load_inputs(const std::filesystem::path& workflow_path,
                         const std::filesystem::path& fabric_path) {
    LoadedInputs in;
    WorkflowLoadResult wf = load_workflow_file(workflow_path);
    if (!wf.ok()) {
        in.errors.insert(in.errors.end(), wf.errors.begin(), wf.errors.end());
    } else {
        CompileResult c = compile(*wf.spec, default_registry());
        if (!c.ok())
            in.errors.insert(in.errors.end(), c.errors.begin(), c.errors.end());
        else
            in.workload = std::move(c.workload);
    }
    FabricLoadResult fb = load_fabric_file(fabric_path);
    if (!fb.ok())
        in.errors.insert(in.errors.end(), fb.errors.begin(), fb.errors.end());
    else
        in.fabric = std::move(fb.fabric);
    return in;
}

bool write_file(const std::filesystem::path& path, const std::string& content,
                std::ostream& out) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream f(path, std::ios::binary);
    f << content;
    if (!f) {
        out << "error: cannot write '" << path.string() << "'\n";
        return false;
    }
    return true;
}

}  // namespace

int cmd_validate(const std::filesystem::path& workflow_path,
                 const std::filesystem::path& fabric_path, std::ostream& out) {
    LoadedInputs in = load_inputs(workflow_path, fabric_path);
    if (!in.errors.empty()) {
        for (const std::string& e : in.errors) out << e << "\n";
        return 1;
    }
    out << "OK\n";
    return 0;
}

int cmd_run(const std::filesystem::path& workflow_path, const std::filesystem::path& fabric_path,
            const RunFlags& flags, std::ostream& out) {
    std::filesystem::path fab_path =
        flags.fabric_override.empty() ? fabric_path : flags.fabric_override;
    LoadedInputs in = load_inputs(workflow_path, fab_path);
    if (!in.errors.empty()) {
        for (const std::string& e : in.errors) out << e << "\n";
        return 1;
    }

    RunOptions opts;
    std::optional<BindingMode> mode = parse_binding_mode(flags.binding);
    if (!mode) {
        out << "error: unknown binding '" << flags.binding << "'\n";
        return 1;
    }
    opts.binding = *mode;
    opts.seed = flags.seed;
    if (flags.mode == "sampled") {
        opts.default_mode = VqeMode::Sampled;
    } else if (flags.mode != "exact") {
        out << "error: unknown mode '" << flags.mode << "'\n";
        return 1;
    }

    RunResult r = run_workload(*in.workload, *in.fabric, opts);

    // the run is over; now touch the filesystem
    for (const FileArtifact& a : r.artifacts)
        if (!write_file(a.path, a.content, out)) return 1;
    if (!flags.trace_path.empty())
        if (!write_file(flags.trace_path, trace_to_jsonl(r.trace), out)) return 1;
    if (!flags.metrics_path.empty())
        if (!write_file(flags.metrics_path, metrics_to_json(r.metrics).dump(2) + "\n", out))
            return 1;

    if (!r.diagnostic.empty()) out << r.diagnostic << "\n";
    out << "outcome=" << outcome_str(r.metrics.outcome) << " makespan_us=" << r.metrics.makespan_us
        << " tasks=" << r.metrics.total_quantum_tasks << "q\n";
    return r.exit_code;
}

int cmd_report(const std::filesystem::path& trace_path, const std::filesystem::path& gantt_path,
               std::ostream& out) {
    TraceParseResult tr = load_trace_file(trace_path);
    if (!tr.ok()) {
        for (const std::string& e : tr.errors) out << e << "\n";
        return 1;
    }
    if (!gantt_path.empty())
        if (!write_file(gantt_path, render_gantt_tsv(*tr.records), out)) return 1;
    out << render_report(*tr.records);
    return 0;
}

}  // namespace qhpc
