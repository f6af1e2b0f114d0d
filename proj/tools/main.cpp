#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qhpc/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"hybrid quantum-classical workflow runner"};
    app.require_subcommand(1);

    std::string v_workflow, v_fabric;
    CLI::App* validate = app.add_subcommand("validate", "Check a workflow/fabric pair");
    validate->add_option("WORKFLOW", v_workflow, "workflow JSON file")->required();
    validate->add_option("FABRIC", v_fabric, "fabric JSON file")->required();

    std::string r_workflow, r_fabric, r_trace, r_metrics, r_override;
    qhpc::RunFlags flags;
    CLI::App* run = app.add_subcommand("run", "Execute a workflow on a fabric");
    run->add_option("WORKFLOW", r_workflow, "workflow JSON file")->required();
    run->add_option("FABRIC", r_fabric, "fabric JSON file")->required();
    run->add_option("--binding", flags.binding, "early|late (default early)");
    run->add_option("--seed", flags.seed, "root seed for every random stream (default 0)");
    run->add_option("--mode", flags.mode, "exact|sampled expectation evaluation (default exact)");
    run->add_option("--trace", r_trace, "write the trace as JSON lines here");
    run->add_option("--metrics", r_metrics, "write run metrics as JSON here");
    run->add_option("--fabric", r_override, "run against this fabric instead of the positional");

    std::string p_trace, p_gantt;
    CLI::App* report = app.add_subcommand("report", "Summarize a stored trace");
    report->add_option("TRACE", p_trace, "trace file from a previous run")->required();
    report->add_option("--gantt", p_gantt, "also write task/resource/start/end rows here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (validate->parsed()) return qhpc::cmd_validate(v_workflow, v_fabric, std::cout);
    if (run->parsed()) {
        flags.trace_path = r_trace;
        flags.metrics_path = r_metrics;
        flags.fabric_override = r_override;
        return qhpc::cmd_run(r_workflow, r_fabric, flags, std::cout);
    }
    return qhpc::cmd_report(p_trace, p_gantt, std::cout);
}
