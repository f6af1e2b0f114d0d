#pragma once

// Implementations behind the qhpc binary, split from main() so the command
// surface stays testable in-process. Each returns the process exit code and
// writes all human-facing text to the given stream.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

namespace qhpc {

struct RunFlags {
    std::string binding = "early";
    std::uint64_t seed = 0;
    std::string mode = "exact";
    std::filesystem::path trace_path;        // empty: do not write a trace file
    std::filesystem::path metrics_path;      // empty: do not write a metrics file
    std::filesystem::path fabric_override;   // empty: use the positional fabric
};

// Exit 0 and "OK" when both files parse and the workflow compiles; exit 1
// with one diagnostic per line otherwise.
int cmd_validate(const std::filesystem::path& workflow_path,
                 const std::filesystem::path& fabric_path, std::ostream& out);

// Compiles, schedules, and executes. Exit 0 on success, 1 on invalid input,
// 2 on unsatisfiable placement, 3 on runtime failure after retries. Trace,
// metrics, and task-produced files are written only after the run completes.
int cmd_run(const std::filesystem::path& workflow_path,
            const std::filesystem::path& fabric_path, const RunFlags& flags, std::ostream& out);

// Prints the per-resource table and metrics for a stored trace; exit 1 on a
// malformed file. A non-empty gantt_path also writes the tab-separated rows.
int cmd_report(const std::filesystem::path& trace_path, const std::filesystem::path& gantt_path,
               std::ostream& out);

}  // namespace qhpc
