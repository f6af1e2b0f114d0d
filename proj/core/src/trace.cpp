#include "qhpc/trace.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace qhpc {

namespace {

constexpr std::pair<TraceKind, const char*> kKinds[] = {
    {TraceKind::TaskStart, "task_start"},   {TraceKind::TaskEnd, "task_end"},
    {TraceKind::TaskFail, "task_fail"},     {TraceKind::PilotAcquire, "pilot_acquire"},
    {TraceKind::PilotRelease, "pilot_release"}, {TraceKind::Bind, "bind"},
};

}  // namespace

std::string_view trace_kind_str(TraceKind k) {
    for (auto [kind, name] : kKinds)
        if (kind == k) return name;
    return "?";
}

std::optional<TraceKind> parse_trace_kind(std::string_view s) {
    for (auto [kind, name] : kKinds)
        if (s == name) return kind;
    return std::nullopt;
}

std::string_view outcome_str(RunOutcome o) {
    switch (o) {
        case RunOutcome::Success: return "success";
        case RunOutcome::Failed: return "failed";
        case RunOutcome::Unsatisfiable: return "unsatisfiable";
    }
    return "?";
}

std::optional<std::string> detail_token(const std::string& detail, std::string_view key) {
    std::string needle = std::string(key) + "=";
    size_t pos = 0;
    while (pos < detail.size()) {
        size_t end = detail.find(' ', pos);
        if (end == std::string::npos) end = detail.size();
        std::string_view tok(detail.data() + pos, end - pos);
        if (tok.substr(0, needle.size()) == needle)
            return std::string(tok.substr(needle.size()));
        pos = end + 1;
    }
    return std::nullopt;
}

Json trace_record_to_json(const TraceRecord& r) {
    Json j;
    j["kind"] = std::string(trace_kind_str(r.kind));
    j["at_us"] = r.at.us;
    if (!r.task_id.empty()) j["task"] = r.task_id;
    if (!r.resource_id.empty()) j["resource"] = r.resource_id;
    if (r.attempt > 0) j["attempt"] = r.attempt;
    if (!r.detail.empty()) j["detail"] = r.detail;
    return j;
}

std::string trace_to_jsonl(const std::vector<TraceRecord>& trace) {
    std::string out;
    for (const TraceRecord& r : trace) {
        out += trace_record_to_json(r).dump();
        out += '\n';
    }
    return out;
}

TraceParseResult parse_trace_jsonl(const std::string& text) {
    TraceParseResult result;
    std::vector<TraceRecord> records;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        Json j;
        try {
            j = Json::parse(line);
        } catch (const std::exception& e) {
            result.errors.push_back("line " + std::to_string(lineno) + ": " + e.what());
            continue;
        }
        if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string() ||
            !j.contains("at_us") || !j["at_us"].is_number()) {
            result.errors.push_back("line " + std::to_string(lineno) +
                                    ": record needs string 'kind' and numeric 'at_us'");
            continue;
        }
        auto kind = parse_trace_kind(j["kind"].get<std::string>());
        if (!kind) {
            result.errors.push_back("line " + std::to_string(lineno) + ": unknown kind '" +
                                    j["kind"].get<std::string>() + "'");
            continue;
        }
        TraceRecord r;
        r.kind = *kind;
        r.at = SimTime{j["at_us"].get<std::uint64_t>()};
        if (j.contains("task")) r.task_id = j["task"].get<std::string>();
        if (j.contains("resource")) r.resource_id = j["resource"].get<std::string>();
        if (j.contains("attempt")) r.attempt = j["attempt"].get<int>();
        if (j.contains("detail")) r.detail = j["detail"].get<std::string>();
        records.push_back(std::move(r));
    }
    if (result.errors.empty()) result.records = std::move(records);
    return result;
}

TraceParseResult load_trace_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        TraceParseResult r;
        r.errors.push_back("cannot open trace file: " + path.string());
        return r;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_trace_jsonl(buf.str());
}

RunMetrics compute_metrics(const std::vector<TraceRecord>& trace) {
    RunMetrics m;
    // open attempts: (task, attempt) -> (resource, start)
    std::map<std::pair<std::string, int>, std::pair<std::string, SimTime>> open;
    // last lifecycle record kind per task, to derive the outcome
    std::map<std::string, const TraceRecord*> last;

    for (const TraceRecord& r : trace) {
        switch (r.kind) {
            case TraceKind::TaskStart:
                open[{r.task_id, r.attempt}] = {r.resource_id, r.at};
                last[r.task_id] = &r;
                break;
            case TraceKind::TaskEnd:
            case TraceKind::TaskFail: {
                auto it = open.find({r.task_id, r.attempt});
                if (it != open.end()) {
                    auto [resource, started] = it->second;
                    if (!resource.empty())
                        m.resources[resource].busy_us += r.at.us - started.us;
                    open.erase(it);
                }
                last[r.task_id] = &r;
                if (r.kind == TraceKind::TaskEnd) {
                    m.makespan_us = std::max(m.makespan_us, r.at.us);
                    if (detail_token(r.detail, "kind") == "quantum") {
                        m.total_quantum_tasks++;
                        if (auto shots = detail_token(r.detail, "shots"))
                            m.total_shots += std::stoull(*shots);
                    }
                }
                break;
            }
            case TraceKind::PilotAcquire:
            case TraceKind::PilotRelease:
            case TraceKind::Bind:
                if (!r.resource_id.empty()) m.resources[r.resource_id];  // row exists
                break;
        }
        if (r.kind == TraceKind::TaskStart && detail_token(r.detail, "kind") == "quantum")
            m.total_circuit_evaluations++;
    }

    bool any_failed = false;
    bool any_unsat = false;
    for (const auto& [task, rec] : last) {
        if (rec->kind != TraceKind::TaskFail) continue;
        if (detail_token(rec->detail, "reason") == "unsatisfiable")
            any_unsat = true;
        else
            any_failed = true;
    }
    m.outcome = any_unsat ? RunOutcome::Unsatisfiable
                          : (any_failed ? RunOutcome::Failed : RunOutcome::Success);

    for (auto& [id, rm] : m.resources) {
        rm.utilization = m.makespan_us == 0
                             ? 0.0
                             : std::min(1.0, static_cast<double>(rm.busy_us) /
                                                 static_cast<double>(m.makespan_us));
    }
    return m;
}

Json metrics_to_json(const RunMetrics& m) {
    Json j;
    j["makespan_us"] = m.makespan_us;
    j["outcome"] = std::string(outcome_str(m.outcome));
    j["total_quantum_tasks"] = m.total_quantum_tasks;
    j["total_shots"] = m.total_shots;
    j["total_circuit_evaluations"] = m.total_circuit_evaluations;
    Json res = Json::object();
    for (const auto& [id, rm] : m.resources) {
        Json row;
        row["busy_us"] = rm.busy_us;
        row["utilization"] = rm.utilization;
        res[id] = std::move(row);
    }
    j["resources"] = std::move(res);
    return j;
}

std::string render_report(const std::vector<TraceRecord>& trace) {
    RunMetrics m = compute_metrics(trace);
    std::ostringstream out;
    out << "resource            busy_us      utilization\n";
    for (const auto& [id, rm] : m.resources) {
        out << std::left << std::setw(20) << id << std::setw(13) << rm.busy_us << std::fixed
            << std::setprecision(4) << rm.utilization << "\n";
        out.unsetf(std::ios::fixed);
        out << std::setprecision(6);
    }
    out << "\n";
    out << "makespan_us               " << m.makespan_us << "\n";
    out << "total_quantum_tasks       " << m.total_quantum_tasks << "\n";
    out << "total_shots               " << m.total_shots << "\n";
    out << "total_circuit_evaluations " << m.total_circuit_evaluations << "\n";
    out << "outcome                   " << outcome_str(m.outcome) << "\n";
    return out.str();
}

std::string render_gantt_tsv(const std::vector<TraceRecord>& trace) {
    struct Row {
        std::string task;
        std::string resource;
        std::uint64_t start = 0;
        std::uint64_t end = 0;
        int attempt = 0;
        std::string outcome;
    };
    std::map<std::pair<std::string, int>, std::pair<std::string, SimTime>> open;
    std::vector<Row> rows;
    for (const TraceRecord& r : trace) {
        if (r.kind == TraceKind::TaskStart) {
            open[{r.task_id, r.attempt}] = {r.resource_id, r.at};
        } else if (r.kind == TraceKind::TaskEnd || r.kind == TraceKind::TaskFail) {
            auto it = open.find({r.task_id, r.attempt});
            if (it == open.end()) continue;
            rows.push_back(Row{r.task_id, it->second.first, it->second.second.us, r.at.us,
                               r.attempt,
                               r.kind == TraceKind::TaskEnd ? "completed" : "failed"});
            open.erase(it);
        }
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        return std::tie(a.start, a.task, a.attempt) < std::tie(b.start, b.task, b.attempt);
    });
    std::string out = "task\tresource\tstart_us\tend_us\tattempt\toutcome\n";
    for (const Row& r : rows) {
        out += r.task + "\t" + r.resource + "\t" + std::to_string(r.start) + "\t" +
               std::to_string(r.end) + "\t" + std::to_string(r.attempt) + "\t" + r.outcome +
               "\n";
    }
    return out;
}

}  // namespace qhpc
