#include "qhpc/trace.hpp"

#include <doctest.h>

#include <algorithm>
#include <map>

#include "qhpc/rng.hpp"

using namespace qhpc;

namespace {

TraceRecord rec(TraceKind kind, std::uint64_t at, std::string task = "", std::string resource = "",
                int attempt = 0, std::string detail = "") {
    return TraceRecord{kind, SimTime{at}, std::move(task), std::move(resource), attempt,
                       std::move(detail)};
}

// One classical task plus a quantum task that fails once and then succeeds.
std::vector<TraceRecord> retry_trace() {
    return {
        rec(TraceKind::Bind, 0, "a", "n1"),
        rec(TraceKind::TaskStart, 0, "a", "n1", 1, "kind=classical"),
        rec(TraceKind::TaskStart, 0, "q", "qpu1", 1, "kind=quantum shots=100"),
        rec(TraceKind::TaskFail, 50, "q", "qpu1", 1, "kind=quantum reason=transient"),
        rec(TraceKind::TaskStart, 60, "q", "qpu1", 2, "kind=quantum shots=100"),
        rec(TraceKind::TaskEnd, 100, "a", "n1", 1, "kind=classical"),
        rec(TraceKind::TaskEnd, 160, "q", "qpu1", 2, "kind=quantum shots=100"),
    };
}

}  // namespace

TEST_SUITE("trace") {

TEST_CASE("kind names round-trip; unknown names are rejected") {
    for (TraceKind k : {TraceKind::TaskStart, TraceKind::TaskEnd, TraceKind::TaskFail,
                        TraceKind::PilotAcquire, TraceKind::PilotRelease, TraceKind::Bind}) {
        auto back = parse_trace_kind(trace_kind_str(k));
        REQUIRE(back.has_value());
        CHECK(*back == k);
    }
    CHECK(!parse_trace_kind("task_started").has_value());
    CHECK(!parse_trace_kind("").has_value());
}

TEST_CASE("detail_token finds whole tokens only") {
    const std::string d = "kind=quantum shots=1024 reason=transient";
    CHECK(detail_token(d, "kind") == "quantum");
    CHECK(detail_token(d, "shots") == "1024");
    CHECK(detail_token(d, "reason") == "transient");
    CHECK(!detail_token(d, "energy").has_value());
    // key must start a token, not merely occur inside one
    CHECK(detail_token("akind=x kind=y", "kind") == "y");
    CHECK(!detail_token("", "kind").has_value());
}

TEST_CASE("jsonl round-trips records and omits empty fields") {
    std::vector<TraceRecord> trace = retry_trace();
    trace.push_back(rec(TraceKind::PilotRelease, 200, "", "qpu1"));

    const std::string text = trace_to_jsonl(trace);
    TraceParseResult parsed = parse_trace_jsonl(text);
    REQUIRE(parsed.ok());
    REQUIRE(parsed.records->size() == trace.size());
    for (size_t i = 0; i < trace.size(); ++i) {
        const TraceRecord& a = trace[i];
        const TraceRecord& b = (*parsed.records)[i];
        CHECK(a.kind == b.kind);
        CHECK(a.at == b.at);
        CHECK(a.task_id == b.task_id);
        CHECK(a.resource_id == b.resource_id);
        CHECK(a.attempt == b.attempt);
        CHECK(a.detail == b.detail);
    }

    // stable key order and omitted empties, line by line
    CHECK(text.find("{\"kind\":\"bind\",\"at_us\":0,\"task\":\"a\",\"resource\":\"n1\"}") !=
          std::string::npos);
    CHECK(text.find("{\"kind\":\"pilot_release\",\"at_us\":200,\"resource\":\"qpu1\"}") !=
          std::string::npos);
    CHECK(std::count(text.begin(), text.end(), '\n') == static_cast<long>(trace.size()));
}

TEST_CASE("jsonl parse reports line numbers for malformed records") {
    const std::string text =
        "{\"kind\":\"task_start\",\"at_us\":0}\n"
        "not json\n"
        "{\"kind\":\"warp\",\"at_us\":1}\n"
        "{\"at_us\":2}\n";
    TraceParseResult parsed = parse_trace_jsonl(text);
    CHECK(!parsed.ok());
    REQUIRE(parsed.errors.size() == 3);
    CHECK(parsed.errors[0].find("line 2") != std::string::npos);
    CHECK(parsed.errors[1].find("line 3") != std::string::npos);
    CHECK(parsed.errors[1].find("warp") != std::string::npos);
    CHECK(parsed.errors[2].find("line 4") != std::string::npos);
}

TEST_CASE("metrics fold counts failed attempts as busy time") {
    RunMetrics m = compute_metrics(retry_trace());
    CHECK(m.makespan_us == 160);
    REQUIRE(m.resources.count("n1") == 1);
    REQUIRE(m.resources.count("qpu1") == 1);
    CHECK(m.resources.at("n1").busy_us == 100);
    // 50 from the failed attempt + 100 from the successful one
    CHECK(m.resources.at("qpu1").busy_us == 150);
    CHECK(m.resources.at("n1").utilization == doctest::Approx(100.0 / 160.0));
    CHECK(m.resources.at("qpu1").utilization == doctest::Approx(150.0 / 160.0));
    CHECK(m.total_quantum_tasks == 1);
    CHECK(m.total_shots == 100);
    CHECK(m.total_circuit_evaluations == 2);  // both attempts ran a circuit
    CHECK(m.outcome == RunOutcome::Success);  // the retry recovered
}

TEST_CASE("outcome comes from each task's last lifecycle record") {
    std::vector<TraceRecord> trace = {
        rec(TraceKind::TaskStart, 0, "t", "n1", 1, "kind=classical"),
        rec(TraceKind::TaskFail, 10, "t", "n1", 1, "kind=classical reason=transient terminal=1"),
    };
    CHECK(compute_metrics(trace).outcome == RunOutcome::Failed);

    trace[1].detail = "kind=classical reason=unsatisfiable";
    CHECK(compute_metrics(trace).outcome == RunOutcome::Unsatisfiable);

    // unsatisfiable wins over plain failure
    trace.push_back(rec(TraceKind::TaskStart, 20, "u", "n1", 1, "kind=classical"));
    trace.push_back(rec(TraceKind::TaskFail, 30, "u", "n1", 1, "reason=transient"));
    CHECK(compute_metrics(trace).outcome == RunOutcome::Unsatisfiable);
}

TEST_CASE("empty trace degenerates to zero metrics") {
    RunMetrics m = compute_metrics({});
    CHECK(m.makespan_us == 0);
    CHECK(m.resources.empty());
    CHECK(m.total_quantum_tasks == 0);
    CHECK(m.total_shots == 0);
    CHECK(m.total_circuit_evaluations == 0);
    CHECK(m.outcome == RunOutcome::Success);
}

TEST_CASE("metrics json mirrors the computed fold") {
    RunMetrics m = compute_metrics(retry_trace());
    Json j = metrics_to_json(m);
    CHECK(j["makespan_us"] == 160);
    CHECK(j["outcome"] == "success");
    CHECK(j["total_quantum_tasks"] == 1);
    CHECK(j["total_shots"] == 100);
    CHECK(j["total_circuit_evaluations"] == 2);
    CHECK(j["resources"]["n1"]["busy_us"] == 100);
    CHECK(j["resources"]["qpu1"]["busy_us"] == 150);
    // utilization is recomputable from the serialized numbers alone
    for (const std::string id : {"n1", "qpu1"}) {
        double busy = j["resources"][id]["busy_us"].get<double>();
        double util = j["resources"][id]["utilization"].get<double>();
        CHECK(util == doctest::Approx(busy / j["makespan_us"].get<double>()));
    }
}

TEST_CASE("report renders one row per resource plus the metrics block") {
    const std::string report = render_report(retry_trace());
    CHECK(report.find("n1") != std::string::npos);
    CHECK(report.find("qpu1") != std::string::npos);
    CHECK(report.find("makespan_us               160") != std::string::npos);
    CHECK(report.find("outcome                   success") != std::string::npos);
    // header + 2 resource rows before the blank separator line
    const size_t blank = report.find("\n\n");
    REQUIRE(blank != std::string::npos);
    CHECK(std::count(report.begin(), report.begin() + blank, '\n') == 2);
}

TEST_CASE("gantt rows are sorted by start and carry attempt outcomes") {
    const std::string tsv = render_gantt_tsv(retry_trace());
    CHECK(tsv.find("task\tresource\tstart_us\tend_us\tattempt\toutcome\n") == 0);
    CHECK(tsv.find("q\tqpu1\t0\t50\t1\tfailed") != std::string::npos);
    CHECK(tsv.find("q\tqpu1\t60\t160\t2\tcompleted") != std::string::npos);
    CHECK(tsv.find("a\tn1\t0\t100\t1\tcompleted") != std::string::npos);

    std::uint64_t prev = 0;
    size_t pos = tsv.find('\n') + 1;
    while (pos < tsv.size()) {
        size_t t1 = tsv.find('\t', pos);
        size_t t2 = tsv.find('\t', t1 + 1);
        size_t t3 = tsv.find('\t', t2 + 1);
        std::uint64_t start = std::stoull(tsv.substr(t2 + 1, t3 - t2 - 1));
        CHECK(start >= prev);
        prev = start;
        pos = tsv.find('\n', pos) + 1;
    }
}

TEST_CASE("random traces: makespan and busy sums match a direct recomputation") {
    Rng rng(20260814);
    for (int rep = 0; rep < 25; ++rep) {
        std::vector<TraceRecord> trace;
        std::map<std::string, std::uint64_t> busy;
        std::uint64_t expected_makespan = 0;
        const int tasks = 1 + static_cast<int>(rng.next_u64() % 8);
        for (int t = 0; t < tasks; ++t) {
            const std::string id = "t" + std::to_string(t);
            const std::string res = "r" + std::to_string(rng.next_u64() % 3);
            const std::uint64_t start = rng.next_u64() % 1000;
            const std::uint64_t dur = 1 + rng.next_u64() % 500;
            trace.push_back(rec(TraceKind::TaskStart, start, id, res, 1, "kind=classical"));
            trace.push_back(rec(TraceKind::TaskEnd, start + dur, id, res, 1, "kind=classical"));
            busy[res] += dur;
            expected_makespan = std::max(expected_makespan, start + dur);
        }
        std::sort(trace.begin(), trace.end(),
                  [](const TraceRecord& a, const TraceRecord& b) { return a.at < b.at; });
        RunMetrics m = compute_metrics(trace);
        CHECK(m.makespan_us == expected_makespan);
        for (const auto& [res, us] : busy) CHECK(m.resources.at(res).busy_us == us);
        CHECK(m.outcome == RunOutcome::Success);
    }
}

}  // TEST_SUITE
