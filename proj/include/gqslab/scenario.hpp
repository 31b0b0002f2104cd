#pragma once

// Scenario files: a fail-prone system, optional quorums, run parameters, the
// protocol object and a timed workload, in one JSON document.
//
//   {
//     "schema": "gqslab/1",
//     "system":   {"processes": ["a", "b"] | 3,
//                  "patterns": [{"name": "f1", "crash": ["d"], "drop": [["a", "c"]]}]
//                  | "crash_up_to": 1},
//     "quorums":  {"reads": [["a", "c"]], "writes": [["a", "b"]]}
//                 | {"read_min": 2, "write_min": 2},
//     "object":   "register" | "snapshot" | "lattice" | "consensus" | "qaf-raw",
//     "qaf":      "generalized" | "classical",
//     "run":      {"mode", "gst", "delta", "pin_delays", "seed", "tick_interval",
//                  "C", "max_events", "end_time", "mean_delay", "adversarial",
//                  "pattern", "schedule": {"crash": {"d": 0}, "disconnect": [["a", "c", 0]]}},
//     "workload": [{"time": 0, "process": "a", "op": "write", "arg": 5}],
//     "fuzz":     {"ops_per_process": [2, 6], "horizon": 200, "patterns": ["f1"],
//                  "failure_chance": 0.8, "adversarial": true, "gst_max": 300}
//   }
//
// Only "schema" and "system" are required.

#include "gqslab/gqs.hpp"
#include "gqslab/qaf.hpp"
#include "gqslab/simnet.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gqslab
{

inline constexpr std::string_view scenario_schema = "gqslab/1";

/// Carries "source:line:col: message"; path-level problems name the JSON path too.
class ScenarioError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

struct RunSection
{
    TimingMode mode = TimingMode::Async;
    Time gst = 0;
    Time delta = 5;
    bool pin_delays = false;
    std::uint64_t seed = 1;
    Time tick_interval = 5;
    Time view_constant = 50;
    std::uint64_t max_events = 2'000'000;
    std::optional<Time> end_time;
    double mean_delay = 5.0;
    bool adversarial = false;
    /// Pattern name; defaults to the first pattern of the system.
    std::optional<std::string> pattern;
    /// Defaults to every failure of the pattern at time 0.
    std::optional<FailureSchedule> schedule;
};

struct FuzzSection
{
    std::size_t min_ops = 2;
    std::size_t max_ops = 6;
    /// Invocation times and failure times fall in [0, horizon].
    Time horizon = 200;
    /// Empty means every pattern of the system.
    std::vector<std::string> patterns;
    /// Probability that a failure allowed by the pattern actually happens.
    double failure_chance = 0.8;
    bool adversarial = true;
    /// Upper bound of the random GST in partial synchrony.
    Time gst_max = 300;
};

struct Scenario
{
    std::string source;
    ProcessNames names;
    FailProneSystem system;
    NetworkGraph graph;
    std::optional<QuorumFamily> reads;
    std::optional<QuorumFamily> writes;
    ObjectKind object = ObjectKind::Register;
    QafVariant variant = QafVariant::Generalized;
    RunSection run;
    std::vector<WorkloadItem> workload;
    FuzzSection fuzz;

    [[nodiscard]] bool has_quorums() const { return reads.has_value(); }
    /// Throws ModelError for unknown names.
    [[nodiscard]] const FailurePattern& pattern(std::string_view name) const;
    [[nodiscard]] const FailurePattern& selected_pattern() const;
};

Scenario parse_scenario(std::string_view text, std::string source = "<input>");
Scenario load_scenario(const std::filesystem::path& path);

/// "line:col" of the value at each JSON pointer in `text`. Used for error
/// positions; input must already be valid JSON.
std::map<std::string, std::pair<std::size_t, std::size_t>> json_value_positions(std::string_view text);

} // namespace gqslab
