#pragma once

// Turning a scenario into simulator runs and judging the resulting traces.
// simulate, fuzz and verify all go through evaluate(), so a stored trace is
// judged exactly as it was when it was produced.

#include "gqslab/checkers.hpp"
#include "gqslab/protocols.hpp"
#include "gqslab/scenario.hpp"

#include <optional>
#include <vector>

namespace gqslab
{

struct RunOverrides
{
    std::optional<std::uint64_t> seed;
    std::optional<TimingMode> mode;
    std::optional<Time> gst;
    std::optional<Time> delta;
    std::optional<std::uint64_t> max_events;
};

/// Explicit quorums, or the first GQS find_gqs returns. Throws
/// PreconditionError when the system has none.
GeneralizedQuorumSystem scenario_quorums(const Scenario& s);

/// U_f, or nullopt when Availability fails for f.
std::optional<ProcessSet> termination_set(const FailurePattern& f, const GeneralizedQuorumSystem& gqs,
                                          const NetworkGraph& g);

struct RunPlan
{
    SimConfig config;
    ProtocolSpec spec;
    std::vector<WorkloadItem> workload;
    Json info;
};

/// The run the scenario describes. The schedule defaults to every failure of
/// the pattern at time 0; the awaited set is U_f (correct processes if undefined).
RunPlan plan_run(const Scenario& s, const RunOverrides& o = {});

/// A randomized run drawn from `run_seed`: pattern, failure times, workload,
/// and in partial synchrony the GST. Same seed, same plan.
RunPlan plan_fuzz_run(const Scenario& s, std::uint64_t run_seed, const RunOverrides& o = {});

Trace execute(const RunPlan& plan);

struct Evaluation
{
    std::vector<Verdict> verdicts;

    /// Fail if any verdict fails, else Inconclusive if any is, else Pass.
    [[nodiscard]] Outcome overall() const;
    [[nodiscard]] const Verdict* find(std::string_view check) const;
    [[nodiscard]] Json to_json() const;
};

/// Runs every checker that applies to the scenario's object on `trace`.
/// Throws TraceFormatError when the trace does not belong to the scenario.
Evaluation evaluate(const Scenario& s, const Trace& trace);

} // namespace gqslab
