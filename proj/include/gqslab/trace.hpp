#pragma once

// Replayable event log of a simulation run and its JSON-lines encoding.
//
// One event per line with fields in this order:
//   time, kind, subject, payload, op_id, version
// `subject` is a process name ("a") or a channel ("a->b"). `op_id` and
// `version` are null unless the event concerns a workload operation.
//
// Event kinds: run, send, deliver, local, drop, timer, tick, crash, disconnect,
// invoke, respond, note, debug, end. A trace without a final `end` event is
// truncated.

#include "gqslab/types.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace gqslab
{

enum class TraceLevel
{
    /// Every network, timer and protocol event.
    Full,
    /// Run header, failures, operations, protocol notes and the end marker.
    Operations,
};

struct TraceEvent
{
    Time time = 0;
    std::string kind;
    std::string subject;
    Json payload;
    std::optional<std::uint64_t> op_id;
    std::optional<Version> version;

    friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

enum class StopReason
{
    /// All awaited operations responded and in-flight messages drained.
    Completed,
    /// Nothing left to process, some awaited operations still pending.
    Drained,
    MaxEvents,
    EndTime,
};

std::string_view to_string(StopReason reason);
StopReason parse_stop_reason(std::string_view name);

/// Completed and Drained runs are quiescent; budget exhaustion is not.
constexpr bool is_quiescent(StopReason r)
{
    return r == StopReason::Completed || r == StopReason::Drained;
}

struct Trace
{
    std::vector<TraceEvent> events;

    /// Header payload of the leading `run` event, or null.
    [[nodiscard]] const Json* header() const;
    /// Stop reason from the trailing `end` event; nullopt when truncated.
    [[nodiscard]] std::optional<StopReason> stop_reason() const;
};

std::string to_jsonl(const TraceEvent& e);
void write_jsonl(std::ostream& out, const Trace& trace);
std::string to_jsonl(const Trace& trace);

class TraceFormatError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Throws TraceFormatError with a 1-based line number on malformed input.
Trace read_jsonl(std::istream& in);

/// FNV-1a over the JSON-lines encoding.
std::uint64_t trace_digest(const Trace& trace);

} // namespace gqslab
