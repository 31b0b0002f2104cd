#pragma once

// Operation histories extracted from traces.

#include "gqslab/model.hpp"
#include "gqslab/trace.hpp"

#include <optional>
#include <string>
#include <vector>

namespace gqslab
{

struct OpRecord
{
    std::uint64_t id = 0;
    ProcessId process;
    OpKind kind = OpKind::Read;
    Json arg;
    Time invoke_time = 0;
    /// Position of the invoke event in the trace; orders real time exactly.
    std::size_t invoke_pos = 0;
    std::optional<Time> respond_time;
    std::optional<std::size_t> respond_pos;
    Json result;
    /// Version recorded with the response (register ops).
    std::optional<Version> version;
    /// Version a write chose before its set phase; available even while pending.
    std::optional<Version> chosen_version;

    [[nodiscard]] bool complete() const { return respond_pos.has_value(); }
    /// o1 precedes o2 in real time: o1 responded before o2 was invoked.
    [[nodiscard]] bool precedes(const OpRecord& other) const
    {
        return respond_pos && *respond_pos < other.invoke_pos;
    }
};

struct History
{
    ProcessNames names;
    /// Ordered by invocation.
    std::vector<OpRecord> ops;

    [[nodiscard]] std::vector<const OpRecord*> of_kind(std::initializer_list<OpKind> kinds) const;
    [[nodiscard]] const OpRecord* find(std::uint64_t id) const;
};

/// Throws TraceFormatError on a missing header, unknown process or operation
/// names, duplicate invocations, responses without an invocation, or two
/// overlapping operations at one process.
History history_from_trace(const Trace& trace);

} // namespace gqslab
