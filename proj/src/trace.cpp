#include "gqslab/trace.hpp"

#include <istream>
#include <ostream>
#include <sstream>

namespace gqslab
{

std::string_view to_string(StopReason reason)
{
    switch (reason)
    {
    case StopReason::Completed: return "completed";
    case StopReason::Drained: return "drained";
    case StopReason::MaxEvents: return "max_events";
    case StopReason::EndTime: return "end_time";
    }
    return "?";
}

StopReason parse_stop_reason(std::string_view name)
{
    for (auto r : {StopReason::Completed, StopReason::Drained, StopReason::MaxEvents,
                   StopReason::EndTime})
        if (to_string(r) == name)
            return r;
    throw TraceFormatError("unknown stop reason '" + std::string(name) + "'");
}

const Json* Trace::header() const
{
    if (events.empty() || events.front().kind != "run")
        return nullptr;
    return &events.front().payload;
}

std::optional<StopReason> Trace::stop_reason() const
{
    if (events.empty() || events.back().kind != "end")
        return std::nullopt;
    return parse_stop_reason(events.back().payload.at("reason").get<std::string>());
}

std::string to_jsonl(const TraceEvent& e)
{
    Json line;
    line["time"] = e.time;
    line["kind"] = e.kind;
    line["subject"] = e.subject;
    line["payload"] = e.payload;
    line["op_id"] = e.op_id ? Json(*e.op_id) : Json(nullptr);
    line["version"] = e.version ? to_json(*e.version) : Json(nullptr);
    return line.dump();
}

void write_jsonl(std::ostream& out, const Trace& trace)
{
    for (const auto& e : trace.events)
        out << to_jsonl(e) << '\n';
}

std::string to_jsonl(const Trace& trace)
{
    std::ostringstream out;
    write_jsonl(out, trace);
    return out.str();
}

Trace read_jsonl(std::istream& in)
{
    Trace trace;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line))
    {
        ++number;
        if (line.empty())
            continue;
        try
        {
            const auto j = Json::parse(line);
            TraceEvent e;
            e.time = j.at("time").get<Time>();
            e.kind = j.at("kind").get<std::string>();
            e.subject = j.at("subject").get<std::string>();
            e.payload = j.at("payload");
            if (!j.at("op_id").is_null())
                e.op_id = j.at("op_id").get<std::uint64_t>();
            if (!j.at("version").is_null())
                e.version = version_from_json(j.at("version"));
            trace.events.push_back(std::move(e));
        }
        catch (const std::exception& ex)
        {
            throw TraceFormatError("trace line " + std::to_string(number) + ": " + ex.what());
        }
    }
    return trace;
}

std::uint64_t trace_digest(const Trace& trace)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& e : trace.events)
    {
        for (unsigned char c : to_jsonl(e))
        {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        h ^= '\n';
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace gqslab
