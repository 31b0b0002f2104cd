#include "gqslab/history.hpp"

#include <algorithm>
#include <map>

namespace gqslab
{

std::vector<const OpRecord*> History::of_kind(std::initializer_list<OpKind> kinds) const
{
    std::vector<const OpRecord*> out;
    for (const auto& op : ops)
        if (std::find(kinds.begin(), kinds.end(), op.kind) != kinds.end())
            out.push_back(&op);
    return out;
}

const OpRecord* History::find(std::uint64_t id) const
{
    for (const auto& op : ops)
        if (op.id == id)
            return &op;
    return nullptr;
}

History history_from_trace(const Trace& trace)
{
    const Json* header = trace.header();
    if (header == nullptr || !header->contains("processes"))
        throw TraceFormatError("trace has no run header");
    History h;
    try
    {
        h.names = ProcessNames(header->at("processes").get<std::vector<std::string>>());
    }
    catch (const std::exception& e)
    {
        throw TraceFormatError(std::string("bad process list in header: ") + e.what());
    }

    std::map<std::uint64_t, std::size_t> index;
    std::map<ProcessId, std::uint64_t> open;
    std::map<std::uint64_t, Version> chosen;
    for (std::size_t pos = 0; pos < trace.events.size(); ++pos)
    {
        const auto& e = trace.events[pos];
        try
        {
            if (e.kind == "invoke")
            {
                if (!e.op_id)
                    throw TraceFormatError("invoke without op_id");
                const auto id = *e.op_id;
                const ProcessId p = h.names.lookup(e.subject);
                if (index.count(id) != 0)
                    throw TraceFormatError("operation " + std::to_string(id) + " invoked twice");
                if (open.count(p) != 0)
                    throw TraceFormatError("process " + e.subject + " invoked while busy");
                OpRecord op;
                op.id = id;
                op.process = p;
                op.kind = parse_op_kind(e.payload.at("op").get<std::string>());
                op.arg = e.payload.value("arg", Json(nullptr));
                op.invoke_time = e.time;
                op.invoke_pos = pos;
                index[id] = h.ops.size();
                open[p] = id;
                h.ops.push_back(std::move(op));
            }
            else if (e.kind == "respond")
            {
                if (!e.op_id || index.count(*e.op_id) == 0)
                    throw TraceFormatError("response without a matching invocation");
                auto& op = h.ops[index[*e.op_id]];
                if (op.complete())
                    throw TraceFormatError("operation " + std::to_string(op.id) + " responded twice");
                if (h.names.lookup(e.subject) != op.process)
                    throw TraceFormatError("response at a different process");
                op.respond_time = e.time;
                op.respond_pos = pos;
                op.result = e.payload.value("result", Json(nullptr));
                op.version = e.version;
                open.erase(op.process);
            }
            else if (e.kind == "note" && e.payload.value("what", "") == "tau")
            {
                const auto& d = e.payload.at("detail");
                chosen[d.at("op").get<std::uint64_t>()] = version_from_json(d.at("t"));
            }
        }
        catch (const TraceFormatError& ex)
        {
            throw TraceFormatError("event " + std::to_string(pos + 1) + ": " + ex.what());
        }
        catch (const std::exception& ex)
        {
            throw TraceFormatError("event " + std::to_string(pos + 1) + ": " + ex.what());
        }
    }
    for (auto& op : h.ops)
        if (auto it = chosen.find(op.id); it != chosen.end())
            op.chosen_version = it->second;
    return h;
}

} // namespace gqslab
