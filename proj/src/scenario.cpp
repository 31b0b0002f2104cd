#include "gqslab/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace gqslab
{

const FailurePattern& Scenario::pattern(std::string_view name) const
{
    for (const auto& f : system.patterns)
        if (f.name == name)
            return f;
    throw ModelError("unknown pattern '" + std::string(name) + "'");
}

const FailurePattern& Scenario::selected_pattern() const
{
    return run.pattern ? pattern(*run.pattern) : system.patterns.front();
}

namespace
{

class LineIndex
{
public:
    explicit LineIndex(std::string_view text)
    {
        starts_.push_back(0);
        for (std::size_t i = 0; i < text.size(); ++i)
            if (text[i] == '\n')
                starts_.push_back(i + 1);
    }
    [[nodiscard]] std::pair<std::size_t, std::size_t> at(std::size_t offset) const
    {
        const auto it = std::upper_bound(starts_.begin(), starts_.end(), offset);
        const auto line = static_cast<std::size_t>(it - starts_.begin());
        return {line, offset - starts_[line - 1] + 1};
    }

private:
    std::vector<std::size_t> starts_;
};

std::string pointer_escape(std::string_view key)
{
    std::string out;
    for (char c : key)
    {
        if (c == '~')
            out += "~0";
        else if (c == '/')
            out += "~1";
        else
            out += c;
    }
    return out;
}

/// Minimal scanner over text that nlohmann already accepted.
class PositionScanner
{
public:
    PositionScanner(std::string_view text, std::map<std::string, std::pair<std::size_t, std::size_t>>& out)
        : text_(text), lines_(text), out_(out)
    {
    }

    void value(const std::string& path)
    {
        skip_ws();
        if (pos_ >= text_.size())
            return;
        out_[path] = lines_.at(pos_);
        const char c = text_[pos_];
        if (c == '{')
        {
            ++pos_;
            for (;;)
            {
                skip_ws();
                if (pos_ >= text_.size() || text_[pos_] == '}')
                    break;
                const std::string key = string();
                skip_ws();
                ++pos_; // ':'
                value(path + "/" + pointer_escape(key));
                skip_ws();
                if (pos_ < text_.size() && text_[pos_] == ',')
                    ++pos_;
            }
            ++pos_;
        }
        else if (c == '[')
        {
            ++pos_;
            for (std::size_t i = 0;; ++i)
            {
                skip_ws();
                if (pos_ >= text_.size() || text_[pos_] == ']')
                    break;
                value(path + "/" + std::to_string(i));
                skip_ws();
                if (pos_ < text_.size() && text_[pos_] == ',')
                    ++pos_;
            }
            ++pos_;
        }
        else if (c == '"')
        {
            string();
        }
        else
        {
            while (pos_ < text_.size() && std::string_view(",]} \t\r\n").find(text_[pos_]) == std::string_view::npos)
                ++pos_;
        }
    }

private:
    void skip_ws()
    {
        while (pos_ < text_.size() && std::string_view(" \t\r\n").find(text_[pos_]) != std::string_view::npos)
            ++pos_;
    }
    /// Raw key text; escapes other than \" are kept verbatim, which is enough for paths.
    std::string string()
    {
        std::string out;
        ++pos_;
        while (pos_ < text_.size() && text_[pos_] != '"')
        {
            if (text_[pos_] == '\\' && pos_ + 1 < text_.size())
            {
                out += text_[pos_ + 1];
                pos_ += 2;
                continue;
            }
            out += text_[pos_++];
        }
        ++pos_;
        return out;
    }

    std::string_view text_;
    LineIndex lines_;
    std::map<std::string, std::pair<std::size_t, std::size_t>>& out_;
    std::size_t pos_ = 0;
};

class Reader
{
public:
    Reader(std::string source, std::map<std::string, std::pair<std::size_t, std::size_t>> positions)
        : source_(std::move(source)), positions_(std::move(positions))
    {
    }

    [[noreturn]] void fail(const std::string& path, const std::string& message) const
    {
        // Missing members point at the closest enclosing value.
        std::string probe = path;
        auto it = positions_.find(probe);
        while (it == positions_.end() && !probe.empty())
        {
            probe = probe.substr(0, probe.rfind('/'));
            it = positions_.find(probe);
        }
        std::string where = source_;
        if (it != positions_.end())
            where += ":" + std::to_string(it->second.first) + ":" + std::to_string(it->second.second);
        throw ScenarioError(where + ": " + (path.empty() ? "/" : path) + ": " + message);
    }

    void only(const Json& j, const std::string& path, std::initializer_list<std::string_view> allowed) const
    {
        object(j, path);
        for (const auto& [key, value] : j.items())
            if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
                fail(path + "/" + pointer_escape(key), "unknown field");
    }
    void object(const Json& j, const std::string& path) const
    {
        if (!j.is_object())
            fail(path, "expected an object");
    }
    const Json& array(const Json& j, const std::string& path) const
    {
        if (!j.is_array())
            fail(path, "expected an array");
        return j;
    }
    std::int64_t integer(const Json& j, const std::string& path, std::int64_t lo = 0) const
    {
        if (!j.is_number_integer())
            fail(path, "expected an integer");
        const auto v = j.get<std::int64_t>();
        if (v < lo)
            fail(path, "must be at least " + std::to_string(lo));
        return v;
    }
    std::uint64_t unsigned_integer(const Json& j, const std::string& path) const
    {
        if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0))
            fail(path, "expected a non-negative integer");
        return j.get<std::uint64_t>();
    }
    double number(const Json& j, const std::string& path) const
    {
        if (!j.is_number())
            fail(path, "expected a number");
        return j.get<double>();
    }
    bool boolean(const Json& j, const std::string& path) const
    {
        if (!j.is_boolean())
            fail(path, "expected true or false");
        return j.get<bool>();
    }
    std::string string(const Json& j, const std::string& path) const
    {
        if (!j.is_string())
            fail(path, "expected a string");
        return j.get<std::string>();
    }
    ProcessId process(const Json& j, const std::string& path, const ProcessNames& names) const
    {
        const auto name = string(j, path);
        try
        {
            return names.lookup(name);
        }
        catch (const ModelError& e)
        {
            fail(path, e.what());
        }
    }
    ProcessSet process_set(const Json& j, const std::string& path, const ProcessNames& names) const
    {
        ProcessSet s;
        const auto& list = array(j, path);
        for (std::size_t i = 0; i < list.size(); ++i)
        {
            const auto p = process(list[i], path + "/" + std::to_string(i), names);
            if (s.contains(p))
                fail(path + "/" + std::to_string(i), "duplicate process");
            s.insert(p);
        }
        return s;
    }
    Channel channel(const Json& j, const std::string& path, const ProcessNames& names) const
    {
        if (!j.is_array() || j.size() != 2)
            fail(path, "expected a [from, to] pair");
        return Channel{process(j[0], path + "/0", names), process(j[1], path + "/1", names)};
    }

private:
    std::string source_;
    std::map<std::string, std::pair<std::size_t, std::size_t>> positions_;
};

std::string child(const std::string& path, std::string_view key)
{
    return path + "/" + pointer_escape(key);
}

std::string item(const std::string& path, std::size_t i)
{
    return path + "/" + std::to_string(i);
}

void parse_system(const Reader& rd, const Json& j, Scenario& s)
{
    const std::string path = "/system";
    rd.only(j, path, {"processes", "patterns", "crash_up_to"});
    if (!j.contains("processes"))
        rd.fail(path, "missing field 'processes'");
    const auto& procs = j.at("processes");
    try
    {
        if (procs.is_number_integer())
        {
            const auto n = rd.integer(procs, child(path, "processes"), 1);
            if (n > static_cast<std::int64_t>(max_processes))
                rd.fail(child(path, "processes"), "at most " + std::to_string(max_processes) + " processes");
            s.names = ProcessNames(static_cast<std::size_t>(n));
        }
        else
        {
            std::vector<std::string> names;
            const auto& list = rd.array(procs, child(path, "processes"));
            for (std::size_t i = 0; i < list.size(); ++i)
                names.push_back(rd.string(list[i], item(child(path, "processes"), i)));
            if (names.empty() || names.size() > max_processes)
                rd.fail(child(path, "processes"), "needs 1.." + std::to_string(max_processes) + " processes");
            s.names = ProcessNames(std::move(names));
        }
    }
    catch (const ModelError& e)
    {
        rd.fail(child(path, "processes"), e.what());
    }
    const std::size_t n = s.names.size();
    s.system.process_count = n;
    s.graph = NetworkGraph::complete(n);

    const bool listed = j.contains("patterns");
    const bool threshold = j.contains("crash_up_to");
    if (listed == threshold)
        rd.fail(path, "give exactly one of 'patterns' or 'crash_up_to'");
    if (threshold)
    {
        const auto k = rd.integer(j.at("crash_up_to"), child(path, "crash_up_to"));
        if (static_cast<std::size_t>(k) >= n)
            rd.fail(child(path, "crash_up_to"), "must be below the process count");
        s.system.patterns.push_back(FailurePattern{"none", {}, {}});
        for (auto crash : subsets_of_size_at_least(n, 1))
            if (crash.size() <= static_cast<std::size_t>(k))
                s.system.patterns.push_back(FailurePattern{"crash" + s.names.format(crash), crash, {}});
        return;
    }
    const std::string ppath = child(path, "patterns");
    const auto& list = rd.array(j.at("patterns"), ppath);
    if (list.empty())
        rd.fail(ppath, "needs at least one pattern");
    std::set<std::string> seen;
    for (std::size_t i = 0; i < list.size(); ++i)
    {
        const std::string fpath = item(ppath, i);
        rd.only(list[i], fpath, {"name", "crash", "drop"});
        FailurePattern f;
        f.name = list[i].contains("name") ? rd.string(list[i].at("name"), child(fpath, "name"))
                                          : "f" + std::to_string(i + 1);
        if (!seen.insert(f.name).second)
            rd.fail(child(fpath, "name"), "duplicate pattern name '" + f.name + "'");
        if (list[i].contains("crash"))
            f.crashed = rd.process_set(list[i].at("crash"), child(fpath, "crash"), s.names);
        if (list[i].contains("drop"))
        {
            const auto& drops = rd.array(list[i].at("drop"), child(fpath, "drop"));
            for (std::size_t d = 0; d < drops.size(); ++d)
                if (!f.dropped.insert(rd.channel(drops[d], item(child(fpath, "drop"), d), s.names)).second)
                    rd.fail(item(child(fpath, "drop"), d), "duplicate channel");
        }
        try
        {
            validate_pattern(f, n);
        }
        catch (const ModelError& e)
        {
            rd.fail(fpath, e.what());
        }
        s.system.patterns.push_back(std::move(f));
    }
    try
    {
        s.system.validate();
    }
    catch (const ModelError& e)
    {
        rd.fail(ppath, e.what());
    }
}

void parse_quorums(const Reader& rd, const Json& j, Scenario& s)
{
    const std::string path = "/quorums";
    rd.only(j, path, {"reads", "writes", "read_min", "write_min"});
    const std::size_t n = s.names.size();
    auto family = [&](std::string_view list_key, std::string_view min_key) {
        if (j.contains(list_key) == j.contains(min_key))
            rd.fail(path, "give exactly one of '" + std::string(list_key) + "' or '" + std::string(min_key) + "'");
        QuorumFamily out;
        if (j.contains(min_key))
        {
            const auto m = rd.integer(j.at(min_key), child(path, min_key), 1);
            if (static_cast<std::size_t>(m) > n)
                rd.fail(child(path, min_key), "exceeds the process count");
            return subsets_of_size_at_least(n, static_cast<std::size_t>(m));
        }
        const std::string lpath = child(path, list_key);
        const auto& list = rd.array(j.at(list_key), lpath);
        for (std::size_t i = 0; i < list.size(); ++i)
            out.push_back(rd.process_set(list[i], item(lpath, i), s.names));
        try
        {
            validate_family(out, n, list_key);
        }
        catch (const ModelError& e)
        {
            rd.fail(lpath, e.what());
        }
        return out;
    };
    s.reads = family("reads", "read_min");
    s.writes = family("writes", "write_min");
}

void parse_run(const Reader& rd, const Json& j, Scenario& s)
{
    const std::string path = "/run";
    rd.only(j, path,
            {"mode", "gst", "delta", "pin_delays", "seed", "tick_interval", "C", "max_events", "end_time",
             "mean_delay", "adversarial", "pattern", "schedule"});
    auto& r = s.run;
    if (j.contains("mode"))
    {
        try
        {
            r.mode = parse_timing_mode(rd.string(j.at("mode"), child(path, "mode")));
        }
        catch (const std::invalid_argument& e)
        {
            rd.fail(child(path, "mode"), e.what());
        }
    }
    if (j.contains("gst"))
        r.gst = rd.integer(j.at("gst"), child(path, "gst"));
    if (j.contains("delta"))
        r.delta = rd.integer(j.at("delta"), child(path, "delta"), 1);
    if (j.contains("pin_delays"))
        r.pin_delays = rd.boolean(j.at("pin_delays"), child(path, "pin_delays"));
    if (j.contains("seed"))
        r.seed = rd.unsigned_integer(j.at("seed"), child(path, "seed"));
    if (j.contains("tick_interval"))
        r.tick_interval = rd.integer(j.at("tick_interval"), child(path, "tick_interval"), 1);
    if (j.contains("C"))
        r.view_constant = rd.integer(j.at("C"), child(path, "C"), 1);
    if (j.contains("max_events"))
        r.max_events = rd.unsigned_integer(j.at("max_events"), child(path, "max_events"));
    if (j.contains("end_time"))
        r.end_time = rd.integer(j.at("end_time"), child(path, "end_time"));
    if (j.contains("mean_delay"))
    {
        r.mean_delay = rd.number(j.at("mean_delay"), child(path, "mean_delay"));
        if (r.mean_delay <= 0)
            rd.fail(child(path, "mean_delay"), "must be positive");
    }
    if (j.contains("adversarial"))
        r.adversarial = rd.boolean(j.at("adversarial"), child(path, "adversarial"));
    if (j.contains("pattern"))
    {
        r.pattern = rd.string(j.at("pattern"), child(path, "pattern"));
        try
        {
            (void)s.pattern(*r.pattern);
        }
        catch (const ModelError& e)
        {
            rd.fail(child(path, "pattern"), e.what());
        }
    }
    if (!j.contains("schedule"))
        return;
    const std::string spath = child(path, "schedule");
    const auto& js = j.at("schedule");
    rd.only(js, spath, {"crash", "disconnect"});
    const auto& f = s.selected_pattern();
    FailureSchedule sched;
    if (js.contains("crash"))
    {
        const std::string cpath = child(spath, "crash");
        rd.object(js.at("crash"), cpath);
        for (const auto& [name, t] : js.at("crash").items())
        {
            const auto p = rd.process(Json(name), child(cpath, name), s.names);
            if (!f.crashed.contains(p))
                rd.fail(child(cpath, name), "crash outside pattern '" + f.name + "'");
            sched.crashes[p] = rd.integer(t, child(cpath, name));
        }
    }
    if (js.contains("disconnect"))
    {
        const std::string dpath = child(spath, "disconnect");
        const auto& list = rd.array(js.at("disconnect"), dpath);
        for (std::size_t i = 0; i < list.size(); ++i)
        {
            const std::string ipath = item(dpath, i);
            if (!list[i].is_array() || list[i].size() != 3)
                rd.fail(ipath, "expected [from, to, time]");
            const Channel c{rd.process(list[i][0], item(ipath, 0), s.names),
                            rd.process(list[i][1], item(ipath, 1), s.names)};
            if (!f.dropped.contains(c))
                rd.fail(ipath, "disconnect outside pattern '" + f.name + "'");
            sched.disconnects[c] = rd.integer(list[i][2], item(ipath, 2));
        }
    }
    r.schedule = std::move(sched);
}

bool op_allowed(ObjectKind object, OpKind op)
{
    switch (object)
    {
    case ObjectKind::Register: return op == OpKind::Read || op == OpKind::Write;
    case ObjectKind::Snapshot: return op == OpKind::SnapUpdate || op == OpKind::SnapScan;
    case ObjectKind::Lattice: return op == OpKind::LaPropose;
    case ObjectKind::Consensus: return op == OpKind::Propose;
    case ObjectKind::QafRaw: return op == OpKind::QuorumGet || op == OpKind::QuorumSet;
    }
    return false;
}

void parse_workload(const Reader& rd, const Json& j, Scenario& s)
{
    const std::string path = "/workload";
    const auto& list = rd.array(j, path);
    std::set<ProcessId> proposers;
    for (std::size_t i = 0; i < list.size(); ++i)
    {
        const std::string ipath = item(path, i);
        rd.only(list[i], ipath, {"time", "process", "op", "arg"});
        for (const char* key : {"time", "process", "op"})
            if (!list[i].contains(key))
                rd.fail(ipath, "missing field '" + std::string(key) + "'");
        WorkloadItem w;
        w.time = rd.integer(list[i].at("time"), child(ipath, "time"));
        w.process = rd.process(list[i].at("process"), child(ipath, "process"), s.names);
        try
        {
            w.kind = parse_op_kind(rd.string(list[i].at("op"), child(ipath, "op")));
        }
        catch (const std::invalid_argument& e)
        {
            rd.fail(child(ipath, "op"), e.what());
        }
        if (!op_allowed(s.object, w.kind))
            rd.fail(child(ipath, "op"), std::string(to_string(w.kind)) + " is not an operation of " +
                                            std::string(to_string(s.object)));
        const std::string apath = child(ipath, "arg");
        const Json arg = list[i].value("arg", Json(nullptr));
        switch (w.kind)
        {
        case OpKind::Write:
        case OpKind::SnapUpdate:
        case OpKind::Propose:
            w.arg = rd.integer(arg, apath, std::numeric_limits<std::int64_t>::min());
            break;
        case OpKind::LaPropose:
        {
            rd.array(arg, apath);
            for (std::size_t k = 0; k < arg.size(); ++k)
                rd.integer(arg[k], item(apath, k), std::numeric_limits<std::int64_t>::min());
            w.arg = Json(arg.get<std::set<std::int64_t>>());
            if (!proposers.insert(w.process).second)
                rd.fail(ipath, "lattice agreement is single-shot; one proposal per process");
            break;
        }
        default:
            if (!arg.is_null())
                rd.fail(apath, std::string(to_string(w.kind)) + " takes no argument");
            w.arg = nullptr;
        }
        s.workload.push_back(std::move(w));
    }
}

void parse_fuzz(const Reader& rd, const Json& j, Scenario& s)
{
    const std::string path = "/fuzz";
    rd.only(j, path, {"ops_per_process", "horizon", "patterns", "failure_chance", "adversarial", "gst_max"});
    auto& fz = s.fuzz;
    if (j.contains("ops_per_process"))
    {
        const std::string opath = child(path, "ops_per_process");
        const auto& range = rd.array(j.at("ops_per_process"), opath);
        if (range.size() != 2)
            rd.fail(opath, "expected [min, max]");
        fz.min_ops = static_cast<std::size_t>(rd.integer(range[0], item(opath, 0), 1));
        fz.max_ops = static_cast<std::size_t>(rd.integer(range[1], item(opath, 1), 1));
        if (fz.max_ops < fz.min_ops)
            rd.fail(opath, "max below min");
    }
    if (j.contains("horizon"))
        fz.horizon = rd.integer(j.at("horizon"), child(path, "horizon"), 1);
    if (j.contains("patterns"))
    {
        const std::string ppath = child(path, "patterns");
        const auto& list = rd.array(j.at("patterns"), ppath);
        for (std::size_t i = 0; i < list.size(); ++i)
        {
            auto name = rd.string(list[i], item(ppath, i));
            try
            {
                (void)s.pattern(name);
            }
            catch (const ModelError& e)
            {
                rd.fail(item(ppath, i), e.what());
            }
            fz.patterns.push_back(std::move(name));
        }
    }
    if (j.contains("failure_chance"))
    {
        fz.failure_chance = rd.number(j.at("failure_chance"), child(path, "failure_chance"));
        if (fz.failure_chance < 0 || fz.failure_chance > 1)
            rd.fail(child(path, "failure_chance"), "must lie in [0, 1]");
    }
    if (j.contains("adversarial"))
        fz.adversarial = rd.boolean(j.at("adversarial"), child(path, "adversarial"));
    if (j.contains("gst_max"))
        fz.gst_max = rd.integer(j.at("gst_max"), child(path, "gst_max"));
}

} // namespace

std::map<std::string, std::pair<std::size_t, std::size_t>> json_value_positions(std::string_view text)
{
    std::map<std::string, std::pair<std::size_t, std::size_t>> out;
    PositionScanner(text, out).value("");
    return out;
}

Scenario parse_scenario(std::string_view text, std::string source)
{
    Json doc;
    try
    {
        doc = Json::parse(text);
    }
    catch (const Json::parse_error& e)
    {
        const std::size_t offset = e.byte == 0 ? 0 : std::min<std::size_t>(e.byte - 1, text.size());
        const auto [line, col] = LineIndex(text).at(offset);
        std::string what = e.what();
        if (const auto cut = what.find("syntax error"); cut != std::string::npos)
            what = what.substr(cut);
        throw ScenarioError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + what);
    }
    const Reader rd(source, json_value_positions(text));
    rd.only(doc, "", {"schema", "system", "quorums", "object", "qaf", "run", "workload", "fuzz"});
    if (!doc.contains("schema"))
        rd.fail("", "missing field 'schema'");
    if (const auto schema = rd.string(doc.at("schema"), "/schema"); schema != scenario_schema)
        rd.fail("/schema", "unsupported schema '" + schema + "' (expected '" + std::string(scenario_schema) + "')");
    if (!doc.contains("system"))
        rd.fail("", "missing field 'system'");

    Scenario s;
    s.source = source;
    parse_system(rd, doc.at("system"), s);
    if (doc.contains("quorums"))
        parse_quorums(rd, doc.at("quorums"), s);
    if (doc.contains("object"))
    {
        try
        {
            s.object = parse_object_kind(rd.string(doc.at("object"), "/object"));
        }
        catch (const std::invalid_argument& e)
        {
            rd.fail("/object", e.what());
        }
    }
    if (doc.contains("qaf"))
    {
        try
        {
            s.variant = parse_qaf_variant(rd.string(doc.at("qaf"), "/qaf"));
        }
        catch (const std::invalid_argument& e)
        {
            rd.fail("/qaf", e.what());
        }
    }
    if (doc.contains("run"))
        parse_run(rd, doc.at("run"), s);
    if (doc.contains("workload"))
        parse_workload(rd, doc.at("workload"), s);
    if (doc.contains("fuzz"))
        parse_fuzz(rd, doc.at("fuzz"), s);
    return s;
}

Scenario load_scenario(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ScenarioError(path.string() + ": cannot open file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), path.string());
}

} // namespace gqslab
