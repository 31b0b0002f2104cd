#include "gqslab/cli.hpp"
#include "gqslab/rng.hpp"

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <thread>

namespace gqslab
{

std::optional<std::uint64_t> resolve_seed(std::optional<std::uint64_t> flag)
{
    if (flag)
        return flag;
    const char* env = std::getenv("GQSLAB_SEED");
    if (env == nullptr || *env == '\0')
        return std::nullopt;
    std::size_t used = 0;
    const std::string text(env);
    std::uint64_t value = 0;
    try
    {
        value = std::stoull(text, &used, 0);
    }
    catch (const std::exception&)
    {
        used = 0;
    }
    if (used != text.size() || text.front() == '-')
        throw std::invalid_argument("GQSLAB_SEED is not a 64-bit unsigned integer: '" + text + "'");
    return value;
}

namespace
{

Json names_json(const ProcessNames& names, ProcessSet s)
{
    Json out = Json::array();
    for (auto p : s)
        out.push_back(names.name(p));
    return out;
}

Json family_json(const ProcessNames& names, const QuorumFamily& family)
{
    Json out = Json::array();
    for (const auto& q : family)
        out.push_back(names_json(names, q));
    return out;
}

void print_verdicts(const Evaluation& ev, std::ostream& out)
{
    for (const auto& v : ev.verdicts)
        out << std::left << std::setw(13) << to_string(v.outcome) << std::setw(26) << v.check << v.detail << '\n';
    out << "result: " << to_string(ev.overall()) << '\n';
}

int outcome_exit(Outcome o)
{
    switch (o)
    {
    case Outcome::Pass: return exit_code::ok;
    case Outcome::Fail: return exit_code::failed;
    case Outcome::Inconclusive: return exit_code::inconclusive;
    }
    return exit_code::failed;
}

std::string override_flags(const RunOverrides& o)
{
    std::string out;
    if (o.mode)
        out += " --mode " + std::string(to_string(*o.mode));
    if (o.gst)
        out += " --gst " + std::to_string(*o.gst);
    if (o.delta)
        out += " --delta " + std::to_string(*o.delta);
    if (o.max_events)
        out += " --max-events " + std::to_string(*o.max_events);
    return out;
}

} // namespace

int cmd_check(const std::string& scenario_path, bool json, CliStreams io)
{
    Scenario s;
    try
    {
        s = load_scenario(scenario_path);
    }
    catch (const ScenarioError& e)
    {
        io.err << e.what() << '\n';
        return exit_code::usage;
    }
    const auto& names = s.names;

    Json report{{"processes", s.names.size()}, {"patterns", s.system.patterns.size()}};
    std::optional<GeneralizedQuorumSystem> gqs;
    if (s.has_quorums())
    {
        report["quorums"] = "given";
        gqs = GeneralizedQuorumSystem{s.system, *s.reads, *s.writes};
    }
    else
    {
        report["quorums"] = "search";
        gqs = find_gqs(s.system, s.graph);
    }

    if (!gqs)
    {
        report["valid"] = false;
        report["result"] = "no GQS exists";
        if (json)
            io.out << report.dump(2) << '\n';
        else
            io.out << "system: " << names.size() << " processes, " << s.system.patterns.size()
                   << " failure patterns\nquorums: searched\nresult: no GQS exists\n";
        return exit_code::failed;
    }

    const auto verdict = validate_gqs(s.system, gqs->reads, gqs->writes, s.graph);
    const bool classical = is_classical_qs(s.system, gqs->reads, gqs->writes);
    report["reads"] = family_json(names, gqs->reads);
    report["writes"] = family_json(names, gqs->writes);
    report["consistent"] = verdict.consistent;
    if (verdict.violating_pair)
        report["violating_pair"] = Json{{"read", names_json(names, gqs->reads[verdict.violating_pair->first])},
                                        {"write", names_json(names, gqs->writes[verdict.violating_pair->second])}};
    Json table = Json::array();
    for (std::size_t i = 0; i < s.system.patterns.size(); ++i)
    {
        Json row{{"pattern", s.system.patterns[i].name}};
        if (const auto& w = verdict.availability[i])
        {
            row["write"] = names_json(names, gqs->writes[w->write_index]);
            row["read"] = names_json(names, gqs->reads[w->read_index]);
        }
        else
        {
            row["write"] = nullptr;
            row["read"] = nullptr;
        }
        row["u"] = verdict.u_components[i] ? names_json(names, *verdict.u_components[i]) : Json(nullptr);
        table.push_back(row);
    }
    report["availability"] = table;
    report["classical"] = classical;
    report["valid"] = verdict.valid();
    report["result"] = verdict.valid() ? "valid GQS" : "not a GQS";

    if (json)
    {
        io.out << report.dump(2) << '\n';
        return verdict.valid() ? exit_code::ok : exit_code::failed;
    }
    io.out << "system: " << names.size() << " processes, " << s.system.patterns.size() << " failure patterns\n";
    io.out << "quorums: " << (s.has_quorums() ? "given" : "found by search") << ", " << gqs->reads.size()
           << " read, " << gqs->writes.size() << " write\n";
    if (!s.has_quorums())
    {
        for (const auto& r : gqs->reads)
            io.out << "  R " << names.format(r) << '\n';
        for (const auto& w : gqs->writes)
            io.out << "  W " << names.format(w) << '\n';
    }
    if (verdict.violating_pair)
        io.out << "consistency: FAIL, " << names.format(gqs->reads[verdict.violating_pair->first]) << " and "
               << names.format(gqs->writes[verdict.violating_pair->second]) << " are disjoint\n";
    else
        io.out << "consistency: ok\n";
    io.out << "availability:\n";
    std::size_t width = 0;
    for (const auto& f : s.system.patterns)
        width = std::max(width, f.name.size());
    for (std::size_t i = 0; i < s.system.patterns.size(); ++i)
    {
        io.out << "  " << std::left << std::setw(static_cast<int>(width + 2)) << s.system.patterns[i].name;
        if (const auto& w = verdict.availability[i])
            io.out << "W=" << std::setw(14) << names.format(gqs->writes[w->write_index]) << "R=" << std::setw(14)
                   << names.format(gqs->reads[w->read_index]);
        else
            io.out << std::setw(32) << "none";
        io.out << "U=" << (verdict.u_components[i] ? names.format(*verdict.u_components[i]) : "-") << '\n';
    }
    io.out << "classical quorum system: " << (classical ? "yes" : "no") << '\n';
    io.out << "result: " << report["result"].get<std::string>() << '\n';
    return verdict.valid() ? exit_code::ok : exit_code::failed;
}

int cmd_simulate(const std::string& scenario_path, const SimulateOptions& options, CliStreams io)
{
    Scenario s;
    RunPlan plan;
    try
    {
        s = load_scenario(scenario_path);
        const auto seed = options.overrides.seed.value_or(s.run.seed);
        plan = options.fuzz ? plan_fuzz_run(s, seed, options.overrides) : plan_run(s, options.overrides);
    }
    catch (const ScenarioError& e)
    {
        io.err << e.what() << '\n';
        return exit_code::usage;
    }
    catch (const std::logic_error& e)
    {
        io.err << scenario_path << ": " << e.what() << '\n';
        return exit_code::usage;
    }
    catch (const ModelError& e)
    {
        io.err << scenario_path << ": " << e.what() << '\n';
        return exit_code::usage;
    }

    const Trace trace = execute(plan);
    if (options.out != "-")
    {
        std::ofstream file(options.out, std::ios::binary);
        if (!file)
        {
            io.err << options.out << ": cannot write trace\n";
            return exit_code::usage;
        }
        write_jsonl(file, trace);
    }
    const Evaluation ev = evaluate(s, trace);
    if (options.json)
    {
        Json report = ev.to_json();
        report["stop"] = trace.stop_reason() ? Json(std::string(to_string(*trace.stop_reason()))) : Json(nullptr);
        report["events"] = trace.events.size();
        report["digest"] = trace_digest(trace);
        io.out << report.dump(2) << '\n';
    }
    else
    {
        io.out << "run: " << to_string(s.object) << ", pattern " << plan.config.pattern.name << ", seed "
               << plan.config.seed << ", " << trace.events.size() << " events, stopped: "
               << (trace.stop_reason() ? to_string(*trace.stop_reason()) : "truncated") << '\n';
        if (options.out != "-")
            io.out << "trace: " << options.out << '\n';
        print_verdicts(ev, io.out);
    }
    return outcome_exit(ev.overall());
}

int cmd_fuzz(const std::string& scenario_path, const FuzzOptions& options, CliStreams io)
{
    if (options.runs == 0)
    {
        io.err << "--runs must be at least 1\n";
        return exit_code::usage;
    }
    Scenario s;
    try
    {
        s = load_scenario(scenario_path);
        (void)scenario_quorums(s);
    }
    catch (const ScenarioError& e)
    {
        io.err << e.what() << '\n';
        return exit_code::usage;
    }
    catch (const PreconditionError& e)
    {
        io.err << scenario_path << ": " << e.what() << '\n';
        return exit_code::usage;
    }
    const std::uint64_t base = options.overrides.seed.value_or(s.run.seed);

    struct Result
    {
        std::uint64_t seed = 0;
        Outcome outcome = Outcome::Pass;
        std::string detail;
        std::string error;
    };
    std::vector<Result> results(options.runs);
    std::atomic<std::uint64_t> next{0};
    auto worker = [&] {
        for (std::uint64_t i = next++; i < options.runs; i = next++)
        {
            auto& r = results[i];
            r.seed = derive_seed(base, i);
            try
            {
                const auto plan = plan_fuzz_run(s, r.seed, options.overrides);
                const auto trace = execute(plan);
                const auto ev = evaluate(s, trace);
                r.outcome = ev.overall();
                for (const auto& v : ev.verdicts)
                    if (v.outcome == r.outcome && r.outcome != Outcome::Pass)
                    {
                        r.detail = v.check + ": " + v.detail;
                        break;
                    }
                if (r.outcome == Outcome::Fail && !options.out.empty())
                {
                    std::filesystem::create_directories(options.out);
                    std::ofstream file(std::filesystem::path(options.out) / ("seed-" + std::to_string(r.seed) + ".jsonl"),
                                       std::ios::binary);
                    write_jsonl(file, trace);
                }
            }
            catch (const std::exception& e)
            {
                r.outcome = Outcome::Fail;
                r.error = e.what();
            }
        }
    };
    const std::size_t jobs = std::max<std::size_t>(1, std::min<std::size_t>(options.jobs, options.runs));
    {
        std::vector<std::jthread> pool;
        for (std::size_t j = 1; j < jobs; ++j)
            pool.emplace_back(worker);
        worker();
    }

    std::uint64_t passed = 0;
    std::uint64_t inconclusive = 0;
    const Result* first_failure = nullptr;
    for (std::uint64_t i = 0; i < options.runs; ++i)
    {
        const auto& r = results[i];
        if (r.outcome == Outcome::Pass)
        {
            ++passed;
            continue;
        }
        if (r.outcome == Outcome::Inconclusive)
        {
            if (inconclusive++ == 0)
                io.out << "run " << i << " seed " << r.seed << ": INCONCLUSIVE " << r.detail
                       << " (further inconclusive runs not listed)\n";
            continue;
        }
        if (first_failure == nullptr)
            first_failure = &r;
        io.out << "run " << i << " seed " << r.seed << ": FAIL "
               << (r.error.empty() ? r.detail : "error: " + r.error) << '\n';
    }
    const auto failed = options.runs - passed - inconclusive;
    io.out << "fuzz: " << passed << "/" << options.runs << " PASS, " << inconclusive << " inconclusive, " << failed
           << " failed (base seed " << base << ")\n";
    if (first_failure == nullptr)
        return exit_code::ok;
    io.out << "repro: gqslab simulate " << scenario_path << " --fuzz --seed " << first_failure->seed
           << override_flags(options.overrides) << " --out repro.jsonl\n";
    return exit_code::failed;
}

int cmd_verify(const std::string& trace_path, const std::string& scenario_path, bool json, CliStreams io)
{
    Scenario s;
    try
    {
        s = load_scenario(scenario_path);
    }
    catch (const ScenarioError& e)
    {
        io.err << e.what() << '\n';
        return exit_code::usage;
    }
    std::ifstream in(trace_path, std::ios::binary);
    if (!in)
    {
        io.err << trace_path << ": cannot open file\n";
        return exit_code::usage;
    }
    Evaluation ev;
    try
    {
        const Trace trace = read_jsonl(in);
        ev = evaluate(s, trace);
    }
    catch (const TraceFormatError& e)
    {
        io.err << trace_path << ": " << e.what() << '\n';
        return exit_code::usage;
    }
    catch (const PreconditionError& e)
    {
        io.err << scenario_path << ": " << e.what() << '\n';
        return exit_code::usage;
    }
    catch (const ModelError& e)
    {
        io.err << trace_path << ": " << e.what() << '\n';
        return exit_code::usage;
    }
    if (json)
        io.out << ev.to_json().dump(2) << '\n';
    else
        print_verdicts(ev, io.out);
    return outcome_exit(ev.overall());
}

} // namespace gqslab
