#include "gqslab/runner.hpp"
#include "gqslab/consensus.hpp"
#include "gqslab/rng.hpp"

#include <algorithm>

namespace gqslab
{

GeneralizedQuorumSystem scenario_quorums(const Scenario& s)
{
    if (s.has_quorums())
        return GeneralizedQuorumSystem{s.system, *s.reads, *s.writes};
    auto found = find_gqs(s.system, s.graph);
    if (!found)
        throw PreconditionError("no GQS exists for this fail-prone system");
    return *found;
}

std::optional<ProcessSet> termination_set(const FailurePattern& f, const GeneralizedQuorumSystem& gqs,
                                          const NetworkGraph& g)
{
    try
    {
        return compute_termination_component(f, gqs, g);
    }
    catch (const PreconditionError&)
    {
        return std::nullopt;
    }
}

namespace
{

RunPlan base_plan(const Scenario& s, const RunOverrides& o)
{
    RunPlan plan;
    const auto gqs = scenario_quorums(s);
    plan.spec = ProtocolSpec{s.object, s.variant, gqs.reads, gqs.writes, s.run.view_constant};

    auto& c = plan.config;
    c.names = s.names;
    c.graph = s.graph;
    c.mode = o.mode.value_or(s.run.mode);
    c.gst = o.gst.value_or(s.run.gst);
    c.delta = o.delta.value_or(s.run.delta);
    c.pin_delays = s.run.pin_delays;
    c.mean_delay = s.run.mean_delay;
    c.adversarial = s.run.adversarial;
    c.seed = o.seed.value_or(s.run.seed);
    c.tick_interval = s.run.tick_interval;
    c.view_constant = s.run.view_constant;
    c.max_events = o.max_events.value_or(s.run.max_events);
    c.end_time = s.run.end_time;
    c.trace_level = TraceLevel::Full;

    plan.info = Json{{"object", std::string(to_string(s.object))}, {"qaf", std::string(to_string(s.variant))}};
    return plan;
}

void set_pattern(RunPlan& plan, const Scenario& s, const FailurePattern& f)
{
    plan.config.pattern = f;
    const GeneralizedQuorumSystem gqs{s.system, plan.spec.reads, plan.spec.writes};
    plan.config.await = termination_set(f, gqs, s.graph).value_or(ProcessSet::first_n(s.names.size()) - f.crashed);
}

} // namespace

RunPlan plan_run(const Scenario& s, const RunOverrides& o)
{
    RunPlan plan = base_plan(s, o);
    const auto& f = s.selected_pattern();
    set_pattern(plan, s, f);
    if (s.run.schedule)
    {
        plan.config.schedule = *s.run.schedule;
    }
    else
    {
        for (auto p : f.crashed)
            plan.config.schedule.crashes[p] = 0;
        for (const auto& ch : f.dropped)
            plan.config.schedule.disconnects[ch] = 0;
    }
    plan.workload = s.workload;
    plan.config.validate();
    return plan;
}

RunPlan plan_fuzz_run(const Scenario& s, std::uint64_t run_seed, const RunOverrides& o)
{
    RunOverrides seeded = o;
    seeded.seed = run_seed;
    RunPlan plan = base_plan(s, seeded);
    plan.config.adversarial = s.fuzz.adversarial;
    plan.info["fuzz"] = true;
    // Separate stream from the simulator's so plans and delays vary independently.
    Rng rng(splitmix64(run_seed ^ 0x6675'7a7a'706c'616eULL));

    std::vector<const FailurePattern*> candidates;
    if (s.fuzz.patterns.empty())
        for (const auto& f : s.system.patterns)
            candidates.push_back(&f);
    else
        for (const auto& name : s.fuzz.patterns)
            candidates.push_back(&s.pattern(name));
    const auto& f = *candidates[static_cast<std::size_t>(rng.uniform(0, static_cast<std::int64_t>(candidates.size()) - 1))];
    set_pattern(plan, s, f);

    const Time horizon = s.fuzz.horizon;
    for (auto p : f.crashed)
        if (rng.chance(s.fuzz.failure_chance))
            plan.config.schedule.crashes[p] = rng.uniform(0, horizon);
    for (const auto& ch : f.dropped)
        if (rng.chance(s.fuzz.failure_chance))
            plan.config.schedule.disconnects[ch] = rng.uniform(0, horizon);
    if (plan.config.mode == TimingMode::PartialSync && !o.gst)
        plan.config.gst = rng.uniform(0, s.fuzz.gst_max);

    std::int64_t next_value = 1;
    for (std::size_t i = 1; i <= s.names.size(); ++i)
    {
        const ProcessId p(static_cast<std::uint32_t>(i));
        const bool single_shot = s.object == ObjectKind::Lattice || s.object == ObjectKind::Consensus;
        const auto count = single_shot ? 1
                                       : rng.uniform(static_cast<std::int64_t>(s.fuzz.min_ops),
                                                     static_cast<std::int64_t>(s.fuzz.max_ops));
        std::vector<Time> times;
        for (std::int64_t k = 0; k < count; ++k)
            times.push_back(rng.uniform(0, horizon));
        std::sort(times.begin(), times.end());
        for (auto t : times)
        {
            WorkloadItem w{t, p, OpKind::Read, nullptr};
            const bool mutate = rng.chance(0.5);
            switch (s.object)
            {
            case ObjectKind::Register:
                w.kind = mutate ? OpKind::Write : OpKind::Read;
                if (mutate)
                    w.arg = next_value++;
                break;
            case ObjectKind::Snapshot:
                w.kind = mutate ? OpKind::SnapUpdate : OpKind::SnapScan;
                if (mutate)
                    w.arg = next_value++;
                break;
            case ObjectKind::QafRaw:
                w.kind = mutate ? OpKind::QuorumSet : OpKind::QuorumGet;
                break;
            case ObjectKind::Lattice:
            {
                w.kind = OpKind::LaPropose;
                LatticeSet x;
                const auto size = rng.uniform(1, 3);
                for (std::int64_t k = 0; k < size; ++k)
                    x.insert(rng.uniform(1, 20));
                w.arg = x;
                break;
            }
            case ObjectKind::Consensus:
                w.kind = OpKind::Propose;
                w.arg = rng.uniform(1, 1000);
                break;
            }
            plan.workload.push_back(std::move(w));
        }
    }
    plan.config.validate();
    return plan;
}

Trace execute(const RunPlan& plan)
{
    return run_simulation(plan.config, make_factory(plan.spec), plan.workload, plan.info);
}

Outcome Evaluation::overall() const
{
    Outcome out = Outcome::Pass;
    for (const auto& v : verdicts)
    {
        if (v.outcome == Outcome::Fail)
            return Outcome::Fail;
        if (v.outcome == Outcome::Inconclusive)
            out = Outcome::Inconclusive;
    }
    return out;
}

const Verdict* Evaluation::find(std::string_view check) const
{
    for (const auto& v : verdicts)
        if (v.check == check)
            return &v;
    return nullptr;
}

Json Evaluation::to_json() const
{
    Json list = Json::array();
    for (const auto& v : verdicts)
        list.push_back(v.to_json());
    return Json{{"outcome", std::string(to_string(overall()))}, {"verdicts", list}};
}

Evaluation evaluate(const Scenario& s, const Trace& trace)
{
    const Json* header = trace.header();
    if (header == nullptr)
        throw TraceFormatError("trace has no run header");
    std::vector<std::string> expected;
    for (std::size_t i = 1; i <= s.names.size(); ++i)
        expected.push_back(s.names.name(ProcessId(static_cast<std::uint32_t>(i))));
    if (header->value("processes", Json::array()) != Json(expected))
        throw TraceFormatError("trace processes differ from the scenario");
    if (const auto object = header->value("object", std::string()); object != to_string(s.object))
        throw TraceFormatError("trace is for object '" + object + "', scenario selects '" +
                               std::string(to_string(s.object)) + "'");
    const FailurePattern* f = nullptr;
    try
    {
        f = &s.pattern(header->value("pattern", std::string()));
    }
    catch (const ModelError& e)
    {
        throw TraceFormatError(e.what());
    }

    const History h = history_from_trace(trace);
    const auto gqs = scenario_quorums(s);
    Evaluation ev;
    for (auto& v : check_network(trace, *f))
        ev.verdicts.push_back(std::move(v));

    const auto u = termination_set(*f, gqs, s.graph);
    if (u)
        ev.verdicts.push_back(check_termination(h, *u, trace.stop_reason()));
    else
        ev.verdicts.push_back(Verdict::inconclusive("termination", "no termination set: Availability fails for '" +
                                                                       f->name + "'"));

    try
    {
        switch (s.object)
        {
        case ObjectKind::Register:
        {
            const auto ops = register_ops(h);
            ev.verdicts.push_back(check_linearizable_register(ops).verdict);
            ev.verdicts.push_back(check_register_versions(ops));
            break;
        }
        case ObjectKind::Snapshot:
            ev.verdicts.push_back(check_snapshot_linearizable(h));
            break;
        case ObjectKind::Lattice:
            ev.verdicts.push_back(check_lattice_agreement(h));
            break;
        case ObjectKind::QafRaw:
            ev.verdicts.push_back(check_qaf_validity(h));
            ev.verdicts.push_back(check_qaf_real_time(h));
            break;
        case ObjectKind::Consensus:
        {
            std::vector<std::int64_t> proposals;
            std::vector<std::int64_t> decisions;
            for (const auto* op : h.of_kind({OpKind::Propose}))
            {
                proposals.push_back(op->arg.get<std::int64_t>());
                if (op->complete())
                    decisions.push_back(op->result.get<std::int64_t>());
            }
            // Processes also announce decisions they reach without an operation pending.
            for (const auto& e : trace.events)
                if (e.kind == "note" && e.payload.value("what", "") == "decide")
                    decisions.push_back(e.payload.at("detail").at("value").get<std::int64_t>());
            ev.verdicts.push_back(check_consensus_safety(proposals, decisions));
            if (header->value("mode", "") == "psync" && header->value("pin_delays", false) && u)
                ev.verdicts.push_back(check_decision_latency(trace, h, *f, gqs, s.graph).verdict);
            break;
        }
        }
    }
    catch (const TraceFormatError&)
    {
        throw;
    }
    catch (const Json::exception& e)
    {
        throw TraceFormatError(std::string("malformed operation data: ") + e.what());
    }
    return ev;
}

} // namespace gqslab
