#include "fixtures.hpp"

#include "gqslab/consensus.hpp"
#include "gqslab/lattice.hpp"
#include "gqslab/runner.hpp"
#include "gqslab/snapshot.hpp"

#include <doctest.h>

#include <algorithm>

using namespace gqslab;
using fixture::P;
using fixture::S;

namespace
{

Scenario bundled(const std::string& name)
{
    return load_scenario(std::string(GQSLAB_SCENARIO_DIR) + "/" + name + ".scenario");
}

Trace run(const Scenario& s)
{
    return execute(plan_run(s));
}

std::vector<const TraceEvent*> events(const Trace& t, std::string_view kind, std::string_view subject = {})
{
    std::vector<const TraceEvent*> out;
    for (const auto& e : t.events)
        if (e.kind == kind && (subject.empty() || e.subject == subject))
            out.push_back(&e);
    return out;
}

} // namespace

TEST_CASE("quorum_get at a under f1 reads {a,c} after a clock round on {a,b}")
{
    auto s = bundled("fig1-f1-qaf");
    s.workload = {{0, P('a'), OpKind::QuorumGet, nullptr}};
    const auto t = run(s);
    const auto responds = events(t, "respond", "a");
    REQUIRE(responds.size() == 1);
    CHECK(responds[0]->payload.at("result").at("quorum") == Json::array({"a", "c"}));

    bool clock_round = false;
    for (const auto* e : events(t, "debug", "a"))
        if (e->payload.at("what") == "c_get")
            clock_round = e->payload.at("detail").at("quorum") == Json::array({"a", "b"});
    CHECK(clock_round);

    // c never hears a's request (a->c and b->c are down, d is crashed), yet its
    // state reaches a over c->a.
    for (const auto* e : events(t, "deliver"))
        CHECK(e->subject.substr(e->subject.size() - 3) != "->c");
    bool from_c = false;
    for (const auto* e : events(t, "deliver", "c->a"))
        from_c = from_c || e->payload.at("env").at(0) == "c";
    CHECK(from_c);
}

TEST_CASE("a completed quorum_set is visible to a later quorum_get elsewhere")
{
    auto s = bundled("fig1-f1-qaf");
    s.workload = {{0, P('b'), OpKind::QuorumSet, nullptr}, {80, P('a'), OpKind::QuorumGet, nullptr}};
    const auto t = run(s);
    const auto h = history_from_trace(t);
    REQUIRE(h.ops.size() == 2);
    REQUIRE(h.ops[0].complete());
    REQUIRE(h.ops[0].precedes(h.ops[1]));
    const auto states = h.ops[1].result.at("states");
    CHECK(std::any_of(states.begin(), states.end(), [](const Json& st) {
        return std::find(st.begin(), st.end(), Json(0)) != st.end();
    }));
    CHECK(check_qaf_real_time(h).pass());
}

TEST_CASE("classical quorum access stalls at a under f1; the generalized one returns")
{
    auto s = bundled("fig1-f1-qaf");
    s.workload = {{0, P('a'), OpKind::QuorumGet, nullptr}};
    s.variant = QafVariant::Classical;
    const auto classical = evaluate(s, run(s));
    REQUIRE(classical.find("termination"));
    CHECK(classical.find("termination")->outcome == Outcome::Fail);

    s.variant = QafVariant::Generalized;
    const auto generalized = evaluate(s, run(s));
    CHECK(generalized.find("termination")->outcome == Outcome::Pass);
}

TEST_CASE("register reads return the latest completed write with its version")
{
    auto s = bundled("fig1-f1-register");
    s.workload = {{0, P('a'), OpKind::Write, 5}, {60, P('b'), OpKind::Read, nullptr}};
    const auto h = history_from_trace(run(s));
    REQUIRE(h.ops.size() == 2);
    REQUIRE(h.ops[1].complete());
    CHECK(h.ops[1].result == 5);
    CHECK(h.ops[0].version == h.ops[1].version);
    CHECK(h.ops[0].version->counter == 1);
    CHECK(h.ops[0].version->pid == P('a').value);
}

TEST_CASE("an unwritten register reads 0 at the initial version")
{
    auto s = bundled("fig1-f1-register");
    s.workload = {{0, P('b'), OpKind::Read, nullptr}};
    const auto h = history_from_trace(run(s));
    CHECK(h.ops[0].result == 0);
    CHECK(h.ops[0].version == initial_version);
}

TEST_CASE("the single-process register completes")
{
    const auto s = bundled("single-process");
    const auto ev = evaluate(s, run(s));
    CHECK(ev.overall() == Outcome::Pass);
}

TEST_CASE("snapshot scans see completed updates")
{
    auto s = bundled("fig1-f1-snapshot");
    s.workload = {{0, P('a'), OpKind::SnapUpdate, 4}, {0, P('b'), OpKind::SnapUpdate, 6},
                  {200, P('a'), OpKind::SnapScan, nullptr}};
    const auto h = history_from_trace(run(s));
    REQUIRE(h.ops[2].complete());
    CHECK(h.ops[2].result.at("values") == Json::array({4, 6, 0, 0}));
    CHECK(h.ops[2].result.at("seqs") == Json::array({1, 1, 0, 0}));
}

namespace
{

/// Every interleaving of `points` scheduling points per proposer, as sequences of proposer indices.
void interleavings(std::vector<int>& remaining, std::vector<int>& prefix, std::vector<std::vector<int>>& out)
{
    bool done = true;
    for (std::size_t i = 0; i < remaining.size(); ++i)
    {
        if (remaining[i] == 0)
            continue;
        done = false;
        --remaining[i];
        prefix.push_back(static_cast<int>(i));
        interleavings(remaining, prefix, out);
        prefix.pop_back();
        ++remaining[i];
    }
    if (done)
        out.push_back(prefix);
}

struct LaOutcome
{
    std::vector<LatticeSet> outputs;
};

/// First point invokes propose, the next two perform the update and the scan.
LaOutcome replay(const std::vector<int>& schedule, const std::vector<LatticeSet>& inputs)
{
    SteppedSnapshot<LatticeSet> mem(inputs.size(), LatticeSet{});
    std::vector<std::unique_ptr<LatticeAgreement>> la;
    for (std::size_t i = 0; i < inputs.size(); ++i)
        la.push_back(std::make_unique<LatticeAgreement>(mem.port(ProcessId(static_cast<std::uint32_t>(i + 1)))));
    LaOutcome out;
    out.outputs.resize(inputs.size());
    std::vector<bool> invoked(inputs.size(), false);
    for (int i : schedule)
    {
        const ProcessId p(static_cast<std::uint32_t>(i + 1));
        if (!invoked[static_cast<std::size_t>(i)])
        {
            invoked[static_cast<std::size_t>(i)] = true;
            la[static_cast<std::size_t>(i)]->propose(inputs[static_cast<std::size_t>(i)],
                                                     [&out, i](LatticeSet y) { out.outputs[static_cast<std::size_t>(i)] = y; });
            continue;
        }
        mem.step(p);
    }
    return out;
}

bool subset(const LatticeSet& a, const LatticeSet& b)
{
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

} // namespace

TEST_CASE("lattice agreement holds in every interleaving of two proposers")
{
    std::vector<int> remaining{3, 3};
    std::vector<int> prefix;
    std::vector<std::vector<int>> all;
    interleavings(remaining, prefix, all);
    REQUIRE(all.size() == 20);
    const std::vector<LatticeSet> inputs{{1}, {2, 3}};
    const LatticeSet top{1, 2, 3};
    for (const auto& schedule : all)
    {
        const auto r = replay(schedule, inputs);
        for (std::size_t i = 0; i < 2; ++i)
        {
            CHECK(subset(inputs[i], r.outputs[i]));
            CHECK(subset(r.outputs[i], top));
        }
        CHECK((subset(r.outputs[0], r.outputs[1]) || subset(r.outputs[1], r.outputs[0])));
    }
}

TEST_CASE("lattice agreement holds in every interleaving of three proposers")
{
    std::vector<int> remaining{3, 3, 3};
    std::vector<int> prefix;
    std::vector<std::vector<int>> all;
    interleavings(remaining, prefix, all);
    REQUIRE(all.size() == 1680);
    const std::vector<LatticeSet> inputs{{1}, {2}, {3}};
    for (const auto& schedule : all)
    {
        const auto r = replay(schedule, inputs);
        std::vector<LatticeOutcome> outcomes;
        for (std::size_t i = 0; i < 3; ++i)
            outcomes.push_back({i, inputs[i], r.outputs[i]});
        CHECK(check_lattice_agreement(inputs, outcomes).pass());
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j)
                CHECK((subset(r.outputs[i], r.outputs[j]) || subset(r.outputs[j], r.outputs[i])));
    }
}

TEST_CASE("lattice agreement is single-shot")
{
    SteppedSnapshot<LatticeSet> mem(1, LatticeSet{});
    LatticeAgreement la(mem.port(P('a')));
    la.propose({1}, [](LatticeSet) {});
    CHECK_THROWS_AS(la.propose({2}, [](LatticeSet) {}), ProtocolError);
}

TEST_CASE("stepped snapshot updates bump per-segment sequence numbers")
{
    SteppedSnapshot<std::int64_t> mem(2, 0);
    std::uint64_t seq = 0;
    mem.port(P('b')).update(9, [&](std::uint64_t k) { seq = k; });
    CHECK(mem.has_pending(P('b')));
    CHECK_THROWS_AS(mem.port(P('b')).scan([](auto) {}), std::logic_error);
    mem.step(P('b'));
    CHECK(seq == 1);
    CHECK(mem.cells()[1].value == 9);
    CHECK_THROWS_AS(mem.step(P('a')), std::logic_error);
}

TEST_CASE("leaders rotate round-robin from view 1")
{
    CHECK(leader(1, 4) == P('a'));
    CHECK(leader(4, 4) == P('d'));
    CHECK(leader(5, 4) == P('a'));
    CHECK_THROWS_AS((void)leader(0, 4), std::invalid_argument);
}

TEST_CASE("consensus under f1 with pinned delays decides within three delays")
{
    const auto s = bundled("fig1-f1-consensus");
    const auto t = run(s);
    const auto h = history_from_trace(t);
    std::map<std::string, Time> decided;
    for (const auto* e : events(t, "respond"))
        decided[e->subject] = e->time;
    REQUIRE(decided.count("a") == 1);
    REQUIRE(decided.count("b") == 1);
    // Everyone enters view 1 at 0; a leads; the budget is 3 delta over direct channels.
    CHECK(decided["a"] <= 3 * s.run.delta);
    CHECK(decided["b"] <= 3 * s.run.delta);

    const GeneralizedQuorumSystem gqs{s.system, *s.reads, *s.writes};
    CHECK(decision_budget(P('a'), s.pattern("f1"), gqs, s.graph, s.run.delta) == 3 * s.run.delta);
    const auto latency = check_decision_latency(t, h, s.pattern("f1"), gqs, s.graph);
    CHECK(latency.verdict.pass());
    CHECK(latency.view == 1);
    CHECK(latency.leader == P('a'));
    CHECK(check_consensus_safety(h).pass());
}

TEST_CASE("hop-aware budget counts relays through the residual graph")
{
    // Under f1, c reaches b only through a; a leader at b waiting on R={a,c}
    // needs 2 hops from c, then 1 out to W={a,b} and 1 back.
    const auto F = fixture::fig1_system();
    const GeneralizedQuorumSystem gqs{F, fixture::fig1_reads(), fixture::fig1_writes()};
    CHECK(decision_budget(P('b'), F.patterns[0], gqs, NetworkGraph::complete(4), 5) == 5 * (2 + 1 + 1));
}

TEST_CASE("consensus messages name their phase")
{
    ConsensusMessage m;
    CHECK(m.kind() == "1B");
    CHECK(m.to_json().at("x").is_null());
    m.type = ConsensusMessage::Type::TwoB;
    m.view = 2;
    m.x = 5;
    CHECK(m.kind() == "2B");
    CHECK(m.to_json() == Json{{"view", 2}, {"x", 5}});
}
