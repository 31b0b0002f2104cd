#include "fixtures.hpp"

#include "gqslab/checkers.hpp"
#include "gqslab/rng.hpp"
#include "gqslab/runner.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>

using namespace gqslab;
using fixture::P;
using fixture::S;

namespace
{

RegisterOp w(std::uint64_t id, char p, std::int64_t value, std::size_t inv, std::size_t resp, std::uint64_t counter)
{
    return RegisterOp{id, P(p), true, value, inv, resp, Version{counter, P(p).value}};
}

RegisterOp r(std::uint64_t id, char p, std::int64_t value, std::size_t inv, std::size_t resp, Version tau)
{
    return RegisterOp{id, P(p), false, value, inv, resp, tau};
}

/// Tries every permutation: real time respected, each read returns the latest write before it.
bool brute_linearizable(const std::vector<RegisterOp>& ops)
{
    std::vector<std::size_t> order(ops.size());
    std::iota(order.begin(), order.end(), 0);
    do
    {
        bool ok = true;
        std::int64_t value = 0;
        for (std::size_t i = 0; i < order.size() && ok; ++i)
        {
            const auto& o = ops[order[i]];
            for (std::size_t j = i + 1; j < order.size() && ok; ++j)
                ok = !ops[order[j]].precedes(o);
            if (o.is_write)
                value = o.value;
            else
                ok = ok && o.value == value;
        }
        if (ok)
            return true;
    } while (std::next_permutation(order.begin(), order.end()));
    return false;
}

} // namespace

TEST_CASE("a read after a completed write that returns it is linearizable")
{
    const std::vector<RegisterOp> ops{w(0, 'a', 5, 0, 1, 1), r(1, 'b', 5, 2, 3, {1, 1})};
    const auto rep = check_linearizable_register(ops);
    CHECK(rep.verdict.pass());
    CHECK(rep.fast_path.pass());
    CHECK(rep.oracle == Outcome::Pass);
    CHECK_FALSE(rep.disagreement);
}

TEST_CASE("a stale read yields a real-time and anti-dependency cycle")
{
    const std::vector<RegisterOp> ops{w(0, 'a', 1, 0, 1, 1), w(1, 'b', 2, 2, 3, 2), r(2, 'c', 1, 4, 5, {1, 1})};
    const auto rep = check_linearizable_register(ops);
    CHECK(rep.verdict.outcome == Outcome::Fail);
    CHECK(rep.oracle == Outcome::Fail);
    const auto& cycle = rep.fast_path.witness.at("cycle");
    REQUIRE(cycle.size() == 2);
    std::vector<std::string> kinds;
    for (const auto& e : cycle)
        kinds.push_back(e.at("edge").get<std::string>());
    std::sort(kinds.begin(), kinds.end());
    CHECK(kinds == std::vector<std::string>{"rt", "rw"});
}

TEST_CASE("a read of a value nobody wrote fails")
{
    const std::vector<RegisterOp> ops{w(0, 'a', 1, 0, 1, 1), r(1, 'b', 9, 2, 3, {1, 1})};
    const auto v = check_register_dependency_graph(ops);
    CHECK(v.outcome == Outcome::Fail);
    CHECK(v.detail.find("9") != std::string::npos);
}

TEST_CASE("a read without a version is inconclusive on the fast path")
{
    auto ops = std::vector<RegisterOp>{w(0, 'a', 1, 0, 1, 1), r(1, 'b', 1, 2, 3, {1, 1})};
    ops[1].tau.reset();
    CHECK(check_register_dependency_graph(ops).outcome == Outcome::Inconclusive);
}

TEST_CASE("versions must grow along real time")
{
    CHECK(check_register_versions({w(0, 'a', 1, 0, 1, 1), w(1, 'b', 2, 2, 3, 2)}).pass());
    CHECK_FALSE(check_register_versions({w(0, 'a', 1, 0, 1, 2), w(1, 'b', 2, 2, 3, 1)}).pass());
    // A read after a write must not go backwards; equal is fine.
    CHECK(check_register_versions({w(0, 'a', 1, 0, 1, 1), r(1, 'b', 1, 2, 3, {1, 1})}).pass());
    CHECK_FALSE(check_register_versions({w(0, 'a', 1, 0, 1, 1), r(1, 'b', 0, 2, 3, initial_version)}).pass());
}

TEST_CASE("register checker agrees with brute force on random small histories")
{
    Rng rng(21);
    int fails = 0;
    for (int round = 0; round < 400; ++round)
    {
        const auto n = static_cast<std::size_t>(rng.uniform(2, 6));
        // Random intervals over 2n positions.
        std::vector<std::size_t> pos(2 * n);
        std::iota(pos.begin(), pos.end(), 0);
        for (std::size_t i = pos.size(); i > 1; --i)
            std::swap(pos[i - 1], pos[static_cast<std::size_t>(rng.uniform(0, static_cast<std::int64_t>(i) - 1))]);
        std::vector<RegisterOp> ops;
        std::int64_t next_value = 1;
        for (std::size_t i = 0; i < n; ++i)
        {
            RegisterOp o;
            o.id = i;
            o.process = ProcessId(static_cast<std::uint32_t>(i + 1));
            o.invoke_pos = std::min(pos[2 * i], pos[2 * i + 1]);
            o.respond_pos = std::max(pos[2 * i], pos[2 * i + 1]);
            o.is_write = rng.chance(0.5);
            if (o.is_write)
                o.value = next_value++;
            ops.push_back(o);
        }
        // Writes get distinct counters in random order; reads pick any write or the initial value.
        std::vector<std::size_t> writes;
        for (std::size_t i = 0; i < n; ++i)
            if (ops[i].is_write)
                writes.push_back(i);
        for (std::size_t k = writes.size(); k > 1; --k)
            std::swap(writes[k - 1], writes[static_cast<std::size_t>(rng.uniform(0, static_cast<std::int64_t>(k) - 1))]);
        for (std::size_t k = 0; k < writes.size(); ++k)
            ops[writes[k]].tau = Version{k + 1, ops[writes[k]].process.value};
        for (auto& o : ops)
        {
            if (o.is_write)
                continue;
            const auto pick = rng.uniform(-1, static_cast<std::int64_t>(writes.size()) - 1);
            if (pick < 0)
            {
                o.value = 0;
                o.tau = initial_version;
            }
            else
            {
                o.value = ops[writes[static_cast<std::size_t>(pick)]].value;
                o.tau = ops[writes[static_cast<std::size_t>(pick)]].tau;
            }
        }
        std::sort(ops.begin(), ops.end(), [](const auto& a, const auto& b) { return a.invoke_pos < b.invoke_pos; });

        const bool want = brute_linearizable(ops);
        const auto rep = check_linearizable_register(ops);
        CAPTURE(round);
        CHECK(rep.verdict.pass() == want);
        CHECK(rep.oracle == (want ? Outcome::Pass : Outcome::Fail));
        // The fast path never accepts a history that brute force rejects.
        if (rep.fast_path.pass())
            CHECK(want);
        CHECK(register_linearization(ops).has_value() == want);
        fails += want ? 0 : 1;
    }
    CHECK(fails > 0);
}

TEST_CASE("sub-histories are bounded and closed under reads-from")
{
    std::vector<RegisterOp> ops;
    for (std::uint64_t i = 0; i < 12; ++i)
        ops.push_back(w(2 * i, 'a', static_cast<std::int64_t>(i + 1), 4 * i, 4 * i + 1, i + 1));
    for (std::uint64_t i = 0; i < 12; ++i)
        ops.push_back(r(2 * i + 1, 'b', static_cast<std::int64_t>(i + 1), 4 * i + 2, 4 * i + 3, {i + 1, 1}));
    std::sort(ops.begin(), ops.end(), [](const auto& a, const auto& b) { return a.invoke_pos < b.invoke_pos; });
    const auto windows = register_subhistories(ops, 4);
    CHECK_FALSE(windows.empty());
    for (const auto& win : windows)
    {
        CHECK(win.size() <= 4);
        for (const auto& o : win)
        {
            if (o.is_write || o.value == 0)
                continue;
            CHECK(std::any_of(win.begin(), win.end(), [&](const auto& x) { return x.is_write && x.value == o.value; }));
        }
    }
}

namespace
{

SnapshotOp update(std::uint64_t id, char p, std::int64_t v, std::uint64_t seq, std::size_t inv, std::size_t resp)
{
    SnapshotOp o;
    o.id = id;
    o.process = P(p);
    o.is_update = true;
    o.value = v;
    o.seq = seq;
    o.invoke_pos = inv;
    o.respond_pos = resp;
    return o;
}

SnapshotOp scan(std::uint64_t id, char p, std::vector<std::int64_t> values, std::vector<std::uint64_t> seqs,
                std::size_t inv, std::size_t resp)
{
    SnapshotOp o;
    o.id = id;
    o.process = P(p);
    o.values = std::move(values);
    o.seqs = std::move(seqs);
    o.invoke_pos = inv;
    o.respond_pos = resp;
    return o;
}

} // namespace

TEST_CASE("snapshot containment accepts consistent scans and rejects stale or incomparable ones")
{
    const auto u1 = update(0, 'a', 4, 1, 0, 1);
    CHECK(check_snapshot_containment({u1, scan(1, 'b', {4, 0}, {1, 0}, 2, 3)}, 2).pass());
    CHECK_FALSE(check_snapshot_containment({u1, scan(1, 'b', {0, 0}, {0, 0}, 2, 3)}, 2).pass());
    CHECK_FALSE(check_snapshot_containment({u1, scan(1, 'b', {7, 0}, {1, 0}, 2, 3)}, 2).pass());

    // Concurrent updates; two scans each see a different one.
    const auto ua = update(0, 'a', 4, 1, 0, 9);
    const auto ub = update(1, 'b', 6, 1, 1, 9);
    const auto s1 = scan(2, 'c', {4, 0, 0}, {1, 0, 0}, 2, 5);
    const auto s2 = scan(3, 'c', {0, 6, 0}, {0, 1, 0}, 6, 8);
    CHECK_FALSE(check_snapshot_containment({ua, ub, s1, s2}, 3).pass());
    CHECK_FALSE(check_snapshot_linearizable({ua, ub, s1, s2}, 3).pass());
    CHECK(check_snapshot_linearizable({ua, ub, s1, scan(3, 'c', {4, 6, 0}, {1, 1, 0}, 6, 8)}, 3).pass());
}

TEST_CASE("lattice agreement rejects incomparable, shrinking and invented outputs")
{
    const std::vector<LatticeSet> in{{1}, {2}};
    CHECK(check_lattice_agreement(in, {{0, {1}, {1}}, {1, {2}, {1, 2}}}).pass());
    CHECK_FALSE(check_lattice_agreement(in, {{0, {1}, {1}}, {1, {2}, {2}}}).pass());
    CHECK_FALSE(check_lattice_agreement(in, {{0, {1}, {}}}).pass());
    CHECK_FALSE(check_lattice_agreement(in, {{0, {1}, {1, 3}}}).pass());
}

TEST_CASE("consensus safety rejects split and invented decisions")
{
    CHECK(check_consensus_safety({3, 4}, {4, 4}).pass());
    CHECK_FALSE(check_consensus_safety({3, 4}, {3, 4}).pass());
    CHECK_FALSE(check_consensus_safety({3, 4}, {5}).pass());
}

namespace
{

OpRecord qop(std::uint64_t id, char p, OpKind kind, std::size_t inv, std::size_t resp, Json result = nullptr)
{
    OpRecord o;
    o.id = id;
    o.process = P(p);
    o.kind = kind;
    o.invoke_time = static_cast<Time>(inv);
    o.invoke_pos = inv;
    o.respond_time = static_cast<Time>(resp);
    o.respond_pos = resp;
    o.result = std::move(result);
    return o;
}

} // namespace

TEST_CASE("quorum_get must reflect every earlier completed quorum_set")
{
    History h{fixture::names(), {}};
    h.ops = {qop(0, 'b', OpKind::QuorumSet, 0, 1),
             qop(1, 'a', OpKind::QuorumGet, 2, 3, Json{{"quorum", {"a", "c"}}, {"states", {{0}, Json::array()}}})};
    CHECK(check_qaf_real_time(h).pass());
    CHECK(check_qaf_validity(h).pass());
    h.ops[1].result["states"] = {Json::array(), Json::array()};
    CHECK_FALSE(check_qaf_real_time(h).pass());
    h.ops[1].result["states"] = {{0, 0}};
    CHECK_FALSE(check_qaf_validity(h).pass());
    h.ops[1].result["states"] = {{7}};
    CHECK_FALSE(check_qaf_validity(h).pass());
}

TEST_CASE("termination is inconclusive without a quiescent end")
{
    History h{fixture::names(), {qop(0, 'a', OpKind::Read, 0, 1)}};
    h.ops[0].respond_pos.reset();
    CHECK(check_termination(h, S("a"), StopReason::Completed).outcome == Outcome::Fail);
    CHECK(check_termination(h, S("b"), StopReason::Completed).pass());
    CHECK(check_termination(h, S("a"), std::nullopt).outcome == Outcome::Inconclusive);
    CHECK(check_termination(h, S("a"), StopReason::MaxEvents).outcome == Outcome::Inconclusive);
}

namespace
{

std::map<ProcessId, std::vector<Time>> growing_views(Time c, std::size_t views, Time offset_b)
{
    std::map<ProcessId, std::vector<Time>> e;
    for (std::size_t v = 1; v <= views; ++v)
    {
        const Time start = c * static_cast<Time>((v - 1) * v / 2);
        e[P('a')].push_back(start);
        e[P('b')].push_back(start + offset_b);
    }
    return e;
}

} // namespace

TEST_CASE("view synchronization on synthetic timelines")
{
    const Time c = 10;
    const Time d = 25;
    auto entries = growing_views(c, 30, 3);
    const auto ok = check_view_sync(entries, S("ab"), 0, c, d);
    CHECK(ok.verdict.pass());
    CHECK(ok.first_synced_view == 1);
    CHECK(ok.spread == 3);
    CHECK(ok.target_view == 3); // ceil((25 + 3) / 10)
    REQUIRE(ok.overlaps.size() == 20);
    for (std::size_t i = 0; i < ok.overlaps.size(); ++i)
        CHECK(ok.overlaps[i] == c * static_cast<Time>(ok.target_view + i) - 3);

    // b enters view 8 just before a leaves it.
    auto late = entries;
    late[P('b')][7] = entries[P('a')][8] - 1;
    const auto bad = check_view_sync(late, S("ab"), 0, c, d);
    CHECK(bad.verdict.outcome == Outcome::Fail);
    CHECK(bad.verdict.witness.at("view") == 8);

    // GST after the first views moves v0.
    const auto after = check_view_sync(entries, S("ab"), 100, c, d);
    CHECK(after.first_synced_view == 5); // a enters view 5 at 100
    CHECK(after.target_view == 5);

    CHECK(check_view_sync(growing_views(c, 10, 3), S("ab"), 0, c, d).verdict.outcome == Outcome::Inconclusive);
}

TEST_CASE("network checks catch forged, late, unjustified and lost messages")
{
    const auto s = load_scenario(std::string(GQSLAB_SCENARIO_DIR) + "/fig1-f1-register.scenario");
    RunOverrides o;
    o.mode = TimingMode::PartialSync;
    o.gst = 0;
    const auto t = execute(plan_run(s, o));
    const auto& f = s.pattern("f1");
    auto outcome = [&](const Trace& trace, std::string_view name) {
        for (const auto& v : check_network(trace, f))
            if (v.check == name)
                return v.outcome;
        FAIL("missing verdict");
        return Outcome::Inconclusive;
    };
    for (const auto& v : check_network(t, f))
        CHECK_MESSAGE(v.pass(), v.check, ": ", v.detail);

    const auto first = [&](std::string_view kind) {
        return std::find_if(t.events.begin(), t.events.end(), [&](const auto& e) { return e.kind == kind; }) -
               t.events.begin();
    };
    {
        auto m = t;
        m.events.insert(m.events.begin() + 1, TraceEvent{0, "crash", "c", Json::object(), {}, {}});
        CHECK(outcome(m, "f-compliance") == Outcome::Fail);
    }
    {
        auto m = t;
        m.events.erase(m.events.begin() + first("send"));
        CHECK(outcome(m, "deliver-has-send") == Outcome::Fail);
    }
    {
        auto m = t;
        m.events[static_cast<std::size_t>(first("deliver"))].time += 100;
        CHECK(outcome(m, "post-gst-timeliness") == Outcome::Fail);
    }
    {
        auto m = t;
        m.events[static_cast<std::size_t>(first("deliver"))].kind = "drop";
        CHECK(outcome(m, "drop-justified") == Outcome::Fail);
    }
    {
        auto m = t;
        m.events.erase(m.events.begin() + first("deliver"));
        CHECK(outcome(m, "reliable-channels") == Outcome::Fail);
    }
}
