#include "fixtures.hpp"
#include "oracles.hpp"

#include "gqslab/gqs.hpp"
#include "gqslab/rng.hpp"

#include <doctest.h>

using namespace gqslab;
using fixture::S;

namespace
{

std::vector<std::uint64_t> masks(const QuorumFamily& family)
{
    std::vector<std::uint64_t> out;
    for (const auto& q : family)
        out.push_back(q.bits());
    return out;
}

} // namespace

TEST_CASE("example system: quorums validate and U_f is the expected pair")
{
    const auto F = fixture::fig1_system();
    const auto g = NetworkGraph::complete(4);
    const auto v = validate_gqs(F, fixture::fig1_reads(), fixture::fig1_writes(), g);
    REQUIRE(v.valid());
    CHECK_FALSE(v.violating_pair);
    const std::vector<ProcessSet> expected{S("ab"), S("bc"), S("cd"), S("da")};
    for (std::size_t i = 0; i < 4; ++i)
    {
        REQUIRE(v.u_components[i]);
        CHECK(*v.u_components[i] == expected[i]);
        // Write quorum i witnesses pattern i.
        REQUIRE(v.availability[i]);
        CHECK(fixture::fig1_writes()[v.availability[i]->write_index] == expected[i]);
    }
    CHECK(oracle::is_gqs(F, masks(fixture::fig1_reads()), masks(fixture::fig1_writes())));
    // Not a classical system: channels fail.
    CHECK_FALSE(is_classical_qs(F, fixture::fig1_reads(), fixture::fig1_writes()));
}

TEST_CASE("U_f agrees with the oracle for every pattern of the example")
{
    const auto F = fixture::fig1_system();
    const GeneralizedQuorumSystem gqs{F, fixture::fig1_reads(), fixture::fig1_writes()};
    for (const auto& f : F.patterns)
    {
        const auto want = oracle::termination_component(F, f, masks(gqs.reads), masks(gqs.writes));
        REQUIRE(want);
        CHECK(compute_termination_component(f, gqs, NetworkGraph::complete(4)).bits() == *want);
    }
}

TEST_CASE("dropping (a,b) under f1 leaves no GQS")
{
    const auto F = fixture::fig1_prime_system();
    CHECK_FALSE(find_gqs(F, NetworkGraph::complete(4)));
    CHECK_FALSE(oracle::gqs_exists(F));
    CHECK_FALSE(validate_gqs(F, fixture::fig1_reads(), fixture::fig1_writes(), NetworkGraph::complete(4)).valid());
}

TEST_CASE("a disjoint read and write quorum is reported")
{
    const auto F = fixture::fig1_system();
    const QuorumFamily reads{S("ac"), S("bd")};
    const QuorumFamily writes{S("ab"), S("bd"), S("ac")};
    const auto v = validate_gqs(F, reads, writes, NetworkGraph::complete(4));
    CHECK_FALSE(v.consistent);
    REQUIRE(v.violating_pair);
    CHECK((reads[v.violating_pair->first] & writes[v.violating_pair->second]).empty());
}

TEST_CASE("termination component requires a witness")
{
    const auto F = fixture::fig1_system();
    const GeneralizedQuorumSystem gqs{F, {S("ac")}, {S("cd")}};
    CHECK_THROWS_AS((void)compute_termination_component(F.patterns[0], gqs, NetworkGraph::complete(4)),
                    PreconditionError);
}

TEST_CASE("threshold systems are classical and generalized")
{
    for (auto [n, k] : std::vector<std::pair<std::size_t, std::size_t>>{{3, 1}, {5, 1}, {5, 2}, {7, 3}})
    {
        CAPTURE(n);
        CAPTURE(k);
        const auto t = threshold_system(n, k);
        CHECK(is_classical_qs(t.system, t.reads, t.writes));
        const auto v = validate_gqs(t.system, t.reads, t.writes, NetworkGraph::complete(n));
        CHECK(v.valid());
        // Every correct process is in U_f when only processes fail.
        for (std::size_t i = 0; i < t.system.patterns.size(); ++i)
            CHECK(*v.u_components[i] == ProcessSet::first_n(n) - t.system.patterns[i].crashed);
        CHECK(t.system.patterns.size() == [&] {
            std::size_t count = 0;
            for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m)
                count += static_cast<std::size_t>(std::popcount(m)) <= k ? 1 : 0;
            return count;
        }());
    }
    CHECK_THROWS_AS(threshold_system(3, 3), ModelError);
}

TEST_CASE("classical check fails when a quorum is not entirely correct")
{
    const auto t = threshold_system(3, 1);
    // Majority reads with singleton writes: writes cannot meet every read.
    CHECK_FALSE(is_classical_qs(t.system, t.reads, subsets_of_size_at_least(3, 1)));
}

TEST_CASE("find_gqs matches the oracle on random four-process systems")
{
    Rng rng(3);
    const auto pool = oracle::all_patterns(4);
    int found = 0;
    for (int round = 0; round < 150; ++round)
    {
        FailProneSystem F;
        F.process_count = 4;
        const auto count = rng.uniform(1, 3);
        std::set<std::size_t> picked;
        while (picked.size() < static_cast<std::size_t>(count))
            picked.insert(static_cast<std::size_t>(rng.uniform(0, static_cast<std::int64_t>(pool.size()) - 1)));
        for (auto i : picked)
            F.patterns.push_back(pool[i]);
        const auto got = find_gqs(F, NetworkGraph::complete(4));
        const bool want = oracle::gqs_exists(F).has_value();
        CHECK(got.has_value() == want);
        if (got)
        {
            ++found;
            CHECK(oracle::is_gqs(F, masks(got->reads), masks(got->writes)));
        }
    }
    CHECK(found > 0);
}
