#pragma once

// The four-process example system used across tests.

#include "gqslab/gqs.hpp"

#include <string>
#include <vector>

namespace fixture
{

inline gqslab::ProcessId P(char c)
{
    return gqslab::ProcessId(static_cast<std::uint32_t>(c - 'a' + 1));
}

inline gqslab::Channel C(char from, char to)
{
    return {P(from), P(to)};
}

inline gqslab::ProcessSet S(std::string_view members)
{
    gqslab::ProcessSet s;
    for (char c : members)
        s.insert(P(c));
    return s;
}

inline gqslab::ProcessNames names()
{
    return gqslab::ProcessNames(std::vector<std::string>{"a", "b", "c", "d"});
}

/// Pattern i crashes one process and drops three channels around the next one.
inline gqslab::FailProneSystem fig1_system()
{
    gqslab::FailProneSystem F;
    F.process_count = 4;
    F.patterns = {
        {"f1", S("d"), {C('a', 'c'), C('b', 'c'), C('c', 'b')}},
        {"f2", S("a"), {C('b', 'd'), C('c', 'd'), C('d', 'c')}},
        {"f3", S("b"), {C('c', 'a'), C('d', 'a'), C('a', 'd')}},
        {"f4", S("c"), {C('d', 'b'), C('a', 'b'), C('b', 'a')}},
    };
    return F;
}

inline gqslab::QuorumFamily fig1_reads()
{
    return {S("ac"), S("bd")};
}

inline gqslab::QuorumFamily fig1_writes()
{
    return {S("ab"), S("bc"), S("cd"), S("da")};
}

/// f1 with the channel (a, b) also dropped.
inline gqslab::FailProneSystem fig1_prime_system()
{
    auto F = fig1_system();
    F.patterns[0].name = "f1'";
    F.patterns[0].dropped.insert(C('a', 'b'));
    return F;
}

} // namespace fixture
