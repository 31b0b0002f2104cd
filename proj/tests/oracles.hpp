#pragma once

// Brute-force reference implementations used only by tests. They work from
// the definitions on plain adjacency matrices and share no code with the
// library's graph or quorum routines.

#include "gqslab/model.hpp"

#include <algorithm>
#include <cstdint>
#include <string>
#include <optional>
#include <vector>

namespace oracle
{

/// reach[i][j]: j reachable from i (i reaches itself) in the complete graph on
/// n processes minus crashed processes and dropped channels. Floyd-Warshall.
inline std::vector<std::vector<bool>> residual_closure(std::size_t n, const gqslab::FailurePattern& f)
{
    std::vector<std::vector<bool>> r(n, std::vector<bool>(n, false));
    auto alive = [&](std::size_t i) { return !f.crashed.contains(gqslab::ProcessId(static_cast<std::uint32_t>(i + 1))); };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
        {
            if (!alive(i) || !alive(j))
                continue;
            const gqslab::Channel c{gqslab::ProcessId(static_cast<std::uint32_t>(i + 1)),
                                    gqslab::ProcessId(static_cast<std::uint32_t>(j + 1))};
            r[i][j] = i == j || f.dropped.count(c) == 0;
        }
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (r[i][k] && r[k][j])
                    r[i][j] = true;
    return r;
}

/// Members of a bitmask as 0-based indices.
inline std::vector<std::size_t> members(std::uint64_t mask)
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < 64; ++i)
        if ((mask >> i) & 1U)
            out.push_back(i);
    return out;
}

inline bool available(std::uint64_t w, const std::vector<std::vector<bool>>& reach)
{
    for (auto i : members(w))
        for (auto j : members(w))
            if (!reach[i][j])
                return false;
    return w != 0;
}

inline bool reachable(std::uint64_t w, std::uint64_t r, const std::vector<std::vector<bool>>& reach)
{
    for (auto i : members(r))
        for (auto j : members(w))
            if (!reach[i][j])
                return false;
    return r != 0;
}

struct Pair
{
    std::uint64_t w = 0;
    std::uint64_t r = 0;
};

/// All (W, R) subset pairs that witness Availability for f.
inline std::vector<Pair> witness_pairs(std::size_t n, const gqslab::FailurePattern& f)
{
    const auto reach = residual_closure(n, f);
    std::vector<Pair> out;
    const std::uint64_t full = (std::uint64_t{1} << n) - 1;
    for (std::uint64_t w = 1; w <= full; ++w)
    {
        if (!available(w, reach))
            continue;
        for (std::uint64_t r = 1; r <= full; ++r)
            if (reachable(w, r, reach))
                out.push_back({w, r});
    }
    return out;
}

/// A GQS exists iff one witness pair per pattern can be chosen so that every
/// chosen R meets every chosen W: the chosen sets then form the families, and
/// conversely the witnesses of any GQS are such a choice.
inline std::optional<std::vector<Pair>> gqs_exists(const gqslab::FailProneSystem& F)
{
    std::vector<std::vector<Pair>> options;
    for (const auto& f : F.patterns)
        options.push_back(witness_pairs(F.process_count, f));
    std::vector<Pair> chosen;
    auto search = [&](auto& self, std::size_t i) -> bool {
        if (i == options.size())
            return true;
        for (const auto& p : options[i])
        {
            bool ok = (p.w & p.r) != 0;
            for (const auto& q : chosen)
                ok = ok && (p.w & q.r) != 0 && (q.w & p.r) != 0;
            if (!ok)
                continue;
            chosen.push_back(p);
            if (self(self, i + 1))
                return true;
            chosen.pop_back();
        }
        return false;
    };
    if (!search(search, 0))
        return std::nullopt;
    return chosen;
}

/// Checks the GQS definition directly on bitmask families.
inline bool is_gqs(const gqslab::FailProneSystem& F, const std::vector<std::uint64_t>& reads,
                   const std::vector<std::uint64_t>& writes)
{
    for (auto r : reads)
        for (auto w : writes)
            if ((r & w) == 0)
                return false;
    for (const auto& f : F.patterns)
    {
        const auto reach = residual_closure(F.process_count, f);
        bool found = false;
        for (auto w : writes)
            for (auto r : reads)
                found = found || (available(w, reach) && reachable(w, r, reach));
        if (!found)
            return false;
    }
    return true;
}

/// The residual SCC holding every witnessing write quorum, or nullopt.
inline std::optional<std::uint64_t> termination_component(const gqslab::FailProneSystem& F,
                                                          const gqslab::FailurePattern& f,
                                                          const std::vector<std::uint64_t>& reads,
                                                          const std::vector<std::uint64_t>& writes)
{
    const auto reach = residual_closure(F.process_count, f);
    std::optional<std::uint64_t> u;
    for (auto w : writes)
    {
        bool witness = false;
        for (auto r : reads)
            witness = witness || (available(w, reach) && reachable(w, r, reach));
        if (!witness)
            continue;
        const auto anchor = members(w).front();
        std::uint64_t scc = 0;
        for (std::size_t j = 0; j < F.process_count; ++j)
            if (reach[anchor][j] && reach[j][anchor])
                scc |= std::uint64_t{1} << j;
        if (u && *u != scc)
            return std::nullopt;
        u = scc;
    }
    return u;
}

/// Shortest path lengths over an explicit adjacency matrix; -1 if unreachable.
inline std::vector<std::vector<int>> hop_matrix(const std::vector<std::vector<bool>>& adj)
{
    const std::size_t n = adj.size();
    constexpr int inf = 1 << 20;
    std::vector<std::vector<int>> d(n, std::vector<int>(n, inf));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i == j)
                d[i][j] = 0;
            else if (adj[i][j])
                d[i][j] = 1;
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
    for (auto& row : d)
        for (auto& x : row)
            if (x >= inf)
                x = -1;
    return d;
}

/// Every failure pattern over n processes: each crash set, then each subset of
/// channels among the remaining processes.
inline std::vector<gqslab::FailurePattern> all_patterns(std::size_t n)
{
    std::vector<gqslab::FailurePattern> out;
    for (std::uint64_t crash = 0; crash < (std::uint64_t{1} << n); ++crash)
    {
        std::vector<gqslab::Channel> channels;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j && !((crash >> i) & 1U) && !((crash >> j) & 1U))
                    channels.push_back({gqslab::ProcessId(static_cast<std::uint32_t>(i + 1)),
                                        gqslab::ProcessId(static_cast<std::uint32_t>(j + 1))});
        for (std::uint64_t drop = 0; drop < (std::uint64_t{1} << channels.size()); ++drop)
        {
            gqslab::FailurePattern f;
            f.name = "c" + std::to_string(crash) + "d" + std::to_string(drop);
            f.crashed = gqslab::ProcessSet::from_bits(crash);
            for (std::size_t k = 0; k < channels.size(); ++k)
                if ((drop >> k) & 1U)
                    f.dropped.insert(channels[k]);
            out.push_back(std::move(f));
        }
    }
    return out;
}

} // namespace oracle
