#include "gqslab/gqs.hpp"

#include <algorithm>

namespace gqslab
{
namespace
{

/// Residual graph of one pattern with SCCs and per-process reach sets cached,
/// so availability checks over large families stay cheap.
struct PatternView
{
    NetworkGraph residual;
    std::vector<ProcessSet> components;
    std::vector<ProcessSet> reach; // index = process id

    PatternView(const NetworkGraph& g, const FailurePattern& f)
        : residual(residual_graph(g, f)),
          components(strongly_connected_components(residual)),
          reach(g.universe() + 1)
    {
        for (auto p : residual.vertices())
            reach[p.value] = reachable_from(residual, ProcessSet{p});
    }

    [[nodiscard]] bool available(ProcessSet q) const
    {
        if (q.empty())
            return false;
        return std::any_of(components.begin(), components.end(),
                           [q](ProcessSet c) { return q.subset_of(c); });
    }

    [[nodiscard]] bool reachable(ProcessSet w, ProcessSet r) const
    {
        if (w.empty() || r.empty() || !(w | r).subset_of(residual.vertices()))
            return false;
        for (auto p : r)
            if (!w.subset_of(reach[p.value]))
                return false;
        return true;
    }

    [[nodiscard]] std::optional<ProcessSet> component_containing(ProcessSet u) const
    {
        for (auto c : components)
            if (u.subset_of(c))
                return c;
        return std::nullopt;
    }
};

std::optional<ProcessSet> termination_component(const PatternView& view,
                                                const QuorumFamily& reads,
                                                const QuorumFamily& writes)
{
    ProcessSet u;
    for (auto w : writes)
    {
        if (!view.available(w))
            continue;
        if (std::any_of(reads.begin(), reads.end(),
                        [&](ProcessSet r) { return view.reachable(w, r); }))
            u |= w;
    }
    if (u.empty())
        return std::nullopt;
    return view.component_containing(u);
}

} // namespace

void validate_family(const QuorumFamily& family, std::size_t n, std::string_view what)
{
    const auto all = ProcessSet::first_n(n);
    if (family.empty())
        throw ModelError(std::string(what) + " family is empty");
    for (std::size_t i = 0; i < family.size(); ++i)
    {
        if (family[i].empty())
            throw ModelError(std::string(what) + " family has an empty quorum");
        if (!family[i].subset_of(all))
            throw ModelError(std::string(what) + " quorum names an unknown process");
        for (std::size_t j = 0; j < i; ++j)
            if (family[i] == family[j])
                throw ModelError(std::string(what) + " family has a duplicate quorum");
    }
}

bool GqsVerdict::available() const
{
    return std::all_of(availability.begin(), availability.end(),
                       [](const auto& w) { return w.has_value(); });
}

GqsVerdict validate_gqs(const FailProneSystem& F, const QuorumFamily& reads,
                        const QuorumFamily& writes, const NetworkGraph& g)
{
    GqsVerdict verdict;
    for (std::size_t i = 0; i < reads.size() && verdict.consistent; ++i)
    {
        for (std::size_t j = 0; j < writes.size(); ++j)
        {
            if (!reads[i].intersects(writes[j]))
            {
                verdict.consistent = false;
                verdict.violating_pair = std::pair{i, j};
                break;
            }
        }
    }

    for (const auto& f : F.patterns)
    {
        const PatternView view(g, f);
        std::optional<AvailabilityWitness> witness;
        for (std::size_t wi = 0; wi < writes.size() && !witness; ++wi)
        {
            if (!view.available(writes[wi]))
                continue;
            for (std::size_t ri = 0; ri < reads.size(); ++ri)
            {
                if (view.reachable(writes[wi], reads[ri]))
                {
                    witness = AvailabilityWitness{wi, ri};
                    break;
                }
            }
        }
        verdict.availability.push_back(witness);
        verdict.u_components.push_back(witness ? termination_component(view, reads, writes)
                                               : std::nullopt);
    }
    return verdict;
}

ProcessSet compute_termination_component(const FailurePattern& f,
                                         const GeneralizedQuorumSystem& gqs,
                                         const NetworkGraph& g)
{
    const PatternView view(g, f);
    ProcessSet u;
    for (auto w : gqs.writes)
    {
        if (!view.available(w))
            continue;
        if (std::any_of(gqs.reads.begin(), gqs.reads.end(),
                        [&](ProcessSet r) { return view.reachable(w, r); }))
            u |= w;
    }
    if (u.empty())
        throw PreconditionError("availability does not hold for pattern '" + f.name + "'");
    auto component = view.component_containing(u);
    if (!component)
        throw PreconditionError("available write quorums of pattern '" + f.name +
                                "' are not strongly connected (inconsistent families?)");
    return *component;
}

// Search space: for each pattern f, W_f ranges over the SCCs of G \ f and R_f is
// the full set of processes that reach W_f. Any GQS witness (W, R) for f lies in
// one SCC C with R reaching all of C, so replacing W by C and R by the reach set
// of C only enlarges every intersection. Enumerating SCCs with maximal read sets
// is therefore complete. Worst case is exponential in |F|.
std::optional<GeneralizedQuorumSystem> find_gqs(const FailProneSystem& F, const NetworkGraph& g)
{
    struct Candidate
    {
        ProcessSet write;
        ProcessSet read;
    };
    std::vector<std::vector<Candidate>> candidates;
    for (const auto& f : F.patterns)
    {
        const PatternView view(g, f);
        std::vector<Candidate> options;
        for (auto component : view.components)
            options.push_back({component, can_reach(view.residual, component)});
        if (options.empty())
            return std::nullopt;
        candidates.push_back(std::move(options));
    }

    const std::size_t m = F.patterns.size();
    std::vector<std::size_t> choice(m, 0);
    std::vector<Candidate> chosen(m);

    auto compatible = [&](std::size_t i, const Candidate& c) {
        for (std::size_t j = 0; j < i; ++j)
            if (!c.write.intersects(chosen[j].read) || !chosen[j].write.intersects(c.read))
                return false;
        return true;
    };

    // Iterative backtracking over per-pattern candidate indices.
    std::size_t i = 0;
    while (true)
    {
        if (i == m)
            break;
        bool placed = false;
        while (choice[i] < candidates[i].size())
        {
            const auto& c = candidates[i][choice[i]];
            if (compatible(i, c))
            {
                chosen[i] = c;
                placed = true;
                break;
            }
            ++choice[i];
        }
        if (placed)
        {
            ++i;
            if (i < m)
                choice[i] = 0;
            continue;
        }
        if (i == 0)
            return std::nullopt;
        --i;
        ++choice[i];
    }

    GeneralizedQuorumSystem result;
    result.system = F;
    for (const auto& c : chosen)
    {
        if (std::find(result.reads.begin(), result.reads.end(), c.read) == result.reads.end())
            result.reads.push_back(c.read);
        if (std::find(result.writes.begin(), result.writes.end(), c.write) == result.writes.end())
            result.writes.push_back(c.write);
    }
    return result;
}

bool is_classical_qs(const FailProneSystem& F, const QuorumFamily& reads,
                     const QuorumFamily& writes)
{
    for (const auto& f : F.patterns)
        if (!f.dropped.empty())
            return false;
    for (auto r : reads)
        for (auto w : writes)
            if (!r.intersects(w))
                return false;
    for (const auto& f : F.patterns)
    {
        auto correct = [&](ProcessSet q) { return !q.intersects(f.crashed); };
        if (std::none_of(reads.begin(), reads.end(), correct) ||
            std::none_of(writes.begin(), writes.end(), correct))
            return false;
    }
    return true;
}

QuorumFamily subsets_of_size_at_least(std::size_t n, std::size_t min_size)
{
    if (n > 20)
        throw ModelError("subset enumeration limited to 20 processes");
    QuorumFamily family;
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask)
    {
        auto s = ProcessSet::from_bits(mask);
        if (s.size() >= min_size)
            family.push_back(s);
    }
    return family;
}

GeneralizedQuorumSystem threshold_system(std::size_t n, std::size_t k)
{
    if (n == 0 || k >= n)
        throw ModelError("threshold system needs 0 <= k < n");
    GeneralizedQuorumSystem gqs;
    gqs.system.process_count = n;
    const ProcessNames names(n);
    gqs.system.patterns.push_back(FailurePattern{"none", {}, {}});
    for (auto crash : subsets_of_size_at_least(n, 1))
    {
        if (crash.size() > k)
            continue;
        gqs.system.patterns.push_back(FailurePattern{"crash" + names.format(crash), crash, {}});
    }
    gqs.reads = subsets_of_size_at_least(n, n - k);
    gqs.writes = subsets_of_size_at_least(n, k + 1);
    return gqs;
}

} // namespace gqslab
