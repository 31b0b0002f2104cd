#pragma once

#include "gqslab/model.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace gqslab
{

/// Ordered, duplicate-free list of non-empty quorums.
using QuorumFamily = std::vector<ProcessSet>;

/// Throws ModelError if the family is empty, has an empty or duplicate member,
/// or names processes outside p1..pn.
void validate_family(const QuorumFamily& family, std::size_t n, std::string_view what);

struct GeneralizedQuorumSystem
{
    FailProneSystem system;
    QuorumFamily reads;
    QuorumFamily writes;
};

/// Indices into the read/write families witnessing Availability for one pattern.
struct AvailabilityWitness
{
    std::size_t write_index = 0;
    std::size_t read_index = 0;
};

struct GqsVerdict
{
    bool consistent = true;
    /// First (read index, write index) pair with an empty intersection.
    std::optional<std::pair<std::size_t, std::size_t>> violating_pair;
    /// One entry per pattern; empty when Availability fails for it.
    std::vector<std::optional<AvailabilityWitness>> availability;
    /// U_f per pattern; empty when Availability fails or U is not strongly connected.
    std::vector<std::optional<ProcessSet>> u_components;

    [[nodiscard]] bool available() const;
    [[nodiscard]] bool valid() const { return consistent && available(); }
};

/// Checks Consistency and per-pattern Availability and computes U_f.
/// Witness search walks the write family, then the read family, in order.
GqsVerdict validate_gqs(const FailProneSystem& F, const QuorumFamily& reads,
                        const QuorumFamily& writes, const NetworkGraph& g);

class PreconditionError : public std::logic_error
{
public:
    using std::logic_error::logic_error;
};

/// U_f: the SCC of G \ f containing every write quorum that is f-available and
/// f-reachable from some read quorum. Throws PreconditionError if no such write
/// quorum exists or if they do not share one component.
ProcessSet compute_termination_component(const FailurePattern& f,
                                         const GeneralizedQuorumSystem& gqs,
                                         const NetworkGraph& g);

/// Searches for a GQS over F. Returns the first one found in the deterministic
/// search order, or nullopt if none exists.
std::optional<GeneralizedQuorumSystem> find_gqs(const FailProneSystem& F, const NetworkGraph& g);

/// Classical quorum system: no channel failures, Consistency, and per pattern
/// some R and W that are entirely correct.
bool is_classical_qs(const FailProneSystem& F, const QuorumFamily& reads,
                     const QuorumFamily& writes);

/// Threshold system on n processes tolerating k crashes: every crash set of
/// size <= k, read quorums of size >= n-k, write quorums of size >= k+1.
GeneralizedQuorumSystem threshold_system(std::size_t n, std::size_t k);

/// All subsets of p1..pn with at least `min_size` members, in ascending mask order.
QuorumFamily subsets_of_size_at_least(std::size_t n, std::size_t min_size);

} // namespace gqslab
