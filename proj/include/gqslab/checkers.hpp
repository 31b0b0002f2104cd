#pragma once

// Offline safety and liveness checks over histories and traces.

#include "gqslab/gqs.hpp"
#include "gqslab/history.hpp"
#include "gqslab/lattice.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gqslab
{

enum class Outcome
{
    Pass,
    Fail,
    Inconclusive,
};

std::string_view to_string(Outcome o);

struct Verdict
{
    std::string check;
    Outcome outcome = Outcome::Pass;
    std::string detail;
    Json witness;

    [[nodiscard]] bool pass() const { return outcome == Outcome::Pass; }
    [[nodiscard]] Json to_json() const;

    static Verdict passed(std::string check, std::string detail = {});
    static Verdict failed(std::string check, std::string detail, Json witness = nullptr);
    static Verdict inconclusive(std::string check, std::string detail);
};

// ---------------------------------------------------------------------------
// Registers

struct RegisterOp
{
    std::uint64_t id = 0;
    ProcessId process;
    bool is_write = false;
    std::int64_t value = 0;
    std::size_t invoke_pos = 0;
    /// Empty for a pending write.
    std::optional<std::size_t> respond_pos;
    /// τ: the version a write installed or the version a read returned.
    std::optional<Version> tau;

    [[nodiscard]] bool complete() const { return respond_pos.has_value(); }
    [[nodiscard]] bool precedes(const RegisterOp& o) const { return respond_pos && *respond_pos < o.invoke_pos; }
};

/// Completed reads and writes plus pending writes (with their chosen version if
/// recorded). Pending reads are dropped.
std::vector<RegisterOp> register_ops(const History& h);

/// Exhaustive search for a legal sequential order respecting real time.
/// Completed operations must all appear; pending writes may be left out.
/// Returns operation ids in linearization order.
std::optional<std::vector<std::uint64_t>> register_linearization(const std::vector<RegisterOp>& ops);

/// Dependency-graph check driven by the recorded versions. Builds wr, ww and
/// rw from τ, checks well-formedness, then looks for the shortest cycle over
/// rt ∪ wr ∪ ww ∪ rw. A read whose value disagrees with its version is
/// re-anchored on the unique write of that value (or the initial state for 0).
/// Inconclusive when versions are missing or a value is ambiguous.
Verdict check_register_dependency_graph(const std::vector<RegisterOp>& ops);

struct RegisterReport
{
    Verdict verdict;
    Verdict fast_path;
    /// Set when the exhaustive search ran.
    std::optional<Outcome> oracle;
    bool disagreement = false;
};

/// Dependency-graph verdict, cross-checked by exhaustive search when at most
/// `oracle_limit` operations are involved. On disagreement the search wins.
RegisterReport check_linearizable_register(const std::vector<RegisterOp>& ops, std::size_t oracle_limit = 8);
RegisterReport check_linearizable_register(const History& h);

/// (o1, o2) in rt implies τ(o1) <= τ(o2), strictly when o2 is a write.
Verdict check_register_versions(const std::vector<RegisterOp>& ops);

/// Rewrites τ as the versions a sequential execution in `order` would produce.
void assign_tau_from_linearization(std::vector<RegisterOp>& ops, const std::vector<std::uint64_t>& order);

/// Windows of consecutive operations (invocation order) closed under
/// reads-from, each at most `max_ops` operations.
std::vector<std::vector<RegisterOp>> register_subhistories(const std::vector<RegisterOp>& ops,
                                                           std::size_t max_ops = 8);

// ---------------------------------------------------------------------------
// Snapshots

struct SnapshotOp
{
    std::uint64_t id = 0;
    ProcessId process;
    bool is_update = false;
    /// Update argument.
    std::int64_t value = 0;
    /// Per-writer sequence number of an update (its rank among the writer's updates).
    std::uint64_t seq = 0;
    /// Scan result.
    std::vector<std::int64_t> values;
    std::vector<std::uint64_t> seqs;
    std::size_t invoke_pos = 0;
    std::optional<std::size_t> respond_pos;

    [[nodiscard]] bool complete() const { return respond_pos.has_value(); }
    [[nodiscard]] bool precedes(const SnapshotOp& o) const { return respond_pos && *respond_pos < o.invoke_pos; }
};

/// Completed updates and scans plus pending updates.
std::vector<SnapshotOp> snapshot_ops(const History& h);

std::optional<std::vector<std::uint64_t>> snapshot_linearization(const std::vector<SnapshotOp>& ops,
                                                                 std::size_t segments);

/// Scans are totally ordered by slot-wise seq dominance, agree with the
/// updates they claim to reflect, and respect real time against updates and
/// other scans.
Verdict check_snapshot_containment(const std::vector<SnapshotOp>& ops, std::size_t segments);

/// Exhaustive search for at most `search_limit` operations, containment otherwise.
Verdict check_snapshot_linearizable(const std::vector<SnapshotOp>& ops, std::size_t segments,
                                    std::size_t search_limit = 8);
Verdict check_snapshot_linearizable(const History& h);

// ---------------------------------------------------------------------------
// Lattice agreement, consensus, quorum access functions

struct LatticeOutcome
{
    std::uint64_t id = 0;
    LatticeSet input;
    LatticeSet output;
};

/// `proposals` are all invoked inputs (X); `outcomes` the completed ones.
Verdict check_lattice_agreement(const std::vector<LatticeSet>& proposals,
                                const std::vector<LatticeOutcome>& outcomes);
Verdict check_lattice_agreement(const History& h);

Verdict check_consensus_safety(const std::vector<std::int64_t>& proposals,
                               const std::vector<std::int64_t>& decisions);
Verdict check_consensus_safety(const History& h);

/// Every quorum_set that completed before a quorum_get was invoked shows up in
/// at least one state the get returned. Update ids are operation ids.
Verdict check_qaf_real_time(const History& h);

/// Every returned state is a duplicate-free list of ids of quorum_set
/// operations invoked before the get responded.
Verdict check_qaf_validity(const History& h);

// ---------------------------------------------------------------------------
// Liveness and network properties

/// Every operation invoked at a member of `tset` responded. Inconclusive when
/// the run was truncated or stopped on a budget.
Verdict check_termination(const History& h, ProcessSet tset, std::optional<StopReason> stop);

/// Checks on a full trace: deliveries match sends, failures stay within the
/// pattern, sends on correct channels between live processes are delivered
/// (quiescent runs only), and post-GST deliveries take at most delta.
std::vector<Verdict> check_network(const Trace& trace, const FailurePattern& pattern);

// ---------------------------------------------------------------------------
// Consensus timing

/// Entry times into views 1, 2, ... per process, from view_enter notes.
std::map<ProcessId, std::vector<Time>> view_entries(const Trace& trace, const ProcessNames& names);

struct ViewSyncReport
{
    Verdict verdict;
    std::uint64_t first_synced_view = 0; // v0
    Time spread = 0;                     // entry spread in v0
    std::uint64_t target_view = 0;       // the computed view
    std::vector<Time> overlaps;          // for target_view, target_view+1, ...
};

/// From the first view all correct processes enter at or after `gst`, computes
/// the view after which every view overlaps by at least `d`, and checks the
/// next `count` views on the simulated timeline.
ViewSyncReport check_view_sync(const std::map<ProcessId, std::vector<Time>>& entries, ProcessSet correct,
                               Time gst, Time view_constant, Time d, std::size_t count = 20);

struct LatencyReport
{
    Verdict verdict;
    std::uint64_t view = 0;
    ProcessId leader;
    Time last_entry = 0;
    Time budget = 0;
    std::optional<Time> decided_at;
};

/// Hop-aware bound on the decision time of a leader in U_f: the minimum over
/// availability witnesses (W, R) of delta times the hops R -> p, p -> W, W -> p.
/// Equals 3 delta when all those channels are direct.
Time decision_budget(ProcessId leader, const FailurePattern& f, const GeneralizedQuorumSystem& gqs,
                     const NetworkGraph& g, Time delta);

/// Finds the first view led by a member of U_f that every correct process
/// enters after max(GST, the leader's propose invocation) and whose overlap
/// exceeds the budget; then the leader must decide by last entry + budget.
LatencyReport check_decision_latency(const Trace& trace, const History& h, const FailurePattern& f,
                                     const GeneralizedQuorumSystem& gqs, const NetworkGraph& g);

} // namespace gqslab
