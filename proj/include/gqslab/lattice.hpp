#pragma once

// Single-shot lattice agreement over an atomic snapshot.
//
// The lattice is finite sets of integers under union. propose(x) stores x in
// the caller's segment, scans, and returns the join of every segment.

#include "gqslab/snapshot.hpp"

#include <algorithm>
#include <set>

namespace gqslab
{

using LatticeSet = std::set<std::int64_t>;

inline LatticeSet join(LatticeSet a, const LatticeSet& b)
{
    a.insert(b.begin(), b.end());
    return a;
}

/// a <= b in the inclusion order.
inline bool leq(const LatticeSet& a, const LatticeSet& b)
{
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

inline bool comparable(const LatticeSet& a, const LatticeSet& b)
{
    return leq(a, b) || leq(b, a);
}

class LatticeAgreement
{
public:
    using Done = std::function<void(LatticeSet)>;

    explicit LatticeAgreement(SnapshotAccess<LatticeSet>& snapshot) : snapshot_(snapshot) {}

    /// Throws ProtocolError on a second propose.
    void propose(LatticeSet x, Done done)
    {
        if (proposed_)
            throw ProtocolError("lattice agreement is single-shot");
        proposed_ = true;
        snapshot_.update(std::move(x), [this, done = std::move(done)](std::uint64_t) mutable {
            snapshot_.scan([done = std::move(done)](SnapshotAccess<LatticeSet>::View view) {
                LatticeSet y;
                for (const auto& slot : view)
                    y = join(std::move(y), slot.value);
                done(std::move(y));
            });
        });
    }

private:
    SnapshotAccess<LatticeSet>& snapshot_;
    bool proposed_ = false;
};

class LatticeAutomaton final : public Automaton
{
public:
    using Record = SegmentRecord<LatticeSet>;
    using Sm = RegisterArraySm<Record>;

    LatticeAutomaton(ProcessContext& ctx, QafVariant variant, const QuorumFamily& reads,
                     const QuorumFamily& writes)
        : ctx_(ctx),
          qaf_(make_quorum_access(variant, ctx, Sm{ctx.process_count(), Record{}}, reads, writes)),
          registers_(*qaf_, ctx.self()), snapshot_(registers_, ctx.self(), ctx.process_count()),
          agreement_(snapshot_)
    {
    }

    void invoke(const Operation& op) override
    {
        if (op.kind != OpKind::LaPropose)
            throw ProtocolError("lattice does not support " + std::string(to_string(op.kind)));
        const auto id = op.id;
        agreement_.propose(op.arg.get<LatticeSet>(), [this, id](LatticeSet y) {
            ctx_.respond(id, OpResult{Json(y), std::nullopt});
        });
    }
    void receive(ProcessId from, const Payload& payload) override
    {
        if (!qaf_->receive(from, payload))
            throw ProtocolError("lattice got foreign message " + std::string(payload.kind()));
    }
    void tick() override { qaf_->tick(); }
    [[nodiscard]] bool wants_ticks() const override { return qaf_->wants_ticks(); }

private:
    ProcessContext& ctx_;
    std::unique_ptr<QuorumAccess<Sm>> qaf_;
    RegisterClient<Record> registers_;
    DoubleCollectSnapshot<LatticeSet> snapshot_;
    LatticeAgreement agreement_;
};

} // namespace gqslab
