#pragma once

// Single-writer atomic snapshot from one register per process.
//
// Unbounded-sequence double collect: scan repeats collects until two in a row
// agree, or until some writer is seen to move twice, in which case the scan
// embedded in that writer's latest record is borrowed. Each update embeds a
// fresh scan. Embedded scans hold (value, seq) views only, never nested scans.

#include "gqslab/register.hpp"

#include <deque>
#include <memory>
#include <set>

namespace gqslab
{

template <class V>
struct SlotView
{
    V value{};
    std::uint64_t seq = 0;

    friend bool operator==(const SlotView&, const SlotView&) = default;
};

template <class V>
struct SegmentRecord
{
    V value{};
    std::uint64_t seq = 0;
    /// Scan taken by the update that wrote this record; empty for seq 0.
    std::vector<SlotView<V>> embedded_scan;

    friend bool operator==(const SegmentRecord&, const SegmentRecord&) = default;
};

template <class V>
void to_json(Json& j, const SlotView<V>& s)
{
    j = Json::array({Json(s.value), s.seq});
}

template <class V>
void to_json(Json& j, const SegmentRecord<V>& r)
{
    j = Json{{"v", Json(r.value)}, {"seq", r.seq}};
    if (!r.embedded_scan.empty())
        j["scan"] = Json(r.embedded_scan);
}

template <class V>
class SnapshotAccess
{
public:
    using View = std::vector<SlotView<V>>;
    using UpdateDone = std::function<void(std::uint64_t seq)>;
    using ScanDone = std::function<void(View)>;

    virtual ~SnapshotAccess() = default;
    /// Writes v into the caller's own segment; completes with its new seq.
    virtual void update(V v, UpdateDone done) = 0;
    virtual void scan(ScanDone done) = 0;
};

template <class V>
class DoubleCollectSnapshot final : public SnapshotAccess<V>
{
public:
    using typename SnapshotAccess<V>::View;
    using typename SnapshotAccess<V>::UpdateDone;
    using typename SnapshotAccess<V>::ScanDone;
    using Record = SegmentRecord<V>;

    DoubleCollectSnapshot(RegisterClient<Record>& registers, ProcessId self, std::size_t n)
        : registers_(registers), self_(self), n_(n)
    {
    }

    void update(V v, UpdateDone done) override
    {
        scan([this, v = std::move(v), done = std::move(done)](View view) mutable {
            const std::uint64_t seq = ++seq_;
            registers_.write(self_.value - 1, Record{std::move(v), seq, std::move(view)},
                             [seq, done = std::move(done)](Version) { done(seq); });
        });
    }

    void scan(ScanDone done) override
    {
        auto state = std::make_shared<ScanState>();
        state->done = std::move(done);
        collect([this, state](std::vector<Record> first) { next_collect(state, std::move(first)); });
    }

    /// Number of collects performed by the last completed or running scan.
    [[nodiscard]] std::size_t collects() const { return collects_; }

private:
    struct ScanState
    {
        ScanDone done;
        std::set<std::size_t> moved;
    };
    using CollectDone = std::function<void(std::vector<Record>)>;

    static View view_of(const std::vector<Record>& c)
    {
        View v;
        v.reserve(c.size());
        for (const auto& r : c)
            v.push_back(SlotView<V>{r.value, r.seq});
        return v;
    }

    void next_collect(std::shared_ptr<ScanState> state, std::vector<Record> previous)
    {
        collect([this, state, previous = std::move(previous)](std::vector<Record> current) mutable {
            bool same = true;
            for (std::size_t j = 0; j < n_; ++j)
            {
                if (previous[j].seq == current[j].seq)
                    continue;
                same = false;
                if (!state->moved.insert(j).second)
                {
                    state->done(current[j].embedded_scan);
                    return;
                }
            }
            if (same)
            {
                state->done(view_of(current));
                return;
            }
            next_collect(state, std::move(current));
        });
    }

    /// Reads every segment register in slot order.
    void collect(CollectDone done)
    {
        ++collects_;
        auto acc = std::make_shared<std::vector<Record>>();
        acc->reserve(n_);
        read_from(0, acc, std::move(done));
    }

    void read_from(std::size_t slot, std::shared_ptr<std::vector<Record>> acc, CollectDone done)
    {
        if (slot == n_)
        {
            done(std::move(*acc));
            return;
        }
        registers_.read(slot, [this, slot, acc, done = std::move(done)](VersionedState<Record> s) mutable {
            acc->push_back(std::move(s.val));
            read_from(slot + 1, acc, std::move(done));
        });
    }

    RegisterClient<Record>& registers_;
    ProcessId self_;
    std::size_t n_;
    std::uint64_t seq_ = 0;
    std::size_t collects_ = 0;
};

/// Atomic snapshot whose operations take effect only when the driver calls
/// step(p). Used to enumerate interleavings exhaustively.
template <class V>
class SteppedSnapshot
{
public:
    using View = typename SnapshotAccess<V>::View;

    SteppedSnapshot(std::size_t n, V initial) : cells_(n, SlotView<V>{initial, 0})
    {
        for (std::size_t i = 0; i < n; ++i)
            ports_.push_back(std::make_unique<Port>(*this, ProcessId(static_cast<std::uint32_t>(i + 1))));
    }

    SnapshotAccess<V>& port(ProcessId p) { return *ports_.at(p.value - 1); }
    [[nodiscard]] bool has_pending(ProcessId p) const { return static_cast<bool>(ports_.at(p.value - 1)->pending); }

    /// Performs p's pending operation atomically and runs its continuation.
    void step(ProcessId p)
    {
        auto& port = *ports_.at(p.value - 1);
        if (!port.pending)
            throw std::logic_error("no pending snapshot operation");
        auto op = std::move(port.pending);
        port.pending = nullptr;
        op();
    }

    [[nodiscard]] const View& cells() const { return cells_; }

private:
    struct Port final : SnapshotAccess<V>
    {
        Port(SteppedSnapshot& owner, ProcessId self) : owner(owner), self(self) {}

        void update(V v, typename SnapshotAccess<V>::UpdateDone done) override
        {
            ensure_idle();
            pending = [this, v = std::move(v), done = std::move(done)]() mutable {
                auto& cell = owner.cells_.at(self.value - 1);
                cell = SlotView<V>{std::move(v), cell.seq + 1};
                done(cell.seq);
            };
        }
        void scan(typename SnapshotAccess<V>::ScanDone done) override
        {
            ensure_idle();
            pending = [this, done = std::move(done)] { done(owner.cells_); };
        }
        void ensure_idle() const
        {
            if (pending)
                throw std::logic_error("snapshot operation already pending");
        }

        SteppedSnapshot& owner;
        ProcessId self;
        std::function<void()> pending;
    };

    View cells_;
    std::vector<std::unique_ptr<Port>> ports_;
};

/// Segments hold integers, initially 0.
class SnapshotAutomaton final : public Automaton
{
public:
    using Record = SegmentRecord<std::int64_t>;
    using Sm = RegisterArraySm<Record>;

    SnapshotAutomaton(ProcessContext& ctx, QafVariant variant, const QuorumFamily& reads,
                      const QuorumFamily& writes)
        : ctx_(ctx),
          qaf_(make_quorum_access(variant, ctx, Sm{ctx.process_count(), Record{}}, reads, writes)),
          registers_(*qaf_, ctx.self()), snapshot_(registers_, ctx.self(), ctx.process_count())
    {
    }

    void invoke(const Operation& op) override
    {
        const auto id = op.id;
        switch (op.kind)
        {
        case OpKind::SnapUpdate:
            snapshot_.update(op.arg.get<std::int64_t>(), [this, id](std::uint64_t seq) {
                ctx_.respond(id, OpResult{Json{{"seq", seq}}, std::nullopt});
            });
            return;
        case OpKind::SnapScan:
            snapshot_.scan([this, id](SnapshotAccess<std::int64_t>::View view) {
                Json values = Json::array();
                Json seqs = Json::array();
                for (const auto& s : view)
                {
                    values.push_back(s.value);
                    seqs.push_back(s.seq);
                }
                ctx_.respond(id, OpResult{Json{{"values", values}, {"seqs", seqs}}, std::nullopt});
            });
            return;
        default:
            throw ProtocolError("snapshot does not support " + std::string(to_string(op.kind)));
        }
    }
    void receive(ProcessId from, const Payload& payload) override
    {
        if (!qaf_->receive(from, payload))
            throw ProtocolError("snapshot got foreign message " + std::string(payload.kind()));
    }
    void tick() override { qaf_->tick(); }
    [[nodiscard]] bool wants_ticks() const override { return qaf_->wants_ticks(); }

private:
    ProcessContext& ctx_;
    std::unique_ptr<QuorumAccess<Sm>> qaf_;
    RegisterClient<Record> registers_;
    DoubleCollectSnapshot<std::int64_t> snapshot_;
};

} // namespace gqslab
