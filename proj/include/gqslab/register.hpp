#pragma once

// Multi-writer multi-reader atomic registers over quorum access functions.
//
// A register state is (val, ver). write(x) reads a quorum, picks a version one
// above the largest counter it saw, and installs (x, t) where t is newer.
// read() takes the freshest state it saw and writes it back before returning.
// A register array shares one quorum-access instance across all slots.

#include "gqslab/qaf.hpp"

#include <functional>
#include <vector>

namespace gqslab
{

template <class V>
struct VersionedState
{
    V val{};
    Version ver{};

    friend bool operator==(const VersionedState&, const VersionedState&) = default;
};

template <class V>
struct RegisterArraySm
{
    /// Installs (value, version) only over an older version.
    struct ConditionalOverwrite
    {
        V value{};
        Version version{};
    };
    struct Update
    {
        std::size_t slot = 0;
        ConditionalOverwrite write;
    };
    using State = std::vector<VersionedState<V>>;

    std::size_t slots = 1;
    V initial_value{};

    [[nodiscard]] State initial() const { return State(slots, VersionedState<V>{initial_value, initial_version}); }
    [[nodiscard]] State apply(const Update& u, State s) const
    {
        auto& cell = s.at(u.slot);
        if (u.write.version > cell.ver)
            cell = VersionedState<V>{u.write.value, u.write.version};
        return s;
    }
    static Json state_json(const State& s)
    {
        Json j = Json::array();
        for (const auto& cell : s)
            j.push_back(Json::array({Json(cell.val), to_json(cell.ver)}));
        return j;
    }
    static Json update_json(const Update& u)
    {
        return Json{{"slot", u.slot}, {"x", Json(u.write.value)}, {"t", to_json(u.write.version)}};
    }
};

template <class V>
class RegisterClient
{
public:
    using Access = QuorumAccess<RegisterArraySm<V>>;
    using WriteDone = std::function<void(Version)>;
    using ReadDone = std::function<void(VersionedState<V>)>;

    RegisterClient(Access& qaf, ProcessId self) : qaf_(qaf), self_(self) {}

    /// Completes with the version t the write installed. `chosen` sees t
    /// before the set phase starts.
    void write(std::size_t slot, V x, WriteDone done, WriteDone chosen = {})
    {
        qaf_.quorum_get([this, slot, x = std::move(x), done = std::move(done),
                         chosen = std::move(chosen)](typename Access::GetResult r) mutable {
            std::uint64_t k = 0;
            for (const auto& reply : r.replies)
                k = std::max(k, reply.state.at(slot).ver.counter);
            const Version t{k + 1, self_.value};
            if (chosen)
                chosen(t);
            qaf_.quorum_set({slot, {std::move(x), t}}, [t, done = std::move(done)] { done(t); });
        });
    }

    /// Completes with the state whose value is returned; its version is the read's τ.
    void read(std::size_t slot, ReadDone done)
    {
        qaf_.quorum_get([this, slot, done = std::move(done)](typename Access::GetResult r) mutable {
            VersionedState<V> best = r.replies.front().state.at(slot);
            for (const auto& reply : r.replies)
                if (reply.state.at(slot).ver > best.ver)
                    best = reply.state.at(slot);
            qaf_.quorum_set({slot, {best.val, best.ver}}, [best, done = std::move(done)] { done(best); });
        });
    }

private:
    Access& qaf_;
    ProcessId self_;
};

/// A single integer register with initial value 0.
class RegisterAutomaton final : public Automaton
{
public:
    using Sm = RegisterArraySm<std::int64_t>;

    RegisterAutomaton(ProcessContext& ctx, QafVariant variant, const QuorumFamily& reads,
                      const QuorumFamily& writes)
        : ctx_(ctx), qaf_(make_quorum_access(variant, ctx, Sm{1, 0}, reads, writes)),
          client_(*qaf_, ctx.self())
    {
    }

    void invoke(const Operation& op) override
    {
        const auto id = op.id;
        switch (op.kind)
        {
        case OpKind::Write:
            client_.write(
                0, op.arg.get<std::int64_t>(),
                [this, id](Version t) { ctx_.respond(id, OpResult{Json(nullptr), t}); },
                [this, id](Version t) { ctx_.note("tau", Json{{"op", id}, {"t", to_json(t)}}); });
            return;
        case OpKind::Read:
            client_.read(0, [this, id](VersionedState<std::int64_t> s) {
                ctx_.respond(id, OpResult{Json(s.val), s.ver});
            });
            return;
        default:
            throw ProtocolError("register does not support " + std::string(to_string(op.kind)));
        }
    }
    void receive(ProcessId from, const Payload& payload) override
    {
        if (!qaf_->receive(from, payload))
            throw ProtocolError("register got foreign message " + std::string(payload.kind()));
    }
    void tick() override { qaf_->tick(); }
    [[nodiscard]] bool wants_ticks() const override { return qaf_->wants_ticks(); }

private:
    ProcessContext& ctx_;
    std::unique_ptr<QuorumAccess<Sm>> qaf_;
    RegisterClient<std::int64_t> client_;
};

} // namespace gqslab
