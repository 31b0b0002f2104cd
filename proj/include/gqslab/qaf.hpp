#pragma once

// Quorum access functions over an opaque replicated state.
//
// quorum_get() returns the states of every member of some read quorum;
// quorum_set(u) applies u at every member of some write quorum. The classical
// variant is a plain request/response exchange. The generalized variant adds a
// per-process logical clock and periodic unsolicited state propagation, so a
// process can collect fresh states from read-quorum members it cannot send to.

#include "gqslab/gqs.hpp"
#include "gqslab/simnet.hpp"

#include <algorithm>
#include <concepts>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <vector>

namespace gqslab
{

/// Deterministic state machine the quorum access functions replicate.
/// Updates are plain data so they can travel in messages.
template <class Sm>
concept StateMachine = requires(const Sm& sm, const typename Sm::State& s, const typename Sm::Update& u) {
    { sm.initial() } -> std::same_as<typename Sm::State>;
    { sm.apply(u, s) } -> std::same_as<typename Sm::State>;
    { Sm::state_json(s) } -> std::same_as<Json>;
    { Sm::update_json(u) } -> std::same_as<Json>;
};

enum class QafVariant
{
    Generalized,
    Classical,
};

inline std::string_view to_string(QafVariant v)
{
    return v == QafVariant::Generalized ? "generalized" : "classical";
}

inline QafVariant parse_qaf_variant(std::string_view name)
{
    if (name == "generalized")
        return QafVariant::Generalized;
    if (name == "classical")
        return QafVariant::Classical;
    throw std::invalid_argument("unknown qaf variant '" + std::string(name) +
                                "' (expected generalized|classical)");
}

enum class QafKind
{
    ClockReq,
    ClockResp,
    GetReq,
    GetResp,
    SetReq,
    SetResp,
};

inline std::string_view to_string(QafKind k)
{
    switch (k)
    {
    case QafKind::ClockReq: return "CLOCK_REQ";
    case QafKind::ClockResp: return "CLOCK_RESP";
    case QafKind::GetReq: return "GET_REQ";
    case QafKind::GetResp: return "GET_RESP";
    case QafKind::SetReq: return "SET_REQ";
    case QafKind::SetResp: return "SET_RESP";
    }
    return "?";
}

template <StateMachine Sm>
struct QafMessage final : Payload
{
    QafKind type = QafKind::ClockReq;
    /// Invocation id echoed from the requester's seq.
    std::optional<std::uint64_t> k;
    std::optional<std::uint64_t> clock;
    std::optional<typename Sm::State> state;
    std::optional<typename Sm::Update> update;

    [[nodiscard]] std::string_view kind() const override { return to_string(type); }
    [[nodiscard]] Json to_json() const override
    {
        Json j = Json::object();
        if (k)
            j["k"] = *k;
        if (clock)
            j["c"] = *clock;
        if (state)
            j["s"] = Sm::state_json(*state);
        if (update)
            j["u"] = Sm::update_json(*update);
        return j;
    }
};

template <StateMachine Sm>
class QuorumAccess
{
public:
    using State = typename Sm::State;
    using Update = typename Sm::Update;
    using Message = QafMessage<Sm>;

    struct Reply
    {
        ProcessId from;
        State state;
    };
    struct GetResult
    {
        ProcessSet quorum;
        std::vector<Reply> replies;
    };
    using GetDone = std::function<void(GetResult)>;
    using SetDone = std::function<void()>;

    QuorumAccess(ProcessContext& ctx, Sm sm, QuorumFamily reads, QuorumFamily writes)
        : ctx_(ctx), sm_(std::move(sm)), reads_(std::move(reads)), writes_(std::move(writes)),
          state_(sm_.initial())
    {
    }
    virtual ~QuorumAccess() = default;
    QuorumAccess(const QuorumAccess&) = delete;
    QuorumAccess& operator=(const QuorumAccess&) = delete;

    /// At most one get and one set may be outstanding at a time.
    virtual void quorum_get(GetDone done) = 0;
    virtual void quorum_set(Update u, SetDone done) = 0;

    /// Returns false if the payload is not one of ours.
    bool receive(ProcessId from, const Payload& payload)
    {
        const auto* m = dynamic_cast<const Message*>(&payload);
        if (m == nullptr)
            return false;
        handle(from, *m);
        return true;
    }
    virtual void tick() {}
    [[nodiscard]] virtual bool wants_ticks() const { return false; }

    [[nodiscard]] const State& state() const { return state_; }
    [[nodiscard]] std::uint64_t seq() const { return seq_; }
    [[nodiscard]] const Sm& machine() const { return sm_; }

protected:
    virtual void handle(ProcessId from, const Message& m) = 0;

    std::shared_ptr<Message> make(QafKind type) const
    {
        auto m = std::make_shared<Message>();
        m->type = type;
        return m;
    }

    /// First quorum in family order whose members all satisfy `ok`.
    template <class Pred>
    static std::optional<ProcessSet> first_quorum(const QuorumFamily& family, Pred ok)
    {
        for (const auto& q : family)
            if (std::all_of(q.begin(), q.end(), ok))
                return q;
        return std::nullopt;
    }

    void apply(const Update& u) { state_ = sm_.apply(u, state_); }

    [[noreturn]] void unexpected(const Message& m) const
    {
        throw ProtocolError("unexpected " + std::string(m.kind()) + " at " +
                            ctx_.process_name(ctx_.self()));
    }

    ProcessContext& ctx_;
    Sm sm_;
    QuorumFamily reads_;
    QuorumFamily writes_;
    State state_;
    std::uint64_t seq_ = 0;
};

/// Logical-clock quorum access for generalized quorum systems.
template <StateMachine Sm>
class GeneralizedQaf final : public QuorumAccess<Sm>
{
    using Base = QuorumAccess<Sm>;

public:
    using typename Base::GetDone;
    using typename Base::GetResult;
    using typename Base::Message;
    using typename Base::SetDone;
    using typename Base::State;
    using typename Base::Update;

    GeneralizedQaf(ProcessContext& ctx, Sm sm, QuorumFamily reads, QuorumFamily writes)
        : Base(ctx, std::move(sm), std::move(reads), std::move(writes)),
          latest_(ctx.process_count() + 1)
    {
    }

    void quorum_get(GetDone done) override
    {
        if (get_)
            throw ProtocolError("quorum_get already outstanding");
        get_.emplace();
        get_->seq = ++this->seq_;
        get_done_ = std::move(done);
        auto m = this->make(QafKind::ClockReq);
        m->k = get_->seq;
        this->ctx_.send_all(std::move(m));
    }

    void quorum_set(Update u, SetDone done) override
    {
        if (set_)
            throw ProtocolError("quorum_set already outstanding");
        set_.emplace();
        set_->seq = ++this->seq_;
        set_done_ = std::move(done);
        auto m = this->make(QafKind::SetReq);
        m->k = set_->seq;
        m->update = std::move(u);
        this->ctx_.send_all(std::move(m));
    }

    void tick() override
    {
        ++clock_;
        auto m = this->make(QafKind::GetResp);
        m->state = this->state_;
        m->clock = clock_;
        this->ctx_.send_all(std::move(m));
    }
    [[nodiscard]] bool wants_ticks() const override { return true; }

    [[nodiscard]] std::uint64_t clock() const { return clock_; }
    /// Cached (state, clock) from the freshest GET_RESP of `p`.
    [[nodiscard]] const std::optional<std::pair<State, std::uint64_t>>& latest(ProcessId p) const
    {
        return latest_.at(p.value);
    }

protected:
    void handle(ProcessId from, const Message& m) override
    {
        switch (m.type)
        {
        case QafKind::ClockReq:
        {
            auto r = this->make(QafKind::ClockResp);
            r->k = m.k;
            r->clock = clock_;
            this->ctx_.send(from, std::move(r));
            return;
        }
        case QafKind::SetReq:
        {
            this->apply(*m.update);
            ++clock_;
            auto r = this->make(QafKind::SetResp);
            r->k = m.k;
            r->clock = clock_;
            this->ctx_.send(from, std::move(r));
            return;
        }
        case QafKind::ClockResp:
            if (acknowledge(get_, from, m))
                try_finish_get();
            return;
        case QafKind::SetResp:
            if (acknowledge(set_, from, m))
                try_finish_set();
            return;
        case QafKind::GetResp:
        {
            auto& slot = latest_.at(from.value);
            if (!slot || *m.clock > slot->second)
                slot.emplace(*m.state, *m.clock);
            try_finish_get();
            try_finish_set();
            return;
        }
        case QafKind::GetReq: break;
        }
        this->unexpected(m);
    }

private:
    struct Pending
    {
        std::uint64_t seq = 0;
        bool collecting_clocks = true;
        std::map<ProcessId, std::uint64_t> clocks;
        std::uint64_t cutoff = 0;
    };

    /// Records a clock response; returns true once the cutoff is fixed.
    bool acknowledge(std::optional<Pending>& pending, ProcessId from, const Message& m)
    {
        if (!pending || pending->seq != *m.k || !pending->collecting_clocks)
            return false;
        pending->clocks[from] = *m.clock;
        auto w = Base::first_quorum(this->writes_,
                                    [&](ProcessId q) { return pending->clocks.count(q) != 0; });
        if (!w)
            return false;
        for (auto q : *w)
            pending->cutoff = std::max(pending->cutoff, pending->clocks[q]);
        pending->collecting_clocks = false;
        if (this->ctx_.debug_enabled())
        {
            Json quorum = Json::array();
            for (auto q : *w)
                quorum.push_back(this->ctx_.process_name(q));
            this->ctx_.debug(&pending == &get_ ? "c_get" : "c_set",
                             Json{{"seq", pending->seq}, {"cutoff", pending->cutoff}, {"quorum", quorum}});
        }
        return true;
    }

    std::optional<ProcessSet> fresh_read_quorum(std::uint64_t cutoff) const
    {
        return Base::first_quorum(this->reads_, [&](ProcessId q) {
            const auto& slot = latest_[q.value];
            return slot && slot->second >= cutoff;
        });
    }

    void try_finish_get()
    {
        if (!get_ || get_->collecting_clocks)
            return;
        auto r = fresh_read_quorum(get_->cutoff);
        if (!r)
            return;
        GetResult result{*r, {}};
        for (auto q : *r)
            result.replies.push_back({q, latest_[q.value]->first});
        get_.reset();
        auto done = std::move(get_done_);
        done(std::move(result));
    }

    void try_finish_set()
    {
        if (!set_ || set_->collecting_clocks || !fresh_read_quorum(set_->cutoff))
            return;
        set_.reset();
        auto done = std::move(set_done_);
        done();
    }

    std::uint64_t clock_ = 0;
    std::vector<std::optional<std::pair<State, std::uint64_t>>> latest_;
    std::optional<Pending> get_;
    std::optional<Pending> set_;
    GetDone get_done_;
    SetDone set_done_;
};

/// Request/response quorum access for classical quorum systems.
template <StateMachine Sm>
class ClassicalQaf final : public QuorumAccess<Sm>
{
    using Base = QuorumAccess<Sm>;

public:
    using typename Base::GetDone;
    using typename Base::GetResult;
    using typename Base::Message;
    using typename Base::SetDone;
    using typename Base::State;
    using typename Base::Update;

    using Base::Base;

    void quorum_get(GetDone done) override
    {
        if (get_seq_)
            throw ProtocolError("quorum_get already outstanding");
        get_seq_ = ++this->seq_;
        get_replies_.clear();
        get_done_ = std::move(done);
        auto m = this->make(QafKind::GetReq);
        m->k = *get_seq_;
        this->ctx_.send_all(std::move(m));
    }

    void quorum_set(Update u, SetDone done) override
    {
        if (set_seq_)
            throw ProtocolError("quorum_set already outstanding");
        set_seq_ = ++this->seq_;
        set_acks_ = ProcessSet{};
        set_done_ = std::move(done);
        auto m = this->make(QafKind::SetReq);
        m->k = *set_seq_;
        m->update = std::move(u);
        this->ctx_.send_all(std::move(m));
    }

protected:
    void handle(ProcessId from, const Message& m) override
    {
        switch (m.type)
        {
        case QafKind::GetReq:
        {
            auto r = this->make(QafKind::GetResp);
            r->k = m.k;
            r->state = this->state_;
            this->ctx_.send(from, std::move(r));
            return;
        }
        case QafKind::SetReq:
        {
            this->apply(*m.update);
            auto r = this->make(QafKind::SetResp);
            r->k = m.k;
            this->ctx_.send(from, std::move(r));
            return;
        }
        case QafKind::GetResp:
        {
            if (!get_seq_ || !m.k || *m.k != *get_seq_)
                return;
            get_replies_.emplace(from, *m.state);
            auto r = Base::first_quorum(this->reads_,
                                        [&](ProcessId q) { return get_replies_.count(q) != 0; });
            if (!r)
                return;
            GetResult result{*r, {}};
            for (auto q : *r)
                result.replies.push_back({q, get_replies_.at(q)});
            get_seq_.reset();
            auto done = std::move(get_done_);
            done(std::move(result));
            return;
        }
        case QafKind::SetResp:
        {
            if (!set_seq_ || *m.k != *set_seq_)
                return;
            set_acks_.insert(from);
            if (!Base::first_quorum(this->writes_, [&](ProcessId q) { return set_acks_.contains(q); }))
                return;
            set_seq_.reset();
            auto done = std::move(set_done_);
            done();
            return;
        }
        case QafKind::ClockReq:
        case QafKind::ClockResp: break;
        }
        this->unexpected(m);
    }

private:
    std::optional<std::uint64_t> get_seq_;
    std::map<ProcessId, State> get_replies_;
    GetDone get_done_;
    std::optional<std::uint64_t> set_seq_;
    ProcessSet set_acks_;
    SetDone set_done_;
};

template <StateMachine Sm>
std::unique_ptr<QuorumAccess<Sm>> make_quorum_access(QafVariant variant, ProcessContext& ctx, Sm sm,
                                                     const QuorumFamily& reads,
                                                     const QuorumFamily& writes)
{
    if (variant == QafVariant::Classical)
        return std::make_unique<ClassicalQaf<Sm>>(ctx, std::move(sm), reads, writes);
    return std::make_unique<GeneralizedQaf<Sm>>(ctx, std::move(sm), reads, writes);
}

/// State is the list of applied update ids in application order.
struct UpdateLog
{
    using State = std::vector<std::uint64_t>;
    using Update = std::uint64_t;

    [[nodiscard]] State initial() const { return {}; }
    [[nodiscard]] State apply(const Update& u, State s) const
    {
        s.push_back(u);
        return s;
    }
    static Json state_json(const State& s) { return Json(s); }
    static Json update_json(const Update& u) { return Json(u); }
};

/// Exposes quorum_get / quorum_set directly as workload operations.
/// A quorum_set applies an update carrying its own operation id.
class QafRawAutomaton final : public Automaton
{
public:
    QafRawAutomaton(ProcessContext& ctx, QafVariant variant, const QuorumFamily& reads,
                    const QuorumFamily& writes)
        : ctx_(ctx), qaf_(make_quorum_access(variant, ctx, UpdateLog{}, reads, writes))
    {
    }

    void invoke(const Operation& op) override
    {
        const auto id = op.id;
        if (op.kind == OpKind::QuorumSet)
        {
            qaf_->quorum_set(id, [this, id] { ctx_.respond(id, OpResult{Json(nullptr), std::nullopt}); });
            return;
        }
        if (op.kind != OpKind::QuorumGet)
            throw ProtocolError("qaf-raw does not support " + std::string(to_string(op.kind)));
        qaf_->quorum_get([this, id](QuorumAccess<UpdateLog>::GetResult r) {
            Json quorum = Json::array();
            Json states = Json::array();
            for (const auto& reply : r.replies)
            {
                quorum.push_back(ctx_.process_name(reply.from));
                states.push_back(reply.state);
            }
            ctx_.respond(id, OpResult{Json{{"quorum", quorum}, {"states", states}}, std::nullopt});
        });
    }
    void receive(ProcessId from, const Payload& payload) override
    {
        if (!qaf_->receive(from, payload))
            throw ProtocolError("qaf-raw got foreign message " + std::string(payload.kind()));
    }
    void tick() override { qaf_->tick(); }
    [[nodiscard]] bool wants_ticks() const override { return qaf_->wants_ticks(); }

    [[nodiscard]] const QuorumAccess<UpdateLog>& access() const { return *qaf_; }

private:
    ProcessContext& ctx_;
    std::unique_ptr<QuorumAccess<UpdateLog>> qaf_;
};

} // namespace gqslab
