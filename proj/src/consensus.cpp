#include "gqslab/consensus.hpp"

#include <algorithm>

namespace gqslab
{

ProcessId leader(std::uint64_t view, std::size_t n)
{
    if (view < 1)
        throw std::invalid_argument("views start at 1");
    if (n == 0)
        throw std::invalid_argument("no processes");
    return ProcessId(static_cast<std::uint32_t>((view - 1) % n + 1));
}

std::string_view to_string(Phase phase)
{
    switch (phase)
    {
    case Phase::Enter: return "ENTER";
    case Phase::Propose: return "PROPOSE";
    case Phase::Accept: return "ACCEPT";
    case Phase::Decide: return "DECIDE";
    }
    return "?";
}

std::string_view ConsensusMessage::kind() const
{
    switch (type)
    {
    case Type::OneB: return "1B";
    case Type::TwoA: return "2A";
    case Type::TwoB: return "2B";
    }
    return "?";
}

Json ConsensusMessage::to_json() const
{
    Json j{{"view", view}};
    if (type == Type::OneB)
        j["aview"] = aview;
    j["x"] = x ? Json(*x) : Json(nullptr);
    return j;
}

ConsensusAutomaton::ConsensusAutomaton(ProcessContext& ctx, QuorumFamily reads, QuorumFamily writes,
                                       Time view_constant)
    : ctx_(ctx), reads_(std::move(reads)), writes_(std::move(writes)), view_constant_(view_constant)
{
    if (view_constant_ <= 0)
        throw std::invalid_argument("view constant must be positive");
}

void ConsensusAutomaton::start()
{
    enter_next_view();
}

void ConsensusAutomaton::timer(std::string_view name)
{
    if (name == view_timer)
        enter_next_view();
}

void ConsensusAutomaton::invoke(const Operation& op)
{
    if (op.kind != OpKind::Propose)
        throw ProtocolError("consensus does not support " + std::string(to_string(op.kind)));
    if (my_val_ || pending_op_)
        throw ProtocolError("propose invoked twice at " + ctx_.process_name(ctx_.self()));
    my_val_ = op.arg.get<ConsensusValue>();
    pending_op_ = op.id;
    respond_if_decided();
    // A leader that skipped its turn for lack of a value may now propose.
    try_lead();
}

void ConsensusAutomaton::send(ProcessId to, ConsensusMessage::Type type, std::optional<ConsensusValue> x)
{
    auto m = std::make_shared<ConsensusMessage>();
    m->type = type;
    m->view = view_;
    m->aview = aview_;
    m->x = x;
    if (type == ConsensusMessage::Type::OneB)
        ctx_.send(to, std::move(m));
    else
        ctx_.send_all(std::move(m));
}

void ConsensusAutomaton::enter_next_view()
{
    ++view_;
    ctx_.start_timer(view_timer, static_cast<Time>(view_) * view_constant_);
    send(leader(view_, ctx_.process_count()), ConsensusMessage::Type::OneB, val_);
    phase_ = Phase::Enter;
    ctx_.note("view_enter", Json{{"view", view_}});

    ones_.erase(ones_.begin(), ones_.lower_bound(view_));
    twoa_.erase(twoa_.begin(), twoa_.lower_bound(view_));
    twob_.erase(twob_.begin(), twob_.lower_bound(view_));

    try_lead();
    if (auto it = twoa_.find(view_); it != twoa_.end())
        on_2a(it->second);
    try_decide();
}

void ConsensusAutomaton::receive(ProcessId from, const Payload& payload)
{
    const auto* m = dynamic_cast<const ConsensusMessage*>(&payload);
    if (m == nullptr)
        throw ProtocolError("consensus got foreign message " + std::string(payload.kind()));
    if (m->view == 0)
        throw ProtocolError("consensus message with view 0");
    if (m->view < view_)
        return;
    switch (m->type)
    {
    case ConsensusMessage::Type::OneB:
        ones_[m->view][from] = OneB{m->aview, m->x};
        if (m->view == view_)
            try_lead();
        return;
    case ConsensusMessage::Type::TwoA:
        if (!m->x)
            throw ProtocolError("2A without a value");
        if (m->view > view_)
            twoa_.emplace(m->view, *m->x);
        else
            on_2a(*m->x);
        return;
    case ConsensusMessage::Type::TwoB:
        if (!m->x)
            throw ProtocolError("2B without a value");
        twob_[m->view][from] = *m->x;
        if (m->view == view_)
            try_decide();
        return;
    }
}

void ConsensusAutomaton::try_lead()
{
    if (phase_ != Phase::Enter || leader(view_, ctx_.process_count()) != ctx_.self())
        return;
    const auto it = ones_.find(view_);
    if (it == ones_.end())
        return;
    const auto& got = it->second;
    for (const auto& r : reads_)
    {
        if (!std::all_of(r.begin(), r.end(), [&](ProcessId q) { return got.count(q) != 0; }))
            continue;
        std::optional<ConsensusValue> chosen;
        std::uint64_t best_view = 0;
        for (auto q : r)
        {
            const auto& b = got.at(q);
            if (b.x && (!chosen || b.aview > best_view))
            {
                chosen = b.x;
                best_view = b.aview;
            }
        }
        if (!chosen)
        {
            if (!my_val_)
                return;
            chosen = my_val_;
        }
        send(ctx_.self(), ConsensusMessage::Type::TwoA, chosen);
        phase_ = Phase::Propose;
        ctx_.debug("lead", Json{{"view", view_}, {"x", *chosen}});
        return;
    }
}

void ConsensusAutomaton::on_2a(ConsensusValue x)
{
    if (phase_ != Phase::Enter && phase_ != Phase::Propose)
        return;
    val_ = x;
    aview_ = view_;
    send(ctx_.self(), ConsensusMessage::Type::TwoB, x);
    phase_ = Phase::Accept;
}

void ConsensusAutomaton::try_decide()
{
    if (phase_ == Phase::Decide)
        return;
    const auto it = twob_.find(view_);
    if (it == twob_.end())
        return;
    const auto& got = it->second;
    for (const auto& w : writes_)
    {
        const ProcessId first = w.front();
        const auto f = got.find(first);
        if (f == got.end())
            continue;
        const ConsensusValue x = f->second;
        if (!std::all_of(w.begin(), w.end(), [&](ProcessId q) {
                const auto g = got.find(q);
                return g != got.end() && g->second == x;
            }))
            continue;
        val_ = x;
        aview_ = view_;
        phase_ = Phase::Decide;
        if (!decided_)
        {
            decided_ = x;
            ctx_.note("decide", Json{{"view", view_}, {"value", x}});
        }
        respond_if_decided();
        return;
    }
}

void ConsensusAutomaton::respond_if_decided()
{
    if (!pending_op_ || !decided_)
        return;
    const auto id = *pending_op_;
    pending_op_.reset();
    ctx_.respond(id, OpResult{Json(*decided_), std::nullopt});
}

} // namespace gqslab
