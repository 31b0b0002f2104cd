#include "gqslab/simnet.hpp"
#include "gqslab/rng.hpp"

#include <cmath>
#include <deque>
#include <queue>
#include <tuple>
#include <variant>

namespace gqslab
{

std::string_view to_string(TimingMode mode)
{
    return mode == TimingMode::Async ? "async" : "psync";
}

TimingMode parse_timing_mode(std::string_view name)
{
    if (name == "async")
        return TimingMode::Async;
    if (name == "psync")
        return TimingMode::PartialSync;
    throw std::invalid_argument("unknown mode '" + std::string(name) + "' (expected async|psync)");
}

FloodResult flood_forward(ProcessId p, const Envelope& e, ProcessSet all, std::set<EnvelopeId>& seen)
{
    FloodResult result;
    if (!seen.insert(e.id).second)
        return result;
    result.fresh = true;
    result.deliver = e.addressed_to(p);
    result.forwarded = e;
    result.forwarded.hops.insert(p);
    result.targets = all - result.forwarded.hops;
    return result;
}

Time timer_expiry(TimingMode mode, Time gst, Time now, Time duration, double drift)
{
    if (mode == TimingMode::PartialSync && now < gst)
        return now + static_cast<Time>(std::ceil(static_cast<double>(duration) * drift));
    return now + duration;
}

void SimConfig::validate() const
{
    const std::size_t n = names.size();
    if (n == 0 || graph.universe() != n)
        throw ModelError("graph and process names disagree on the process count");
    validate_pattern(pattern, n);
    for (const auto& [p, t] : schedule.crashes)
    {
        if (!pattern.crashed.contains(p))
            throw ModelError("schedule crashes " + names.name(p) + ", which pattern '" +
                             pattern.name + "' does not allow");
        if (t < 0)
            throw ModelError("negative crash time");
    }
    for (const auto& [c, t] : schedule.disconnects)
    {
        if (!pattern.dropped.contains(c))
            throw ModelError("schedule disconnects " + names.format(c) + ", which pattern '" +
                             pattern.name + "' does not allow");
        if (t < 0)
            throw ModelError("negative disconnect time");
    }
    if (delta <= 0)
        throw ModelError("delta must be positive");
    if (tick_interval <= 0)
        throw ModelError("tick interval must be positive");
    if (view_constant <= 0)
        throw ModelError("view constant must be positive");
    if (gst < 0)
        throw ModelError("gst must be non-negative");
    if (!(mean_delay > 0))
        throw ModelError("mean delay must be positive");
    if (!(max_drift >= 1.0))
        throw ModelError("max drift must be >= 1");
    if (await && !await->subset_of(ProcessSet::first_n(n)))
        throw ModelError("await set names an unknown process");
}

namespace
{

enum Rank : int
{
    RankCrash = 0,
    RankDisconnect,
    RankStartup,
    RankTimer,
    RankLocal,
    RankDeliver,
    RankTick,
    RankArrival,
    RankDequeue,
};

using EnvelopePtr = std::shared_ptr<const Envelope>;

struct DeliverEvent
{
    Channel channel;
    EnvelopePtr envelope;
};
struct LocalEvent
{
    ProcessId process;
    EnvelopePtr envelope;
};
struct TimerEvent
{
    ProcessId process;
    std::string name;
    std::uint64_t generation = 0;
};
struct TickEvent
{
    ProcessId process;
};
struct CrashEvent
{
    ProcessId process;
};
struct DisconnectEvent
{
    Channel channel;
};
struct StartupEvent
{
    ProcessId process;
};
struct ArrivalEvent
{
    std::size_t index = 0;
};
struct DequeueEvent
{
    ProcessId process;
};

using EventBody = std::variant<DeliverEvent, LocalEvent, TimerEvent, TickEvent, CrashEvent,
                               DisconnectEvent, StartupEvent, ArrivalEvent, DequeueEvent>;

struct QueuedEvent
{
    Time time = 0;
    int rank = 0;
    std::uint64_t key1 = 0;
    std::uint64_t key2 = 0;
    std::uint64_t seq = 0;
    EventBody body;
};

struct LaterFirst
{
    bool operator()(const QueuedEvent& a, const QueuedEvent& b) const
    {
        return std::tie(a.time, a.rank, a.key1, a.key2, a.seq) >
               std::tie(b.time, b.rank, b.key1, b.key2, b.seq);
    }
};

Json envelope_json(const Envelope& e, const ProcessNames& names)
{
    Json j;
    j["env"] = Json::array({names.name(e.id.origin), e.id.seq});
    j["dest"] = e.dest ? Json(names.name(*e.dest)) : Json(nullptr);
    Json hops = Json::array();
    for (auto p : e.hops)
        hops.push_back(names.name(p));
    j["hops"] = std::move(hops);
    j["kind"] = std::string(e.payload->kind());
    j["msg"] = e.payload->to_json();
    return j;
}

class Simulation
{
public:
    Simulation(const SimConfig& config, const AutomatonFactory& factory,
               const std::vector<WorkloadItem>& workload, Json run_info)
        : config_(config), workload_(workload), rng_(config.seed),
          all_(ProcessSet::first_n(config.names.size())),
          full_(config.trace_level == TraceLevel::Full)
    {
        config_.validate();
        for (const auto& item : workload_)
            if (!all_.contains(item.process))
                throw ModelError("workload names an unknown process");
        procs_.resize(config_.names.size() + 1);
        for (auto p : all_)
        {
            auto& st = procs_[p.value];
            st.context = std::make_unique<Context>(*this, p);
            st.automaton = factory(*st.context);
        }
        const ProcessSet awaited = config_.await.value_or(all_);
        for (const auto& item : workload_)
            if (awaited.contains(item.process))
                ++awaited_remaining_;
        winding_down_ = config_.stop_when_complete && awaited_remaining_ == 0;

        Json header = std::move(run_info);
        Json processes = Json::array();
        for (auto p : all_)
            processes.push_back(config_.names.name(p));
        header["processes"] = processes;
        header["mode"] = std::string(to_string(config_.mode));
        header["gst"] = config_.gst;
        header["delta"] = config_.delta;
        header["pin_delays"] = config_.pin_delays;
        header["seed"] = config_.seed;
        header["tick_interval"] = config_.tick_interval;
        header["view_constant"] = config_.view_constant;
        header["pattern"] = config_.pattern.name;
        header["trace_level"] = full_ ? "full" : "operations";
        Json crashes = Json::object();
        for (const auto& [p, t] : config_.schedule.crashes)
            crashes[config_.names.name(p)] = t;
        Json disconnects = Json::array();
        for (const auto& [c, t] : config_.schedule.disconnects)
            disconnects.push_back(
                Json::array({config_.names.name(c.from), config_.names.name(c.to), t}));
        header["schedule"] = Json{{"crash", crashes}, {"disconnect", disconnects}};
        Json await = Json::array();
        for (auto p : awaited)
            await.push_back(config_.names.name(p));
        header["await"] = await;
        record(0, "run", "", std::move(header));
    }

    Trace run()
    {
        for (const auto& [p, t] : config_.schedule.crashes)
            push(t, RankCrash, p.value, 0, CrashEvent{p});
        for (const auto& [c, t] : config_.schedule.disconnects)
            push(t, RankDisconnect, c.from.value, c.to.value, DisconnectEvent{c});
        for (auto p : all_)
            push(0, RankStartup, p.value, 0, StartupEvent{p});
        for (std::size_t i = 0; i < workload_.size(); ++i)
            push(workload_[i].time, RankArrival, workload_[i].process.value, i, ArrivalEvent{i});

        std::optional<StopReason> reason;
        while (!queue_.empty())
        {
            if (processed_ >= config_.max_events)
            {
                reason = StopReason::MaxEvents;
                break;
            }
            if (config_.end_time && queue_.top().time > *config_.end_time)
            {
                reason = StopReason::EndTime;
                break;
            }
            QueuedEvent ev = queue_.top();
            queue_.pop();
            now_ = ev.time;
            ++processed_;
            std::visit([this](auto& body) { handle(body); }, ev.body);
        }
        if (!reason)
            reason = awaited_remaining_ == 0 ? StopReason::Completed : StopReason::Drained;

        std::size_t pending = 0;
        for (auto p : all_)
            pending += procs_[p.value].outstanding ? 1 : 0;
        Json end;
        end["reason"] = std::string(to_string(*reason));
        end["quiescent"] = is_quiescent(*reason);
        end["events"] = processed_;
        end["pending_ops"] = pending;
        record(now_, "end", "", std::move(end));
        return std::move(trace_);
    }

private:
    class Context final : public ProcessContext
    {
    public:
        Context(Simulation& sim, ProcessId self) : sim_(sim), self_(self) {}

        void send(ProcessId to, PayloadPtr payload) override { sim_.originate(self_, to, std::move(payload)); }
        void send_all(PayloadPtr payload) override
        {
            sim_.originate(self_, std::nullopt, std::move(payload));
        }
        void note(std::string_view what, Json detail) override
        {
            sim_.record(sim_.now_, "note", sim_.name(self_),
                        Json{{"what", std::string(what)}, {"detail", std::move(detail)}});
        }
        void debug(std::string_view what, Json detail) override
        {
            if (sim_.full_)
                sim_.record(sim_.now_, "debug", sim_.name(self_),
                            Json{{"what", std::string(what)}, {"detail", std::move(detail)}});
        }
        [[nodiscard]] bool debug_enabled() const override { return sim_.full_; }
        [[nodiscard]] ProcessId self() const override { return self_; }
        [[nodiscard]] std::size_t process_count() const override { return sim_.config_.names.size(); }
        [[nodiscard]] const std::string& process_name(ProcessId p) const override { return sim_.name(p); }
        [[nodiscard]] Time now() const override { return sim_.now_; }
        void start_timer(std::string_view name, Time duration) override
        {
            sim_.start_timer(self_, name, duration);
        }
        void respond(std::uint64_t op_id, OpResult result) override
        {
            sim_.respond(self_, op_id, std::move(result));
        }

    private:
        Simulation& sim_;
        ProcessId self_;
    };

    struct ProcState
    {
        std::unique_ptr<Context> context;
        std::unique_ptr<Automaton> automaton;
        bool crashed = false;
        std::set<EnvelopeId> seen;
        std::uint64_t next_seq = 0;
        std::map<std::string, std::uint64_t, std::less<>> timer_generation;
        std::deque<std::size_t> waiting;
        std::optional<std::uint64_t> outstanding;
    };

    const std::string& name(ProcessId p) const { return config_.names.name(p); }

    void record(Time t, std::string kind, std::string subject, Json payload,
                std::optional<std::uint64_t> op_id = std::nullopt,
                std::optional<Version> version = std::nullopt)
    {
        trace_.events.push_back(TraceEvent{t, std::move(kind), std::move(subject), std::move(payload),
                                           op_id, version});
    }

    void push(Time t, int rank, std::uint64_t key1, std::uint64_t key2, EventBody body)
    {
        queue_.push(QueuedEvent{t, rank, key1, key2, next_event_seq_++, std::move(body)});
    }

    std::string channel_name(Channel c) const { return name(c.from) + "->" + name(c.to); }

    bool disconnected(Channel c) const
    {
        auto it = config_.schedule.disconnects.find(c);
        return it != config_.schedule.disconnects.end() && now_ >= it->second;
    }

    Time draw_delay()
    {
        if (config_.mode == TimingMode::PartialSync && now_ >= config_.gst)
            return config_.pin_delays ? config_.delta : rng_.uniform(1, config_.delta);
        double mean = config_.mean_delay;
        if (config_.mode == TimingMode::PartialSync)
            mean *= 4.0; // pre-GST chaos
        double extra = std::floor(rng_.exponential(mean));
        if (config_.adversarial && rng_.chance(0.05))
            extra *= static_cast<double>(rng_.uniform(2, 20));
        return 1 + static_cast<Time>(std::min(extra, 1e9));
    }

    void transmit(ProcessId from, const EnvelopePtr& env, ProcessSet targets)
    {
        for (auto q : targets)
        {
            const Channel c{from, q};
            if (full_)
                record(now_, "send", channel_name(c), envelope_json(*env, config_.names));
            if (disconnected(c))
            {
                if (full_)
                    record(now_, "drop", channel_name(c),
                           Json{{"env", Json::array({name(env->id.origin), env->id.seq})},
                                {"reason", "disconnected"}});
                continue;
            }
            const Time at = now_ + draw_delay();
            std::uint64_t k1 = from.value;
            std::uint64_t k2 = q.value;
            if (config_.adversarial)
            {
                k1 = rng_.raw();
                k2 = 0;
            }
            push(at, RankDeliver, k1, k2, DeliverEvent{c, env});
        }
    }

    void originate(ProcessId self, std::optional<ProcessId> dest, PayloadPtr payload)
    {
        auto& st = procs_[self.value];
        auto env = std::make_shared<Envelope>();
        env->id = EnvelopeId{self, st.next_seq++};
        env->dest = dest;
        env->hops = ProcessSet{self};
        env->payload = std::move(payload);
        st.seen.insert(env->id);
        EnvelopePtr shared = env;
        if (!dest || *dest == self)
        {
            std::uint64_t key = config_.adversarial ? rng_.raw() : self.value;
            push(now_, RankLocal, key, 0, LocalEvent{self, shared});
        }
        if (!dest || *dest != self)
            transmit(self, shared, all_ - ProcessSet{self});
    }

    void start_timer(ProcessId p, std::string_view timer_name, Time duration)
    {
        auto& st = procs_[p.value];
        auto it = st.timer_generation.find(timer_name);
        if (it == st.timer_generation.end())
            it = st.timer_generation.emplace(std::string(timer_name), 0).first;
        const std::uint64_t generation = ++it->second;
        double drift = 1.0;
        if (config_.mode == TimingMode::PartialSync && now_ < config_.gst && config_.max_drift > 1.0)
            drift = rng_.real(1.0, config_.max_drift);
        const Time at = timer_expiry(config_.mode, config_.gst, now_, duration, drift);
        push(at, RankTimer, p.value, 0, TimerEvent{p, std::string(timer_name), generation});
    }

    void respond(ProcessId p, std::uint64_t op_id, OpResult result)
    {
        auto& st = procs_[p.value];
        if (st.outstanding != op_id)
            throw ProtocolError(name(p) + " responded to op " + std::to_string(op_id) +
                                " which is not outstanding");
        st.outstanding.reset();
        record(now_, "respond", name(p), Json{{"result", std::move(result.value)}}, op_id,
               result.version);
        if (config_.await.value_or(all_).contains(p))
        {
            --awaited_remaining_;
            if (awaited_remaining_ == 0 && config_.stop_when_complete)
                winding_down_ = true;
        }
        push(now_, RankDequeue, p.value, 0, DequeueEvent{p});
    }

    void handle(DeliverEvent& ev)
    {
        const ProcessId q = ev.channel.to;
        auto& st = procs_[q.value];
        if (st.crashed)
        {
            if (full_)
                record(now_, "drop", channel_name(ev.channel),
                       Json{{"env", Json::array({name(ev.envelope->id.origin), ev.envelope->id.seq})},
                            {"reason", "receiver crashed"}});
            return;
        }
        auto routed = flood_forward(q, *ev.envelope, all_, st.seen);
        if (full_)
            record(now_, "deliver", channel_name(ev.channel),
                   Json{{"env", Json::array({name(ev.envelope->id.origin), ev.envelope->id.seq})},
                        {"fresh", routed.fresh}});
        if (!routed.targets.empty())
            transmit(q, std::make_shared<const Envelope>(routed.forwarded), routed.targets);
        if (routed.deliver)
            st.automaton->receive(ev.envelope->origin(), *ev.envelope->payload);
    }

    void handle(LocalEvent& ev)
    {
        auto& st = procs_[ev.process.value];
        if (st.crashed)
            return;
        if (full_)
            record(now_, "local", name(ev.process), envelope_json(*ev.envelope, config_.names));
        st.automaton->receive(ev.process, *ev.envelope->payload);
    }

    void handle(TimerEvent& ev)
    {
        auto& st = procs_[ev.process.value];
        if (st.crashed || winding_down_)
            return;
        auto it = st.timer_generation.find(ev.name);
        if (it == st.timer_generation.end() || it->second != ev.generation)
            return;
        if (full_)
            record(now_, "timer", name(ev.process), Json{{"name", ev.name}});
        st.automaton->timer(ev.name);
    }

    void handle(TickEvent& ev)
    {
        auto& st = procs_[ev.process.value];
        if (st.crashed || winding_down_)
            return;
        if (full_)
            record(now_, "tick", name(ev.process), Json::object());
        st.automaton->tick();
        push(now_ + config_.tick_interval, RankTick, ev.process.value, 0, TickEvent{ev.process});
    }

    void handle(CrashEvent& ev)
    {
        procs_[ev.process.value].crashed = true;
        record(now_, "crash", name(ev.process), Json::object());
    }

    void handle(DisconnectEvent& ev)
    {
        record(now_, "disconnect", channel_name(ev.channel), Json::object());
    }

    void handle(StartupEvent& ev)
    {
        auto& st = procs_[ev.process.value];
        if (st.crashed)
            return;
        st.automaton->start();
        if (st.automaton->wants_ticks() && !winding_down_)
            push(now_ + config_.tick_interval, RankTick, ev.process.value, 0, TickEvent{ev.process});
    }

    void handle(ArrivalEvent& ev)
    {
        const auto& item = workload_[ev.index];
        auto& st = procs_[item.process.value];
        if (st.crashed)
        {
            record(now_, "note", name(item.process),
                   Json{{"what", "arrival_at_crashed"}, {"detail", Json{{"op_id", ev.index}}}});
            return;
        }
        st.waiting.push_back(ev.index);
        start_next(item.process);
    }

    void handle(DequeueEvent& ev) { start_next(ev.process); }

    void start_next(ProcessId p)
    {
        auto& st = procs_[p.value];
        if (st.crashed || st.outstanding || st.waiting.empty())
            return;
        const std::size_t index = st.waiting.front();
        st.waiting.pop_front();
        const auto& item = workload_[index];
        Operation op{index, p, item.kind, item.arg};
        st.outstanding = op.id;
        record(now_, "invoke", name(p), Json{{"op", std::string(to_string(op.kind))}, {"arg", op.arg}},
               op.id);
        st.automaton->invoke(op);
    }

    SimConfig config_;
    const std::vector<WorkloadItem>& workload_;
    Rng rng_;
    ProcessSet all_;
    bool full_;
    std::vector<ProcState> procs_;
    std::priority_queue<QueuedEvent, std::vector<QueuedEvent>, LaterFirst> queue_;
    std::uint64_t next_event_seq_ = 0;
    std::uint64_t processed_ = 0;
    std::size_t awaited_remaining_ = 0;
    bool winding_down_ = false;
    Time now_ = 0;
    Trace trace_;
};

} // namespace

Trace run_simulation(const SimConfig& config, const AutomatonFactory& factory,
                     const std::vector<WorkloadItem>& workload, Json run_info)
{
    Simulation sim(config, factory, workload, std::move(run_info));
    return sim.run();
}

} // namespace gqslab
