#pragma once

// Seeded discrete-event simulator for message-passing protocols over a network
// with crash and channel-disconnect failures.
//
// Messages travel in envelopes that every process floods onward on first
// receipt, so connectivity in the residual graph is transitive. A process that
// sends "to all" also delivers to itself locally; there are no (p, p) channels.

#include "gqslab/model.hpp"
#include "gqslab/trace.hpp"
#include "gqslab/types.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace gqslab
{

/// Protocol message carried by the network. Immutable once sent.
class Payload
{
public:
    virtual ~Payload() = default;
    [[nodiscard]] virtual std::string_view kind() const = 0;
    [[nodiscard]] virtual Json to_json() const = 0;
};

using PayloadPtr = std::shared_ptr<const Payload>;

class ProtocolError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

struct EnvelopeId
{
    ProcessId origin;
    std::uint64_t seq = 0;

    friend constexpr auto operator<=>(const EnvelopeId&, const EnvelopeId&) = default;
};

struct Envelope
{
    EnvelopeId id;
    /// Addressee; nullopt means every process.
    std::optional<ProcessId> dest;
    /// Processes the envelope has already visited.
    ProcessSet hops;
    PayloadPtr payload;

    [[nodiscard]] ProcessId origin() const { return id.origin; }
    [[nodiscard]] bool addressed_to(ProcessId p) const { return !dest || *dest == p; }
};

struct FloodResult
{
    /// First receipt and addressed to the receiver.
    bool deliver = false;
    /// First receipt (the envelope id was not seen before).
    bool fresh = false;
    /// Re-sent copy with the receiver added to hops; meaningful when `targets` is non-empty.
    Envelope forwarded;
    ProcessSet targets;
};

/// Handles receipt of `e` at `p`: duplicates are discarded; on first receipt the
/// payload is delivered (if addressed to p) and the envelope is re-sent to every
/// process in `all` that it has not visited.
FloodResult flood_forward(ProcessId p, const Envelope& e, ProcessSet all,
                          std::set<EnvelopeId>& seen);

/// Sink for the messages and log lines a protocol step produces.
class Outbox
{
public:
    virtual ~Outbox() = default;
    virtual void send(ProcessId to, PayloadPtr payload) = 0;
    virtual void send_all(PayloadPtr payload) = 0;
    /// Protocol-level note; kept at every trace level.
    virtual void note(std::string_view what, Json detail) = 0;
    /// Per-message detail; only recorded in full traces.
    virtual void debug(std::string_view what, Json detail)
    {
        (void)what;
        (void)detail;
    }
    [[nodiscard]] virtual bool debug_enabled() const { return false; }
};

struct Operation
{
    std::uint64_t id = 0;
    ProcessId process;
    OpKind kind = OpKind::Read;
    Json arg;
};

struct OpResult
{
    Json value;
    std::optional<Version> version;
};

/// What a protocol automaton sees of the simulator.
class ProcessContext : public Outbox
{
public:
    [[nodiscard]] virtual ProcessId self() const = 0;
    [[nodiscard]] virtual std::size_t process_count() const = 0;
    [[nodiscard]] virtual const std::string& process_name(ProcessId p) const = 0;
    [[nodiscard]] virtual Time now() const = 0;
    /// (Re)starts the named timer; a running timer of the same name is replaced.
    virtual void start_timer(std::string_view name, Time duration) = 0;
    virtual void respond(std::uint64_t op_id, OpResult result) = 0;
};

/// Event-driven protocol instance at one process.
class Automaton
{
public:
    virtual ~Automaton() = default;
    virtual void start() {}
    virtual void invoke(const Operation& op) = 0;
    /// `from` is the envelope origin.
    virtual void receive(ProcessId from, const Payload& payload) = 0;
    virtual void timer(std::string_view name) { (void)name; }
    virtual void tick() {}
    [[nodiscard]] virtual bool wants_ticks() const { return false; }
};

using AutomatonFactory = std::function<std::unique_ptr<Automaton>(ProcessContext&)>;

enum class TimingMode
{
    Async,
    PartialSync,
};

std::string_view to_string(TimingMode mode);
TimingMode parse_timing_mode(std::string_view name);

/// When each failure in the run actually happens; must stay within the pattern.
struct FailureSchedule
{
    std::map<ProcessId, Time> crashes;
    std::map<Channel, Time> disconnects;
};

struct SimConfig
{
    ProcessNames names;
    NetworkGraph graph;
    TimingMode mode = TimingMode::Async;
    Time gst = 0;
    Time delta = 5;
    /// Post-GST delays equal delta exactly instead of uniform in [1, delta].
    bool pin_delays = false;
    /// Mean extra delay in async mode and before GST.
    double mean_delay = 5.0;
    /// Upper bound of the pre-GST timer drift factor (>= 1).
    double max_drift = 2.0;
    /// Seeded reordering of same-time deliveries and occasional long delays.
    bool adversarial = false;
    FailurePattern pattern;
    FailureSchedule schedule;
    std::uint64_t seed = 1;
    Time tick_interval = 1;
    /// View-duration constant C for the consensus synchronizer.
    Time view_constant = 50;
    std::uint64_t max_events = 5'000'000;
    std::optional<Time> end_time;
    /// Processes whose operations must all respond; nullopt means every process.
    std::optional<ProcessSet> await;
    /// Once awaited operations responded, stop ticks/timers and drain in-flight messages.
    bool stop_when_complete = true;
    TraceLevel trace_level = TraceLevel::Full;

    /// Throws ModelError when the schedule exceeds the pattern or parameters are out of range.
    void validate() const;
};

struct WorkloadItem
{
    Time time = 0;
    ProcessId process;
    OpKind kind = OpKind::Read;
    Json arg;
};

/// Runs one simulation. Operations arriving at a busy process queue behind the
/// outstanding one; `run_info` is copied into the leading `run` event.
Trace run_simulation(const SimConfig& config, const AutomatonFactory& factory,
                     const std::vector<WorkloadItem>& workload, Json run_info = Json::object());

/// Timer expiry for a timer started at `now` (pure helper shared with tests).
/// Pre-GST timers in partial synchrony stretch by `drift` (>= 1).
Time timer_expiry(TimingMode mode, Time gst, Time now, Time duration, double drift);

} // namespace gqslab
