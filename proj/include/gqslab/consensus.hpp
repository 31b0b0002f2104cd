#pragma once

// Partially synchronous single-decree consensus over a generalized quorum system.
//
// Views rotate leaders round-robin and last view * C time units each, so
// correct processes eventually overlap for long stretches in every view. On
// entering a view a process reports its last accepted value to the leader in a
// 1B; the leader proposes in a 2A once a read quorum reported; everyone accepts
// and broadcasts a 2B; matching 2Bs from a write quorum decide.

#include "gqslab/gqs.hpp"
#include "gqslab/simnet.hpp"

#include <map>
#include <optional>

namespace gqslab
{

/// p_{((v-1) mod n)+1}. Throws std::invalid_argument for v < 1.
ProcessId leader(std::uint64_t view, std::size_t n);

enum class Phase
{
    Enter,
    Propose,
    Accept,
    Decide,
};

std::string_view to_string(Phase phase);

using ConsensusValue = std::int64_t;

struct ConsensusMessage final : Payload
{
    enum class Type
    {
        OneB,
        TwoA,
        TwoB,
    };

    Type type = Type::OneB;
    std::uint64_t view = 0;
    /// 1B only.
    std::uint64_t aview = 0;
    /// Empty means bottom; always set in 2A/2B.
    std::optional<ConsensusValue> x;

    [[nodiscard]] std::string_view kind() const override;
    [[nodiscard]] Json to_json() const override;
};

class ConsensusAutomaton final : public Automaton
{
public:
    static constexpr std::string_view view_timer = "view_timer";

    ConsensusAutomaton(ProcessContext& ctx, QuorumFamily reads, QuorumFamily writes, Time view_constant);

    void start() override;
    void invoke(const Operation& op) override;
    void receive(ProcessId from, const Payload& payload) override;
    void timer(std::string_view name) override;

    [[nodiscard]] std::uint64_t view() const { return view_; }
    [[nodiscard]] std::uint64_t aview() const { return aview_; }
    [[nodiscard]] Phase phase() const { return phase_; }
    [[nodiscard]] std::optional<ConsensusValue> val() const { return val_; }
    [[nodiscard]] std::optional<ConsensusValue> my_val() const { return my_val_; }
    [[nodiscard]] std::optional<ConsensusValue> decided() const { return decided_; }

private:
    struct OneB
    {
        std::uint64_t aview = 0;
        std::optional<ConsensusValue> x;
    };

    void enter_next_view();
    void try_lead();
    void on_2a(ConsensusValue x);
    void try_decide();
    void respond_if_decided();
    void send(ProcessId to, ConsensusMessage::Type type, std::optional<ConsensusValue> x);

    ProcessContext& ctx_;
    QuorumFamily reads_;
    QuorumFamily writes_;
    Time view_constant_;

    std::uint64_t view_ = 0;
    std::uint64_t aview_ = 0;
    std::optional<ConsensusValue> val_;
    std::optional<ConsensusValue> my_val_;
    Phase phase_ = Phase::Enter;
    std::optional<ConsensusValue> decided_;
    std::optional<std::uint64_t> pending_op_;

    /// Messages for the current and later views, keyed by view.
    std::map<std::uint64_t, std::map<ProcessId, OneB>> ones_;
    std::map<std::uint64_t, ConsensusValue> twoa_;
    std::map<std::uint64_t, std::map<ProcessId, ConsensusValue>> twob_;
};

} // namespace gqslab
