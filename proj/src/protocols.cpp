#include "gqslab/protocols.hpp"
#include "gqslab/consensus.hpp"
#include "gqslab/lattice.hpp"
#include "gqslab/register.hpp"
#include "gqslab/snapshot.hpp"

namespace gqslab
{

AutomatonFactory make_factory(const ProtocolSpec& spec)
{
    switch (spec.object)
    {
    case ObjectKind::Register:
        return [spec](ProcessContext& ctx) {
            return std::make_unique<RegisterAutomaton>(ctx, spec.variant, spec.reads, spec.writes);
        };
    case ObjectKind::Snapshot:
        return [spec](ProcessContext& ctx) {
            return std::make_unique<SnapshotAutomaton>(ctx, spec.variant, spec.reads, spec.writes);
        };
    case ObjectKind::Lattice:
        return [spec](ProcessContext& ctx) {
            return std::make_unique<LatticeAutomaton>(ctx, spec.variant, spec.reads, spec.writes);
        };
    case ObjectKind::Consensus:
        return [spec](ProcessContext& ctx) {
            return std::make_unique<ConsensusAutomaton>(ctx, spec.reads, spec.writes, spec.view_constant);
        };
    case ObjectKind::QafRaw:
        return [spec](ProcessContext& ctx) {
            return std::make_unique<QafRawAutomaton>(ctx, spec.variant, spec.reads, spec.writes);
        };
    }
    throw std::invalid_argument("unknown object kind");
}

} // namespace gqslab
