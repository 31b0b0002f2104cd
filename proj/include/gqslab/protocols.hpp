#pragma once

// Automaton factories for every protocol object a scenario can select.

#include "gqslab/qaf.hpp"
#include "gqslab/simnet.hpp"

namespace gqslab
{

struct ProtocolSpec
{
    ObjectKind object = ObjectKind::Register;
    QafVariant variant = QafVariant::Generalized;
    QuorumFamily reads;
    QuorumFamily writes;
    /// View-duration constant for consensus.
    Time view_constant = 50;
};

AutomatonFactory make_factory(const ProtocolSpec& spec);

} // namespace gqslab
