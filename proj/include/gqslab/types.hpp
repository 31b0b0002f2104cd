#pragma once

#include "gqslab/model.hpp"

#include <json.hpp>

#include <compare>
#include <cstdint>
#include <optional>
#include <string_view>

namespace gqslab
{

/// Insertion-ordered JSON; trace and report fields keep a fixed order.
using Json = nlohmann::ordered_json;

/// Simulated time in abstract integer units.
using Time = std::int64_t;

/// Register version: lexicographic (counter, writer). (0, 0) is the initial version.
struct Version
{
    std::uint64_t counter = 0;
    std::uint32_t pid = 0;

    friend constexpr auto operator<=>(const Version&, const Version&) = default;
};

inline constexpr Version initial_version{};

enum class OpKind
{
    Read,
    Write,
    QuorumGet,
    QuorumSet,
    SnapUpdate,
    SnapScan,
    LaPropose,
    Propose,
};

std::string_view to_string(OpKind kind);
/// Throws std::invalid_argument for unknown names.
OpKind parse_op_kind(std::string_view name);

/// Protocol object a scenario exercises.
enum class ObjectKind
{
    Register,
    Snapshot,
    Lattice,
    Consensus,
    QafRaw,
};

std::string_view to_string(ObjectKind kind);
ObjectKind parse_object_kind(std::string_view name);

Json to_json(Version v);
Version version_from_json(const Json& j);

} // namespace gqslab
