#include "gqslab/types.hpp"
#include "gqslab/rng.hpp"

#include <array>
#include <stdexcept>
#include <string>
#include <utility>

namespace gqslab
{
namespace
{

constexpr std::array<std::pair<OpKind, std::string_view>, 8> op_names{{
    {OpKind::Read, "read"},
    {OpKind::Write, "write"},
    {OpKind::QuorumGet, "quorum_get"},
    {OpKind::QuorumSet, "quorum_set"},
    {OpKind::SnapUpdate, "snap_update"},
    {OpKind::SnapScan, "snap_scan"},
    {OpKind::LaPropose, "la_propose"},
    {OpKind::Propose, "propose"},
}};

constexpr std::array<std::pair<ObjectKind, std::string_view>, 5> object_names{{
    {ObjectKind::Register, "register"},
    {ObjectKind::Snapshot, "snapshot"},
    {ObjectKind::Lattice, "lattice"},
    {ObjectKind::Consensus, "consensus"},
    {ObjectKind::QafRaw, "qaf-raw"},
}};

} // namespace

std::string_view to_string(OpKind kind)
{
    for (auto [k, name] : op_names)
        if (k == kind)
            return name;
    return "?";
}

OpKind parse_op_kind(std::string_view name)
{
    for (auto [k, n] : op_names)
        if (n == name)
            return k;
    throw std::invalid_argument("unknown operation '" + std::string(name) + "'");
}

std::string_view to_string(ObjectKind kind)
{
    for (auto [k, name] : object_names)
        if (k == kind)
            return name;
    return "?";
}

ObjectKind parse_object_kind(std::string_view name)
{
    for (auto [k, n] : object_names)
        if (n == name)
            return k;
    throw std::invalid_argument("unknown object '" + std::string(name) + "'");
}

Json to_json(Version v)
{
    return Json::array({v.counter, v.pid});
}

Version version_from_json(const Json& j)
{
    if (!j.is_array() || j.size() != 2)
        throw std::invalid_argument("version must be [counter, pid]");
    return Version{j[0].get<std::uint64_t>(), j[1].get<std::uint32_t>()};
}

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index)
{
    return splitmix64(splitmix64(base) ^ (index * 0xd1b54a32d192ed03ULL));
}

} // namespace gqslab
