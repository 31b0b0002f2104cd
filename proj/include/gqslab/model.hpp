#pragma once

// Static system model: processes, directed channels, failure patterns and the
// graph computations (residual graph, SCCs, reachability) used everywhere else.

#include <bit>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <iterator>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gqslab
{

/// Upper bound on the number of processes; sets are 64-bit masks.
inline constexpr std::size_t max_processes = 64;

class ModelError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// 1-based process identifier. Index 0 is reserved (initial register version).
struct ProcessId
{
    std::uint32_t value = 0;

    constexpr ProcessId() = default;
    constexpr explicit ProcessId(std::uint32_t v) : value(v) {}

    friend constexpr auto operator<=>(ProcessId, ProcessId) = default;
};

struct Channel
{
    ProcessId from;
    ProcessId to;

    friend constexpr auto operator<=>(const Channel&, const Channel&) = default;
};

/// Sorted set of processes backed by a bitmask; iteration yields ascending ids.
class ProcessSet
{
public:
    class iterator
    {
    public:
        using iterator_category = std::forward_iterator_tag;
        using value_type = ProcessId;
        using difference_type = std::ptrdiff_t;
        using pointer = void;
        using reference = ProcessId;

        constexpr iterator() = default;
        constexpr explicit iterator(std::uint64_t rest) : rest_(rest) {}

        constexpr ProcessId operator*() const
        {
            return ProcessId(static_cast<std::uint32_t>(std::countr_zero(rest_)) + 1);
        }
        constexpr iterator& operator++()
        {
            rest_ &= rest_ - 1;
            return *this;
        }
        constexpr iterator operator++(int)
        {
            auto old = *this;
            ++*this;
            return old;
        }
        friend constexpr bool operator==(iterator, iterator) = default;

    private:
        std::uint64_t rest_ = 0;
    };

    constexpr ProcessSet() = default;
    ProcessSet(std::initializer_list<ProcessId> ids)
    {
        for (auto p : ids)
            insert(p);
    }

    static constexpr ProcessSet from_bits(std::uint64_t bits)
    {
        ProcessSet s;
        s.bits_ = bits;
        return s;
    }
    /// {p1, ..., pn}
    static ProcessSet first_n(std::size_t n);

    void insert(ProcessId p);
    void erase(ProcessId p) { bits_ &= ~bit(p); }
    [[nodiscard]] bool contains(ProcessId p) const
    {
        return p.value >= 1 && p.value <= max_processes && (bits_ & bit(p)) != 0;
    }

    [[nodiscard]] constexpr bool empty() const { return bits_ == 0; }
    [[nodiscard]] constexpr std::size_t size() const
    {
        return static_cast<std::size_t>(std::popcount(bits_));
    }
    [[nodiscard]] constexpr std::uint64_t bits() const { return bits_; }
    /// Smallest member; precondition: non-empty.
    [[nodiscard]] ProcessId front() const;

    [[nodiscard]] constexpr iterator begin() const { return iterator(bits_); }
    [[nodiscard]] constexpr iterator end() const { return iterator(0); }

    [[nodiscard]] constexpr bool subset_of(ProcessSet other) const
    {
        return (bits_ & ~other.bits_) == 0;
    }
    [[nodiscard]] constexpr bool intersects(ProcessSet other) const
    {
        return (bits_ & other.bits_) != 0;
    }

    friend constexpr ProcessSet operator|(ProcessSet a, ProcessSet b)
    {
        return from_bits(a.bits_ | b.bits_);
    }
    friend constexpr ProcessSet operator&(ProcessSet a, ProcessSet b)
    {
        return from_bits(a.bits_ & b.bits_);
    }
    /// Set difference.
    friend constexpr ProcessSet operator-(ProcessSet a, ProcessSet b)
    {
        return from_bits(a.bits_ & ~b.bits_);
    }
    ProcessSet& operator|=(ProcessSet o)
    {
        bits_ |= o.bits_;
        return *this;
    }

    friend constexpr bool operator==(ProcessSet, ProcessSet) = default;
    /// Orders by sorted member sequence (lexicographic), not by mask value.
    friend bool operator<(ProcessSet a, ProcessSet b);

private:
    static std::uint64_t bit(ProcessId p) { return std::uint64_t{1} << (p.value - 1); }

    std::uint64_t bits_ = 0;
};

using ChannelSet = std::set<Channel>;

/// Which processes may crash and which channels may disconnect in one execution.
struct FailurePattern
{
    std::string name;
    ProcessSet crashed;
    ChannelSet dropped;

    [[nodiscard]] bool is_correct(ProcessId p) const { return !crashed.contains(p); }
    /// Same sets, name ignored.
    [[nodiscard]] bool same_failures(const FailurePattern& other) const
    {
        return crashed == other.crashed && dropped == other.dropped;
    }
};

/// Throws ModelError when a pattern refers to unknown processes, lists a
/// self-channel, or lists a channel incident to a crash-prone process.
void validate_pattern(const FailurePattern& f, std::size_t n);

struct FailProneSystem
{
    std::size_t process_count = 0;
    std::vector<FailurePattern> patterns;

    /// Non-empty, duplicate-free, every pattern valid.
    void validate() const;
};

/// Directed graph over processes. Self-loops are never stored.
class NetworkGraph
{
public:
    NetworkGraph() = default;
    /// Vertices from `vertices`; no edges.
    NetworkGraph(std::size_t universe, ProcessSet vertices);

    /// Complete directed graph on p1..pn.
    static NetworkGraph complete(std::size_t n);

    [[nodiscard]] std::size_t universe() const { return universe_; }
    [[nodiscard]] ProcessSet vertices() const { return vertices_; }
    [[nodiscard]] ProcessSet successors(ProcessId p) const;
    [[nodiscard]] bool has_edge(Channel c) const;
    [[nodiscard]] ChannelSet edges() const;
    [[nodiscard]] std::size_t edge_count() const;

    void add_edge(Channel c);
    void remove_edge(Channel c);
    /// Removes the vertex and all incident edges.
    void remove_vertex(ProcessId p);

    friend bool operator==(const NetworkGraph&, const NetworkGraph&) = default;

private:
    void check_vertex(ProcessId p) const;

    std::size_t universe_ = 0;
    ProcessSet vertices_;
    std::vector<ProcessSet> out_; // index = process id
};

/// G minus crash-prone processes, their incident channels, and dropped channels.
NetworkGraph residual_graph(const NetworkGraph& g, const FailurePattern& f);

/// SCC partition, each component sorted, components ordered by smallest member.
std::vector<ProcessSet> strongly_connected_components(const NetworkGraph& g);

/// Vertices reachable from `sources` (sources included when they are vertices).
ProcessSet reachable_from(const NetworkGraph& g, ProcessSet sources);
/// Vertices that can reach some member of `targets` (targets included).
ProcessSet can_reach(const NetworkGraph& g, ProcessSet targets);

/// Shortest hop count from `from` to `to`, or -1 if unreachable (0 for from == to).
int hop_distance(const NetworkGraph& g, ProcessId from, ProcessId to);

bool is_f_available(ProcessSet q, const FailurePattern& f, const NetworkGraph& g);
bool is_f_reachable(ProcessSet w, ProcessSet r, const FailurePattern& f, const NetworkGraph& g);

/// Display names for processes (index 0 unused). Defaults to p1..pn.
class ProcessNames
{
public:
    ProcessNames() = default;
    explicit ProcessNames(std::size_t n);
    explicit ProcessNames(std::vector<std::string> names);

    [[nodiscard]] std::size_t size() const { return names_.size(); }
    [[nodiscard]] const std::string& name(ProcessId p) const;
    /// Throws ModelError for unknown names.
    [[nodiscard]] ProcessId lookup(std::string_view name) const;
    [[nodiscard]] std::string format(ProcessSet s) const;
    [[nodiscard]] std::string format(Channel c) const;

private:
    std::vector<std::string> names_;
};

} // namespace gqslab
