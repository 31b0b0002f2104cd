#include "gqslab/model.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <sstream>

namespace gqslab
{

ProcessSet ProcessSet::first_n(std::size_t n)
{
    if (n > max_processes)
        throw ModelError("too many processes: " + std::to_string(n));
    return from_bits(n == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1);
}

void ProcessSet::insert(ProcessId p)
{
    if (p.value < 1 || p.value > max_processes)
        throw ModelError("process id out of range: " + std::to_string(p.value));
    bits_ |= bit(p);
}

ProcessId ProcessSet::front() const
{
    if (empty())
        throw ModelError("front() of empty process set");
    return *begin();
}

bool operator<(ProcessSet a, ProcessSet b)
{
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

void validate_pattern(const FailurePattern& f, std::size_t n)
{
    const auto all = ProcessSet::first_n(n);
    if (!f.crashed.subset_of(all))
        throw ModelError("pattern '" + f.name + "' crashes an unknown process");
    for (const auto& c : f.dropped)
    {
        if (!all.contains(c.from) || !all.contains(c.to))
            throw ModelError("pattern '" + f.name + "' drops a channel with an unknown endpoint");
        if (c.from == c.to)
            throw ModelError("pattern '" + f.name + "' drops a self-channel");
        if (f.crashed.contains(c.from) || f.crashed.contains(c.to))
            throw ModelError("pattern '" + f.name +
                             "' drops a channel incident to a crash-prone process");
    }
}

void FailProneSystem::validate() const
{
    if (process_count == 0)
        throw ModelError("system needs at least one process");
    if (process_count > max_processes)
        throw ModelError("too many processes: " + std::to_string(process_count));
    if (patterns.empty())
        throw ModelError("fail-prone system has no patterns");
    for (std::size_t i = 0; i < patterns.size(); ++i)
    {
        validate_pattern(patterns[i], process_count);
        for (std::size_t j = 0; j < i; ++j)
            if (patterns[i].same_failures(patterns[j]))
                throw ModelError("duplicate failure pattern '" + patterns[i].name + "'");
    }
}

NetworkGraph::NetworkGraph(std::size_t universe, ProcessSet vertices)
    : universe_(universe), vertices_(vertices), out_(universe + 1)
{
    if (universe > max_processes)
        throw ModelError("too many processes: " + std::to_string(universe));
    if (!vertices.subset_of(ProcessSet::first_n(universe)))
        throw ModelError("vertex outside universe");
}

NetworkGraph NetworkGraph::complete(std::size_t n)
{
    const auto all = ProcessSet::first_n(n);
    NetworkGraph g(n, all);
    for (auto p : all)
    {
        auto others = all;
        others.erase(p);
        g.out_[p.value] = others;
    }
    return g;
}

void NetworkGraph::check_vertex(ProcessId p) const
{
    if (!vertices_.contains(p))
        throw ModelError("unknown vertex p" + std::to_string(p.value));
}

ProcessSet NetworkGraph::successors(ProcessId p) const
{
    check_vertex(p);
    return out_[p.value];
}

bool NetworkGraph::has_edge(Channel c) const
{
    return vertices_.contains(c.from) && out_[c.from.value].contains(c.to);
}

ChannelSet NetworkGraph::edges() const
{
    ChannelSet result;
    for (auto p : vertices_)
        for (auto q : out_[p.value])
            result.insert(Channel{p, q});
    return result;
}

std::size_t NetworkGraph::edge_count() const
{
    std::size_t count = 0;
    for (auto p : vertices_)
        count += out_[p.value].size();
    return count;
}

void NetworkGraph::add_edge(Channel c)
{
    check_vertex(c.from);
    check_vertex(c.to);
    if (c.from == c.to)
        throw ModelError("self-loops are not modeled");
    out_[c.from.value].insert(c.to);
}

void NetworkGraph::remove_edge(Channel c)
{
    if (!has_edge(c))
        throw ModelError("unknown channel p" + std::to_string(c.from.value) + "->p" +
                         std::to_string(c.to.value));
    out_[c.from.value].erase(c.to);
}

void NetworkGraph::remove_vertex(ProcessId p)
{
    check_vertex(p);
    vertices_.erase(p);
    out_[p.value] = ProcessSet{};
    for (auto q : vertices_)
        out_[q.value].erase(p);
}

NetworkGraph residual_graph(const NetworkGraph& g, const FailurePattern& f)
{
    NetworkGraph result = g;
    for (auto p : f.crashed)
        result.remove_vertex(p);
    for (const auto& c : f.dropped)
    {
        if (f.crashed.contains(c.from) || f.crashed.contains(c.to))
            continue;
        result.remove_edge(c);
    }
    return result;
}

std::vector<ProcessSet> strongly_connected_components(const NetworkGraph& g)
{
    // Tarjan, visiting roots and successors in ascending id order.
    const std::size_t n = g.universe();
    std::vector<int> index(n + 1, -1);
    std::vector<int> low(n + 1, 0);
    std::vector<bool> on_stack(n + 1, false);
    std::vector<ProcessId> stack;
    std::vector<ProcessSet> components;
    int counter = 0;

    std::function<void(ProcessId)> visit = [&](ProcessId v) {
        index[v.value] = low[v.value] = counter++;
        stack.push_back(v);
        on_stack[v.value] = true;
        for (auto w : g.successors(v))
        {
            if (index[w.value] < 0)
            {
                visit(w);
                low[v.value] = std::min(low[v.value], low[w.value]);
            }
            else if (on_stack[w.value])
            {
                low[v.value] = std::min(low[v.value], index[w.value]);
            }
        }
        if (low[v.value] == index[v.value])
        {
            ProcessSet component;
            ProcessId w;
            do
            {
                w = stack.back();
                stack.pop_back();
                on_stack[w.value] = false;
                component.insert(w);
            } while (w != v);
            components.push_back(component);
        }
    };

    for (auto v : g.vertices())
        if (index[v.value] < 0)
            visit(v);

    std::sort(components.begin(), components.end(),
              [](ProcessSet a, ProcessSet b) { return a.front() < b.front(); });
    return components;
}

ProcessSet reachable_from(const NetworkGraph& g, ProcessSet sources)
{
    ProcessSet seen = sources & g.vertices();
    std::deque<ProcessId> frontier(seen.begin(), seen.end());
    while (!frontier.empty())
    {
        auto p = frontier.front();
        frontier.pop_front();
        for (auto q : g.successors(p))
        {
            if (!seen.contains(q))
            {
                seen.insert(q);
                frontier.push_back(q);
            }
        }
    }
    return seen;
}

ProcessSet can_reach(const NetworkGraph& g, ProcessSet targets)
{
    ProcessSet result;
    for (auto p : g.vertices())
        if (reachable_from(g, ProcessSet{p}).intersects(targets))
            result.insert(p);
    return result;
}

int hop_distance(const NetworkGraph& g, ProcessId from, ProcessId to)
{
    if (!g.vertices().contains(from) || !g.vertices().contains(to))
        return -1;
    if (from == to)
        return 0;
    std::vector<int> dist(g.universe() + 1, -1);
    dist[from.value] = 0;
    std::deque<ProcessId> frontier{from};
    while (!frontier.empty())
    {
        auto p = frontier.front();
        frontier.pop_front();
        for (auto q : g.successors(p))
        {
            if (dist[q.value] >= 0)
                continue;
            dist[q.value] = dist[p.value] + 1;
            if (q == to)
                return dist[q.value];
            frontier.push_back(q);
        }
    }
    return -1;
}

bool is_f_available(ProcessSet q, const FailurePattern& f, const NetworkGraph& g)
{
    if (q.empty() || q.intersects(f.crashed))
        return false;
    const auto residual = residual_graph(g, f);
    if (!q.subset_of(residual.vertices()))
        return false;
    for (const auto& component : strongly_connected_components(residual))
        if (q.subset_of(component))
            return true;
    return false;
}

bool is_f_reachable(ProcessSet w, ProcessSet r, const FailurePattern& f, const NetworkGraph& g)
{
    if (w.empty() || r.empty() || w.intersects(f.crashed) || r.intersects(f.crashed))
        return false;
    const auto residual = residual_graph(g, f);
    if (!(w | r).subset_of(residual.vertices()))
        return false;
    for (auto p : r)
        if (!w.subset_of(reachable_from(residual, ProcessSet{p})))
            return false;
    return true;
}

ProcessNames::ProcessNames(std::size_t n)
{
    names_.reserve(n);
    for (std::size_t i = 1; i <= n; ++i)
        names_.push_back("p" + std::to_string(i));
}

ProcessNames::ProcessNames(std::vector<std::string> names) : names_(std::move(names))
{
    for (std::size_t i = 0; i < names_.size(); ++i)
    {
        if (names_[i].empty())
            throw ModelError("empty process name");
        for (std::size_t j = 0; j < i; ++j)
            if (names_[i] == names_[j])
                throw ModelError("duplicate process name '" + names_[i] + "'");
    }
}

const std::string& ProcessNames::name(ProcessId p) const
{
    if (p.value < 1 || p.value > names_.size())
        throw ModelError("no name for process id " + std::to_string(p.value));
    return names_[p.value - 1];
}

ProcessId ProcessNames::lookup(std::string_view name) const
{
    for (std::size_t i = 0; i < names_.size(); ++i)
        if (names_[i] == name)
            return ProcessId(static_cast<std::uint32_t>(i + 1));
    throw ModelError("unknown process '" + std::string(name) + "'");
}

std::string ProcessNames::format(ProcessSet s) const
{
    std::ostringstream out;
    out << '{';
    bool first = true;
    for (auto p : s)
    {
        if (!first)
            out << ',';
        out << name(p);
        first = false;
    }
    out << '}';
    return out.str();
}

std::string ProcessNames::format(Channel c) const
{
    return name(c.from) + "->" + name(c.to);
}

} // namespace gqslab
