#include "gqslab/checkers.hpp"
#include "gqslab/consensus.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <set>

namespace gqslab
{

std::string_view to_string(Outcome o)
{
    switch (o)
    {
    case Outcome::Pass: return "PASS";
    case Outcome::Fail: return "FAIL";
    case Outcome::Inconclusive: return "INCONCLUSIVE";
    }
    return "?";
}

Json Verdict::to_json() const
{
    Json j{{"check", check}, {"outcome", std::string(to_string(outcome))}, {"detail", detail}};
    if (!witness.is_null())
        j["witness"] = witness;
    return j;
}

Verdict Verdict::passed(std::string check, std::string detail)
{
    return Verdict{std::move(check), Outcome::Pass, std::move(detail), nullptr};
}

Verdict Verdict::failed(std::string check, std::string detail, Json witness)
{
    return Verdict{std::move(check), Outcome::Fail, std::move(detail), std::move(witness)};
}

Verdict Verdict::inconclusive(std::string check, std::string detail)
{
    return Verdict{std::move(check), Outcome::Inconclusive, std::move(detail), nullptr};
}

namespace
{

std::string op_name(std::uint64_t id)
{
    return "op " + std::to_string(id);
}

std::string version_text(Version v)
{
    return "(" + std::to_string(v.counter) + "," + std::to_string(v.pid) + ")";
}

/// Shortest directed cycle by BFS from every vertex. Returns vertex indices.
std::vector<std::size_t> shortest_cycle(const std::vector<std::vector<std::size_t>>& adj)
{
    std::vector<std::size_t> best;
    const std::size_t n = adj.size();
    for (std::size_t s = 0; s < n; ++s)
    {
        std::vector<std::size_t> parent(n, n);
        std::vector<bool> seen(n, false);
        std::deque<std::size_t> queue{s};
        seen[s] = true;
        bool closed = false;
        std::size_t last = n;
        while (!queue.empty() && !closed)
        {
            const std::size_t u = queue.front();
            queue.pop_front();
            for (std::size_t v : adj[u])
            {
                if (v == s)
                {
                    closed = true;
                    last = u;
                    break;
                }
                if (!seen[v])
                {
                    seen[v] = true;
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if (!closed)
            continue;
        std::vector<std::size_t> cycle;
        for (std::size_t u = last; u != s; u = parent[u])
            cycle.push_back(u);
        cycle.push_back(s);
        std::reverse(cycle.begin(), cycle.end());
        if (best.empty() || cycle.size() < best.size())
            best = std::move(cycle);
    }
    return best;
}

} // namespace

// ---------------------------------------------------------------------------
// Registers

std::vector<RegisterOp> register_ops(const History& h)
{
    std::vector<RegisterOp> out;
    for (const auto& op : h.ops)
    {
        if (op.kind != OpKind::Read && op.kind != OpKind::Write)
            continue;
        const bool write = op.kind == OpKind::Write;
        if (!write && !op.complete())
            continue;
        RegisterOp r;
        r.id = op.id;
        r.process = op.process;
        r.is_write = write;
        r.invoke_pos = op.invoke_pos;
        r.respond_pos = op.respond_pos;
        if (write)
        {
            r.value = op.arg.get<std::int64_t>();
            r.tau = op.version ? op.version : op.chosen_version;
        }
        else
        {
            r.value = op.result.is_number_integer() ? op.result.get<std::int64_t>() : 0;
            r.tau = op.version;
        }
        out.push_back(r);
    }
    return out;
}

std::optional<std::vector<std::uint64_t>> register_linearization(const std::vector<RegisterOp>& ops)
{
    const std::size_t n = ops.size();
    if (n > 63)
        throw std::invalid_argument("register history too large for exhaustive search");
    std::vector<std::uint64_t> preds(n, 0);
    std::uint64_t required = 0;
    for (std::size_t i = 0; i < n; ++i)
    {
        if (ops[i].complete())
            required |= std::uint64_t{1} << i;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i && ops[j].precedes(ops[i]))
                preds[i] |= std::uint64_t{1} << j;
    }
    std::set<std::pair<std::uint64_t, std::int64_t>> dead;
    std::vector<std::size_t> order;
    std::function<bool(std::uint64_t, std::int64_t)> dfs = [&](std::uint64_t mask, std::int64_t current) {
        if ((mask & required) == required)
            return true;
        if (dead.count({mask, current}) != 0)
            return false;
        for (std::size_t i = 0; i < n; ++i)
        {
            const std::uint64_t bit = std::uint64_t{1} << i;
            if ((mask & bit) != 0 || (preds[i] & ~mask) != 0)
                continue;
            if (!ops[i].is_write && ops[i].value != current)
                continue;
            order.push_back(i);
            if (dfs(mask | bit, ops[i].is_write ? ops[i].value : current))
                return true;
            order.pop_back();
        }
        dead.insert({mask, current});
        return false;
    };
    if (!dfs(0, 0))
        return std::nullopt;
    std::vector<std::uint64_t> ids;
    for (auto i : order)
        ids.push_back(ops[i].id);
    return ids;
}

Verdict check_register_dependency_graph(const std::vector<RegisterOp>& input)
{
    const std::string name = "register-linearizability";
    std::vector<RegisterOp> writes;
    std::vector<RegisterOp> reads;
    for (const auto& op : input)
    {
        if (op.is_write)
        {
            if (!op.tau)
            {
                if (op.complete())
                    return Verdict::inconclusive(name, op_name(op.id) + ": write without a recorded version");
                continue; // pending write that never chose a version had no effect
            }
            writes.push_back(op);
        }
        else if (op.complete())
        {
            if (!op.tau)
                return Verdict::inconclusive(name, op_name(op.id) + ": read without a recorded version");
            reads.push_back(op);
        }
    }

    // Versions identify writes and exceed the initial one.
    for (std::size_t i = 0; i < writes.size(); ++i)
    {
        if (*writes[i].tau == initial_version)
            return Verdict::failed(name, op_name(writes[i].id) + ": write carries the initial version",
                                   Json{{"write", writes[i].id}});
        for (std::size_t j = i + 1; j < writes.size(); ++j)
            if (*writes[i].tau == *writes[j].tau)
                return Verdict::failed(name,
                                       "writes " + std::to_string(writes[i].id) + " and " +
                                           std::to_string(writes[j].id) + " share version " +
                                           version_text(*writes[i].tau),
                                       Json{{"writes", {writes[i].id, writes[j].id}}});
    }

    // The value is authoritative; re-anchor reads whose version disagrees with it.
    Json reanchored = Json::array();
    for (auto& r : reads)
    {
        const auto same_version = std::find_if(writes.begin(), writes.end(),
                                               [&](const RegisterOp& w) { return *w.tau == *r.tau; });
        const bool consistent = (*r.tau == initial_version && r.value == 0) ||
                                (same_version != writes.end() && same_version->value == r.value);
        if (consistent)
            continue;
        std::vector<const RegisterOp*> by_value;
        for (const auto& w : writes)
            if (w.value == r.value)
                by_value.push_back(&w);
        for (const auto& w : input)
            if (w.is_write && !w.tau && w.value == r.value)
                return Verdict::inconclusive(name, op_name(r.id) + " may read from pending write " +
                                                       std::to_string(w.id) + " with no version");
        if (by_value.size() > 1)
            return Verdict::inconclusive(name, op_name(r.id) + ": value " + std::to_string(r.value) +
                                                   " written more than once and version disagrees");
        if (by_value.empty() && r.value != 0)
            return Verdict::failed(name, op_name(r.id) + " returns " + std::to_string(r.value) +
                                             ", which no write wrote",
                                   Json{{"read", r.id}, {"value", r.value}});
        r.tau = by_value.empty() ? initial_version : *by_value.front()->tau;
        reanchored.push_back(r.id);
    }

    // Pending writes take part only when some read returns them.
    std::vector<RegisterOp> nodes;
    for (const auto& w : writes)
        if (w.complete() || std::any_of(reads.begin(), reads.end(),
                                        [&](const RegisterOp& r) { return *r.tau == *w.tau; }))
            nodes.push_back(w);
    nodes.insert(nodes.end(), reads.begin(), reads.end());
    std::sort(nodes.begin(), nodes.end(),
              [](const RegisterOp& a, const RegisterOp& b) { return a.invoke_pos < b.invoke_pos; });

    // A read's version is initial or some write's.
    for (const auto& r : reads)
        if (*r.tau != initial_version &&
            std::none_of(nodes.begin(), nodes.end(),
                         [&](const RegisterOp& w) { return w.is_write && *w.tau == *r.tau; }))
            return Verdict::failed(name, op_name(r.id) + " returns a version no write installed",
                                   Json{{"read", r.id}});

    const std::size_t n = nodes.size();
    std::vector<std::vector<std::size_t>> adj(n);
    auto relation = [&](std::size_t a, std::size_t b) -> const char* {
        const auto& x = nodes[a];
        const auto& y = nodes[b];
        if (x.precedes(y))
            return "rt";
        if (x.is_write && !y.is_write && *x.tau == *y.tau)
            return "wr";
        if (x.is_write && y.is_write && *x.tau < *y.tau)
            return "ww";
        // rw: the write is ww-after the one the read read from, or the read
        // read the initial value. Both reduce to a larger version.
        if (!x.is_write && y.is_write && *y.tau > *x.tau)
            return "rw";
        return nullptr;
    };
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
            if (a != b && relation(a, b) != nullptr)
                adj[a].push_back(b);

    const auto cycle = shortest_cycle(adj);
    if (!cycle.empty())
    {
        Json edges = Json::array();
        for (std::size_t i = 0; i < cycle.size(); ++i)
        {
            const auto a = cycle[i];
            const auto b = cycle[(i + 1) % cycle.size()];
            edges.push_back(Json{{"from", nodes[a].id}, {"to", nodes[b].id}, {"edge", relation(a, b)}});
        }
        std::string text = "dependency cycle:";
        for (const auto& e : edges)
            text += " " + std::to_string(e["from"].get<std::uint64_t>()) + " -" +
                    e["edge"].get<std::string>() + "->";
        text += " " + std::to_string(nodes[cycle.front()].id);
        return Verdict::failed(name, text, Json{{"cycle", edges}, {"reanchored", reanchored}});
    }
    Verdict v = Verdict::passed(name, "dependency graph over " + std::to_string(n) + " operations is acyclic");
    if (!reanchored.empty())
        v.witness = Json{{"reanchored", reanchored}};
    return v;
}

RegisterReport check_linearizable_register(const std::vector<RegisterOp>& ops, std::size_t oracle_limit)
{
    RegisterReport report;
    report.fast_path = check_register_dependency_graph(ops);
    report.verdict = report.fast_path;
    if (ops.size() > oracle_limit)
        return report;

    const auto order = register_linearization(ops);
    report.oracle = order ? Outcome::Pass : Outcome::Fail;
    if (report.fast_path.outcome == *report.oracle)
    {
        if (order)
            report.verdict.witness = Json{{"linearization", *order}};
        return report;
    }
    report.disagreement = report.fast_path.outcome != Outcome::Inconclusive;
    report.verdict.outcome = *report.oracle;
    if (order)
    {
        report.verdict.detail = "linearizable by exhaustive search";
        report.verdict.witness = Json{{"linearization", *order}};
    }
    else
    {
        report.verdict.detail = "no linearization exists (exhaustive search)";
        report.verdict.witness = nullptr;
    }
    if (report.disagreement)
        report.verdict.detail += "; dependency graph said " + std::string(to_string(report.fast_path.outcome)) +
                                 ": " + report.fast_path.detail;
    return report;
}

RegisterReport check_linearizable_register(const History& h)
{
    return check_linearizable_register(register_ops(h));
}

Verdict check_register_versions(const std::vector<RegisterOp>& ops)
{
    const std::string name = "register-version-order";
    for (const auto& a : ops)
    {
        if (!a.tau || !a.complete())
            continue;
        for (const auto& b : ops)
        {
            if (!b.tau || !a.precedes(b))
                continue;
            const bool ok = b.is_write ? *a.tau < *b.tau : *a.tau <= *b.tau;
            if (!ok)
                return Verdict::failed(name,
                                       op_name(a.id) + " " + version_text(*a.tau) + " precedes " + op_name(b.id) +
                                           " " + version_text(*b.tau),
                                       Json{{"first", a.id}, {"second", b.id}});
        }
    }
    return Verdict::passed(name, "versions grow along real time");
}

void assign_tau_from_linearization(std::vector<RegisterOp>& ops, const std::vector<std::uint64_t>& order)
{
    std::map<std::uint64_t, RegisterOp*> by_id;
    for (auto& op : ops)
    {
        by_id[op.id] = &op;
        op.tau.reset();
    }
    Version last = initial_version;
    std::uint64_t counter = 0;
    for (auto id : order)
    {
        auto* op = by_id.at(id);
        if (op->is_write)
        {
            last = Version{++counter, op->process.value};
            op->tau = last;
        }
        else
        {
            op->tau = last;
        }
    }
}

std::vector<std::vector<RegisterOp>> register_subhistories(const std::vector<RegisterOp>& input, std::size_t max_ops)
{
    std::vector<RegisterOp> ops = input;
    std::sort(ops.begin(), ops.end(),
              [](const RegisterOp& a, const RegisterOp& b) { return a.invoke_pos < b.invoke_pos; });

    auto sources = [&](const RegisterOp& r) {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < ops.size(); ++i)
        {
            const auto& w = ops[i];
            if (!w.is_write)
                continue;
            const bool by_version = r.tau && w.tau && *r.tau == *w.tau && *r.tau != initial_version;
            if (by_version || (w.value == r.value && r.value != 0))
                out.push_back(i);
        }
        return out;
    };

    std::vector<std::vector<RegisterOp>> out;
    std::set<std::vector<std::size_t>> emitted;
    for (std::size_t start = 0; start < ops.size(); ++start)
    {
        for (std::size_t len = std::min(max_ops, ops.size() - start); len >= 1; --len)
        {
            std::set<std::size_t> members;
            for (std::size_t i = start; i < start + len; ++i)
                members.insert(i);
            for (std::size_t i = start; i < start + len; ++i)
                if (!ops[i].is_write)
                    for (auto w : sources(ops[i]))
                        members.insert(w);
            if (members.size() > max_ops)
                continue;
            std::vector<std::size_t> key(members.begin(), members.end());
            if (emitted.insert(key).second)
            {
                std::vector<RegisterOp> sub;
                for (auto i : key)
                    sub.push_back(ops[i]);
                out.push_back(std::move(sub));
            }
            break;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Snapshots

std::vector<SnapshotOp> snapshot_ops(const History& h)
{
    std::vector<SnapshotOp> out;
    std::map<ProcessId, std::uint64_t> updates;
    for (const auto& op : h.ops)
    {
        if (op.kind != OpKind::SnapUpdate && op.kind != OpKind::SnapScan)
            continue;
        SnapshotOp s;
        s.id = op.id;
        s.process = op.process;
        s.invoke_pos = op.invoke_pos;
        s.respond_pos = op.respond_pos;
        if (op.kind == OpKind::SnapUpdate)
        {
            s.is_update = true;
            s.value = op.arg.get<std::int64_t>();
            s.seq = ++updates[op.process];
            if (op.complete() && op.result.is_object() && op.result.contains("seq") &&
                op.result.at("seq").get<std::uint64_t>() != s.seq)
                throw TraceFormatError(op_name(op.id) + ": update seq disagrees with its rank");
            out.push_back(s);
            continue;
        }
        if (!op.complete())
            continue;
        s.values = op.result.at("values").get<std::vector<std::int64_t>>();
        if (op.result.contains("seqs"))
            s.seqs = op.result.at("seqs").get<std::vector<std::uint64_t>>();
        out.push_back(s);
    }
    return out;
}

std::optional<std::vector<std::uint64_t>> snapshot_linearization(const std::vector<SnapshotOp>& ops,
                                                                 std::size_t segments)
{
    const std::size_t n = ops.size();
    if (n > 63)
        throw std::invalid_argument("snapshot history too large for exhaustive search");
    std::vector<std::uint64_t> preds(n, 0);
    std::uint64_t required = 0;
    for (std::size_t i = 0; i < n; ++i)
    {
        if (ops[i].complete())
            required |= std::uint64_t{1} << i;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i && ops[j].precedes(ops[i]))
                preds[i] |= std::uint64_t{1} << j;
    }
    std::set<std::uint64_t> dead;
    std::vector<std::size_t> order;
    std::vector<std::int64_t> cells(segments, 0);
    std::function<bool(std::uint64_t)> dfs = [&](std::uint64_t mask) {
        if ((mask & required) == required)
            return true;
        if (dead.count(mask) != 0)
            return false;
        for (std::size_t i = 0; i < n; ++i)
        {
            const std::uint64_t bit = std::uint64_t{1} << i;
            if ((mask & bit) != 0 || (preds[i] & ~mask) != 0)
                continue;
            const auto& op = ops[i];
            if (op.is_update)
            {
                auto& cell = cells.at(op.process.value - 1);
                const auto saved = cell;
                cell = op.value;
                order.push_back(i);
                if (dfs(mask | bit))
                    return true;
                order.pop_back();
                cell = saved;
            }
            else if (op.values == cells)
            {
                order.push_back(i);
                if (dfs(mask | bit))
                    return true;
                order.pop_back();
            }
        }
        dead.insert(mask);
        return false;
    };
    if (!dfs(0))
        return std::nullopt;
    std::vector<std::uint64_t> ids;
    for (auto i : order)
        ids.push_back(ops[i].id);
    return ids;
}

Verdict check_snapshot_containment(const std::vector<SnapshotOp>& ops, std::size_t segments)
{
    const std::string name = "snapshot-linearizability";
    std::map<std::pair<ProcessId, std::uint64_t>, const SnapshotOp*> update_at;
    std::vector<const SnapshotOp*> scans;
    for (const auto& op : ops)
    {
        if (op.is_update)
            update_at[{op.process, op.seq}] = &op;
        else
            scans.push_back(&op);
    }
    for (const auto* s : scans)
    {
        if (s->seqs.size() != segments || s->values.size() != segments)
            return Verdict::inconclusive(name, op_name(s->id) + ": scan result lacks per-segment seqs");
        for (std::size_t slot = 0; slot < segments; ++slot)
        {
            const ProcessId p(static_cast<std::uint32_t>(slot + 1));
            const auto k = s->seqs[slot];
            if (k == 0)
            {
                if (s->values[slot] != 0)
                    return Verdict::failed(name, op_name(s->id) + ": segment " + std::to_string(slot + 1) +
                                                     " has seq 0 but a non-initial value",
                                           Json{{"scan", s->id}});
                continue;
            }
            const auto it = update_at.find({p, k});
            if (it == update_at.end())
                return Verdict::failed(name, op_name(s->id) + " reflects an update that was never invoked",
                                       Json{{"scan", s->id}, {"segment", slot + 1}, {"seq", k}});
            const auto* u = it->second;
            if (u->value != s->values[slot])
                return Verdict::failed(name, op_name(s->id) + " shows a value the reflected update did not write",
                                       Json{{"scan", s->id}, {"update", u->id}});
            if (s->respond_pos && *s->respond_pos < u->invoke_pos)
                return Verdict::failed(name, op_name(s->id) + " reflects an update invoked after it returned",
                                       Json{{"scan", s->id}, {"update", u->id}});
        }
    }
    auto dominated = [](const SnapshotOp* a, const SnapshotOp* b) {
        for (std::size_t i = 0; i < a->seqs.size(); ++i)
            if (a->seqs[i] > b->seqs[i])
                return false;
        return true;
    };
    for (std::size_t i = 0; i < scans.size(); ++i)
        for (std::size_t j = i + 1; j < scans.size(); ++j)
        {
            const auto* a = scans[i];
            const auto* b = scans[j];
            if (!dominated(a, b) && !dominated(b, a))
                return Verdict::failed(name,
                                       "scans " + std::to_string(a->id) + " and " + std::to_string(b->id) +
                                           " are incomparable",
                                       Json{{"scans", {a->id, b->id}}});
            if (a->precedes(*b) && !dominated(a, b))
                return Verdict::failed(name, op_name(b->id) + " is older than the earlier " + op_name(a->id),
                                       Json{{"scans", {a->id, b->id}}});
            if (b->precedes(*a) && !dominated(b, a))
                return Verdict::failed(name, op_name(a->id) + " is older than the earlier " + op_name(b->id),
                                       Json{{"scans", {b->id, a->id}}});
        }
    for (const auto* s : scans)
        for (const auto& [key, u] : update_at)
        {
            const auto slot = key.first.value - 1;
            if (u->precedes(*s) && s->seqs[slot] < key.second)
                return Verdict::failed(name, op_name(s->id) + " misses the earlier " + op_name(u->id),
                                       Json{{"scan", s->id}, {"update", u->id}});
            if (s->precedes(*u) && s->seqs[slot] >= key.second)
                return Verdict::failed(name, op_name(s->id) + " reflects the later " + op_name(u->id),
                                       Json{{"scan", s->id}, {"update", u->id}});
        }
    return Verdict::passed(name, std::to_string(scans.size()) + " scans totally ordered and consistent with real time");
}

Verdict check_snapshot_linearizable(const std::vector<SnapshotOp>& ops, std::size_t segments, std::size_t search_limit)
{
    const std::string name = "snapshot-linearizability";
    if (ops.size() <= search_limit)
    {
        if (auto order = snapshot_linearization(ops, segments))
        {
            Verdict v = Verdict::passed(name, "linearizable by exhaustive search");
            v.witness = Json{{"linearization", *order}};
            return v;
        }
        return Verdict::failed(name, "no linearization exists (exhaustive search)");
    }
    return check_snapshot_containment(ops, segments);
}

Verdict check_snapshot_linearizable(const History& h)
{
    return check_snapshot_linearizable(snapshot_ops(h), h.names.size());
}

// ---------------------------------------------------------------------------
// Lattice agreement, consensus, quorum access functions

namespace
{

std::string set_text(const LatticeSet& s)
{
    std::string out = "{";
    for (auto it = s.begin(); it != s.end(); ++it)
        out += (it == s.begin() ? "" : ",") + std::to_string(*it);
    return out + "}";
}

} // namespace

Verdict check_lattice_agreement(const std::vector<LatticeSet>& proposals, const std::vector<LatticeOutcome>& outcomes)
{
    const std::string name = "lattice-agreement";
    LatticeSet top;
    for (const auto& x : proposals)
        top = join(std::move(top), x);
    for (std::size_t i = 0; i < outcomes.size(); ++i)
    {
        const auto& o = outcomes[i];
        if (!leq(o.input, o.output))
            return Verdict::failed(name,
                                   "downward validity: " + op_name(o.id) + " output " + set_text(o.output) +
                                       " misses its input " + set_text(o.input),
                                   Json{{"op", o.id}});
        if (!leq(o.output, top))
            return Verdict::failed(name,
                                   "upward validity: " + op_name(o.id) + " output " + set_text(o.output) +
                                       " exceeds the join of proposals " + set_text(top),
                                   Json{{"op", o.id}});
        for (std::size_t j = i + 1; j < outcomes.size(); ++j)
            if (!comparable(o.output, outcomes[j].output))
                return Verdict::failed(name,
                                       "comparability: " + set_text(o.output) + " and " +
                                           set_text(outcomes[j].output) + " are incomparable",
                                       Json{{"ops", {o.id, outcomes[j].id}}});
    }
    return Verdict::passed(name, std::to_string(outcomes.size()) + " outputs comparable and valid");
}

Verdict check_lattice_agreement(const History& h)
{
    std::vector<LatticeSet> proposals;
    std::vector<LatticeOutcome> outcomes;
    std::set<ProcessId> proposers;
    for (const auto* op : h.of_kind({OpKind::LaPropose}))
    {
        if (!proposers.insert(op->process).second)
            return Verdict::failed("lattice-agreement",
                                   "process " + h.names.name(op->process) + " proposed twice (single-shot)");
        proposals.push_back(op->arg.get<LatticeSet>());
        if (op->complete())
            outcomes.push_back({op->id, proposals.back(), op->result.get<LatticeSet>()});
    }
    return check_lattice_agreement(proposals, outcomes);
}

Verdict check_consensus_safety(const std::vector<std::int64_t>& proposals, const std::vector<std::int64_t>& decisions)
{
    const std::string name = "consensus-safety";
    for (auto d : decisions)
    {
        if (d != decisions.front())
            return Verdict::failed(name,
                                   "agreement: decisions " + std::to_string(decisions.front()) + " and " +
                                       std::to_string(d) + " differ",
                                   Json{{"decisions", decisions}});
        if (std::find(proposals.begin(), proposals.end(), d) == proposals.end())
            return Verdict::failed(name, "validity: " + std::to_string(d) + " was never proposed",
                                   Json{{"decision", d}, {"proposals", proposals}});
    }
    return Verdict::passed(name, std::to_string(decisions.size()) + " decisions agree on a proposed value");
}

Verdict check_consensus_safety(const History& h)
{
    std::vector<std::int64_t> proposals;
    std::vector<std::int64_t> decisions;
    for (const auto* op : h.of_kind({OpKind::Propose}))
    {
        proposals.push_back(op->arg.get<std::int64_t>());
        if (op->complete())
            decisions.push_back(op->result.get<std::int64_t>());
    }
    return check_consensus_safety(proposals, decisions);
}

namespace
{

std::vector<std::vector<std::uint64_t>> returned_states(const OpRecord& get)
{
    return get.result.at("states").get<std::vector<std::vector<std::uint64_t>>>();
}

} // namespace

Verdict check_qaf_real_time(const History& h)
{
    const std::string name = "qaf-real-time-ordering";
    const auto sets = h.of_kind({OpKind::QuorumSet});
    std::size_t pairs = 0;
    for (const auto* get : h.of_kind({OpKind::QuorumGet}))
    {
        if (!get->complete())
            continue;
        const auto states = returned_states(*get);
        for (const auto* set : sets)
        {
            if (!set->precedes(*get))
                continue;
            ++pairs;
            const bool seen = std::any_of(states.begin(), states.end(), [&](const auto& s) {
                return std::find(s.begin(), s.end(), set->id) != s.end();
            });
            if (!seen)
                return Verdict::failed(name,
                                       op_name(get->id) + " returned no state incorporating the earlier quorum_set " +
                                           op_name(set->id),
                                       Json{{"set", set->id}, {"get", get->id}, {"states", states}});
        }
    }
    return Verdict::passed(name, std::to_string(pairs) + " (set, later get) pairs ordered");
}

Verdict check_qaf_validity(const History& h)
{
    const std::string name = "qaf-validity";
    for (const auto* get : h.of_kind({OpKind::QuorumGet}))
    {
        if (!get->complete())
            continue;
        for (const auto& state : returned_states(*get))
        {
            std::set<std::uint64_t> seen;
            for (auto id : state)
            {
                if (!seen.insert(id).second)
                    return Verdict::failed(name, op_name(get->id) + " returned a state applying update " +
                                                     std::to_string(id) + " twice");
                const auto* set = h.find(id);
                if (set == nullptr || set->kind != OpKind::QuorumSet || set->invoke_pos > *get->respond_pos)
                    return Verdict::failed(name, op_name(get->id) + " returned a state with update " +
                                                     std::to_string(id) + " that was not issued before",
                                           Json{{"get", get->id}, {"update", id}});
            }
        }
    }
    return Verdict::passed(name, "returned states are folds of issued updates");
}

// ---------------------------------------------------------------------------
// Liveness and network properties

Verdict check_termination(const History& h, ProcessSet tset, std::optional<StopReason> stop)
{
    const std::string name = "termination";
    if (!stop)
        return Verdict::inconclusive(name, "trace is truncated (no end event)");
    if (!is_quiescent(*stop))
        return Verdict::inconclusive(name, "run stopped on " + std::string(to_string(*stop)) +
                                               " before quiescence; finite runs cannot show fairness");
    Json pending = Json::array();
    std::size_t checked = 0;
    for (const auto& op : h.ops)
    {
        if (!tset.contains(op.process))
            continue;
        ++checked;
        if (!op.complete())
            pending.push_back(Json{{"op", op.id}, {"process", h.names.name(op.process)},
                                   {"kind", std::string(to_string(op.kind))}});
    }
    if (!pending.empty())
        return Verdict::failed(name,
                               std::to_string(pending.size()) + " operation(s) at " + h.names.format(tset) +
                                   " never returned",
                               Json{{"pending", pending}});
    return Verdict::passed(name, std::to_string(checked) + " operation(s) at " + h.names.format(tset) + " returned");
}

std::vector<Verdict> check_network(const Trace& trace, const FailurePattern& pattern)
{
    std::vector<Verdict> out;
    const Json* header = trace.header();
    if (header == nullptr)
    {
        out.push_back(Verdict::inconclusive("network", "trace has no run header"));
        return out;
    }
    const auto names = ProcessNames(header->at("processes").get<std::vector<std::string>>());
    const bool full = header->value("trace_level", "full") == "full";
    const bool psync = header->value("mode", "async") == "psync";
    const Time gst = header->value("gst", Time{0});
    const Time delta = header->value("delta", Time{0});

    auto channel_of = [&](const std::string& subject) {
        const auto arrow = subject.find("->");
        if (arrow == std::string::npos)
            throw TraceFormatError("bad channel subject '" + subject + "'");
        return Channel{names.lookup(subject.substr(0, arrow)), names.lookup(subject.substr(arrow + 2))};
    };

    // f-compliance needs only failure events.
    std::map<ProcessId, Time> crashed;
    std::map<Channel, Time> disconnected;
    Verdict compliance = Verdict::passed("f-compliance", "failures stay within pattern '" + pattern.name + "'");
    for (const auto& e : trace.events)
    {
        if (e.kind == "crash")
        {
            const auto p = names.lookup(e.subject);
            crashed.emplace(p, e.time);
            if (!pattern.crashed.contains(p) && compliance.pass())
                compliance = Verdict::failed("f-compliance", e.subject + " crashed outside the pattern");
        }
        else if (e.kind == "disconnect")
        {
            const auto c = channel_of(e.subject);
            disconnected.emplace(c, e.time);
            if (!pattern.dropped.contains(c) && compliance.pass())
                compliance = Verdict::failed("f-compliance", e.subject + " disconnected outside the pattern");
        }
    }
    out.push_back(compliance);
    if (!full)
    {
        out.push_back(Verdict::inconclusive("network-delivery", "trace level omits network events"));
        return out;
    }

    struct Flight
    {
        Time sent = 0;
        bool delivered = false;
        bool dropped = false;
    };
    std::map<std::pair<std::string, std::string>, Flight> flights;
    Verdict matching = Verdict::passed("deliver-has-send", "every delivery matches an earlier send");
    Verdict timely = Verdict::passed("post-gst-timeliness", psync ? "post-GST deliveries within delta"
                                                                 : "not applicable in async mode");
    Verdict drops = Verdict::passed("drop-justified", "every drop hit a disconnected channel or crashed receiver");
    for (const auto& e : trace.events)
    {
        if (e.kind != "send" && e.kind != "deliver" && e.kind != "drop")
            continue;
        const auto key = std::make_pair(e.subject, e.payload.at("env").dump());
        if (e.kind == "send")
        {
            flights[key] = Flight{e.time, false, false};
            continue;
        }
        auto it = flights.find(key);
        if (it == flights.end())
        {
            if (matching.pass())
                matching = Verdict::failed("deliver-has-send", e.kind + " on " + e.subject + " without a send",
                                           Json{{"time", e.time}, {"env", e.payload.at("env")}});
            continue;
        }
        const auto c = channel_of(e.subject);
        if (e.kind == "deliver")
        {
            it->second.delivered = true;
            if (psync && it->second.sent >= gst && !pattern.dropped.contains(c) &&
                e.time - it->second.sent > delta && timely.pass())
                timely = Verdict::failed("post-gst-timeliness",
                                         e.subject + " took " + std::to_string(e.time - it->second.sent) +
                                             " > delta",
                                         Json{{"sent", it->second.sent}, {"delivered", e.time}});
            continue;
        }
        it->second.dropped = true;
        const auto d = disconnected.find(c);
        const auto r = crashed.find(c.to);
        const bool ok = (d != disconnected.end() && d->second <= e.time) ||
                        (r != crashed.end() && r->second <= e.time);
        if (!ok && drops.pass())
            drops = Verdict::failed("drop-justified", "message dropped on working channel " + e.subject,
                                    Json{{"time", e.time}});
    }
    out.push_back(matching);
    out.push_back(drops);
    out.push_back(timely);

    const auto stop = trace.stop_reason();
    if (!stop || !is_quiescent(*stop))
    {
        out.push_back(Verdict::inconclusive("reliable-channels", "run not quiescent; messages may be in flight"));
        return out;
    }
    Verdict reliable = Verdict::passed("reliable-channels", "every send was delivered or justifiably dropped");
    for (const auto& [key, f] : flights)
        if (!f.delivered && !f.dropped)
        {
            reliable = Verdict::failed("reliable-channels", "send on " + key.first + " at time " +
                                                                std::to_string(f.sent) + " never arrived");
            break;
        }
    out.push_back(reliable);
    return out;
}

// ---------------------------------------------------------------------------
// Consensus timing

std::map<ProcessId, std::vector<Time>> view_entries(const Trace& trace, const ProcessNames& names)
{
    std::map<ProcessId, std::vector<Time>> out;
    for (const auto& e : trace.events)
    {
        if (e.kind != "note" || e.payload.value("what", "") != "view_enter")
            continue;
        const auto p = names.lookup(e.subject);
        const auto v = e.payload.at("detail").at("view").get<std::uint64_t>();
        auto& list = out[p];
        if (v != list.size() + 1)
            throw TraceFormatError(e.subject + " entered view " + std::to_string(v) + " out of order");
        list.push_back(e.time);
    }
    return out;
}

ViewSyncReport check_view_sync(const std::map<ProcessId, std::vector<Time>>& entries, ProcessSet correct,
                               Time gst, Time view_constant, Time d, std::size_t count)
{
    ViewSyncReport r;
    const std::string name = "view-synchronization";
    if (correct.empty())
    {
        r.verdict = Verdict::inconclusive(name, "no correct processes");
        return r;
    }
    auto entry = [&](ProcessId p, std::uint64_t v) -> std::optional<Time> {
        const auto it = entries.find(p);
        if (it == entries.end() || it->second.size() < v)
            return std::nullopt;
        return it->second[v - 1];
    };
    for (std::uint64_t v = 1;; ++v)
    {
        bool all = true;
        bool missing = false;
        for (auto p : correct)
        {
            const auto t = entry(p, v);
            if (!t)
                missing = true;
            else if (*t < gst)
                all = false;
        }
        if (missing)
        {
            r.verdict = Verdict::inconclusive(name, "timeline ends before all correct processes enter a view after GST");
            return r;
        }
        if (all)
        {
            r.first_synced_view = v;
            break;
        }
    }
    Time lo = 0;
    Time hi = 0;
    bool first = true;
    for (auto p : correct)
    {
        const Time t = *entry(p, r.first_synced_view);
        lo = first ? t : std::min(lo, t);
        hi = first ? t : std::max(hi, t);
        first = false;
    }
    r.spread = hi - lo;
    const auto needed = static_cast<std::uint64_t>((d + r.spread + view_constant - 1) / view_constant);
    r.target_view = std::max(r.first_synced_view, needed);
    for (std::uint64_t v = r.target_view; v < r.target_view + count; ++v)
    {
        Time last_in = 0;
        Time first_out = 0;
        bool init = true;
        for (auto p : correct)
        {
            const auto in = entry(p, v);
            const auto out = entry(p, v + 1);
            if (!in || !out)
            {
                r.verdict = Verdict::inconclusive(name, "timeline ends before view " + std::to_string(v + 1));
                return r;
            }
            last_in = init ? *in : std::max(last_in, *in);
            first_out = init ? *out : std::min(first_out, *out);
            init = false;
        }
        const Time overlap = first_out - last_in;
        r.overlaps.push_back(overlap);
        if (overlap < d)
        {
            r.verdict = Verdict::failed(name,
                                        "view " + std::to_string(v) + " overlaps for " + std::to_string(overlap) +
                                            " < " + std::to_string(d),
                                        Json{{"view", v}, {"overlap", overlap}});
            return r;
        }
    }
    r.verdict = Verdict::passed(name, "views " + std::to_string(r.target_view) + ".." +
                                          std::to_string(r.target_view + count - 1) + " overlap by at least " +
                                          std::to_string(d));
    return r;
}

Time decision_budget(ProcessId p, const FailurePattern& f, const GeneralizedQuorumSystem& gqs,
                     const NetworkGraph& g, Time delta)
{
    const NetworkGraph residual = residual_graph(g, f);
    std::optional<Time> best;
    for (const auto& w : gqs.writes)
    {
        if (!is_f_available(w, f, g))
            continue;
        for (const auto& r : gqs.reads)
        {
            if (!is_f_reachable(w, r, f, g))
                continue;
            int in = 0;
            int out = 0;
            int back = 0;
            bool ok = true;
            for (auto q : r)
            {
                const int h = hop_distance(residual, q, p);
                ok = ok && h >= 0;
                in = std::max(in, h);
            }
            for (auto q : w)
            {
                const int there = hop_distance(residual, p, q);
                const int home = hop_distance(residual, q, p);
                ok = ok && there >= 0 && home >= 0;
                out = std::max(out, there);
                back = std::max(back, home);
            }
            if (!ok)
                continue;
            const Time budget = delta * (in + out + back);
            best = best ? std::min(*best, budget) : budget;
        }
    }
    if (!best)
        throw PreconditionError("leader cannot reach an availability witness under pattern '" + f.name + "'");
    return *best;
}

LatencyReport check_decision_latency(const Trace& trace, const History& h, const FailurePattern& f,
                                     const GeneralizedQuorumSystem& gqs, const NetworkGraph& g)
{
    LatencyReport r;
    const std::string name = "decision-latency";
    const Json* header = trace.header();
    if (header == nullptr)
    {
        r.verdict = Verdict::inconclusive(name, "trace has no run header");
        return r;
    }
    const Time gst = header->value("gst", Time{0});
    const Time delta = header->value("delta", Time{0});
    if (!header->value("pin_delays", false) || header->value("mode", "") != "psync")
    {
        r.verdict = Verdict::inconclusive(name, "latency bound needs partial synchrony with pinned delays");
        return r;
    }
    const auto entries = view_entries(trace, h.names);
    const ProcessSet correct = ProcessSet::first_n(h.names.size()) - f.crashed;
    const ProcessSet u = compute_termination_component(f, gqs, g);

    std::map<ProcessId, Time> invoked;
    std::map<ProcessId, Time> decided;
    for (const auto& op : h.ops)
        if (op.kind == OpKind::Propose)
            invoked.emplace(op.process, op.invoke_time);
    for (const auto& e : trace.events)
        if (e.kind == "note" && e.payload.value("what", "") == "decide")
            decided.emplace(h.names.lookup(e.subject), e.time);

    const bool ended = trace.stop_reason().has_value();
    const Time end_time = ended ? trace.events.back().time : 0;
    for (std::uint64_t v = 1;; ++v)
    {
        const ProcessId p = leader(v, h.names.size());
        Time last_in = 0;
        // A view nobody has left yet stays open until the trace ends.
        std::optional<Time> first_out;
        bool init = true;
        bool complete = true;
        for (auto q : correct)
        {
            const auto it = entries.find(q);
            if (it == entries.end() || it->second.size() < v)
            {
                complete = false;
                break;
            }
            last_in = init ? it->second[v - 1] : std::max(last_in, it->second[v - 1]);
            if (it->second.size() > v)
                first_out = first_out ? std::min(*first_out, it->second[v]) : it->second[v];
            init = false;
        }
        if (!complete || init)
        {
            // No qualifying view was reached; the bound holds vacuously if U_f already decided.
            bool all_decided = true;
            for (const auto& [q, t] : invoked)
                if (u.contains(q) && decided.count(q) == 0)
                    all_decided = false;
            if (all_decided && ended)
                r.verdict = Verdict::passed(name, "every proposer in " + h.names.format(u) +
                                                      " decided before any qualifying view");
            else
                r.verdict = Verdict::inconclusive(name, "no qualifying leader view on the timeline");
            return r;
        }
        if (!first_out && !ended)
        {
            r.verdict = Verdict::inconclusive(name, "trace is truncated inside view " + std::to_string(v));
            return r;
        }
        if (!u.contains(p) || invoked.count(p) == 0)
            continue;
        Time first_in = last_in;
        for (auto q : correct)
            first_in = std::min(first_in, entries.at(q)[v - 1]);
        const Time budget = decision_budget(p, f, gqs, g, delta);
        if (first_in < std::max(gst, invoked.at(p)))
            continue;
        if (first_out && *first_out - last_in <= budget)
            continue;
        if (!first_out && end_time < last_in + budget && decided.count(p) == 0)
        {
            r.verdict = Verdict::inconclusive(name, "trace ends before the deadline in view " + std::to_string(v));
            return r;
        }
        r.view = v;
        r.leader = p;
        r.last_entry = last_in;
        r.budget = budget;
        if (auto it = decided.find(p); it != decided.end())
            r.decided_at = it->second;
        const Time deadline = last_in + budget;
        if (r.decided_at && *r.decided_at <= deadline)
            r.verdict = Verdict::passed(name, h.names.name(p) + " decided at " + std::to_string(*r.decided_at) +
                                                  " within " + std::to_string(budget) + " of the last entry into view " +
                                                  std::to_string(v) + " at " + std::to_string(last_in));
        else
            r.verdict = Verdict::failed(name,
                                        h.names.name(p) + " missed the deadline " + std::to_string(deadline) +
                                            " in view " + std::to_string(v),
                                        Json{{"view", v}, {"deadline", deadline},
                                             {"decided_at", r.decided_at ? Json(*r.decided_at) : Json(nullptr)}});
        return r;
    }
}

} // namespace gqslab
