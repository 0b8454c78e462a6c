#include "mxntt/hlo.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <map>
#include <random>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

namespace mxntt {

namespace {

constexpr const char* kKindNames[] = {"param",   "dot",    "vpu_reduce", "custom_call",
                                      "barrier", "fusion", "tuple"};

std::int64_t lazy_stage_count(std::int64_t width) {
    std::int64_t stages = 0;
    std::uint64_t n = std::bit_ceil(static_cast<std::uint64_t>(width));
    while (n > 1) {
        n >>= 1;
        ++stages;
    }
    return std::max<std::int64_t>(stages, 1);
}

struct Builder {
    IrModule m;
    std::uint64_t cursor = 0;
    NodeId next_id = 0;

    NodeId add(NodeKind kind, std::vector<NodeId> operands,
               std::optional<std::int64_t> ms, std::optional<std::int64_t> zone,
               std::optional<std::int64_t> prec, std::uint64_t bytes,
               std::optional<std::int64_t> chain = std::nullopt,
               std::optional<std::int64_t> tile = std::nullopt) {
        IrNode n;
        n.id = next_id++;
        n.kind = kind;
        n.operands = std::move(operands);
        n.memory_space = ms;
        n.workload_zone = zone;
        n.precision_zone = prec;
        n.buffer = {cursor, cursor + bytes};
        cursor += bytes;
        n.chain = chain;
        n.tile = tile;
        m.nodes.push_back(std::move(n));
        m.schedule.push_back(m.nodes.back().id);
        return m.nodes.back().id;
    }
};

// Spreads `total` reduction nodes over `groups` groups, earliest groups taking
// the remainder. The calibrated shapes divide evenly.
std::vector<std::int64_t> spread(std::int64_t total, std::int64_t groups) {
    std::vector<std::int64_t> g(static_cast<std::size_t>(groups), total / groups);
    for (std::int64_t i = 0; i < total % groups; ++i) ++g[static_cast<std::size_t>(i)];
    return g;
}

} // namespace

const char* node_kind_name(NodeKind kind) {
    return kKindNames[static_cast<int>(kind)];
}

NodeKind node_kind_from_name(const std::string& name) {
    for (int k = 0; k < 7; ++k)
        if (name == kKindNames[k]) return static_cast<NodeKind>(k);
    throw ParseError("unknown node kind: " + name);
}

const char* rule_name(RuleId rule) {
    static constexpr const char* names[] = {"V1", "V2", "V3", "V4", "V5"};
    return names[static_cast<int>(rule)];
}

IrModule build_module(const SliceAssignment& assignment,
                      const ReductionSchedule& schedule) {
    Builder b;
    std::int64_t next_ms = 0;
    std::int64_t next_chain = 0;

    for (const StackedBatch& batch : assignment.batches) {
        const ClassParams& params = class_params(batch.cls);
        const std::int64_t zone = batch.zone_tag;
        const std::int64_t prec = params.limbs;
        const std::uint64_t row_bytes = static_cast<std::uint64_t>(batch.padded_width) * 4u;
        const std::int64_t shared_ms = next_ms++;
        std::vector<NodeId> finals;

        if (schedule.mode == ReductionMode::Eager) {
            const std::int64_t passes = batch.padded_width / params.staging_width;
            std::vector<NodeId> twiddles;
            for (int c = 0; c < params.channels; ++c)
                twiddles.push_back(b.add(NodeKind::Param, {}, shared_ms, zone, prec, row_bytes));

            // Per-row reduction budget: the calibrated schedule rescaled to the
            // dispatch width for BN254 rows; one structural normalisation per
            // tile group for the single-channel class.
            std::int64_t row_total =
                batch.cls == WorkloadClass::BN254
                    ? schedule_reductions(batch.padded_width, ReductionMode::Eager)
                          .reductions_per_polynomial
                    : static_cast<std::int64_t>(params.channels) * passes;
            std::vector<std::int64_t> per_chain =
                spread(row_total, params.channels);

            for (const Request& member : batch.members) {
                (void)member;
                const std::int64_t ms = next_ms++;
                for (int c = 0; c < params.channels; ++c) {
                    NodeId p = b.add(NodeKind::Param, {}, ms, zone, prec, row_bytes);
                    const std::int64_t chain = next_chain++;
                    std::vector<std::int64_t> groups =
                        spread(per_chain[static_cast<std::size_t>(c)], passes);
                    NodeId last = p;
                    for (std::int64_t j = 0; j < passes; ++j) {
                        NodeId dot = b.add(NodeKind::Dot,
                                           {p, twiddles[static_cast<std::size_t>(c)]}, ms,
                                           zone, prec, row_bytes, chain, j);
                        last = dot;
                        for (std::int64_t k = 0; k < groups[static_cast<std::size_t>(j)]; ++k)
                            last = b.add(NodeKind::VpuReduce, {dot}, ms, zone, prec,
                                         row_bytes, chain, j);
                        if (j + 1 < passes)
                            b.add(NodeKind::Barrier, {}, ms, zone, prec, 0, chain, j);
                    }
                    finals.push_back(last);
                }
            }
        } else {
            // Baseline shape: one pipeline per row, each butterfly stage a
            // single-tile chain, normalisation deferred into per-stage groups.
            const std::int64_t stages = lazy_stage_count(batch.padded_width);
            std::int64_t row_total =
                batch.cls == WorkloadClass::BN254
                    ? schedule_reductions(batch.padded_width, ReductionMode::Lazy)
                          .reductions_per_polynomial
                    : stages;
            std::vector<std::int64_t> groups = spread(row_total, stages);
            for (const Request& member : batch.members) {
                (void)member;
                const std::int64_t ms = next_ms++;
                NodeId prev = b.add(NodeKind::Param, {}, ms, zone, prec, row_bytes);
                for (std::int64_t s = 0; s < stages; ++s) {
                    const std::int64_t chain = next_chain++;
                    NodeId dot =
                        b.add(NodeKind::Dot, {prev}, ms, zone, prec, row_bytes, chain, 0);
                    NodeId last = dot;
                    for (std::int64_t k = 0; k < groups[static_cast<std::size_t>(s)]; ++k)
                        last = b.add(NodeKind::VpuReduce, {dot}, ms, zone, prec,
                                     row_bytes, chain, 0);
                    prev = last;
                }
                finals.push_back(prev);
            }
        }
        b.add(NodeKind::Tuple, std::move(finals), shared_ms, zone, prec, 0);
    }
    return std::move(b.m);
}

namespace {

struct ModuleIndex {
    std::unordered_map<NodeId, std::size_t> by_id;
    std::unordered_map<NodeId, std::size_t> pos; // schedule position

    explicit ModuleIndex(const IrModule& m, bool check_dataflow = true) {
        for (std::size_t i = 0; i < m.nodes.size(); ++i) {
            if (!by_id.emplace(m.nodes[i].id, i).second)
                throw ParseError("duplicate node id " + std::to_string(m.nodes[i].id));
        }
        for (const IrNode& n : m.nodes)
            for (NodeId op : n.operands)
                if (!by_id.count(op))
                    throw ParseError("dangling operand " + std::to_string(op) +
                                     " on node " + std::to_string(n.id));
        if (m.schedule.size() != m.nodes.size())
            throw ParseError("schedule is not a permutation of the module's nodes");
        for (std::size_t i = 0; i < m.schedule.size(); ++i) {
            if (!by_id.count(m.schedule[i]))
                throw ParseError("schedule names unknown node " +
                                 std::to_string(m.schedule[i]));
            if (!pos.emplace(m.schedule[i], i).second)
                throw ParseError("schedule repeats node " + std::to_string(m.schedule[i]));
        }
        // Acyclicity via DFS over operand edges.
        std::unordered_map<NodeId, int> color;
        std::vector<std::pair<NodeId, std::size_t>> stack;
        for (const IrNode& root : m.nodes) {
            if (color[root.id]) continue;
            stack.push_back({root.id, 0});
            color[root.id] = 1;
            while (!stack.empty()) {
                auto& [id, next] = stack.back();
                const IrNode& n = m.nodes[by_id[id]];
                if (next < n.operands.size()) {
                    NodeId op = n.operands[next++];
                    int c = color[op];
                    if (c == 1) throw ParseError("cyclic operand reference at node " +
                                                 std::to_string(op));
                    if (c == 0) {
                        color[op] = 1;
                        stack.push_back({op, 0});
                    }
                } else {
                    color[id] = 2;
                    stack.pop_back();
                }
            }
        }
        if (check_dataflow)
            for (const IrNode& n : m.nodes)
                for (NodeId op : n.operands)
                    if (pos[op] >= pos[n.id])
                        throw ParseError("node " + std::to_string(n.id) +
                                         " scheduled before its operand " +
                                         std::to_string(op));
    }
};

std::string describe_node(const IrNode& n) {
    std::ostringstream os;
    os << "  node " << n.id << " (" << node_kind_name(n.kind);
    if (n.chain) os << ", chain " << *n.chain;
    if (n.tile) os << ", tile " << *n.tile;
    os << ")";
    if (n.memory_space) os << " ms=" << *n.memory_space;
    if (n.workload_zone) os << " zone=" << *n.workload_zone;
    if (n.precision_zone) os << " prec=" << *n.precision_zone;
    if (!n.buffer.empty()) os << " buf=[" << n.buffer.begin << "," << n.buffer.end << ")";
    if (!n.operands.empty()) {
        os << " operands(";
        for (std::size_t i = 0; i < n.operands.size(); ++i)
            os << (i ? "," : "") << n.operands[i];
        os << ")";
    }
    return os.str();
}

Violation make_violation(const IrModule& m, const ModuleIndex& idx, RuleId rule,
                         std::vector<NodeId> nodes, const std::string& what) {
    std::ostringstream os;
    os << rule_name(rule) << ": " << what << "\n";
    for (NodeId id : nodes) os << describe_node(m.nodes[idx.by_id.at(id)]) << "\n";
    return {rule, std::move(nodes), os.str()};
}

struct ChainInfo {
    std::vector<std::pair<std::int64_t, NodeId>> dots;           // (tile, id)
    std::vector<std::pair<std::int64_t, NodeId>> reduces;        // (tile, id)
    std::map<std::int64_t, std::vector<NodeId>> barriers_by_tile;
};

} // namespace

ValidationReport validate(const IrModule& m) {
    auto start = std::chrono::steady_clock::now();
    ModuleIndex idx(m);
    ValidationReport rep;
    rep.node_count = m.nodes.size();

    // V1: strict reduction ordering per staged-summation chain.
    std::map<std::int64_t, ChainInfo> chains;
    for (const IrNode& n : m.nodes) {
        if (!n.chain) continue;
        ChainInfo& c = chains[*n.chain];
        std::int64_t tile = n.tile.value_or(0);
        if (n.kind == NodeKind::Dot) c.dots.push_back({tile, n.id});
        else if (n.kind == NodeKind::VpuReduce || n.kind == NodeKind::CustomCall)
            c.reduces.push_back({tile, n.id});
        else if (n.kind == NodeKind::Barrier) c.barriers_by_tile[tile].push_back(n.id);
    }
    for (auto& [chain_id, c] : chains) {
        std::sort(c.dots.begin(), c.dots.end());
        for (std::size_t j = 0; j + 1 < c.dots.size(); ++j) {
            NodeId dj = c.dots[j].second;
            NodeId dn = c.dots[j + 1].second;
            std::size_t pj = idx.pos.at(dj), pn = idx.pos.at(dn);
            std::int64_t tile = c.dots[j].first;

            std::optional<std::size_t> barrier_pos;
            auto bit = c.barriers_by_tile.find(tile);
            if (bit != c.barriers_by_tile.end())
                for (NodeId b : bit->second) {
                    std::size_t pb = idx.pos.at(b);
                    if (pb > pj && pb < pn) barrier_pos = pb;
                }
            if (!barrier_pos)
                rep.violations.push_back(make_violation(
                    m, idx, RuleId::V1, {dj, dn},
                    "chain " + std::to_string(chain_id) + " tile boundary " +
                        std::to_string(tile) + " has no closing barrier"));

            bool any_before_close = false;
            bool any_in_window = false;
            for (auto& [rt, rid] : c.reduces) {
                if (rt != tile) continue;
                any_in_window = true;
                std::size_t pr = idx.pos.at(rid);
                if (pr <= pj || pr >= pn)
                    rep.violations.push_back(make_violation(
                        m, idx, RuleId::V1, {rid},
                        "reduction of chain " + std::to_string(chain_id) + " tile " +
                            std::to_string(tile) +
                            " scheduled inside the next open summation"));
                else if (!barrier_pos || pr < *barrier_pos)
                    any_before_close = true;
            }
            if (!any_in_window)
                rep.violations.push_back(make_violation(
                    m, idx, RuleId::V1, {dj, dn},
                    "chain " + std::to_string(chain_id) + " tile " + std::to_string(tile) +
                        " accumulates with no reduction group before the next tile"));
            else if (barrier_pos && !any_before_close)
                rep.violations.push_back(make_violation(
                    m, idx, RuleId::V1, {dj, dn},
                    "chain " + std::to_string(chain_id) + " tile " + std::to_string(tile) +
                        " closes its barrier before any reduction"));
        }
        if (!c.dots.empty()) {
            std::size_t plast = idx.pos.at(c.dots.back().second);
            std::int64_t last_tile = c.dots.back().first;
            for (auto& [rt, rid] : c.reduces)
                if (rt == last_tile && idx.pos.at(rid) <= plast)
                    rep.violations.push_back(make_violation(
                        m, idx, RuleId::V1, {rid},
                        "final reduction of chain " + std::to_string(chain_id) +
                            " scheduled before its tile"));
        }
    }

    // V2: buffers of distinct memory spaces never overlap.
    {
        struct Item {
            std::uint64_t begin, end;
            std::int64_t ms;
            NodeId id;
        };
        std::vector<Item> items;
        for (const IrNode& n : m.nodes)
            if (!n.buffer.empty() && n.memory_space)
                items.push_back({n.buffer.begin, n.buffer.end, *n.memory_space, n.id});
        std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
            return std::tie(a.begin, a.end, a.id) < std::tie(b.begin, b.end, b.id);
        });
        std::vector<Item> active;
        for (const Item& it : items) {
            active.erase(std::remove_if(active.begin(), active.end(),
                                        [&](const Item& a) { return a.end <= it.begin; }),
                         active.end());
            for (const Item& a : active)
                if (a.ms != it.ms)
                    rep.violations.push_back(make_violation(
                        m, idx, RuleId::V2, {a.id, it.id},
                        "buffers overlap across memory spaces " + std::to_string(a.ms) +
                            " and " + std::to_string(it.ms)));
            active.push_back(it);
        }
    }

    // V3: a Fusion never spans memory spaces or workload zones.
    for (const IrNode& n : m.nodes) {
        if (n.kind != NodeKind::Fusion) continue;
        std::unordered_set<std::int64_t> spaces, zones;
        for (NodeId op : n.operands) {
            const IrNode& o = m.nodes[idx.by_id.at(op)];
            if (o.memory_space) spaces.insert(*o.memory_space);
            if (o.workload_zone) zones.insert(*o.workload_zone);
        }
        if (spaces.size() > 1 || zones.size() > 1) {
            std::vector<NodeId> nodes{n.id};
            nodes.insert(nodes.end(), n.operands.begin(), n.operands.end());
            rep.violations.push_back(make_violation(
                m, idx, RuleId::V3, std::move(nodes),
                spaces.size() > 1 ? "fusion spans distinct memory spaces"
                                  : "fusion spans distinct workload zones"));
        }
    }

    // V4: liveness containment, formalized on edges: consuming an operand from
    // another workload zone keeps its buffer live in this zone's window.
    for (const IrNode& n : m.nodes) {
        if (n.kind == NodeKind::Fusion || !n.workload_zone) continue;
        for (NodeId op : n.operands) {
            const IrNode& o = m.nodes[idx.by_id.at(op)];
            if (o.workload_zone && *o.workload_zone != *n.workload_zone)
                rep.violations.push_back(make_violation(
                    m, idx, RuleId::V4, {n.id, op},
                    "buffer of zone " + std::to_string(*o.workload_zone) +
                        " held live inside zone " + std::to_string(*n.workload_zone)));
        }
    }

    // V5: no node mixes precision zones with or across its operands.
    for (const IrNode& n : m.nodes) {
        std::unordered_set<std::int64_t> precisions;
        if (n.precision_zone) precisions.insert(*n.precision_zone);
        std::vector<NodeId> involved{n.id};
        for (NodeId op : n.operands) {
            const IrNode& o = m.nodes[idx.by_id.at(op)];
            if (o.precision_zone) {
                precisions.insert(*o.precision_zone);
                involved.push_back(op);
            }
        }
        if (precisions.size() > 1)
            rep.violations.push_back(make_violation(m, idx, RuleId::V5,
                                                    std::move(involved),
                                                    "operand precision zones differ"));
    }

    std::sort(rep.violations.begin(), rep.violations.end(),
              [](const Violation& a, const Violation& b) {
                  return std::tie(a.rule, a.nodes.front()) <
                         std::tie(b.rule, b.nodes.front());
              });
    rep.ok = rep.violations.empty();
    rep.validation_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

std::int64_t count_vpu_nodes(const IrModule& m) {
    std::int64_t n = 0;
    for (const IrNode& node : m.nodes)
        if (node.kind == NodeKind::VpuReduce || node.kind == NodeKind::CustomCall) ++n;
    return n;
}

namespace {

void erase_node(IrModule& m, NodeId id) {
    m.nodes.erase(std::remove_if(m.nodes.begin(), m.nodes.end(),
                                 [&](const IrNode& n) { return n.id == id; }),
                  m.nodes.end());
    m.schedule.erase(std::remove(m.schedule.begin(), m.schedule.end(), id),
                     m.schedule.end());
}

} // namespace

MutationResult adversarial_fuse(const IrModule& in, std::uint64_t seed,
                                const MutationConfig& cfg) {
    MutationResult out;
    out.module = in;
    IrModule& m = out.module;
    std::mt19937_64 rng(seed);
    auto coin = [&](double p) {
        return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
    };
    auto pick = [&](std::size_t n) {
        return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    };

    // V1 family: disturb the tile/barrier interleave of one multi-tile chain.
    if (coin(cfg.merge_across_barriers)) {
        std::map<std::int64_t, ChainInfo> chains;
        for (const IrNode& n : m.nodes) {
            if (!n.chain) continue;
            ChainInfo& c = chains[*n.chain];
            std::int64_t tile = n.tile.value_or(0);
            if (n.kind == NodeKind::Dot) c.dots.push_back({tile, n.id});
            else if (n.kind == NodeKind::VpuReduce) c.reduces.push_back({tile, n.id});
            else if (n.kind == NodeKind::Barrier) c.barriers_by_tile[tile].push_back(n.id);
        }
        std::vector<std::int64_t> multi;
        for (auto& [id, c] : chains)
            if (c.dots.size() >= 2) multi.push_back(id);
        if (!multi.empty()) {
            ChainInfo& c = chains[multi[pick(multi.size())]];
            std::sort(c.dots.begin(), c.dots.end());
            std::size_t j = pick(c.dots.size() - 1);
            std::int64_t tile = c.dots[j].first;
            NodeId next_dot = c.dots[j + 1].second;
            switch (pick(3)) {
            case 0: { // delete the closing barrier
                auto bit = c.barriers_by_tile.find(tile);
                if (bit != c.barriers_by_tile.end() && !bit->second.empty()) {
                    erase_node(m, bit->second.front());
                    out.injected.push_back(
                        {RuleId::V1, {c.dots[j].second, next_dot}});
                    break;
                }
                [[fallthrough]];
            }
            case 1: { // move one reduction past the next tile's dot
                std::vector<NodeId> group;
                for (auto& [rt, rid] : c.reduces)
                    if (rt == tile) group.push_back(rid);
                if (!group.empty()) {
                    NodeId moved = group[pick(group.size())];
                    auto& sched = m.schedule;
                    sched.erase(std::remove(sched.begin(), sched.end(), moved),
                                sched.end());
                    auto at = std::find(sched.begin(), sched.end(), next_dot);
                    sched.insert(at + 1, moved);
                    out.injected.push_back({RuleId::V1, {moved}});
                    break;
                }
                [[fallthrough]];
            }
            default: { // delete the whole reduction group of this tile
                std::vector<NodeId> group;
                for (auto& [rt, rid] : c.reduces)
                    if (rt == tile) group.push_back(rid);
                for (NodeId rid : group) erase_node(m, rid);
                out.injected.push_back({RuleId::V1, {c.dots[j].second, next_dot}});
                break;
            }
            }
        }
    }

    // V2: coalesce two buffers that live in different memory spaces.
    if (coin(cfg.coalesce_buffers)) {
        std::vector<std::size_t> cands;
        for (std::size_t i = 0; i < m.nodes.size(); ++i)
            if (!m.nodes[i].buffer.empty() && m.nodes[i].memory_space)
                cands.push_back(i);
        if (cands.size() >= 2) {
            std::size_t a = cands[pick(cands.size())];
            std::vector<std::size_t> others;
            for (std::size_t i : cands)
                if (*m.nodes[i].memory_space != *m.nodes[a].memory_space)
                    others.push_back(i);
            if (!others.empty()) {
                // Alias exactly: any wider interval could also clip neighbours
                // and the ground truth would no longer match what fires.
                std::size_t b = others[pick(others.size())];
                m.nodes[b].buffer = m.nodes[a].buffer;
                out.injected.push_back({RuleId::V2, {m.nodes[a].id, m.nodes[b].id}});
            }
        }
    }

    // V3: fuse across blocks. Prefer two same-precision nodes in different
    // workload zones; otherwise two memory spaces inside one zone.
    if (coin(cfg.cross_block_fusion)) {
        ModuleIndex idx(m);
        std::map<std::pair<std::int64_t, std::int64_t>, NodeId> rep; // (prec, zone)
        for (const IrNode& n : m.nodes)
            if (n.kind == NodeKind::Param && n.precision_zone && n.workload_zone)
                rep.try_emplace({*n.precision_zone, *n.workload_zone}, n.id);
        std::optional<std::pair<NodeId, NodeId>> pair;
        for (auto it = rep.begin(); it != rep.end() && !pair; ++it) {
            auto jt = it;
            for (++jt; jt != rep.end(); ++jt)
                if (jt->first.first == it->first.first) {
                    pair = {it->second, jt->second};
                    break;
                }
        }
        if (!pair) {
            // two params of one zone but different spaces
            std::map<std::int64_t, std::vector<NodeId>> by_zone;
            for (const IrNode& n : m.nodes)
                if (n.kind == NodeKind::Param && n.workload_zone && n.memory_space)
                    by_zone[*n.workload_zone].push_back(n.id);
            for (auto& [zone, ids] : by_zone) {
                for (std::size_t i = 1; i < ids.size() && !pair; ++i)
                    if (*m.nodes[idx.by_id.at(ids[i])].memory_space !=
                        *m.nodes[idx.by_id.at(ids[0])].memory_space)
                        pair = {ids[0], ids[i]};
                if (pair) break;
            }
        }
        if (pair) {
            NodeId max_id = 0;
            for (const IrNode& n : m.nodes) max_id = std::max(max_id, n.id);
            IrNode fusion;
            fusion.id = max_id + 1;
            fusion.kind = NodeKind::Fusion;
            fusion.operands = {pair->first, pair->second};
            m.nodes.push_back(fusion);
            m.schedule.push_back(fusion.id);
            out.injected.push_back(
                {RuleId::V3, {fusion.id, pair->first, pair->second}});
        }
    }

    // V4: pull an operand across workload zones into a non-Fusion consumer of
    // the same precision class.
    if (coin(cfg.extend_liveness)) {
        ModuleIndex idx(m);
        std::vector<std::size_t> tuples;
        for (std::size_t i = 0; i < m.nodes.size(); ++i)
            if (m.nodes[i].kind == NodeKind::Tuple && m.nodes[i].workload_zone &&
                m.nodes[i].precision_zone)
                tuples.push_back(i);
        std::optional<std::pair<std::size_t, std::size_t>> pair; // (consumer, donor)
        for (std::size_t i = 0; i < tuples.size() && !pair; ++i)
            for (std::size_t j = 0; j < tuples.size(); ++j) {
                const IrNode& a = m.nodes[tuples[i]];
                const IrNode& b = m.nodes[tuples[j]];
                if (*a.workload_zone != *b.workload_zone &&
                    *a.precision_zone == *b.precision_zone &&
                    idx.pos.at(b.id) < idx.pos.at(a.id)) {
                    pair = {tuples[i], tuples[j]};
                    break;
                }
            }
        if (pair) {
            m.nodes[pair->first].operands.push_back(m.nodes[pair->second].id);
            out.injected.push_back(
                {RuleId::V4, {m.nodes[pair->first].id, m.nodes[pair->second].id}});
        }
    }

    // V5: tamper one Dot's precision zone.
    if (coin(cfg.mix_precision)) {
        std::vector<std::size_t> dots;
        for (std::size_t i = 0; i < m.nodes.size(); ++i)
            if (m.nodes[i].kind == NodeKind::Dot && m.nodes[i].precision_zone)
                dots.push_back(i);
        if (!dots.empty()) {
            std::size_t d = dots[pick(dots.size())];
            std::int64_t cur = *m.nodes[d].precision_zone;
            m.nodes[d].precision_zone = cur == 4 ? 3 : 4;
            out.injected.push_back({RuleId::V5, {m.nodes[d].id}});
        }
    }

    return out;
}

std::string module_to_json(const IrModule& m) {
    nlohmann::json j;
    j["nodes"] = nlohmann::json::array();
    for (const IrNode& n : m.nodes) {
        nlohmann::json jn;
        jn["id"] = n.id;
        jn["kind"] = node_kind_name(n.kind);
        jn["operands"] = n.operands;
        jn["buffer"] = {n.buffer.begin, n.buffer.end};
        if (n.memory_space) jn["memory_space"] = *n.memory_space;
        if (n.workload_zone) jn["workload_zone"] = *n.workload_zone;
        if (n.precision_zone) jn["precision_zone"] = *n.precision_zone;
        if (n.chain) jn["chain"] = *n.chain;
        if (n.tile) jn["tile"] = *n.tile;
        j["nodes"].push_back(std::move(jn));
    }
    j["schedule"] = m.schedule;
    return j.dump(2);
}

IrModule module_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("module JSON malformed: ") + e.what());
    }
    try {
        IrModule m;
        for (const auto& jn : j.at("nodes")) {
            IrNode n;
            n.id = jn.at("id").get<std::int64_t>();
            n.kind = node_kind_from_name(jn.at("kind").get<std::string>());
            n.operands = jn.at("operands").get<std::vector<NodeId>>();
            auto buf = jn.at("buffer");
            n.buffer = {buf.at(0).get<std::uint64_t>(), buf.at(1).get<std::uint64_t>()};
            if (jn.contains("memory_space"))
                n.memory_space = jn["memory_space"].get<std::int64_t>();
            if (jn.contains("workload_zone"))
                n.workload_zone = jn["workload_zone"].get<std::int64_t>();
            if (jn.contains("precision_zone"))
                n.precision_zone = jn["precision_zone"].get<std::int64_t>();
            if (jn.contains("chain")) n.chain = jn["chain"].get<std::int64_t>();
            if (jn.contains("tile")) n.tile = jn["tile"].get<std::int64_t>();
            m.nodes.push_back(std::move(n));
        }
        m.schedule = j.at("schedule").get<std::vector<NodeId>>();
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("module JSON missing fields: ") + e.what());
    }
}

} // namespace mxntt
