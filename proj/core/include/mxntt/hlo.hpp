#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mxntt/erns.hpp"
#include "mxntt/scheduler.hpp"

namespace mxntt {

enum class NodeKind { Param, Dot, VpuReduce, CustomCall, Barrier, Fusion, Tuple };

const char* node_kind_name(NodeKind kind);
NodeKind node_kind_from_name(const std::string& name); // throws ParseError

using NodeId = std::int64_t;

struct BufferInterval {
    std::uint64_t begin = 0;
    std::uint64_t end = 0; // half-open
    bool empty() const { return begin == end; }
};

struct IrNode {
    NodeId id = 0;
    NodeKind kind = NodeKind::Param;
    std::vector<NodeId> operands;
    std::optional<std::int64_t> memory_space;   // tenant-distinct
    std::optional<std::int64_t> workload_zone;  // temporal, per batch
    std::optional<std::int64_t> precision_zone; // structural, per limb class
    BufferInterval buffer;
    std::optional<std::int64_t> chain; // staged-summation chain membership
    std::optional<std::int64_t> tile;  // tile index within the chain
};

struct IrModule {
    std::vector<IrNode> nodes;
    std::vector<NodeId> schedule; // total execution order
};

enum class RuleId { V1, V2, V3, V4, V5 };

const char* rule_name(RuleId rule);

struct Violation {
    RuleId rule = RuleId::V1;
    std::vector<NodeId> nodes;
    std::string subgraph; // offending subgraph dump for triage
};

// Lowers a slice assignment into the staged-summation graph: per (row,
// channel) chain, one Dot per staging tile, a reduction group after each tile,
// and a Barrier fencing each inter-tile boundary. Eager mode sizes BN254
// reduction groups from the calibrated schedule; lazy mode emits the
// single-tile-per-stage baseline shape instead.
IrModule build_module(const SliceAssignment& assignment,
                      const ReductionSchedule& schedule);

struct MutationConfig {
    double merge_across_barriers = 0.0; // V1: barrier delete / reduce move / group delete
    double coalesce_buffers = 0.0;      // V2: overlap buffers across memory spaces
    double cross_block_fusion = 0.0;    // V3: fuse nodes from separate blocks
    double extend_liveness = 0.0;       // V4: pull an operand across workload zones
    double mix_precision = 0.0;         // V5: tamper one node's precision zone
};

struct InjectedViolation {
    RuleId rule = RuleId::V1;
    std::vector<NodeId> nodes;
};

struct MutationResult {
    IrModule module;
    std::vector<InjectedViolation> injected; // ground truth for detection audits
};

// Randomized structural mutations standing in for an over-aggressive fusion
// and aliasing pass. Each family fires independently with its configured
// probability; ground truth is recorded at mutation time.
MutationResult adversarial_fuse(const IrModule& m, std::uint64_t seed,
                                const MutationConfig& cfg);

struct ValidationReport {
    bool ok = false;
    std::vector<Violation> violations; // all of them, ordered by (rule, node)
    std::size_t node_count = 0;
    double validation_seconds = 0.0;
};

// Structural audit. Checks, in order:
//  V1 strict reduction ordering: every inter-tile boundary of a multi-tile
//     chain carries its reduction group and Barrier, and no reduction of a
//     tile is scheduled after the next tile's Dot opens.
//  V2 disjoint addressing: buffers of distinct memory spaces never overlap.
//  V3 no cross-block fusion: a Fusion's operands stay within one memory
//     space and one workload zone.
//  V4 liveness containment: a non-Fusion node never consumes an operand from
//     another workload zone.
//  V5 precision separation: no node mixes precision zones with its operands.
// A malformed module (dangling operand, cyclic reference, bad schedule)
// throws ParseError instead of reporting a Violation.
ValidationReport validate(const IrModule& m);

// VpuReduce plus CustomCall node count.
std::int64_t count_vpu_nodes(const IrModule& m);

std::string module_to_json(const IrModule& m);
IrModule module_from_json(const std::string& text); // throws ParseError

} // namespace mxntt
