#include <doctest.h>

#include <algorithm>
#include <set>
#include <vector>

#include "mxntt/erns.hpp"
#include "mxntt/hlo.hpp"
#include "mxntt/scheduler.hpp"

using namespace mxntt;

namespace {

StackedBatch uniform(WorkloadClass cls, int rows, std::int64_t degree, int zone,
                     std::int64_t first_tenant) {
    StackedBatch b;
    b.cls = cls;
    b.rows = rows;
    b.zone_tag = zone;
    b.padded_width = padded_degree(degree, class_params(cls).staging_width);
    for (int i = 0; i < rows; ++i) {
        Request r;
        r.tenant_id = first_tenant + i;
        r.cls = cls;
        r.degree = degree;
        r.coeff_seed = static_cast<std::uint64_t>(first_tenant + i);
        b.members.push_back(std::move(r));
    }
    return b;
}

IrModule single_row_module(ReductionMode mode) {
    SliceAssignment asg =
        co_schedule({uniform(WorkloadClass::BN254, 1, 256, 0, 1)}, 8);
    return build_module(asg, schedule_reductions(256, mode));
}

IrModule two_zone_module() {
    std::vector<StackedBatch> batches;
    batches.push_back(uniform(WorkloadClass::BN254, 2, 256, 0, 10));
    batches.push_back(uniform(WorkloadClass::BN254, 2, 256, 1, 20));
    return build_module(co_schedule(batches, 8),
                        schedule_reductions(256, ReductionMode::Eager));
}

std::size_t count_kind(const IrModule& m, NodeKind kind) {
    std::size_t n = 0;
    for (const IrNode& node : m.nodes)
        if (node.kind == kind) ++n;
    return n;
}

std::set<RuleId> detected_rules(const IrModule& m) {
    std::set<RuleId> rules;
    for (const Violation& v : validate(m).violations) rules.insert(v.rule);
    return rules;
}

} // namespace

TEST_CASE("eager single-row graph carries the calibrated reduction count") {
    IrModule m = single_row_module(ReductionMode::Eager);
    CHECK(count_vpu_nodes(m) == 1764);
    CHECK(count_kind(m, NodeKind::Dot) == 18);     // 9 channels x 2 passes
    CHECK(count_kind(m, NodeKind::Barrier) == 9);  // one tile boundary per chain
    CHECK(count_kind(m, NodeKind::Param) == 18);   // 9 twiddles + 9 row slices
    CHECK(count_kind(m, NodeKind::Tuple) == 1);
    ValidationReport vr = validate(m);
    CHECK(vr.ok);
    CHECK(vr.node_count == m.nodes.size());
}

TEST_CASE("lazy single-row graph defers reductions into stages") {
    IrModule m = single_row_module(ReductionMode::Lazy);
    CHECK(count_vpu_nodes(m) == 392);
    CHECK(count_kind(m, NodeKind::Dot) == 8); // log2(256) stages
    CHECK(count_kind(m, NodeKind::Barrier) == 0);
    CHECK(validate(m).ok);

    IrModule eager = single_row_module(ReductionMode::Eager);
    CHECK(static_cast<double>(count_vpu_nodes(eager)) /
              static_cast<double>(count_vpu_nodes(m)) ==
          4.5);
}

TEST_CASE("single-channel rows get one normalisation per tile group") {
    SliceAssignment asg =
        co_schedule({uniform(WorkloadClass::Dilithium, 1, 256, 0, 1)}, 8);
    IrModule m = build_module(asg, schedule_reductions(256, ReductionMode::Eager));
    CHECK(count_vpu_nodes(m) == 2); // width 342, two passes, one channel
    CHECK(validate(m).ok);
}

TEST_CASE("stage chains consume the previous stage's final reduce") {
    IrModule m = single_row_module(ReductionMode::Lazy);
    // Every Dot past the first must name a VpuReduce operand.
    std::size_t chained = 0;
    for (const IrNode& n : m.nodes) {
        if (n.kind != NodeKind::Dot) continue;
        for (NodeId op : n.operands) {
            auto it = std::find_if(m.nodes.begin(), m.nodes.end(),
                                   [&](const IrNode& x) { return x.id == op; });
            REQUIRE(it != m.nodes.end());
            if (it->kind == NodeKind::VpuReduce) ++chained;
        }
    }
    CHECK(chained == 7);
}

TEST_CASE("hand-built violations are detected rule by rule") {
    IrModule base = two_zone_module();
    REQUIRE(validate(base).ok);

    SUBCASE("dropping a tile barrier breaks staged summation") {
        IrModule m = base;
        auto it = std::find_if(m.nodes.begin(), m.nodes.end(), [](const IrNode& n) {
            return n.kind == NodeKind::Barrier;
        });
        REQUIRE(it != m.nodes.end());
        NodeId victim = it->id;
        m.nodes.erase(it);
        m.schedule.erase(std::find(m.schedule.begin(), m.schedule.end(), victim));
        CHECK(detected_rules(m) == std::set<RuleId>{RuleId::V1});
    }

    SUBCASE("aliasing buffers across memory spaces") {
        IrModule m = base;
        IrNode* a = nullptr;
        IrNode* b = nullptr;
        for (IrNode& n : m.nodes) {
            if (n.kind != NodeKind::Param || n.buffer.empty()) continue;
            if (!a) {
                a = &n;
            } else if (!b && n.memory_space != a->memory_space) {
                b = &n;
            }
        }
        REQUIRE(a);
        REQUIRE(b);
        b->buffer = a->buffer;
        CHECK(detected_rules(m) == std::set<RuleId>{RuleId::V2});
    }

    SUBCASE("fusing across workload zones") {
        IrModule m = base;
        NodeId p0 = -1, p1 = -1;
        for (const IrNode& n : m.nodes) {
            if (n.kind != NodeKind::Param) continue;
            if (n.workload_zone == 0 && p0 < 0) p0 = n.id;
            if (n.workload_zone == 1 && p1 < 0) p1 = n.id;
        }
        REQUIRE(p0 >= 0);
        REQUIRE(p1 >= 0);
        IrNode fused;
        fused.id = 1 + std::max_element(m.nodes.begin(), m.nodes.end(),
                                        [](const IrNode& x, const IrNode& y) {
                                            return x.id < y.id;
                                        })
                           ->id;
        fused.kind = NodeKind::Fusion;
        fused.operands = {p0, p1};
        fused.precision_zone = 4;
        m.nodes.push_back(fused);
        m.schedule.push_back(fused.id);
        CHECK(detected_rules(m) == std::set<RuleId>{RuleId::V3});
    }

    SUBCASE("pulling a value across workload zones") {
        IrModule m = base;
        IrNode* donor = nullptr;
        IrNode* taker = nullptr;
        for (IrNode& n : m.nodes) {
            if (n.kind != NodeKind::Tuple) continue;
            if (!donor) {
                donor = &n;
            } else if (n.workload_zone != donor->workload_zone) {
                taker = &n;
            }
        }
        REQUIRE(donor);
        REQUIRE(taker);
        taker->operands.push_back(donor->id);
        CHECK(detected_rules(m) == std::set<RuleId>{RuleId::V4});
    }

    SUBCASE("tampering with a precision zone") {
        IrModule m = base;
        auto it = std::find_if(m.nodes.begin(), m.nodes.end(), [](const IrNode& n) {
            return n.kind == NodeKind::Dot;
        });
        REQUIRE(it != m.nodes.end());
        it->precision_zone = 3;
        CHECK(detected_rules(m) == std::set<RuleId>{RuleId::V5});
    }
}

TEST_CASE("adversarial mutation families are pinned to their rules") {
    IrModule base = two_zone_module();
    const RuleId expected[] = {RuleId::V1, RuleId::V2, RuleId::V3, RuleId::V4,
                               RuleId::V5};
    for (int family = 0; family < 5; ++family) {
        CAPTURE(family);
        MutationConfig cfg;
        switch (family) {
            case 0: cfg.merge_across_barriers = 1.0; break;
            case 1: cfg.coalesce_buffers = 1.0; break;
            case 2: cfg.cross_block_fusion = 1.0; break;
            case 3: cfg.extend_liveness = 1.0; break;
            default: cfg.mix_precision = 1.0; break;
        }
        MutationResult mr = adversarial_fuse(base, 1000 + static_cast<std::uint64_t>(family), cfg);
        REQUIRE_FALSE(mr.injected.empty());
        for (const InjectedViolation& iv : mr.injected)
            CHECK(iv.rule == expected[family]);
        ValidationReport vr = validate(mr.module);
        CHECK_FALSE(vr.ok);
        CHECK(detected_rules(mr.module) == std::set<RuleId>{expected[family]});
        // Violations carry a triage dump of the offending subgraph.
        REQUIRE_FALSE(vr.violations.empty());
        CHECK_FALSE(vr.violations.front().subgraph.empty());
    }
}

TEST_CASE("mutations with zero probabilities change nothing") {
    IrModule base = two_zone_module();
    MutationResult mr = adversarial_fuse(base, 3, MutationConfig{});
    CHECK(mr.injected.empty());
    CHECK(validate(mr.module).ok);
    CHECK(mr.module.nodes.size() == base.nodes.size());
}

TEST_CASE("json round-trip preserves the module") {
    IrModule m = two_zone_module();
    IrModule rt = module_from_json(module_to_json(m));
    CHECK(rt.nodes.size() == m.nodes.size());
    CHECK(rt.schedule == m.schedule);
    CHECK(count_vpu_nodes(rt) == count_vpu_nodes(m));
    CHECK(validate(rt).ok);
    CHECK(module_to_json(rt) == module_to_json(m));

    IrModule mutated = adversarial_fuse(m, 4, [] {
                           MutationConfig c;
                           c.mix_precision = 1.0;
                           return c;
                       }()).module;
    IrModule mrt = module_from_json(module_to_json(mutated));
    CHECK(detected_rules(mrt) == std::set<RuleId>{RuleId::V5});
}

TEST_CASE("malformed modules are parse failures, not violations") {
    IrModule m = single_row_module(ReductionMode::Lazy);

    SUBCASE("duplicate node id") {
        m.nodes.push_back(m.nodes.front());
        m.schedule.push_back(m.nodes.front().id);
        CHECK_THROWS_AS(validate(m), ParseError);
    }
    SUBCASE("dangling operand") {
        for (IrNode& n : m.nodes)
            if (n.kind == NodeKind::Tuple) n.operands.push_back(999999);
        CHECK_THROWS_AS(validate(m), ParseError);
    }
    SUBCASE("schedule not a permutation") {
        m.schedule.pop_back();
        CHECK_THROWS_AS(validate(m), ParseError);
    }
    SUBCASE("defs after uses") {
        std::swap(m.schedule.front(), m.schedule.back());
        CHECK_THROWS_AS(validate(m), ParseError);
    }
    SUBCASE("garbage json") {
        CHECK_THROWS_AS(module_from_json("{not json"), ParseError);
        CHECK_THROWS_AS(module_from_json("{\"nodes\": 3}"), ParseError);
    }
}
