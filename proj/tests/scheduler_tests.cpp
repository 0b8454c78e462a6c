#include <doctest.h>

#include <algorithm>
#include <set>
#include <thread>
#include <vector>

#include "mxntt/erns.hpp"
#include "mxntt/scheduler.hpp"

using namespace mxntt;

namespace {

Request make_request(std::int64_t tenant, WorkloadClass cls, std::int64_t degree,
                     double arrival, std::uint64_t seed) {
    Request r;
    r.tenant_id = tenant;
    r.cls = cls;
    r.degree = degree;
    r.arrival_time = arrival;
    r.coeff_seed = seed;
    return r;
}

StackedBatch uniform(WorkloadClass cls, int rows, std::int64_t degree, int zone) {
    StackedBatch b;
    b.cls = cls;
    b.rows = rows;
    b.zone_tag = zone;
    b.padded_width = padded_degree(degree, class_params(cls).staging_width);
    for (int i = 0; i < rows; ++i)
        b.members.push_back(make_request(100 * zone + i, cls, degree, 0.0,
                                         static_cast<std::uint64_t>(40 + i)));
    return b;
}

} // namespace

TEST_CASE("class parameters") {
    const ClassParams& bn = class_params(WorkloadClass::BN254);
    CHECK(bn.limbs == 4);
    CHECK(bn.staging_width == 128);
    CHECK(bn.channels == 9);
    REQUIRE(bn.channel_moduli.size() == 9);
    for (int i = 0; i < 9; ++i)
        CHECK(bn.channel_moduli[static_cast<std::size_t>(i)] ==
              ResidueSystem::bn254().moduli()[static_cast<std::size_t>(i)]);

    const ClassParams& dil = class_params(WorkloadClass::Dilithium);
    CHECK(dil.limbs == 3);
    CHECK(dil.staging_width == 171);
    CHECK(dil.channels == 1);
    CHECK(dil.channel_moduli == std::vector<std::uint64_t>{8380417});

    CHECK(workload_class_from_name("bn254") == WorkloadClass::BN254);
    CHECK_THROWS_AS(workload_class_from_name("rsa"), ParseError);
}

TEST_CASE("padded degrees") {
    CHECK(padded_degree(256, 128) == 256);
    CHECK(padded_degree(257, 128) == 384);
    CHECK(padded_degree(256, 171) == 342);
    CHECK(padded_degree(64, 171) == 171);
    CHECK(padded_degree(1, 128) == 128);
}

TEST_CASE("batch formation partitions by class in arrival order") {
    std::vector<Request> queue;
    for (int i = 0; i < 20; ++i) {
        WorkloadClass cls = i % 3 == 0 ? WorkloadClass::Dilithium : WorkloadClass::BN254;
        queue.push_back(make_request(i, cls, 64 + 16 * i, 0.01 * i,
                                     static_cast<std::uint64_t>(i)));
    }
    BatchOptions opts;
    opts.caps = {8, 8};
    std::vector<StackedBatch> batches = form_batches(queue, opts);

    std::multiset<std::int64_t> seen;
    for (const StackedBatch& b : batches) {
        validate_batch(b);
        CHECK(b.members.size() <= 8);
        for (const Request& m : b.members) {
            CHECK(m.cls == b.cls);
            seen.insert(m.tenant_id);
        }
    }
    CHECK(seen.size() == 20);
    // Batches come out ordered by first-member arrival, zone tags follow.
    for (std::size_t i = 1; i < batches.size(); ++i) {
        CHECK(batches[i - 1].members.front().arrival_time <=
              batches[i].members.front().arrival_time);
        CHECK(batches[i].zone_tag == static_cast<int>(i));
    }
}

TEST_CASE("degree sorting packs descending within a class") {
    std::vector<Request> queue;
    queue.push_back(make_request(1, WorkloadClass::BN254, 64, 0.0, 1));
    queue.push_back(make_request(2, WorkloadClass::BN254, 512, 0.1, 2));
    queue.push_back(make_request(3, WorkloadClass::BN254, 300, 0.2, 3));
    BatchOptions opts;
    opts.sort_by_degree = true;
    std::vector<StackedBatch> batches = form_batches(queue, opts);
    REQUIRE(batches.size() == 1);
    CHECK(batches[0].members[0].degree == 512);
    CHECK(batches[0].members[1].degree == 300);
    CHECK(batches[0].members[2].degree == 64);
}

TEST_CASE("flush timeout splits distant arrivals") {
    std::vector<Request> queue;
    queue.push_back(make_request(1, WorkloadClass::BN254, 64, 0.00, 1));
    queue.push_back(make_request(2, WorkloadClass::BN254, 64, 0.10, 2));
    BatchOptions opts;
    opts.flush_timeout = 0.05;
    CHECK(form_batches(queue, opts).size() == 2);
    opts.flush_timeout = 0.5;
    CHECK(form_batches(queue, opts).size() == 1);
}

TEST_CASE("padding and fill metrics at the calibration points") {
    StackedBatch bn = uniform(WorkloadClass::BN254, 8, 256, 0);
    CHECK(padding_waste(bn) == 0.0);
    CHECK(batch_fill(bn) == 1.0);

    StackedBatch dil = uniform(WorkloadClass::Dilithium, 8, 256, 1);
    CHECK(padding_waste(dil) == doctest::Approx(86.0 / 342.0));
    CHECK(batch_fill(dil) == 1.0);

    CHECK(staging_overhead(256, 128) == 0.5);
    CHECK(staging_overhead(256, 171) == 0.5);
    CHECK(staging_overhead(128, 128) == 0.0);
    CHECK(staging_overhead(8192, 128) == doctest::Approx(63.0 / 64.0));

    Occupancy occ = occupancy(bn);
    CHECK(occ.m_occupancy == 0.0625);
    CHECK(occ.k_occupancy == 1.0);

    StackedBatch mixed = uniform(WorkloadClass::BN254, 2, 256, 2);
    mixed.members[1].degree = 100;
    CHECK(occupancy(mixed).k_occupancy == 1.0); // longest member sets the width
    CHECK(batch_fill(mixed) == doctest::Approx(356.0 / 512.0));
}

TEST_CASE("batch validation rejects malformed stacks") {
    StackedBatch b = uniform(WorkloadClass::BN254, 2, 256, 0);
    b.padded_width = 300; // not a staging-width multiple
    CHECK_THROWS_AS(validate_batch(b), DimensionError);

    StackedBatch mixed = uniform(WorkloadClass::BN254, 2, 256, 0);
    mixed.members[1].cls = WorkloadClass::Dilithium;
    CHECK_THROWS_AS(validate_batch(mixed), DomainError);

    StackedBatch short_rows = uniform(WorkloadClass::BN254, 2, 256, 0);
    short_rows.rows = 3;
    CHECK_THROWS_AS(validate_batch(short_rows), DimensionError);
}

TEST_CASE("coefficient materialization") {
    Request seeded = make_request(1, WorkloadClass::Dilithium, 16, 0.0, 99);
    std::vector<BigInt> a = materialize_coefficients(seeded);
    std::vector<BigInt> b = materialize_coefficients(seeded);
    CHECK(a == b);
    CHECK(a.size() == 16);

    Request explicit_req = seeded;
    explicit_req.coeffs = {1, 2, 3};
    CHECK_THROWS_AS(materialize_coefficients(explicit_req), DimensionError);
    explicit_req.degree = 3;
    CHECK(materialize_coefficients(explicit_req) == std::vector<BigInt>{1, 2, 3});
    explicit_req.coeffs = {1, 2, BigInt(8380417)};
    CHECK_THROWS_AS(materialize_coefficients(explicit_req), DomainError);
}

TEST_CASE("co-scheduling fills cores window by window with disjoint zones") {
    std::vector<StackedBatch> batches;
    for (int i = 0; i < 10; ++i)
        batches.push_back(uniform(WorkloadClass::BN254, 2, 128, i));
    SliceAssignment asg = co_schedule(batches, 8);
    CHECK(asg.cores == 8);
    CHECK(asg.windows == 2);
    CHECK(asg.total_rows == 20);
    REQUIRE(asg.per_core.size() == 8);
    CHECK(asg.per_core[0].size() == 2); // batches 0 and 8
    CHECK(asg.per_core[0][0].batch_index == 0);
    CHECK(asg.per_core[0][1].batch_index == 8);
    CHECK(asg.per_core[3][0].window == 0);

    std::vector<HbmInterval> zones;
    for (const auto& core : asg.per_core)
        for (const CoreSlot& slot : core) {
            CHECK(slot.zone.end - slot.zone.begin == 2ull * 128 * 9 * 4);
            zones.push_back(slot.zone);
        }
    std::sort(zones.begin(), zones.end(),
              [](const HbmInterval& a, const HbmInterval& b) { return a.begin < b.begin; });
    for (std::size_t i = 1; i < zones.size(); ++i)
        CHECK(zones[i - 1].end <= zones[i].begin);
}

TEST_CASE("small batched evaluation equals isolated rows") {
    StackedBatch batch = uniform(WorkloadClass::BN254, 2, 64, 0);
    batch.members[1].degree = 100; // same padded width, shorter row
    SliceAssignment asg = co_schedule({batch}, 8);
    std::vector<TenantResult> batched = batched_evaluate(asg);
    REQUIRE(batched.size() == 2);
    for (const TenantResult& r : batched) {
        CHECK(r.padded_width == 128);
        CHECK(r.channel_rows.size() == 9);
        for (const auto& row : r.channel_rows) CHECK(row.size() == 128);
        const Request& req = r.tenant_id == batch.members[0].tenant_id
                                 ? batch.members[0]
                                 : batch.members[1];
        TenantResult alone = evaluate_isolated(req, 128);
        CHECK(r.channel_rows == alone.channel_rows);
    }
}

TEST_CASE("ingress queue is a thread-safe arrival buffer") {
    IngressQueue q;
    std::thread a([&] {
        for (int i = 0; i < 50; ++i)
            q.push(make_request(i, WorkloadClass::BN254, 64, 0.0, 1));
    });
    std::thread b([&] {
        for (int i = 50; i < 100; ++i)
            q.push(make_request(i, WorkloadClass::Dilithium, 64, 0.0, 1));
    });
    a.join();
    b.join();
    CHECK(q.size() == 100);
    std::vector<Request> drained = q.drain();
    CHECK(drained.size() == 100);
    CHECK(q.size() == 0);
}
