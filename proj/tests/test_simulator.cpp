#include <doctest.h>

#include "netdelay/error.hpp"
#include "netdelay/rng.hpp"
#include "netdelay/simulator.hpp"

#include <cmath>
#include <map>
#include <numeric>

using namespace netdelay;

namespace {

Topology two_nodes() { return Topology(2, {{0, 1, 10000}, {1, 0, 10000}}, "pair"); }

TrafficConfig config(LengthDist d, ArrivalProcess a = ArrivalProcess::Exponential) {
    TrafficConfig c;
    c.length_dist = d;
    c.arrivals = a;
    return c;
}

double single_link_delay(LengthDist d, double rate_bits, double horizon, std::uint64_t seed) {
    auto topo = two_nodes();
    TrafficMatrix tm(2);
    tm.set(0, 1, rate_bits);
    return simulate(topo, shortest_path_routing(topo), tm, config(d), horizon, seed).delays(0, 1);
}

// Records per-link enqueue and transmission order.
struct FifoObserver : SimObserver {
    std::map<LinkId, std::vector<std::uint64_t>> enqueued, started;
    std::uint64_t delivered = 0;
    std::size_t queued_at_end = 0;
    void on_enqueue(LinkId l, std::uint64_t p, double) override { enqueued[l].push_back(p); }
    void on_transmit_start(LinkId l, std::uint64_t p, double) override { started[l].push_back(p); }
    void on_deliver(std::uint64_t, NodeId, NodeId, double) override { ++delivered; }
    void on_finish(std::span<const std::size_t> q) override {
        queued_at_end = std::accumulate(q.begin(), q.end(), std::size_t{0});
    }
};

} // namespace

TEST_CASE("pure transmission time") {
    auto topo = two_nodes();
    TrafficMatrix tm(2);
    tm.set(0, 1, 1.0); // one packet per 1000 tu on average, no queueing
    auto r = simulate(topo, shortest_path_routing(topo), tm, config(LengthDist::Deterministic), 1e5, 3);
    REQUIRE(r.delays.count(0, 1) > 10);
    CHECK(r.delays(0, 1) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(r.delays.count(1, 0) == 0);
    CHECK(r.delays(1, 0) == doctest::Approx(0.1)); // unloaded fallback: 1000 bits / 10000
    CHECK(r.delays(0, 0) == 0);
}

TEST_CASE("pairs without deliveries read the unloaded path delay") {
    auto ring = make_ring(6);
    TrafficMatrix tm(6);
    tm.set(0, 1, 50.0);
    auto cfg = config(LengthDist::Binomial);
    auto r = simulate(ring, shortest_path_routing(ring), tm, cfg, 200, 1);
    for (std::size_t s = 0; s < 6; ++s)
        for (std::size_t d = 0; d < 6; ++d) {
            if (s == d || r.delays.count(s, d) > 0) continue;
            const double hops = static_cast<double>((d + 6 - s) % 6); // one-way ring
            CHECK(r.delays(s, d) == doctest::Approx(hops * cfg.mean_packet_bits / 10000.0));
        }
}

TEST_CASE("multi-hop delay without queueing equals hops times service") {
    auto ring = make_ring(6);
    TrafficMatrix tm(6);
    tm.set(0, 4, 100.0);
    tm.set(2, 1, 100.0);
    auto r = simulate(ring, shortest_path_routing(ring), tm,
                      config(LengthDist::Deterministic, ArrivalProcess::Deterministic), 2000, 1);
    CHECK(r.delays(0, 4) == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(r.delays(2, 1) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("Pollaczek-Khinchine closed forms") {
    CHECK(pk_sojourn(5, 0.1, 0.01) == doctest::Approx(0.2));
    CHECK(pk_sojourn(5, 0.1, 0.0) == doctest::Approx(0.15));
    try {
        pk_sojourn(10, 0.1, 0.0);
        FAIL("expected unstable queue");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::UnstableQueue);
    }
}

TEST_CASE("M/D/1 and M/M/1 against closed forms") {
    // lambda = 5 pkts/tu of 1000 bits on a 10000 bits/tu link.
    double md1 = single_link_delay(LengthDist::Deterministic, 5000, 1e5, 1);
    CHECK(std::abs(md1 - 0.15) / 0.15 < 0.03);
    double mm1 = single_link_delay(LengthDist::Exponential, 5000, 1e5, 1);
    CHECK(std::abs(mm1 - 1.0 / (10.0 - 5.0)) / 0.2 < 0.03);
}

TEST_CASE("across-seed spread of M/D/1 mean sojourn") {
    auto topo = two_nodes();
    TrafficMatrix tm(2);
    tm.set(0, 1, 5000);
    std::vector<std::uint64_t> seeds(10);
    std::iota(seeds.begin(), seeds.end(), 100);
    auto runs = repeat_simulate(topo, shortest_path_routing(topo), tm, config(LengthDist::Deterministic), 1e5, seeds);
    REQUIRE(runs.size() == 10);
    double mean = 0;
    for (const auto& r : runs) mean += r.delays(0, 1) / 10;
    double var = 0;
    for (const auto& r : runs) var += (r.delays(0, 1) - mean) * (r.delays(0, 1) - mean) / 9;
    CHECK(std::sqrt(var) < 0.02 * mean);
    CHECK_THROWS_AS(repeat_simulate(topo, shortest_path_routing(topo), tm, config(LengthDist::Deterministic), 10,
                                    std::vector<std::uint64_t>{1}),
                    Error);
}

TEST_CASE("determinism and seed sensitivity") {
    auto topo = make_scale_free(8, 2, 1);
    auto table = shortest_path_routing(topo);
    Rng rng(4);
    auto tm = sample_traffic_matrix(8, 0.7, 10000, rng);
    auto a = simulate(topo, table, tm, config(LengthDist::Binomial), 500, 17);
    auto b = simulate(topo, table, tm, config(LengthDist::Binomial), 500, 17);
    CHECK(a == b);
    auto c = simulate(topo, table, tm, config(LengthDist::Binomial), 500, 18);
    CHECK_FALSE(a == c);

    // Nothing random left: every seed gives the same delays.
    TrafficMatrix one(8);
    one.set(0, 5, 4000);
    auto cfg = config(LengthDist::Deterministic, ArrivalProcess::Deterministic);
    std::vector<std::uint64_t> seeds{1, 2, 3, 4};
    auto runs = repeat_simulate(topo, table, one, cfg, 1000, seeds);
    for (const auto& r : runs) CHECK(r.delays.mean_delay == runs[0].delays.mean_delay);
}

TEST_CASE("conservation and FIFO order") {
    auto topo = make_scale_free(10, 2, 3);
    auto table = shortest_path_routing(topo);
    Rng rng(5);
    for (double rho : {0.3, 1.8}) {
        auto tm = sample_traffic_matrix(10, rho, 10000, rng);
        FifoObserver obs;
        auto r = simulate(topo, table, tm, config(LengthDist::Poisson), 800, 9, &obs);
        CHECK(r.generated == r.delivered + r.in_flight);
        CHECK(obs.delivered == r.delivered);
        CHECK(obs.queued_at_end == r.in_flight);
        std::uint64_t counted = std::accumulate(r.delays.delivered.begin(), r.delays.delivered.end(), std::uint64_t{0});
        CHECK(counted == r.delivered);
        for (const auto& [link, started] : obs.started) {
            const auto& enq = obs.enqueued[link];
            REQUIRE(started.size() <= enq.size());
            bool same_order = std::equal(started.begin(), started.end(), enq.begin());
            CHECK(same_order);
        }
        if (rho > 1) CHECK(r.in_flight > 0);
    }
}

TEST_CASE("measured utilization tracks offered load") {
    auto topo = make_star(5);
    auto table = shortest_path_routing(topo);
    Rng rng(8);
    auto tm = sample_traffic_matrix(5, 0.5, 10000, rng);
    auto offered = link_loads(topo, table, tm);
    auto r = simulate(topo, table, tm, config(LengthDist::Binomial), 2e4, 2);
    for (std::size_t l = 0; l < offered.load.size(); ++l)
        CHECK(r.link_utilization.utilization[l] == doctest::Approx(offered.utilization[l]).epsilon(0.05));
}

TEST_CASE("scaling traffic up does not reduce delays") {
    auto topo = make_scale_free(6, 2, 4);
    auto table = shortest_path_routing(topo);
    Rng rng(10);
    auto base = sample_traffic_matrix(6, 0.4, 10000, rng);
    auto heavier = base.scaled(1.5);
    REQUIRE(link_loads(topo, table, heavier).max_utilization() < 0.95);

    std::vector<std::uint64_t> seeds(10);
    std::iota(seeds.begin(), seeds.end(), 1);
    auto cfg = config(LengthDist::Binomial);
    auto lo = repeat_simulate(topo, table, base, cfg, 4000, seeds);
    auto hi = repeat_simulate(topo, table, heavier, cfg, 4000, seeds);
    for (std::size_t p = 0; p < 36; ++p) {
        if (p / 6 == p % 6) continue;
        double ml = 0, mh = 0, vl = 0, vh = 0;
        for (std::size_t k = 0; k < 10; ++k) {
            ml += lo[k].delays.mean_delay[p] / 10;
            mh += hi[k].delays.mean_delay[p] / 10;
        }
        for (std::size_t k = 0; k < 10; ++k) {
            vl += std::pow(lo[k].delays.mean_delay[p] - ml, 2) / 9;
            vh += std::pow(hi[k].delays.mean_delay[p] - mh, 2) / 9;
        }
        double se = std::sqrt((vl + vh) / 10);
        CHECK(mh >= ml - 3 * se);
    }
}

TEST_CASE("simulate argument checks") {
    auto topo = two_nodes();
    auto table = shortest_path_routing(topo);
    CHECK_THROWS_AS(simulate(topo, table, TrafficMatrix(3), config(LengthDist::Binomial), 10, 1), Error);
    CHECK_THROWS_AS(simulate(topo, table, TrafficMatrix(2), config(LengthDist::Binomial), 0, 1), Error);
    auto idle = simulate(topo, table, TrafficMatrix(2), config(LengthDist::Binomial), 10, 1);
    CHECK(idle.generated == 0);
}
