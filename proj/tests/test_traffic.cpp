#include <doctest.h>

#include "netdelay/error.hpp"
#include "netdelay/rng.hpp"
#include "netdelay/traffic.hpp"
#include "test_util.hpp"

#include <cmath>

using namespace netdelay;

namespace {

struct Moments {
    double mean = 0, variance = 0, min = 1e300;
};

Moments moments(const TrafficConfig& cfg, std::size_t draws, std::uint64_t seed) {
    LengthSampler s(cfg);
    Rng rng(seed);
    double sum = 0, sum_sq = 0, lo = 1e300;
    for (std::size_t i = 0; i < draws; ++i) {
        double x = s(rng);
        sum += x;
        sum_sq += x * x;
        lo = std::min(lo, x);
    }
    double mean = sum / static_cast<double>(draws);
    return {mean, (sum_sq - static_cast<double>(draws) * mean * mean) / static_cast<double>(draws - 1), lo};
}

TrafficConfig with_dist(LengthDist d) {
    TrafficConfig cfg;
    cfg.length_dist = d;
    return cfg;
}

} // namespace

TEST_CASE("uniform sampler bounds") {
    Rng rng(1);
    for (int k = 0; k < 200; ++k) {
        auto tm = sample_traffic_matrix(5, 0.6, 10000, rng);
        for (std::size_t i = 0; i < 5; ++i)
            for (std::size_t j = 0; j < 5; ++j) {
                if (i == j) {
                    CHECK(tm(i, j) == 0);
                } else {
                    CHECK(tm(i, j) > 0);
                    CHECK(tm(i, j) <= 1500);
                }
            }
    }
    double hi = 0;
    for (int k = 0; k < 2000; ++k) {
        auto tm = sample_traffic_matrix(2, 2.0, 10000, rng);
        CHECK(tm(0, 1) > 0);
        CHECK(tm(0, 1) <= 20000);
        hi = std::max(hi, tm(0, 1));
    }
    CHECK(hi > 19000); // the range really extends to 2C
}

TEST_CASE("uniform sampler per-entry mean") {
    Rng rng(2);
    const std::size_t n = 5, draws = 100000;
    std::vector<double> sum(n * n, 0.0);
    for (std::size_t k = 0; k < draws; ++k) {
        auto tm = sample_traffic_matrix(n, 0.6, 10000, rng);
        for (std::size_t p = 0; p < n * n; ++p) sum[p] += tm.values()[p];
    }
    const double expected = 0.6 * 10000 / 4 / 2;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) CHECK(std::abs(sum[i * n + j] / draws - expected) / expected < 0.01);
}

TEST_CASE("hot-spot sampler") {
    CHECK(hotspot_pair_count(24, 0.05) == 28);

    Rng rng(3);
    double hot_sum = 0, total = 0;
    const std::size_t n = 24;
    for (int k = 0; k < 10000; ++k) {
        std::vector<char> mask;
        auto tm = sample_hotspot_matrix(n, 0.5, 10000, HotspotParams{}, rng, &mask);
        std::size_t hot = 0;
        for (std::size_t p = 0; p < n * n; ++p) {
            total += tm.values()[p];
            if (mask[p]) {
                hot_sum += tm.values()[p];
                ++hot;
            }
            if (p / n != p % n) CHECK_FALSE(tm.values()[p] <= 0);
        }
        CHECK(hot == 28);
        for (std::size_t i = 0; i < n; ++i) CHECK(mask[i * n + i] == 0);
    }
    CHECK(std::abs(hot_sum / total - 0.8) < 0.02);

    // Nearly every pair hot: the uniform sampler's support.
    HotspotParams all{0.999, 0.8};
    Rng r2(4);
    for (int k = 0; k < 200; ++k) {
        auto tm = sample_hotspot_matrix(4, 0.6, 10000, all, r2);
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 4; ++j)
                if (i != j) {
                    CHECK(tm(i, j) > 0);
                    CHECK(tm(i, j) <= 2000);
                }
    }

    Rng a(9), b(9);
    CHECK(sample_hotspot_matrix(10, 0.4, 10000, HotspotParams{}, a) ==
          sample_hotspot_matrix(10, 0.4, 10000, HotspotParams{}, b));
    Rng c(9), d(9);
    CHECK(sample_traffic_matrix(10, 0.4, 10000, c) == sample_traffic_matrix(10, 0.4, 10000, d));

    Rng e(1);
    CHECK_THROWS_AS(sample_hotspot_matrix(5, 0.5, 10000, HotspotParams{0.0, 0.8}, e), Error);
    CHECK_THROWS_AS(sample_hotspot_matrix(5, 0.5, 10000, HotspotParams{0.1, 0.4}, e), Error);
}

TEST_CASE("packet length distributions") {
    auto det = moments(with_dist(LengthDist::Deterministic), 1000, 1);
    CHECK(det.mean == 1000);
    CHECK(det.variance == 0);

    auto poisson = moments(with_dist(LengthDist::Poisson), 1000000, 2);
    CHECK(std::abs(poisson.mean - 1000) / 1000 < 0.01);
    CHECK(std::abs(poisson.variance - 1000) / 1000 < 0.05);

    auto binomial = moments(with_dist(LengthDist::Binomial), 1000000, 3);
    CHECK(std::abs(binomial.mean - 1000) / 1000 < 0.01);
    CHECK(std::abs(binomial.variance - 500) / 500 < 0.05);

    // Discrete uniform on [500, 1500]: ((1001)^2 - 1) / 12.
    auto uniform = moments(with_dist(LengthDist::Uniform), 1000000, 4);
    CHECK(std::abs(uniform.mean - 1000) / 1000 < 0.01);
    CHECK(std::abs(uniform.variance - 83500) / 83500 < 0.05);
    CHECK(uniform.min >= 500);

    auto expo = moments(with_dist(LengthDist::Exponential), 1000000, 5);
    CHECK(std::abs(expo.mean - 1000) / 1000 < 0.01);
    CHECK(std::abs(expo.variance - 1e6) / 1e6 < 0.05);

    CHECK(LengthSampler(with_dist(LengthDist::Uniform)).variance() == doctest::Approx(83500));
    CHECK(LengthSampler(with_dist(LengthDist::Binomial)).variance() == doctest::Approx(500));
    CHECK(LengthSampler(with_dist(LengthDist::Poisson)).variance() == doctest::Approx(1000));
    CHECK(LengthSampler(with_dist(LengthDist::Exponential)).variance() == doctest::Approx(1e6));
    CHECK(LengthSampler(with_dist(LengthDist::Deterministic)).variance() == 0);
}

TEST_CASE("integer lengths are never zero") {
    TrafficConfig cfg = with_dist(LengthDist::Poisson);
    cfg.mean_packet_bits = 1.0; // P(0) = e^-1 before resampling
    auto m = moments(cfg, 100000, 6);
    CHECK(m.min >= 1);
    cfg.length_dist = LengthDist::Binomial;
    CHECK(moments(cfg, 100000, 7).min >= 1);
}

TEST_CASE("flow process offered load") {
    for (LengthDist d : {LengthDist::Deterministic, LengthDist::Uniform, LengthDist::Binomial, LengthDist::Poisson}) {
        TrafficConfig cfg = with_dist(d);
        FlowProcess f(0, 1, 3000.0, cfg, 11);
        CHECK(f.packet_rate() == doctest::Approx(3.0));
        double t = 0, bits = 0;
        const double horizon = 1e5;
        while (true) {
            t += f.next_interarrival();
            if (t > horizon) break;
            bits += f.next_length();
        }
        CHECK(std::abs(bits / horizon - 3000.0) / 3000.0 < 0.02);
    }

    TrafficConfig det = with_dist(LengthDist::Deterministic);
    det.arrivals = ArrivalProcess::Deterministic;
    FlowProcess g(0, 1, 2000.0, det, 1);
    for (int i = 0; i < 10; ++i) CHECK(g.next_interarrival() == doctest::Approx(0.5));

    CHECK_THROWS_AS(FlowProcess(0, 1, 0.0, det, 1), Error);
}

TEST_CASE("traffic matrix invariants and csv") {
    TrafficMatrix tm(3);
    CHECK_THROWS_AS(tm.set(1, 1, 5.0), Error);
    CHECK_THROWS_AS(tm.set(0, 1, -1.0), Error);
    CHECK_THROWS_AS(tm.set(0, 1, std::nan("")), Error);
    CHECK_THROWS_AS(TrafficMatrix(2, {0, 1, 1}), Error);
    CHECK_THROWS_AS(TrafficMatrix(2, {1, 1, 1, 0}), Error);

    Rng rng(12);
    auto m = sample_traffic_matrix(7, 1.3, 10000, rng);
    CHECK(parse_traffic_csv(format_traffic_csv(m)) == m);
    auto dir = testutil::temp_dir("traffic");
    save_traffic_csv(m, dir / "tm.csv");
    CHECK(load_traffic_csv(dir / "tm.csv") == m);
    CHECK(m.total() == doctest::Approx(m.scaled(2.0).total() / 2.0));
    CHECK_THROWS_AS(parse_traffic_csv("0,1\n1\n"), Error);

    CHECK(parse_length_dist("binomial") == LengthDist::Binomial);
    CHECK(to_string(LengthDist::Poisson) == "poisson");
    CHECK_THROWS_AS(parse_length_dist("pareto"), Error);
}
