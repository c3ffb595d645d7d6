#pragma once

#include "netdelay/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace netdelay {

/// N x N offered load in bits per time unit, row = source, column =
/// destination. Diagonal is zero; entries are finite and non-negative
/// (samplers always produce strictly positive off-diagonal rates, hand-built
/// matrices may leave pairs silent).
class TrafficMatrix {
public:
    TrafficMatrix() = default;
    explicit TrafficMatrix(std::size_t n) : n_(n), rates_(n * n, 0.0) {}
    TrafficMatrix(std::size_t n, std::vector<double> row_major);

    std::size_t node_count() const noexcept { return n_; }
    double operator()(std::size_t src, std::size_t dst) const { return rates_[src * n_ + dst]; }
    void set(std::size_t src, std::size_t dst, double rate);
    std::span<const double> values() const noexcept { return rates_; }
    double total() const;
    TrafficMatrix scaled(double factor) const;

    bool operator==(const TrafficMatrix&) const = default;

private:
    std::size_t n_ = 0;
    std::vector<double> rates_;
};

/// Uniform model: every off-diagonal rate ~ U(0, rho_max * capacity / (n-1)].
TrafficMatrix sample_traffic_matrix(std::size_t n, double rho_max, double capacity, Rng& rng);

struct HotspotParams {
    double hot_fraction = 0.05;
    double hot_share = 0.8;

    bool operator==(const HotspotParams&) const = default;
};

/// Number of hot pairs for an n-node matrix: ceil(hot_fraction * n(n-1)).
std::size_t hotspot_pair_count(std::size_t n, double hot_fraction);

/// Hot-spot model. A uniformly chosen set of hotspot_pair_count() pairs draws
/// from a wider uniform range than the rest so that, in expectation, the hot
/// pairs carry hot_share of the total while the expected total equals that of
/// the uniform model. When every pair would be hot this is the uniform model.
/// If `hot_mask` is given it receives 1 for hot pairs (row-major, N*N).
TrafficMatrix sample_hotspot_matrix(std::size_t n, double rho_max, double capacity, const HotspotParams& params,
                                    Rng& rng, std::vector<char>* hot_mask = nullptr);

std::string format_traffic_csv(const TrafficMatrix& tm);
TrafficMatrix parse_traffic_csv(const std::string& text);
void save_traffic_csv(const TrafficMatrix& tm, const std::filesystem::path& path);
TrafficMatrix load_traffic_csv(const std::filesystem::path& path);

enum class LengthDist { Deterministic, Uniform, Binomial, Poisson, Exponential };
enum class ArrivalProcess { Exponential, Deterministic };

std::string_view to_string(LengthDist d);
LengthDist parse_length_dist(std::string_view name);

struct TrafficConfig {
    LengthDist length_dist = LengthDist::Deterministic;
    double mean_packet_bits = 1000.0;
    double rho_max = 0.5;
    /// Deterministic arrivals exist for validation only; datasets use
    /// exponential inter-arrival times.
    ArrivalProcess arrivals = ArrivalProcess::Exponential;

    void validate() const;
};

/// Draws packet lengths in bits. Every distribution has mean
/// mean_packet_bits. Integer-valued distributions never return 0 (a zero
/// draw is resampled); exponential lengths are continuous.
class LengthSampler {
public:
    explicit LengthSampler(const TrafficConfig& cfg);

    double operator()(Rng& rng);
    double mean() const noexcept { return mean_; }
    /// Variance of the distribution as parameterized (before zero-resampling,
    /// whose effect is below 1e-300 for the default mean).
    double variance() const noexcept { return variance_; }
    LengthDist kind() const noexcept { return kind_; }

private:
    using Dist = std::variant<std::monostate, std::uniform_int_distribution<std::int64_t>,
                              std::binomial_distribution<std::int64_t>, std::poisson_distribution<std::int64_t>,
                              std::exponential_distribution<double>>;
    LengthDist kind_;
    double mean_;
    double variance_;
    Dist dist_;
};

LengthSampler make_length_sampler(const TrafficConfig& cfg);

/// One source-destination packet process: inter-arrival times (exponential
/// with mean mean_packet_bits / rate, or deterministic for validation) and
/// packet lengths. Owns its RNG stream.
class FlowProcess {
public:
    FlowProcess(std::uint32_t src, std::uint32_t dst, double rate, const TrafficConfig& cfg, std::uint64_t seed);

    std::uint32_t src() const noexcept { return src_; }
    std::uint32_t dst() const noexcept { return dst_; }
    double rate() const noexcept { return rate_; }
    /// Packets per time unit.
    double packet_rate() const noexcept { return packet_rate_; }

    double next_interarrival();
    double next_length() { return lengths_(rng_); }

private:
    std::uint32_t src_, dst_;
    double rate_;
    double packet_rate_;
    ArrivalProcess arrivals_;
    LengthSampler lengths_;
    Rng rng_;
};

} // namespace netdelay
