#pragma once

#include "netdelay/routing.hpp"
#include "netdelay/topology.hpp"
#include "netdelay/traffic.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace netdelay {

inline constexpr const char* kGeneratorVersion = "netdelay-1";

enum class TrafficModel { Uniform, Hotspot };

std::string_view to_string(TrafficModel m);
TrafficModel parse_traffic_model(std::string_view name);

/// One (traffic matrix -> delay matrix) observation, both flattened
/// row-major to N*N values.
struct Sample {
    std::vector<double> traffic; // bits per time unit
    std::vector<double> delay;   // time units

    bool operator==(const Sample&) const = default;
};

struct DatasetMeta {
    std::size_t nodes = 0;
    std::string topology;
    RoutingPolicy routing = RoutingPolicy::ShortestPath;
    double rho_max = 0.0;
    LengthDist dist = LengthDist::Deterministic;
    double horizon = 0.0;
    std::uint64_t seed = 0;
    TrafficModel traffic = TrafficModel::Uniform;
    HotspotParams hotspot;
    double capacity = kDefaultCapacity;
    std::string generator = kGeneratorVersion;

    bool operator==(const DatasetMeta&) const = default;
};

struct Dataset {
    DatasetMeta meta;
    std::vector<Sample> samples;

    std::size_t size() const noexcept { return samples.size(); }
    /// Checks vector lengths, zero diagonals and value ranges.
    void validate() const;
    /// Mean of the off-diagonal delays over all samples.
    double mean_delay() const;

    bool operator==(const Dataset&) const = default;
};

struct SplitDataset {
    Dataset train;
    Dataset validation;
    Dataset test;
};

/// Everything needed to turn a routed topology into samples.
struct GenerationConfig {
    TrafficConfig traffic;
    TrafficModel model = TrafficModel::Uniform;
    HotspotParams hotspot;
    double capacity = kDefaultCapacity;
    double horizon = 16'000.0;
    std::size_t samples = 2'000;
    std::uint64_t master_seed = 1;
};

/// Draws the traffic matrix the generator uses for a given seed.
TrafficMatrix sample_matrix(const GenerationConfig& cfg, std::size_t n, Rng& rng);

/// Sample k draws its matrix from derive_seed(master, {traffic_matrix, k})
/// and simulates with derive_seed(master, {simulation, k}), so sample k does
/// not depend on the sample count. Samples are generated in parallel.
Dataset generate_dataset(const Topology& topo, const RoutingTable& table, RoutingPolicy policy,
                         const GenerationConfig& cfg);

/// Seeded uniform permutation, then a contiguous 60/20/20 cut (floor, floor,
/// remainder).
SplitDataset split(const Dataset& ds, std::uint64_t seed);

struct VarianceEstimate {
    double nu = 0.0;             // mean over all N*N positions and probe matrices
    std::vector<double> per_pair; // N*N, averaged over probe matrices
    std::size_t repeats = 0;
    std::size_t probes = 0;
};

/// Variance of the measured average delay that no regressor can remove: for
/// each of `probes` matrices drawn from the dataset sampler, run `repeats`
/// simulations differing only in seed and take the unbiased across-seed
/// variance per position.
VarianceEstimate estimate_measurement_variance(const Topology& topo, const RoutingTable& table,
                                               const GenerationConfig& cfg, std::size_t repeats, std::size_t probes,
                                               std::uint64_t seed);

std::string format_dataset(const Dataset& ds);
Dataset parse_dataset(const std::string& text);
void save_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

} // namespace netdelay
