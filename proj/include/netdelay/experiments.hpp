#pragma once

#include "netdelay/config.hpp"
#include "netdelay/dataset.hpp"
#include "netdelay/mlp.hpp"
#include "netdelay/routing.hpp"
#include "netdelay/topology.hpp"
#include "netdelay/trainer.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace netdelay {

enum class ExperimentKind { SaturationSweep, TopologySizeSweep, RoutingCompare, NeuronSweep, ActivationCompare, Realistic };

std::string_view to_string(ExperimentKind k);
ExperimentKind parse_experiment_kind(std::string_view name);

enum class TopologyKind { Ring, Star, ScaleFree, File };

std::string_view to_string(TopologyKind k);
TopologyKind parse_topology_kind(std::string_view name);

struct TopologySpec {
    TopologyKind kind = TopologyKind::ScaleFree;
    std::size_t nodes = 10;
    std::size_t attachment = 2;
    std::uint64_t seed = 1;
    std::filesystem::path file;
};

struct NetworkSpec {
    std::size_t depth = 2;
    std::size_t width = 0; // 0: N*N neurons per hidden layer
    Activation activation = Activation::Sigmoid;
};

/// One end-to-end point: topology, routing, traffic, dataset and model.
struct PipelineConfig {
    TopologySpec topology;
    RoutingPolicy routing = RoutingPolicy::ShortestPath;
    std::vector<std::pair<NodeId, NodeId>> bottleneck; // empty: default_bottleneck()
    GenerationConfig generation;
    std::size_t variance_repeats = 10;
    std::size_t variance_probes = 20;
    NetworkSpec network;
    TrainConfig training;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::SaturationSweep;
    PipelineConfig base;
    std::uint64_t seed = 1;
    std::size_t repetitions = 1;

    std::vector<double> rho_values;
    std::vector<std::string> rho_labels;
    std::vector<std::size_t> depths;
    std::vector<TopologyKind> topologies;
    std::vector<std::size_t> sizes;
    std::vector<RoutingPolicy> policies;
    std::vector<std::size_t> widths;
    std::vector<Activation> activations;

    std::optional<std::filesystem::path> dataset_dir; // when set, datasets are written here
};

/// Reads the pipeline sections ([topology], [routing], [traffic], [dataset],
/// [network], [training]) with defaults for anything missing.
PipelineConfig pipeline_from_config(const Config& cfg);
/// Reads [experiment] and [sweep] on top of pipeline_from_config(); fills
/// per-kind axis defaults.
ExperimentConfig experiment_from_config(const Config& cfg);

Topology build_topology(const TopologySpec& spec);
RoutingTable build_routing(const Topology& topo, const PipelineConfig& cfg);
std::vector<std::size_t> layer_sizes_for(std::size_t nodes, const NetworkSpec& net);

struct ResultRow {
    std::string experiment;
    std::string label;
    std::string topology;
    std::size_t nodes = 0;
    std::string routing;
    std::string traffic;
    std::string dist;
    double rho_max = 0.0;
    std::size_t depth = 0;
    std::size_t width = 0;
    std::string activation;
    std::size_t repetition = 0;
    std::size_t samples = 0;
    std::size_t n_train = 0, n_val = 0, n_test = 0;
    double raw_mse = 0.0;
    double nu = 0.0;
    double learning_error = 0.0;
    double relative_error = 0.0;
    double mean_delay = 0.0;
    double mean_utilization = 0.0; // under the reference (mean) traffic matrix
    double max_utilization = 0.0;
    std::size_t best_epoch = 0;
    std::uint64_t seed = 0;
    double wall_seconds = 0.0; // written to the timing file, not the result CSV
};

std::string result_csv_header();
std::string format_result_csv(const std::vector<ResultRow>& rows);
std::string format_timing_csv(const std::vector<ResultRow>& rows);

/// A generated, split and characterized dataset ready for training.
struct PreparedData {
    Topology topology;
    RoutingTable table;
    SplitDataset split;
    VarianceEstimate variance;
    LinkLoadMap reference_loads;
    std::size_t total_samples;
};

PreparedData prepare_data(const PipelineConfig& cfg, std::uint64_t data_seed,
                          const std::optional<std::filesystem::path>& save_as = std::nullopt);

/// Trains and evaluates one network on prepared data.
ResultRow train_and_evaluate(const PreparedData& data, const PipelineConfig& cfg, std::uint64_t train_seed,
                             TrainedModel* model_out = nullptr);

std::vector<ResultRow> run_saturation_sweep(const ExperimentConfig& cfg);
std::vector<ResultRow> run_topology_size_sweep(const ExperimentConfig& cfg);
std::vector<ResultRow> run_routing_compare(const ExperimentConfig& cfg);
std::vector<ResultRow> run_neuron_sweep(const ExperimentConfig& cfg);
std::vector<ResultRow> run_activation_compare(const ExperimentConfig& cfg);
std::vector<ResultRow> run_realistic(const ExperimentConfig& cfg);
std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg);

/// Runs the experiment and writes <out>/<kind>.csv and <out>/<kind>_timing.csv.
std::vector<ResultRow> run_experiment_to(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

struct OracleCell {
    LengthDist dist;
    double rho = 0.0;
    double simulated = 0.0;
    double expected = 0.0;
    double deviation = 0.0; // |simulated - expected| / expected
    double tolerance = 0.0;
    std::uint64_t packets = 0;
    bool passed = false;
};

struct OracleReport {
    std::vector<OracleCell> cells;
    bool all_passed() const;
};

inline constexpr double kOracleHorizon = 1e6;

/// Single 10,000 bits/tu link with Poisson arrivals for every packet length
/// distribution at rho in {0.1, 0.3, 0.5, 0.7} (3 % tolerance) and 0.9 (5 %),
/// compared with pk_sojourn().
OracleReport oracle_check(double horizon = kOracleHorizon, std::uint64_t seed = 1);
std::string format_oracle_report(const OracleReport& report);

} // namespace netdelay
