#include "netdelay/experiments.hpp"

#include "netdelay/error.hpp"
#include "netdelay/parallel.hpp"
#include "netdelay/rng.hpp"
#include "netdelay/text.hpp"

#include <chrono>
#include <cstdio>

#ifndef NETDELAY_DATA_DIR
#define NETDELAY_DATA_DIR "data"
#endif

namespace netdelay {

std::string_view to_string(ExperimentKind k) {
    switch (k) {
    case ExperimentKind::SaturationSweep: return "saturation-sweep";
    case ExperimentKind::TopologySizeSweep: return "topology-size-sweep";
    case ExperimentKind::RoutingCompare: return "routing-compare";
    case ExperimentKind::NeuronSweep: return "neuron-sweep";
    case ExperimentKind::ActivationCompare: return "activation-compare";
    case ExperimentKind::Realistic: return "realistic";
    }
    return "?";
}

ExperimentKind parse_experiment_kind(std::string_view name) {
    for (auto k : {ExperimentKind::SaturationSweep, ExperimentKind::TopologySizeSweep, ExperimentKind::RoutingCompare,
                   ExperimentKind::NeuronSweep, ExperimentKind::ActivationCompare, ExperimentKind::Realistic})
        if (to_string(k) == name) return k;
    fail(ErrorCode::InvalidArgument, "unknown experiment kind '" + std::string(name) + "'");
}

std::string_view to_string(TopologyKind k) {
    switch (k) {
    case TopologyKind::Ring: return "ring";
    case TopologyKind::Star: return "star";
    case TopologyKind::ScaleFree: return "scale-free";
    case TopologyKind::File: return "file";
    }
    return "?";
}

TopologyKind parse_topology_kind(std::string_view name) {
    for (auto k : {TopologyKind::Ring, TopologyKind::Star, TopologyKind::ScaleFree, TopologyKind::File})
        if (to_string(k) == name) return k;
    fail(ErrorCode::InvalidArgument, "unknown topology kind '" + std::string(name) + "'");
}

namespace {

std::vector<std::pair<NodeId, NodeId>> parse_bottleneck(const std::string& text) {
    std::vector<std::pair<NodeId, NodeId>> out;
    if (text.empty() || text == "auto") return out;
    for (auto item : split_char(text, ',')) {
        item = trim(item);
        auto gt = item.find('>');
        if (gt == std::string_view::npos)
            fail(ErrorCode::InvalidArgument, "bottleneck entries look like 'src>dst', got '" + std::string(item) + "'");
        out.emplace_back(parse_number<NodeId>(item.substr(0, gt), "bottleneck: "),
                         parse_number<NodeId>(item.substr(gt + 1), "bottleneck: "));
    }
    return out;
}

std::filesystem::path find_topology_file(const Config& cfg, const std::string& name) {
    auto p = cfg.resolve(name);
    if (std::filesystem::exists(p)) return p;
    auto bundled = std::filesystem::path(NETDELAY_DATA_DIR) / std::filesystem::path(name).filename();
    if (std::filesystem::exists(bundled)) return bundled;
    fail(ErrorCode::Io, "topology file '" + name + "' not found");
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

PipelineConfig pipeline_from_config(const Config& cfg) {
    PipelineConfig p;
    p.topology.kind = parse_topology_kind(cfg.get_string("topology.kind", "scale-free"));
    p.topology.nodes = cfg.get_size("topology.nodes", 10);
    p.topology.attachment = cfg.get_size("topology.attachment", 2);
    p.topology.seed = cfg.get_u64("topology.seed", 1);
    if (p.topology.kind == TopologyKind::File || cfg.has("topology.file"))
        p.topology.file = find_topology_file(cfg, cfg.get_string("topology.file", "geant2_24.topo"));

    p.routing = parse_routing_policy(cfg.get_string("routing.policy", "SP"));
    p.bottleneck = parse_bottleneck(cfg.get_string("routing.bottleneck", "auto"));

    GenerationConfig& g = p.generation;
    g.model = parse_traffic_model(cfg.get_string("traffic.model", "uniform"));
    g.traffic.length_dist = parse_length_dist(cfg.get_string("traffic.dist", "binomial"));
    g.traffic.rho_max = cfg.get_double("traffic.rho_max", 0.5);
    g.traffic.mean_packet_bits = cfg.get_double("traffic.mean_packet_bits", 1000.0);
    g.hotspot.hot_fraction = cfg.get_double("traffic.hot_fraction", 0.05);
    g.hotspot.hot_share = cfg.get_double("traffic.hot_share", 0.8);
    g.capacity = cfg.get_double("traffic.capacity", kDefaultCapacity);
    g.horizon = cfg.get_double("dataset.horizon", 16'000.0);
    g.samples = cfg.get_size("dataset.samples", 2'000);
    p.variance_repeats = cfg.get_size("dataset.variance_repeats", 10);
    p.variance_probes = cfg.get_size("dataset.variance_probes", 20);

    p.network.depth = cfg.get_size("network.depth", 2);
    p.network.width = cfg.get_size("network.width", 0);
    p.network.activation = parse_activation(cfg.get_string("network.activation", "sigmoid"));
    if (p.network.depth < 1) fail(ErrorCode::InvalidArgument, "network.depth must be >= 1");

    TrainConfig& t = p.training;
    t.learning_rate = cfg.get_double("training.learning_rate", t.learning_rate);
    t.l2_lambda = cfg.get_double("training.l2_lambda", t.l2_lambda);
    t.max_epochs = cfg.get_size("training.max_epochs", t.max_epochs);
    t.batch_size = cfg.get_size("training.batch_size", t.batch_size);
    t.early_stop_patience = cfg.get_size("training.patience", t.early_stop_patience);
    t.eval_interval = cfg.get_size("training.eval_interval", t.eval_interval);
    t.validate();
    return p;
}

ExperimentConfig experiment_from_config(const Config& cfg) {
    ExperimentConfig e;
    e.kind = parse_experiment_kind(cfg.get_string("experiment.kind", "saturation-sweep"));
    e.base = pipeline_from_config(cfg);
    e.seed = cfg.get_u64("experiment.seed", 1);
    e.repetitions = cfg.get_size("experiment.repetitions", 1);
    if (e.repetitions < 1) fail(ErrorCode::InvalidArgument, "experiment.repetitions must be >= 1");
    if (cfg.has("dataset.save_dir")) e.dataset_dir = cfg.resolve(cfg.get_string("dataset.save_dir", ""));

    std::vector<double> default_rho{e.base.generation.traffic.rho_max};
    switch (e.kind) {
    case ExperimentKind::SaturationSweep:
        default_rho.clear();
        for (int i = 1; i <= 20; ++i) default_rho.push_back(0.1 * i);
        break;
    case ExperimentKind::TopologySizeSweep: default_rho = {0.6}; break;
    case ExperimentKind::RoutingCompare: default_rho = {0.5}; break;
    case ExperimentKind::NeuronSweep: default_rho = {0.9}; break;
    case ExperimentKind::ActivationCompare: default_rho = {0.3, 1.5}; break;
    case ExperimentKind::Realistic: default_rho = {0.05, 0.1, 0.2}; break;
    }
    e.rho_values = cfg.get_doubles("sweep.rho_max", default_rho);
    if (e.rho_values.empty()) fail(ErrorCode::InvalidArgument, "sweep.rho_max is empty");
    std::vector<std::string> default_labels;
    if (e.kind == ExperimentKind::Realistic && e.rho_values.size() == 3) default_labels = {"low", "medium", "high"};
    else if (e.kind == ExperimentKind::ActivationCompare && e.rho_values.size() == 2) default_labels = {"low", "high"};
    else
        for (double r : e.rho_values) default_labels.push_back("rho=" + format_double(r));
    e.rho_labels = cfg.get_list("sweep.labels", default_labels);
    if (e.rho_labels.size() != e.rho_values.size())
        fail(ErrorCode::InvalidArgument, "sweep.labels must have one label per sweep.rho_max value");

    e.depths = cfg.get_sizes("sweep.depths", {1, 2});
    for (const auto& s : cfg.get_list("sweep.topologies", {"ring", "star", "scale-free"}))
        e.topologies.push_back(parse_topology_kind(s));
    std::vector<std::size_t> default_sizes;
    if (e.kind == ExperimentKind::NeuronSweep) default_sizes = {5, 10, 15};
    else
        for (std::size_t n = 3; n <= 15; ++n) default_sizes.push_back(n);
    e.sizes = cfg.get_sizes("sweep.sizes", default_sizes);
    for (const auto& s : cfg.get_list("sweep.policies", {"SP", "MAN", "POOR"}))
        e.policies.push_back(parse_routing_policy(s));
    e.widths = cfg.get_sizes("sweep.widths", {10, 25, 50, 100, 150, 225});
    for (const auto& s : cfg.get_list("sweep.activations", {"sigmoid", "tanh", "rectified"}))
        e.activations.push_back(parse_activation(s));

    if (e.kind == ExperimentKind::TopologySizeSweep)
        for (std::size_t n : e.sizes)
            if (n < 3 || n > 15) fail(ErrorCode::InvalidArgument, "topology-size-sweep sizes must lie in [3, 15]");
    for (std::size_t d : e.depths)
        if (d < 1) fail(ErrorCode::InvalidArgument, "sweep.depths entries must be >= 1");
    for (std::size_t w : e.widths)
        if (w < 1) fail(ErrorCode::InvalidArgument, "sweep.widths entries must be >= 1");
    return e;
}

Topology build_topology(const TopologySpec& spec) {
    switch (spec.kind) {
    case TopologyKind::Ring: return make_ring(spec.nodes);
    case TopologyKind::Star: return make_star(spec.nodes);
    case TopologyKind::ScaleFree: return make_scale_free(spec.nodes, std::min(spec.attachment, spec.nodes - 1), spec.seed);
    case TopologyKind::File: return load_topology(spec.file);
    }
    fail(ErrorCode::InvalidArgument, "unknown topology kind");
}

RoutingTable build_routing(const Topology& topo, const PipelineConfig& cfg) {
    const double rho = cfg.generation.traffic.rho_max;
    const TrafficMatrix reference = reference_traffic(topo.node_count(), rho, cfg.generation.capacity);
    switch (cfg.routing) {
    case RoutingPolicy::ShortestPath: return shortest_path_routing(topo);
    case RoutingPolicy::Balanced: return balanced_routing(topo, reference);
    case RoutingPolicy::Poor: {
        std::vector<LinkId> links;
        for (auto [s, d] : cfg.bottleneck) {
            auto id = topo.find_link(s, d);
            if (!id)
                fail(ErrorCode::InfeasibleBottleneck,
                     "bottleneck link " + std::to_string(s) + ">" + std::to_string(d) + " does not exist");
            links.push_back(*id);
        }
        if (links.empty()) links = default_bottleneck(topo, reference);
        return poor_routing(topo, links);
    }
    }
    fail(ErrorCode::InvalidArgument, "unknown routing policy");
}

std::vector<std::size_t> layer_sizes_for(std::size_t nodes, const NetworkSpec& net) {
    const std::size_t io = nodes * nodes;
    const std::size_t width = net.width ? net.width : io;
    std::vector<std::size_t> sizes{io};
    for (std::size_t l = 0; l < net.depth; ++l) sizes.push_back(width);
    sizes.push_back(io);
    return sizes;
}

std::string result_csv_header() {
    return "experiment,label,topology,nodes,routing,traffic,dist,rho_max,depth,width,activation,repetition,samples,"
           "n_train,n_val,n_test,raw_mse,nu,learning_error,relative_error,mean_delay,mean_utilization,"
           "max_utilization,best_epoch,seed";
}

std::string format_result_csv(const std::vector<ResultRow>& rows) {
    std::string out = result_csv_header() + "\n";
    for (const ResultRow& r : rows) {
        out += r.experiment + "," + r.label + "," + r.topology + "," + std::to_string(r.nodes) + "," + r.routing + "," +
               r.traffic + "," + r.dist + "," + format_double(r.rho_max) + "," + std::to_string(r.depth) + "," +
               std::to_string(r.width) + "," + r.activation + "," + std::to_string(r.repetition) + "," +
               std::to_string(r.samples) + "," + std::to_string(r.n_train) + "," + std::to_string(r.n_val) + "," +
               std::to_string(r.n_test) + "," + format_double(r.raw_mse) + "," + format_double(r.nu) + "," +
               format_double(r.learning_error) + "," + format_double(r.relative_error) + "," +
               format_double(r.mean_delay) + "," + format_double(r.mean_utilization) + "," +
               format_double(r.max_utilization) + "," + std::to_string(r.best_epoch) + "," + std::to_string(r.seed) +
               "\n";
    }
    return out;
}

std::string format_timing_csv(const std::vector<ResultRow>& rows) {
    std::string out = "experiment,label,repetition,wall_seconds\n";
    char buf[64];
    for (const ResultRow& r : rows) {
        std::snprintf(buf, sizeof buf, "%.3f", r.wall_seconds);
        out += r.experiment + "," + r.label + "," + std::to_string(r.repetition) + "," + buf + "\n";
    }
    return out;
}

PreparedData prepare_data(const PipelineConfig& cfg, std::uint64_t data_seed,
                          const std::optional<std::filesystem::path>& save_as) {
    Topology topo = build_topology(cfg.topology);
    RoutingTable table = build_routing(topo, cfg);
    GenerationConfig gen = cfg.generation;
    gen.master_seed = data_seed;
    Dataset ds = generate_dataset(topo, table, cfg.routing, gen);
    if (save_as) save_dataset(ds, *save_as);
    auto variance = estimate_measurement_variance(topo, table, gen, cfg.variance_repeats, cfg.variance_probes,
                                                  derive_seed(data_seed, {stream::variance}));
    auto loads = link_loads(topo, table, reference_traffic(topo.node_count(), gen.traffic.rho_max, gen.capacity));
    const std::size_t total = ds.size();
    SplitDataset parts = split(ds, derive_seed(data_seed, {stream::split}));
    return PreparedData{std::move(topo), std::move(table), std::move(parts), std::move(variance), std::move(loads), total};
}

ResultRow train_and_evaluate(const PreparedData& data, const PipelineConfig& cfg, std::uint64_t train_seed,
                             TrainedModel* model_out) {
    const std::size_t n = data.topology.node_count();
    auto sizes = layer_sizes_for(n, cfg.network);
    Mlp initial = init_mlp(sizes, cfg.network.activation, train_seed);
    TrainConfig tc = cfg.training;
    tc.seed = train_seed;
    TrainedModel model = train(initial, data.split, tc);
    Evaluation ev = evaluate(model.mlp, model.scaler, data.split.test, data.variance.nu);

    ResultRow row;
    row.topology = data.topology.name();
    row.nodes = n;
    row.routing = std::string(to_string(cfg.routing));
    row.traffic = std::string(to_string(cfg.generation.model));
    row.dist = std::string(to_string(cfg.generation.traffic.length_dist));
    row.rho_max = cfg.generation.traffic.rho_max;
    row.depth = cfg.network.depth;
    row.width = sizes[1];
    row.activation = std::string(to_string(cfg.network.activation));
    row.samples = data.total_samples;
    row.n_train = data.split.train.size();
    row.n_val = data.split.validation.size();
    row.n_test = data.split.test.size();
    row.raw_mse = ev.raw_mse;
    row.nu = ev.nu;
    row.learning_error = ev.learning_error;
    row.relative_error = ev.relative_error;
    row.mean_delay = ev.mean_delay;
    row.mean_utilization = data.reference_loads.mean_utilization();
    row.max_utilization = data.reference_loads.max_utilization();
    row.best_epoch = model.history.best_epoch;
    row.seed = train_seed;
    if (model_out) *model_out = std::move(model);
    return row;
}

namespace {

struct DataPoint {
    PipelineConfig cfg;
    std::string label;
};

struct ModelPoint {
    std::size_t data_index;
    NetworkSpec network;
    std::string label;
};

/// Prepares every data point once per repetition, then trains every model
/// point; rows come out in (repetition, model point) order.
std::vector<ResultRow> run_grid(const ExperimentConfig& e, const std::vector<DataPoint>& data_points,
                                const std::vector<ModelPoint>& model_points) {
    std::vector<ResultRow> rows;
    for (std::size_t rep = 0; rep < e.repetitions; ++rep) {
        // Compared axes share the dataset and training seeds.
        const std::uint64_t data_seed = derive_seed(e.seed, {stream::dataset, rep});
        const std::uint64_t train_seed = derive_seed(e.seed, {stream::training, rep});

        std::vector<PreparedData> prepared;
        std::vector<double> prep_seconds;
        for (const DataPoint& dp : data_points) {
            auto t0 = std::chrono::steady_clock::now();
            std::optional<std::filesystem::path> save_as;
            if (e.dataset_dir) {
                std::string name = std::string(to_string(e.kind)) + "_" + dp.label + "_rep" + std::to_string(rep) + ".csv";
                for (char& c : name)
                    if (c == '=' || c == ',' || c == ';' || c == ' ') c = '_';
                save_as = *e.dataset_dir / name;
            }
            prepared.push_back(prepare_data(dp.cfg, data_seed, save_as));
            prep_seconds.push_back(seconds_since(t0));
        }

        std::vector<ResultRow> rep_rows(model_points.size());
        parallel_for(model_points.size(), [&](std::size_t i) {
            const ModelPoint& mp = model_points[i];
            PipelineConfig cfg = data_points[mp.data_index].cfg;
            cfg.network = mp.network;
            auto t0 = std::chrono::steady_clock::now();
            ResultRow row = train_and_evaluate(prepared[mp.data_index], cfg, train_seed);
            row.experiment = std::string(to_string(e.kind));
            row.label = mp.label;
            row.repetition = rep;
            row.wall_seconds = seconds_since(t0) + prep_seconds[mp.data_index];
            rep_rows[i] = std::move(row);
        });
        rows.insert(rows.end(), rep_rows.begin(), rep_rows.end());
    }
    return rows;
}

PipelineConfig with_rho(PipelineConfig cfg, double rho) {
    cfg.generation.traffic.rho_max = rho;
    return cfg;
}

} // namespace

std::vector<ResultRow> run_saturation_sweep(const ExperimentConfig& e) {
    std::vector<DataPoint> data;
    std::vector<ModelPoint> models;
    for (std::size_t i = 0; i < e.rho_values.size(); ++i) {
        data.push_back({with_rho(e.base, e.rho_values[i]), e.rho_labels[i]});
        for (std::size_t depth : e.depths) {
            NetworkSpec net = e.base.network;
            net.depth = depth;
            models.push_back({i, net, e.rho_labels[i] + ";depth=" + std::to_string(depth)});
        }
    }
    return run_grid(e, data, models);
}

std::vector<ResultRow> run_topology_size_sweep(const ExperimentConfig& e) {
    std::vector<DataPoint> data;
    std::vector<ModelPoint> models;
    for (TopologyKind kind : e.topologies) {
        for (std::size_t n : e.sizes) {
            PipelineConfig cfg = with_rho(e.base, e.rho_values.front());
            cfg.topology.kind = kind;
            cfg.topology.nodes = n;
            std::string label = std::string(to_string(kind)) + ";n=" + std::to_string(n);
            data.push_back({cfg, label});
            models.push_back({data.size() - 1, e.base.network, label});
        }
    }
    return run_grid(e, data, models);
}

std::vector<ResultRow> run_routing_compare(const ExperimentConfig& e) {
    std::vector<DataPoint> data;
    std::vector<ModelPoint> models;
    for (RoutingPolicy p : e.policies) {
        PipelineConfig cfg = with_rho(e.base, e.rho_values.front());
        cfg.routing = p;
        data.push_back({cfg, std::string(to_string(p))});
        models.push_back({data.size() - 1, e.base.network, std::string(to_string(p))});
    }
    return run_grid(e, data, models);
}

std::vector<ResultRow> run_neuron_sweep(const ExperimentConfig& e) {
    std::vector<DataPoint> data;
    std::vector<ModelPoint> models;
    for (std::size_t n : e.sizes) {
        PipelineConfig cfg = with_rho(e.base, e.rho_values.front());
        cfg.topology.nodes = n;
        data.push_back({cfg, "n=" + std::to_string(n)});
        for (std::size_t w : e.widths) {
            NetworkSpec net = e.base.network;
            net.width = w;
            models.push_back({data.size() - 1, net, "n=" + std::to_string(n) + ";width=" + std::to_string(w)});
        }
    }
    return run_grid(e, data, models);
}

std::vector<ResultRow> run_activation_compare(const ExperimentConfig& e) {
    std::vector<DataPoint> data;
    std::vector<ModelPoint> models;
    for (std::size_t i = 0; i < e.rho_values.size(); ++i) {
        data.push_back({with_rho(e.base, e.rho_values[i]), e.rho_labels[i]});
        for (Activation a : e.activations) {
            NetworkSpec net = e.base.network;
            net.activation = a;
            models.push_back({i, net, e.rho_labels[i] + ";" + std::string(to_string(a))});
        }
    }
    return run_grid(e, data, models);
}

std::vector<ResultRow> run_realistic(const ExperimentConfig& e) {
    std::vector<DataPoint> data;
    std::vector<ModelPoint> models;
    for (std::size_t i = 0; i < e.rho_values.size(); ++i) {
        data.push_back({with_rho(e.base, e.rho_values[i]), e.rho_labels[i]});
        models.push_back({i, e.base.network, e.rho_labels[i]});
    }
    return run_grid(e, data, models);
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& e) {
    switch (e.kind) {
    case ExperimentKind::SaturationSweep: return run_saturation_sweep(e);
    case ExperimentKind::TopologySizeSweep: return run_topology_size_sweep(e);
    case ExperimentKind::RoutingCompare: return run_routing_compare(e);
    case ExperimentKind::NeuronSweep: return run_neuron_sweep(e);
    case ExperimentKind::ActivationCompare: return run_activation_compare(e);
    case ExperimentKind::Realistic: return run_realistic(e);
    }
    fail(ErrorCode::InvalidArgument, "unknown experiment kind");
}

std::vector<ResultRow> run_experiment_to(const ExperimentConfig& e, const std::filesystem::path& out_dir) {
    auto rows = run_experiment(e);
    const std::string stem(to_string(e.kind));
    write_file(out_dir / (stem + ".csv"), format_result_csv(rows));
    write_file(out_dir / (stem + "_timing.csv"), format_timing_csv(rows));
    return rows;
}

} // namespace netdelay
