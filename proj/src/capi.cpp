#include "netdelay/netdelay.h"

#include "netdelay/config.hpp"
#include "netdelay/dataset.hpp"
#include "netdelay/error.hpp"
#include "netdelay/experiments.hpp"
#include "netdelay/rng.hpp"
#include "netdelay/simulator.hpp"
#include "netdelay/text.hpp"
#include "netdelay/trainer.hpp"

#include <algorithm>
#include <memory>
#include <new>
#include <optional>
#include <string>

using namespace netdelay;

struct nd_config {
    Config cfg;
};
struct nd_topology {
    Topology topo;
};
struct nd_routing {
    RoutingTable table;
};
struct nd_dataset {
    Dataset ds;
};
struct nd_model {
    Mlp mlp;
    Scaler scaler;
    std::optional<TrainHistory> history;
};
struct nd_oracle_report {
    OracleReport report;
    std::string text;
};

namespace {

thread_local std::string g_last_error;

nd_status set_error(nd_status status, const std::string& message) {
    g_last_error = message;
    return status;
}

/// Runs `body`, translating exceptions into status codes.
template <class F>
nd_status guarded(const char* fn, F&& body) {
    try {
        body();
        return ND_OK;
    } catch (const Error& e) {
        return set_error(static_cast<nd_status>(static_cast<int>(e.code())), std::string(fn) + ": " + e.what());
    } catch (const std::bad_alloc&) {
        return set_error(ND_ERR_INTERNAL, std::string(fn) + ": out of memory");
    } catch (const std::exception& e) {
        return set_error(ND_ERR_INTERNAL, std::string(fn) + ": " + e.what());
    } catch (...) {
        return set_error(ND_ERR_INTERNAL, std::string(fn) + ": unknown error");
    }
}

void require(const void* p, const char* what) {
    if (!p) fail(ErrorCode::InvalidArgument, std::string(what) + " is null");
}

TrafficMatrix traffic_from(const double* values, std::size_t len, std::size_t n) {
    require(values, "traffic");
    if (len != n * n) fail(ErrorCode::DimensionMismatch, "traffic length must be N*N = " + std::to_string(n * n));
    return TrafficMatrix(n, std::vector<double>(values, values + len));
}

std::uint64_t split_seed(std::uint64_t seed) { return derive_seed(seed, {stream::split}); }
std::uint64_t train_seed(std::uint64_t seed) { return derive_seed(seed, {stream::training}); }

} // namespace

extern "C" {

const char* nd_version(void) { return kGeneratorVersion; }

const char* nd_last_error(void) { return g_last_error.c_str(); }

const char* nd_status_name(nd_status status) {
    switch (status) {
    case ND_OK: return "ok";
    case ND_ERR_INVALID_ARGUMENT: return "invalid argument";
    case ND_ERR_INVALID_SIZE: return "invalid size";
    case ND_ERR_IO: return "i/o error";
    case ND_ERR_PARSE: return "parse error";
    case ND_ERR_DISCONNECTED: return "disconnected graph";
    case ND_ERR_DUPLICATE_LINK: return "duplicate link";
    case ND_ERR_INFEASIBLE_BOTTLENECK: return "infeasible bottleneck";
    case ND_ERR_UNSTABLE_QUEUE: return "unstable queue";
    case ND_ERR_DIVERGED: return "training diverged";
    case ND_ERR_DIMENSION_MISMATCH: return "dimension mismatch";
    case ND_ERR_TOO_SMALL: return "too small";
    case ND_ERR_CHECK_FAILED: return "check failed";
    case ND_ERR_VALIDATION: return "validation error";
    case ND_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

nd_status nd_config_new(nd_config** out) {
    return guarded("nd_config_new", [&] {
        require(out, "out");
        *out = new nd_config{};
    });
}

nd_status nd_config_load(const char* path, nd_config** out) {
    return guarded("nd_config_load", [&] {
        require(path, "path");
        require(out, "out");
        *out = new nd_config{Config::load(path)};
    });
}

nd_status nd_config_set(nd_config* cfg, const char* key, const char* value) {
    return guarded("nd_config_set", [&] {
        require(cfg, "cfg");
        require(key, "key");
        require(value, "value");
        cfg->cfg.set(key, value);
    });
}

void nd_config_free(nd_config* cfg) { delete cfg; }

nd_status nd_topology_ring(size_t nodes, nd_topology** out) {
    return guarded("nd_topology_ring", [&] {
        require(out, "out");
        *out = new nd_topology{make_ring(nodes)};
    });
}

nd_status nd_topology_star(size_t nodes, nd_topology** out) {
    return guarded("nd_topology_star", [&] {
        require(out, "out");
        *out = new nd_topology{make_star(nodes)};
    });
}

nd_status nd_topology_scale_free(size_t nodes, size_t attachment, uint64_t seed, nd_topology** out) {
    return guarded("nd_topology_scale_free", [&] {
        require(out, "out");
        *out = new nd_topology{make_scale_free(nodes, attachment, seed)};
    });
}

nd_status nd_topology_load(const char* path, nd_topology** out) {
    return guarded("nd_topology_load", [&] {
        require(path, "path");
        require(out, "out");
        *out = new nd_topology{load_topology(path)};
    });
}

nd_status nd_topology_from_config(const nd_config* cfg, nd_topology** out) {
    return guarded("nd_topology_from_config", [&] {
        require(cfg, "cfg");
        require(out, "out");
        *out = new nd_topology{build_topology(pipeline_from_config(cfg->cfg).topology)};
    });
}

nd_status nd_topology_save(const nd_topology* topo, const char* path) {
    return guarded("nd_topology_save", [&] {
        require(topo, "topo");
        require(path, "path");
        save_topology(topo->topo, path);
    });
}

nd_status nd_topology_node_count(const nd_topology* topo, size_t* out) {
    return guarded("nd_topology_node_count", [&] {
        require(topo, "topo");
        require(out, "out");
        *out = topo->topo.node_count();
    });
}

nd_status nd_topology_link_count(const nd_topology* topo, size_t* out) {
    return guarded("nd_topology_link_count", [&] {
        require(topo, "topo");
        require(out, "out");
        *out = topo->topo.links().size();
    });
}

nd_status nd_topology_link(const nd_topology* topo, size_t index, uint32_t* src, uint32_t* dst, double* capacity) {
    return guarded("nd_topology_link", [&] {
        require(topo, "topo");
        if (index >= topo->topo.links().size()) fail(ErrorCode::InvalidArgument, "link index out of range");
        const Link& l = topo->topo.links()[index];
        if (src) *src = l.src;
        if (dst) *dst = l.dst;
        if (capacity) *capacity = l.capacity;
    });
}

void nd_topology_free(nd_topology* topo) { delete topo; }

nd_status nd_routing_shortest_path(const nd_topology* topo, nd_routing** out) {
    return guarded("nd_routing_shortest_path", [&] {
        require(topo, "topo");
        require(out, "out");
        *out = new nd_routing{shortest_path_routing(topo->topo)};
    });
}

nd_status nd_routing_from_config(const nd_topology* topo, const nd_config* cfg, nd_routing** out) {
    return guarded("nd_routing_from_config", [&] {
        require(topo, "topo");
        require(cfg, "cfg");
        require(out, "out");
        *out = new nd_routing{build_routing(topo->topo, pipeline_from_config(cfg->cfg))};
    });
}

nd_status nd_routing_next_hop(const nd_routing* table, uint32_t node, uint32_t dst, uint32_t* out) {
    return guarded("nd_routing_next_hop", [&] {
        require(table, "table");
        require(out, "out");
        const std::size_t n = table->table.node_count();
        if (node >= n || dst >= n || node == dst) fail(ErrorCode::InvalidArgument, "invalid (node, dst) pair");
        *out = table->table.next_hop(node, dst);
    });
}

nd_status nd_routing_save(const nd_routing* table, const nd_topology* topo, const char* path) {
    return guarded("nd_routing_save", [&] {
        require(table, "table");
        require(topo, "topo");
        require(path, "path");
        write_file(path, format_routing_table(table->table, topo->topo));
    });
}

nd_status nd_link_loads(const nd_topology* topo, const nd_routing* table, const double* traffic, size_t traffic_len,
                        double* loads_out, size_t loads_len) {
    return guarded("nd_link_loads", [&] {
        require(topo, "topo");
        require(table, "table");
        require(loads_out, "loads_out");
        if (loads_len != topo->topo.links().size())
            fail(ErrorCode::DimensionMismatch, "loads_out must hold one value per link");
        auto tm = traffic_from(traffic, traffic_len, topo->topo.node_count());
        auto loads = link_loads(topo->topo, table->table, tm);
        std::copy(loads.load.begin(), loads.load.end(), loads_out);
    });
}

void nd_routing_free(nd_routing* table) { delete table; }

nd_status nd_simulate(const nd_topology* topo, const nd_routing* table, const double* traffic, size_t traffic_len,
                      const char* dist, double horizon, uint64_t seed, double* delays_out, size_t delays_len) {
    return guarded("nd_simulate", [&] {
        require(topo, "topo");
        require(table, "table");
        require(dist, "dist");
        require(delays_out, "delays_out");
        const std::size_t n = topo->topo.node_count();
        if (delays_len != n * n) fail(ErrorCode::DimensionMismatch, "delays_out must hold N*N values");
        auto tm = traffic_from(traffic, traffic_len, n);
        TrafficConfig cfg;
        cfg.length_dist = parse_length_dist(dist);
        auto res = simulate(topo->topo, table->table, tm, cfg, horizon, seed);
        std::copy(res.delays.mean_delay.begin(), res.delays.mean_delay.end(), delays_out);
    });
}

nd_status nd_pk_sojourn(double arrival_rate, double mean_service, double service_variance, double* out) {
    return guarded("nd_pk_sojourn", [&] {
        require(out, "out");
        *out = pk_sojourn(arrival_rate, mean_service, service_variance);
    });
}

nd_status nd_dataset_generate(const nd_config* cfg, uint64_t seed, nd_dataset** out) {
    return guarded("nd_dataset_generate", [&] {
        require(cfg, "cfg");
        require(out, "out");
        PipelineConfig p = pipeline_from_config(cfg->cfg);
        Topology topo = build_topology(p.topology);
        RoutingTable table = build_routing(topo, p);
        p.generation.master_seed = seed;
        *out = new nd_dataset{generate_dataset(topo, table, p.routing, p.generation)};
    });
}

nd_status nd_dataset_load(const char* path, nd_dataset** out) {
    return guarded("nd_dataset_load", [&] {
        require(path, "path");
        require(out, "out");
        *out = new nd_dataset{load_dataset(path)};
    });
}

nd_status nd_dataset_save(const nd_dataset* ds, const char* path) {
    return guarded("nd_dataset_save", [&] {
        require(ds, "ds");
        require(path, "path");
        save_dataset(ds->ds, path);
    });
}

nd_status nd_dataset_sample_count(const nd_dataset* ds, size_t* out) {
    return guarded("nd_dataset_sample_count", [&] {
        require(ds, "ds");
        require(out, "out");
        *out = ds->ds.size();
    });
}

nd_status nd_dataset_node_count(const nd_dataset* ds, size_t* out) {
    return guarded("nd_dataset_node_count", [&] {
        require(ds, "ds");
        require(out, "out");
        *out = ds->ds.meta.nodes;
    });
}

nd_status nd_dataset_sample(const nd_dataset* ds, size_t index, double* traffic_out, double* delay_out, size_t len) {
    return guarded("nd_dataset_sample", [&] {
        require(ds, "ds");
        if (index >= ds->ds.size()) fail(ErrorCode::InvalidArgument, "sample index out of range");
        const Sample& s = ds->ds.samples[index];
        if (len != s.traffic.size()) fail(ErrorCode::DimensionMismatch, "buffers must hold N*N values");
        if (traffic_out) std::copy(s.traffic.begin(), s.traffic.end(), traffic_out);
        if (delay_out) std::copy(s.delay.begin(), s.delay.end(), delay_out);
    });
}

nd_status nd_dataset_split_sizes(const nd_dataset* ds, uint64_t seed, size_t* train, size_t* validation, size_t* test) {
    return guarded("nd_dataset_split_sizes", [&] {
        require(ds, "ds");
        auto parts = split(ds->ds, split_seed(seed));
        if (train) *train = parts.train.size();
        if (validation) *validation = parts.validation.size();
        if (test) *test = parts.test.size();
    });
}

void nd_dataset_free(nd_dataset* ds) { delete ds; }

nd_status nd_variance_estimate(const nd_config* cfg, uint64_t seed, double* nu_out) {
    return guarded("nd_variance_estimate", [&] {
        require(cfg, "cfg");
        require(nu_out, "nu_out");
        PipelineConfig p = pipeline_from_config(cfg->cfg);
        Topology topo = build_topology(p.topology);
        RoutingTable table = build_routing(topo, p);
        *nu_out = estimate_measurement_variance(topo, table, p.generation, p.variance_repeats, p.variance_probes,
                                                derive_seed(seed, {stream::variance}))
                      .nu;
    });
}

nd_status nd_model_train(const nd_dataset* ds, const nd_config* cfg, uint64_t seed, nd_model** out) {
    return guarded("nd_model_train", [&] {
        require(ds, "ds");
        require(cfg, "cfg");
        require(out, "out");
        PipelineConfig p = pipeline_from_config(cfg->cfg);
        auto parts = split(ds->ds, split_seed(seed));
        const std::uint64_t ts = train_seed(seed);
        Mlp initial = init_mlp(layer_sizes_for(ds->ds.meta.nodes, p.network), p.network.activation, ts);
        TrainConfig tc = p.training;
        tc.seed = ts;
        TrainedModel trained = train(initial, parts, tc);
        *out = new nd_model{std::move(trained.mlp), trained.scaler, std::move(trained.history)};
    });
}

nd_status nd_model_load(const char* path, nd_model** out) {
    return guarded("nd_model_load", [&] {
        require(path, "path");
        require(out, "out");
        auto m = std::make_unique<nd_model>();
        load_model(path, m->mlp, m->scaler);
        *out = m.release();
    });
}

nd_status nd_model_save(const nd_model* model, const char* path) {
    return guarded("nd_model_save", [&] {
        require(model, "model");
        require(path, "path");
        save_model(model->mlp, model->scaler, path);
    });
}

nd_status nd_model_save_history(const nd_model* model, const char* path) {
    return guarded("nd_model_save_history", [&] {
        require(model, "model");
        require(path, "path");
        if (!model->history) fail(ErrorCode::InvalidArgument, "model has no training history (it was loaded)");
        std::string out = "epoch,train_loss,validation_mse\n";
        for (const auto& h : model->history->entries)
            out += std::to_string(h.epoch) + "," + format_double(h.train_loss) + "," +
                   format_double(h.validation_mse) + "\n";
        write_file(path, out);
    });
}

nd_status nd_model_best_epoch(const nd_model* model, size_t* out) {
    return guarded("nd_model_best_epoch", [&] {
        require(model, "model");
        require(out, "out");
        if (!model->history) fail(ErrorCode::InvalidArgument, "model has no training history (it was loaded)");
        *out = model->history->best_epoch;
    });
}

nd_status nd_model_predict(const nd_model* model, const double* traffic, size_t traffic_len, double* delay_out,
                           size_t delay_len) {
    return guarded("nd_model_predict", [&] {
        require(model, "model");
        require(traffic, "traffic");
        require(delay_out, "delay_out");
        if (traffic_len != model->mlp.input_size() || delay_len != model->mlp.output_size())
            fail(ErrorCode::DimensionMismatch, "buffer lengths do not match the model");
        Matrix x(static_cast<Eigen::Index>(traffic_len), 1);
        for (std::size_t i = 0; i < traffic_len; ++i) x(static_cast<Eigen::Index>(i), 0) = traffic[i] / model->scaler.input_scale;
        Matrix y = model->mlp.forward(x);
        for (std::size_t i = 0; i < delay_len; ++i)
            delay_out[i] = y(static_cast<Eigen::Index>(i), 0) * model->scaler.output_scale;
    });
}

nd_status nd_model_evaluate(const nd_model* model, const nd_dataset* ds, uint64_t seed, int test_only, double nu,
                            nd_evaluation* out) {
    return guarded("nd_model_evaluate", [&] {
        require(model, "model");
        require(ds, "ds");
        require(out, "out");
        Evaluation ev = test_only ? evaluate(model->mlp, model->scaler, split(ds->ds, split_seed(seed)).test, nu)
                                  : evaluate(model->mlp, model->scaler, ds->ds, nu);
        *out = nd_evaluation{ev.raw_mse, ev.nu, ev.learning_error, ev.relative_error, ev.mean_delay, ev.samples};
    });
}

void nd_model_free(nd_model* model) { delete model; }

nd_status nd_sweep_run(const char* kind, const nd_config* cfg, uint64_t seed, const char* out_dir, size_t* rows_out) {
    return guarded("nd_sweep_run", [&] {
        require(kind, "kind");
        require(cfg, "cfg");
        require(out_dir, "out_dir");
        Config c = cfg->cfg;
        c.set("experiment.kind", kind);
        ExperimentConfig e = experiment_from_config(c);
        e.seed = seed;
        auto rows = run_experiment_to(e, out_dir);
        if (rows_out) *rows_out = rows.size();
    });
}

nd_status nd_oracle_check(double horizon, uint64_t seed, nd_oracle_report** out) {
    return guarded("nd_oracle_check", [&] {
        require(out, "out");
        auto r = std::make_unique<nd_oracle_report>();
        r->report = oracle_check(horizon, seed);
        r->text = format_oracle_report(r->report);
        *out = r.release();
    });
}

nd_status nd_oracle_report_cell_count(const nd_oracle_report* report, size_t* out) {
    return guarded("nd_oracle_report_cell_count", [&] {
        require(report, "report");
        require(out, "out");
        *out = report->report.cells.size();
    });
}

nd_status nd_oracle_report_cell(const nd_oracle_report* report, size_t index, nd_oracle_cell* out) {
    return guarded("nd_oracle_report_cell", [&] {
        require(report, "report");
        require(out, "out");
        if (index >= report->report.cells.size()) fail(ErrorCode::InvalidArgument, "cell index out of range");
        const OracleCell& c = report->report.cells[index];
        *out = nd_oracle_cell{to_string(c.dist).data(), c.rho,       c.simulated, c.expected, c.deviation,
                              c.tolerance,              c.packets,   c.passed ? 1 : 0};
    });
}

int nd_oracle_report_passed(const nd_oracle_report* report) { return report && report->report.all_passed() ? 1 : 0; }

const char* nd_oracle_report_text(const nd_oracle_report* report) { return report ? report->text.c_str() : ""; }

void nd_oracle_report_free(nd_oracle_report* report) { delete report; }

} // extern "C"
