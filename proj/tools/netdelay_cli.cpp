// netdelay command line front end. Talks to the library only through the C API.
#include "netdelay/netdelay.h"

#include <CLI11.hpp>

#include <cstdio>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace {

struct Failure : std::runtime_error {
    nd_status status;
    Failure(nd_status s, const std::string& what) : std::runtime_error(what), status(s) {}
};

void check(nd_status s) {
    if (s != ND_OK) throw Failure(s, std::string(nd_status_name(s)) + ": " + nd_last_error());
}

template <class T, void (*Free)(T*)>
struct Deleter {
    void operator()(T* p) const { Free(p); }
};
using ConfigPtr = std::unique_ptr<nd_config, Deleter<nd_config, nd_config_free>>;
using TopologyPtr = std::unique_ptr<nd_topology, Deleter<nd_topology, nd_topology_free>>;
using RoutingPtr = std::unique_ptr<nd_routing, Deleter<nd_routing, nd_routing_free>>;
using DatasetPtr = std::unique_ptr<nd_dataset, Deleter<nd_dataset, nd_dataset_free>>;
using ModelPtr = std::unique_ptr<nd_model, Deleter<nd_model, nd_model_free>>;
using ReportPtr = std::unique_ptr<nd_oracle_report, Deleter<nd_oracle_report, nd_oracle_report_free>>;

// --config file plus repeated --set section.key=value overrides.
ConfigPtr make_config(const std::string& path, const std::vector<std::string>& overrides) {
    nd_config* raw = nullptr;
    check(path.empty() ? nd_config_new(&raw) : nd_config_load(path.c_str(), &raw));
    ConfigPtr cfg(raw);
    for (const auto& o : overrides) {
        auto eq = o.find('=');
        if (eq == std::string::npos || eq == 0) throw Failure(ND_ERR_INVALID_ARGUMENT, "--set expects key=value: " + o);
        check(nd_config_set(cfg.get(), o.substr(0, eq).c_str(), o.substr(eq + 1).c_str()));
    }
    return cfg;
}

struct Common {
    std::string config;
    std::vector<std::string> overrides;
    std::uint64_t seed = 1;
    std::string out;
};

void add_common(CLI::App* cmd, Common& c, bool out_required) {
    cmd->add_option("-c,--config", c.config, "INI configuration file")->check(CLI::ExistingFile);
    cmd->add_option("--set", c.overrides, "Override a config key (section.key=value)");
    cmd->add_option("-s,--seed", c.seed, "Master seed");
    auto* out = cmd->add_option("-o,--out", c.out, "Output path");
    if (out_required) out->required();
}

int gen_topology(const Common& c) {
    auto cfg = make_config(c.config, c.overrides);
    nd_topology* raw = nullptr;
    check(nd_topology_from_config(cfg.get(), &raw));
    TopologyPtr topo(raw);
    check(nd_topology_save(topo.get(), c.out.c_str()));
    size_t nodes = 0, links = 0;
    check(nd_topology_node_count(topo.get(), &nodes));
    check(nd_topology_link_count(topo.get(), &links));
    std::printf("wrote %s: %zu nodes, %zu links\n", c.out.c_str(), nodes, links);
    return 0;
}

int gen_dataset(const Common& c, const std::string& routing_out) {
    auto cfg = make_config(c.config, c.overrides);
    nd_dataset* raw = nullptr;
    check(nd_dataset_generate(cfg.get(), c.seed, &raw));
    DatasetPtr ds(raw);
    check(nd_dataset_save(ds.get(), c.out.c_str()));
    if (!routing_out.empty()) {
        nd_topology* t = nullptr;
        check(nd_topology_from_config(cfg.get(), &t));
        TopologyPtr topo(t);
        nd_routing* r = nullptr;
        check(nd_routing_from_config(topo.get(), cfg.get(), &r));
        RoutingPtr table(r);
        check(nd_routing_save(table.get(), topo.get(), routing_out.c_str()));
    }
    size_t samples = 0;
    check(nd_dataset_sample_count(ds.get(), &samples));
    std::printf("wrote %s: %zu samples\n", c.out.c_str(), samples);
    return 0;
}

DatasetPtr load_dataset(const std::string& path) {
    nd_dataset* raw = nullptr;
    check(nd_dataset_load(path.c_str(), &raw));
    return DatasetPtr(raw);
}

int train(const Common& c, const std::string& data, const std::string& history) {
    auto cfg = make_config(c.config, c.overrides);
    auto ds = load_dataset(data);
    nd_model* raw = nullptr;
    check(nd_model_train(ds.get(), cfg.get(), c.seed, &raw));
    ModelPtr model(raw);
    check(nd_model_save(model.get(), c.out.c_str()));
    if (!history.empty()) check(nd_model_save_history(model.get(), history.c_str()));
    size_t best = 0;
    check(nd_model_best_epoch(model.get(), &best));
    std::printf("wrote %s (best epoch %zu)\n", c.out.c_str(), best);
    return 0;
}

int evaluate(const Common& c, const std::string& model_path, const std::string& data, std::optional<double> nu,
             bool whole) {
    auto ds = load_dataset(data);
    nd_model* raw = nullptr;
    check(nd_model_load(model_path.c_str(), &raw));
    ModelPtr model(raw);
    double v = 0.0;
    if (nu) {
        v = *nu;
    } else if (!c.config.empty() || !c.overrides.empty()) {
        auto cfg = make_config(c.config, c.overrides);
        check(nd_variance_estimate(cfg.get(), c.seed, &v));
    }
    nd_evaluation ev{};
    check(nd_model_evaluate(model.get(), ds.get(), c.seed, whole ? 0 : 1, v, &ev));
    std::string text = "samples,raw_mse,nu,learning_error,relative_error,mean_delay\n";
    char line[256];
    std::snprintf(line, sizeof line, "%zu,%.10g,%.10g,%.10g,%.10g,%.10g\n", ev.samples, ev.raw_mse, ev.nu,
                  ev.learning_error, ev.relative_error, ev.mean_delay);
    text += line;
    if (c.out.empty()) {
        std::fputs(text.c_str(), stdout);
    } else {
        std::FILE* f = std::fopen(c.out.c_str(), "w");
        if (!f) throw Failure(ND_ERR_IO, "cannot write " + c.out);
        std::fputs(text.c_str(), f);
        std::fclose(f);
    }
    return 0;
}

int sweep(const Common& c, const std::string& kind) {
    auto cfg = make_config(c.config, c.overrides);
    size_t rows = 0;
    check(nd_sweep_run(kind.c_str(), cfg.get(), c.seed, c.out.c_str(), &rows));
    std::printf("%s: %zu rows written to %s\n", kind.c_str(), rows, c.out.c_str());
    return 0;
}

int oracle_check(const Common& c, double horizon) {
    nd_oracle_report* raw = nullptr;
    check(nd_oracle_check(horizon, c.seed, &raw));
    ReportPtr report(raw);
    const char* text = nd_oracle_report_text(report.get());
    std::fputs(text, stdout);
    if (!c.out.empty()) {
        std::FILE* f = std::fopen(c.out.c_str(), "w");
        if (!f) throw Failure(ND_ERR_IO, "cannot write " + c.out);
        std::fputs(text, f);
        std::fclose(f);
    }
    if (!nd_oracle_report_passed(report.get())) {
        std::fprintf(stderr, "oracle check failed\n");
        return 2;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"netdelay: packet network delay simulation and neural delay models"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(nd_version()));

    Common topo_opts, data_opts, train_opts, eval_opts, sweep_opts, oracle_opts;

    auto* gt = app.add_subcommand("gen-topology", "Build a topology from [topology] and write it");
    add_common(gt, topo_opts, true);

    auto* gd = app.add_subcommand("gen-dataset", "Simulate a dataset of (traffic, delay) samples");
    add_common(gd, data_opts, true);
    std::string routing_out;
    gd->add_option("--routing-out", routing_out, "Also write the routing table used");

    auto* tr = app.add_subcommand("train", "Train a network on a dataset");
    add_common(tr, train_opts, true);
    std::string train_data, history;
    tr->add_option("-d,--data", train_data, "Dataset CSV")->required()->check(CLI::ExistingFile);
    tr->add_option("--history", history, "Write the training history CSV here");

    auto* ev = app.add_subcommand("evaluate", "Evaluate a trained network on the test split");
    add_common(ev, eval_opts, false);
    std::string model_path, eval_data;
    std::optional<double> nu;
    bool whole = false;
    ev->add_option("-m,--model", model_path, "Model file")->required()->check(CLI::ExistingFile);
    ev->add_option("-d,--data", eval_data, "Dataset CSV")->required()->check(CLI::ExistingFile);
    ev->add_option("--nu", nu, "Measurement variance to subtract (default: estimate from --config, else 0)");
    ev->add_flag("--all", whole, "Evaluate on every sample instead of the test split");

    auto* sw = app.add_subcommand("sweep", "Run an experiment sweep");
    add_common(sw, sweep_opts, true);
    std::string kind;
    sw->add_option("kind", kind, "saturation-sweep | topology-size-sweep | routing-compare | neuron-sweep | "
                                 "activation-compare | realistic")
        ->required();

    auto* oc = app.add_subcommand("oracle-check", "Compare single-link delays against Pollaczek-Khinchine");
    add_common(oc, oracle_opts, false);
    double horizon = 1e6;
    oc->add_option("--horizon", horizon, "Simulated time per cell");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gt) return gen_topology(topo_opts);
        if (*gd) return gen_dataset(data_opts, routing_out);
        if (*tr) return train(train_opts, train_data, history);
        if (*ev) return evaluate(eval_opts, model_path, eval_data, nu, whole);
        if (*sw) return sweep(sweep_opts, kind);
        if (*oc) return oracle_check(oracle_opts, horizon);
    } catch (const Failure& f) {
        std::fprintf(stderr, "error: %s\n", f.what());
        return 1;
    }
    return 1;
}
