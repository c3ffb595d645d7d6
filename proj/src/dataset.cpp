#include "netdelay/dataset.hpp"

#include "netdelay/error.hpp"
#include "netdelay/parallel.hpp"
#include "netdelay/simulator.hpp"
#include "netdelay/text.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numeric>

namespace netdelay {

std::string_view to_string(TrafficModel m) { return m == TrafficModel::Uniform ? "uniform" : "hotspot"; }

TrafficModel parse_traffic_model(std::string_view name) {
    if (name == "uniform") return TrafficModel::Uniform;
    if (name == "hotspot") return TrafficModel::Hotspot;
    fail(ErrorCode::InvalidArgument, "unknown traffic model '" + std::string(name) + "' (expected uniform or hotspot)");
}

void Dataset::validate() const {
    const std::size_t n = meta.nodes;
    if (n < 2) fail(ErrorCode::Validation, "dataset node count must be >= 2");
    for (std::size_t k = 0; k < samples.size(); ++k) {
        const Sample& s = samples[k];
        auto where = "sample " + std::to_string(k) + ": ";
        if (s.traffic.size() != n * n || s.delay.size() != n * n)
            fail(ErrorCode::Validation, where + "expected " + std::to_string(n * n) + " traffic and delay values");
        for (std::size_t p = 0; p < n * n; ++p) {
            for (double v : {s.traffic[p], s.delay[p]}) {
                if (!std::isfinite(v) || v < 0.0)
                    fail(ErrorCode::Validation, where + "negative or non-finite value at position " + std::to_string(p));
            }
            if (p / n == p % n && (s.traffic[p] != 0.0 || s.delay[p] != 0.0))
                fail(ErrorCode::Validation, where + "diagonal position " + std::to_string(p) + " must be zero");
        }
    }
}

double Dataset::mean_delay() const {
    const std::size_t n = meta.nodes;
    double sum = 0.0;
    std::size_t count = 0;
    for (const Sample& s : samples)
        for (std::size_t p = 0; p < n * n; ++p)
            if (p / n != p % n) {
                sum += s.delay[p];
                ++count;
            }
    return count ? sum / static_cast<double>(count) : 0.0;
}

TrafficMatrix sample_matrix(const GenerationConfig& cfg, std::size_t n, Rng& rng) {
    if (cfg.model == TrafficModel::Hotspot)
        return sample_hotspot_matrix(n, cfg.traffic.rho_max, cfg.capacity, cfg.hotspot, rng);
    return sample_traffic_matrix(n, cfg.traffic.rho_max, cfg.capacity, rng);
}

namespace {

DatasetMeta make_meta(const Topology& topo, RoutingPolicy policy, const GenerationConfig& cfg) {
    DatasetMeta meta;
    meta.nodes = topo.node_count();
    meta.topology = topo.name();
    for (char& c : meta.topology)
        if (std::isspace(static_cast<unsigned char>(c)) || c == '=' || c == '#') c = '_';
    meta.routing = policy;
    meta.rho_max = cfg.traffic.rho_max;
    meta.dist = cfg.traffic.length_dist;
    meta.horizon = cfg.horizon;
    meta.seed = cfg.master_seed;
    meta.traffic = cfg.model;
    meta.hotspot = cfg.hotspot;
    meta.capacity = cfg.capacity;
    return meta;
}

Sample to_sample(const TrafficMatrix& tm, const SimResult& sim) {
    Sample s;
    s.traffic.assign(tm.values().begin(), tm.values().end());
    s.delay = sim.delays.mean_delay;
    return s;
}

} // namespace

Dataset generate_dataset(const Topology& topo, const RoutingTable& table, RoutingPolicy policy,
                         const GenerationConfig& cfg) {
    if (cfg.samples < 1) fail(ErrorCode::InvalidArgument, "dataset needs at least one sample");
    cfg.traffic.validate();
    Dataset ds;
    ds.meta = make_meta(topo, policy, cfg);
    ds.samples.resize(cfg.samples);
    const std::size_t n = topo.node_count();
    parallel_for(cfg.samples, [&](std::size_t k) {
        Rng rng(derive_seed(cfg.master_seed, {stream::traffic_matrix, k}));
        TrafficMatrix tm = sample_matrix(cfg, n, rng);
        SimResult sim = simulate(topo, table, tm, cfg.traffic, cfg.horizon,
                                 derive_seed(cfg.master_seed, {stream::simulation, k}));
        ds.samples[k] = to_sample(tm, sim);
    });
    return ds;
}

SplitDataset split(const Dataset& ds, std::uint64_t seed) {
    const std::size_t s = ds.size();
    if (s < 5) fail(ErrorCode::TooSmall, "split needs at least 5 samples, got " + std::to_string(s));
    std::vector<std::size_t> order(s);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(seed, {stream::split}));
    std::shuffle(order.begin(), order.end(), rng);

    const std::size_t n_train = s * 6 / 10;
    const std::size_t n_val = s * 2 / 10;
    SplitDataset out;
    for (Dataset* part : {&out.train, &out.validation, &out.test}) part->meta = ds.meta;
    for (std::size_t i = 0; i < s; ++i) {
        Dataset& part = i < n_train ? out.train : (i < n_train + n_val ? out.validation : out.test);
        part.samples.push_back(ds.samples[order[i]]);
    }
    return out;
}

VarianceEstimate estimate_measurement_variance(const Topology& topo, const RoutingTable& table,
                                               const GenerationConfig& cfg, std::size_t repeats, std::size_t probes,
                                               std::uint64_t seed) {
    if (repeats < 2) fail(ErrorCode::InvalidArgument, "variance estimate needs at least 2 repeats");
    if (probes < 1) fail(ErrorCode::InvalidArgument, "variance estimate needs at least 1 probe matrix");
    const std::size_t n = topo.node_count();
    std::vector<TrafficMatrix> matrices;
    for (std::size_t m = 0; m < probes; ++m) {
        Rng rng(derive_seed(seed, {stream::probe_matrix, m}));
        matrices.push_back(sample_matrix(cfg, n, rng));
    }
    std::vector<std::vector<double>> delays(probes * repeats);
    parallel_for(probes * repeats, [&](std::size_t job) {
        const std::size_t m = job / repeats, r = job % repeats;
        auto sim = simulate(topo, table, matrices[m], cfg.traffic, cfg.horizon,
                            derive_seed(seed, {stream::probe_simulation, m, r}));
        delays[job] = std::move(sim.delays.mean_delay);
    });

    VarianceEstimate est;
    est.repeats = repeats;
    est.probes = probes;
    est.per_pair.assign(n * n, 0.0);
    for (std::size_t m = 0; m < probes; ++m) {
        for (std::size_t p = 0; p < n * n; ++p) {
            double mean = 0.0;
            for (std::size_t r = 0; r < repeats; ++r) mean += delays[m * repeats + r][p];
            mean /= static_cast<double>(repeats);
            double ss = 0.0;
            for (std::size_t r = 0; r < repeats; ++r) {
                const double d = delays[m * repeats + r][p] - mean;
                ss += d * d;
            }
            est.per_pair[p] += ss / static_cast<double>(repeats - 1) / static_cast<double>(probes);
        }
    }
    est.nu = std::accumulate(est.per_pair.begin(), est.per_pair.end(), 0.0) / static_cast<double>(n * n);
    return est;
}

std::string format_dataset(const Dataset& ds) {
    const DatasetMeta& m = ds.meta;
    std::string out;
    out += "# nodes=" + std::to_string(m.nodes) + " samples=" + std::to_string(ds.size()) + " topology=" + m.topology +
           " routing=" + std::string(to_string(m.routing)) + " rho_max=" + format_double(m.rho_max) +
           " dist=" + std::string(to_string(m.dist)) + " horizon=" + format_double(m.horizon) +
           " seed=" + std::to_string(m.seed) + "\n";
    out += "# generator=" + m.generator + " traffic=" + std::string(to_string(m.traffic)) +
           " hot_fraction=" + format_double(m.hotspot.hot_fraction) +
           " hot_share=" + format_double(m.hotspot.hot_share) + " capacity=" + format_double(m.capacity) + "\n";
    for (const Sample& s : ds.samples) {
        bool first = true;
        for (double v : s.traffic) {
            if (!first) out += ',';
            first = false;
            out += format_fixed(v);
        }
        for (double v : s.delay) {
            out += ',';
            out += format_double(v);
        }
        out += '\n';
    }
    return out;
}

namespace {

std::map<std::string, std::string> parse_header(std::string_view line, std::size_t line_no) {
    std::map<std::string, std::string> kv;
    line.remove_prefix(1);
    for (const std::string& tok : split_whitespace(line)) {
        auto eq = tok.find('=');
        if (eq == std::string::npos)
            fail(ErrorCode::Parse, "dataset line " + std::to_string(line_no) + ": malformed header field '" + tok + "'");
        kv[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    return kv;
}

} // namespace

Dataset parse_dataset(const std::string& text) {
    Dataset ds;
    std::map<std::string, std::string> header;
    std::size_t line_no = 0;
    std::size_t declared_samples = 0;
    bool have_header = false;
    auto require = [&](const char* key) -> const std::string& {
        auto it = header.find(key);
        if (it == header.end()) fail(ErrorCode::Parse, std::string("dataset header lacks '") + key + "'");
        return it->second;
    };
    const std::string ctx_header = "dataset header: ";

    for (auto line : split_char(text, '\n')) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (trim(line).empty()) continue;
        if (line.front() == '#') {
            if (!ds.samples.empty())
                fail(ErrorCode::Parse, "dataset line " + std::to_string(line_no) + ": header after data rows");
            auto kv = parse_header(line, line_no);
            header.insert(kv.begin(), kv.end());
            continue;
        }
        if (!have_header) {
            DatasetMeta& m = ds.meta;
            m.nodes = parse_number<std::size_t>(require("nodes"), ctx_header);
            declared_samples = parse_number<std::size_t>(require("samples"), ctx_header);
            m.topology = require("topology");
            m.routing = parse_routing_policy(require("routing"));
            m.rho_max = parse_number<double>(require("rho_max"), ctx_header);
            m.dist = parse_length_dist(require("dist"));
            m.horizon = parse_number<double>(require("horizon"), ctx_header);
            m.seed = parse_number<std::uint64_t>(require("seed"), ctx_header);
            if (header.count("generator")) m.generator = header["generator"];
            if (header.count("traffic")) m.traffic = parse_traffic_model(header["traffic"]);
            if (header.count("hot_fraction"))
                m.hotspot.hot_fraction = parse_number<double>(header["hot_fraction"], ctx_header);
            if (header.count("hot_share")) m.hotspot.hot_share = parse_number<double>(header["hot_share"], ctx_header);
            if (header.count("capacity")) m.capacity = parse_number<double>(header["capacity"], ctx_header);
            have_header = true;
        }
        const std::size_t nn = ds.meta.nodes * ds.meta.nodes;
        auto cells = split_char(line, ',');
        auto where = "dataset line " + std::to_string(line_no) + ": ";
        if (cells.size() != 2 * nn)
            fail(ErrorCode::Parse, where + "expected " + std::to_string(2 * nn) + " values, got " +
                                       std::to_string(cells.size()));
        Sample s;
        s.traffic.reserve(nn);
        s.delay.reserve(nn);
        for (std::size_t c = 0; c < nn; ++c) s.traffic.push_back(parse_number<double>(cells[c], where));
        for (std::size_t c = nn; c < 2 * nn; ++c) {
            double v = parse_number<double>(cells[c], where);
            if (v < 0.0 || !std::isfinite(v))
                fail(ErrorCode::Validation, where + "negative or non-finite delay in column " + std::to_string(c));
            s.delay.push_back(v);
        }
        ds.samples.push_back(std::move(s));
    }
    if (!have_header) {
        if (header.empty()) fail(ErrorCode::Parse, "dataset has no header");
        fail(ErrorCode::Parse, "dataset has no samples");
    }
    if (ds.samples.size() != declared_samples)
        fail(ErrorCode::Parse, "dataset header declares " + std::to_string(declared_samples) + " samples but " +
                                   std::to_string(ds.samples.size()) + " rows were found");
    ds.validate();
    return ds;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) { write_file(path, format_dataset(ds)); }

Dataset load_dataset(const std::filesystem::path& path) { return parse_dataset(read_file(path)); }

} // namespace netdelay
