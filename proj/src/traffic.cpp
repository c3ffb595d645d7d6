#include "netdelay/traffic.hpp"

#include "netdelay/error.hpp"
#include "netdelay/text.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace netdelay {

TrafficMatrix::TrafficMatrix(std::size_t n, std::vector<double> row_major) : n_(n), rates_(std::move(row_major)) {
    if (rates_.size() != n_ * n_)
        fail(ErrorCode::DimensionMismatch, "traffic matrix needs " + std::to_string(n_ * n_) + " values, got " +
                                               std::to_string(rates_.size()));
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j < n_; ++j) set(i, j, rates_[i * n_ + j]);
}

void TrafficMatrix::set(std::size_t src, std::size_t dst, double rate) {
    if (src >= n_ || dst >= n_) fail(ErrorCode::InvalidArgument, "traffic matrix index out of range");
    if (!std::isfinite(rate) || rate < 0.0)
        fail(ErrorCode::InvalidArgument, "traffic rate must be finite and >= 0");
    if (src == dst && rate != 0.0) fail(ErrorCode::InvalidArgument, "traffic matrix diagonal must be zero");
    rates_[src * n_ + dst] = rate;
}

double TrafficMatrix::total() const { return std::accumulate(rates_.begin(), rates_.end(), 0.0); }

TrafficMatrix TrafficMatrix::scaled(double factor) const {
    if (!(factor >= 0.0) || !std::isfinite(factor)) fail(ErrorCode::InvalidArgument, "scale factor must be >= 0");
    TrafficMatrix out(n_);
    for (std::size_t k = 0; k < rates_.size(); ++k) out.rates_[k] = rates_[k] * factor;
    return out;
}

TrafficMatrix sample_traffic_matrix(std::size_t n, double rho_max, double capacity, Rng& rng) {
    if (n < 2) fail(ErrorCode::InvalidSize, "traffic matrix needs n >= 2");
    if (!(rho_max > 0.0)) fail(ErrorCode::InvalidArgument, "rho_max must be positive");
    const double max_rate = rho_max * capacity / static_cast<double>(n - 1);
    TrafficMatrix tm(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) tm.set(i, j, max_rate * uniform_open_closed(rng));
    return tm;
}

std::size_t hotspot_pair_count(std::size_t n, double hot_fraction) {
    const std::size_t pairs = n * (n - 1);
    auto k = static_cast<std::size_t>(std::ceil(hot_fraction * static_cast<double>(pairs) - 1e-9));
    return std::clamp<std::size_t>(k, 1, pairs);
}

TrafficMatrix sample_hotspot_matrix(std::size_t n, double rho_max, double capacity, const HotspotParams& params,
                                    Rng& rng, std::vector<char>* hot_mask) {
    if (n < 2) fail(ErrorCode::InvalidSize, "traffic matrix needs n >= 2");
    if (!(rho_max > 0.0)) fail(ErrorCode::InvalidArgument, "rho_max must be positive");
    if (!(params.hot_fraction > 0.0 && params.hot_fraction < 1.0))
        fail(ErrorCode::InvalidArgument, "hot_fraction must lie in (0, 1)");
    if (!(params.hot_share > 0.5 && params.hot_share < 1.0))
        fail(ErrorCode::InvalidArgument, "hot_share must lie in (0.5, 1)");

    const std::size_t pairs = n * (n - 1);
    const std::size_t hot = hotspot_pair_count(n, params.hot_fraction);
    const double uniform_max = rho_max * capacity / static_cast<double>(n - 1);

    // Partial Fisher-Yates over the off-diagonal pair indices picks the hot set.
    std::vector<std::size_t> order(pairs);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t k = 0; k < hot && k + 1 < pairs; ++k) {
        std::size_t pick = std::uniform_int_distribution<std::size_t>(k, pairs - 1)(rng);
        std::swap(order[k], order[pick]);
    }
    std::vector<char> is_hot(pairs, 0);
    for (std::size_t k = 0; k < hot; ++k) is_hot[order[k]] = 1;

    // E[U(0, a]] = a/2, so these bounds give an expected total of
    // pairs*uniform_max/2 split hot_share : (1 - hot_share).
    double hot_max = uniform_max, cold_max = uniform_max;
    if (hot < pairs) {
        hot_max = params.hot_share * static_cast<double>(pairs) * uniform_max / static_cast<double>(hot);
        cold_max = (1.0 - params.hot_share) * static_cast<double>(pairs) * uniform_max / static_cast<double>(pairs - hot);
    }

    if (hot_mask) hot_mask->assign(n * n, 0);
    TrafficMatrix tm(n);
    std::size_t p = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const bool h = is_hot[p++] != 0;
            tm.set(i, j, (h ? hot_max : cold_max) * uniform_open_closed(rng));
            if (hot_mask && h) (*hot_mask)[i * n + j] = 1;
        }
    }
    return tm;
}

std::string format_traffic_csv(const TrafficMatrix& tm) {
    std::string out;
    const std::size_t n = tm.node_count();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (j) out += ',';
            out += format_fixed(tm(i, j));
        }
        out += '\n';
    }
    return out;
}

TrafficMatrix parse_traffic_csv(const std::string& text) {
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 0;
    for (auto line : split_char(text, '\n')) {
        ++line_no;
        line = trim(line);
        if (line.empty() || line.front() == '#') continue;
        std::vector<double> row;
        for (auto cell : split_char(line, ','))
            row.push_back(parse_number<double>(cell, "traffic csv line " + std::to_string(line_no) + ": "));
        rows.push_back(std::move(row));
    }
    const std::size_t n = rows.size();
    std::vector<double> flat;
    for (std::size_t i = 0; i < n; ++i) {
        if (rows[i].size() != n)
            fail(ErrorCode::Parse, "traffic csv row " + std::to_string(i) + " has " + std::to_string(rows[i].size()) +
                                       " columns, expected " + std::to_string(n));
        flat.insert(flat.end(), rows[i].begin(), rows[i].end());
    }
    return TrafficMatrix(n, std::move(flat));
}

void save_traffic_csv(const TrafficMatrix& tm, const std::filesystem::path& path) {
    write_file(path, format_traffic_csv(tm));
}

TrafficMatrix load_traffic_csv(const std::filesystem::path& path) { return parse_traffic_csv(read_file(path)); }

std::string_view to_string(LengthDist d) {
    switch (d) {
    case LengthDist::Deterministic: return "deterministic";
    case LengthDist::Uniform: return "uniform";
    case LengthDist::Binomial: return "binomial";
    case LengthDist::Poisson: return "poisson";
    case LengthDist::Exponential: return "exponential";
    }
    return "?";
}

LengthDist parse_length_dist(std::string_view name) {
    for (auto d : {LengthDist::Deterministic, LengthDist::Uniform, LengthDist::Binomial, LengthDist::Poisson,
                   LengthDist::Exponential})
        if (to_string(d) == name) return d;
    fail(ErrorCode::InvalidArgument, "unknown packet length distribution '" + std::string(name) + "'");
}

void TrafficConfig::validate() const {
    if (!(mean_packet_bits > 0.0) || !std::isfinite(mean_packet_bits))
        fail(ErrorCode::InvalidArgument, "mean_packet_bits must be positive");
    if (!(rho_max > 0.0) || !std::isfinite(rho_max)) fail(ErrorCode::InvalidArgument, "rho_max must be positive");
    if (length_dist == LengthDist::Uniform && mean_packet_bits < 2.0)
        fail(ErrorCode::InvalidArgument, "uniform lengths need mean_packet_bits >= 2");
}

LengthSampler::LengthSampler(const TrafficConfig& cfg) : kind_(cfg.length_dist), mean_(cfg.mean_packet_bits) {
    cfg.validate();
    const double m = cfg.mean_packet_bits;
    switch (kind_) {
    case LengthDist::Deterministic:
        variance_ = 0.0;
        break;
    case LengthDist::Uniform: {
        // Integer-uniform on [m/2, 3m/2]; the default gives [500, 1500].
        auto lo = static_cast<std::int64_t>(std::llround(m / 2.0));
        auto hi = static_cast<std::int64_t>(std::llround(3.0 * m / 2.0));
        dist_ = std::uniform_int_distribution<std::int64_t>(lo, hi);
        mean_ = 0.5 * static_cast<double>(lo + hi);
        const double width = static_cast<double>(hi - lo + 1);
        variance_ = (width * width - 1.0) / 12.0;
        break;
    }
    case LengthDist::Binomial: {
        // Bin(2m, 1/2); the default gives Bin(2000, 0.5).
        auto trials = static_cast<std::int64_t>(std::llround(2.0 * m));
        dist_ = std::binomial_distribution<std::int64_t>(trials, 0.5);
        mean_ = 0.5 * static_cast<double>(trials);
        variance_ = 0.25 * static_cast<double>(trials);
        break;
    }
    case LengthDist::Poisson:
        dist_ = std::poisson_distribution<std::int64_t>(m);
        variance_ = m;
        break;
    case LengthDist::Exponential:
        dist_ = std::exponential_distribution<double>(1.0 / m);
        variance_ = m * m;
        break;
    }
}

double LengthSampler::operator()(Rng& rng) {
    return std::visit(
        [&](auto& d) -> double {
            using D = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<D, std::monostate>) {
                return mean_;
            } else if constexpr (std::is_same_v<D, std::exponential_distribution<double>>) {
                double v;
                do v = d(rng);
                while (!(v > 0.0));
                return v;
            } else {
                std::int64_t v;
                do v = d(rng);
                while (v <= 0);
                return static_cast<double>(v);
            }
        },
        dist_);
}

LengthSampler make_length_sampler(const TrafficConfig& cfg) { return LengthSampler(cfg); }

FlowProcess::FlowProcess(std::uint32_t src, std::uint32_t dst, double rate, const TrafficConfig& cfg,
                         std::uint64_t seed)
    : src_(src), dst_(dst), rate_(rate), packet_rate_(rate / cfg.mean_packet_bits), arrivals_(cfg.arrivals),
      lengths_(cfg), rng_(seed) {
    if (!(rate > 0.0) || !std::isfinite(rate)) fail(ErrorCode::InvalidArgument, "flow rate must be positive");
}

double FlowProcess::next_interarrival() {
    if (arrivals_ == ArrivalProcess::Deterministic) return 1.0 / packet_rate_;
    return std::exponential_distribution<double>(packet_rate_)(rng_);
}

} // namespace netdelay
