#include "netdelay/experiments.hpp"
#include "netdelay/simulator.hpp"
#include "netdelay/text.hpp"

#include <cmath>
#include <cstdio>

namespace netdelay {

bool OracleReport::all_passed() const {
    for (const auto& c : cells)
        if (!c.passed) return false;
    return !cells.empty();
}

OracleReport oracle_check(double horizon, std::uint64_t seed) {
    const Topology link(2, {{0, 1, kDefaultCapacity}, {1, 0, kDefaultCapacity}}, "single-link");
    const RoutingTable table = shortest_path_routing(link);
    OracleReport report;
    for (LengthDist dist : {LengthDist::Deterministic, LengthDist::Uniform, LengthDist::Binomial, LengthDist::Poisson,
                            LengthDist::Exponential}) {
        for (double rho : {0.1, 0.3, 0.5, 0.7, 0.9}) {
            TrafficConfig cfg;
            cfg.length_dist = dist;
            cfg.rho_max = rho;
            LengthSampler lengths(cfg);
            const double capacity = kDefaultCapacity;
            TrafficMatrix tm(2);
            tm.set(0, 1, rho * capacity);

            auto sim = simulate(link, table, tm, cfg, horizon, seed);
            OracleCell cell;
            cell.dist = dist;
            cell.rho = rho;
            cell.simulated = sim.delays(0, 1);
            cell.packets = sim.delays.count(0, 1);
            const double arrival_rate = rho * capacity / cfg.mean_packet_bits;
            cell.expected = pk_sojourn(arrival_rate, lengths.mean() / capacity, lengths.variance() / (capacity * capacity));
            cell.deviation = std::abs(cell.simulated - cell.expected) / cell.expected;
            cell.tolerance = rho > 0.8 ? 0.05 : 0.03;
            cell.passed = cell.deviation < cell.tolerance;
            report.cells.push_back(cell);
        }
    }
    return report;
}

std::string format_oracle_report(const OracleReport& report) {
    std::string out = "dist,rho,simulated,expected,deviation,tolerance,packets,status\n";
    char buf[256];
    for (const auto& c : report.cells) {
        std::snprintf(buf, sizeof buf, "%s,%.1f,%.6f,%.6f,%.4f,%.2f,%llu,%s\n", std::string(to_string(c.dist)).c_str(),
                      c.rho, c.simulated, c.expected, c.deviation, c.tolerance,
                      static_cast<unsigned long long>(c.packets), c.passed ? "PASS" : "FAIL");
        out += buf;
    }
    return out;
}

} // namespace netdelay
