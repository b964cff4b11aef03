// Compares the OpenMP kernels against their serial reference on the
// data-parallel hot spots: scenario generation and Monte-Carlo power flow.
// Results must be bit-identical; only the wall time may differ.

#include <chrono>
#include <cstdio>
#include <string>

#include "flexopf/flexarea.hpp"
#include "flexopf/netmodel.hpp"
#include "flexopf/pools.hpp"
#include "flexopf/scenario.hpp"
#include "flexopf/validate.hpp"

using namespace flexopf;

namespace {

double seconds(const std::function<void()> &fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    return dt.count();
}

} // namespace

int main(int argc, char **argv) {
    std::string network_path = "data/network34.json";
    std::string pools_path = "data/pools34.json";
    if (argc >= 3) {
        network_path = argv[1];
        pools_path = argv[2];
    }

    const NetworkModel net = load_network(network_path);
    const std::vector<ChargingPoolSpec> pools = load_pools(pools_path, net);

    std::printf("%-28s %12s %12s %9s %s\n", "kernel", "serial [s]", "openmp [s]", "speedup",
                "identical");

    // Scenario generation.
    ScenarioSet serial_set, omp_set;
    const double t_ser = seconds([&] {
        serial_set = generate_scenarios(pools, 2000, 42, net.periods, net.delta_t,
                                        ExecMode::Serial);
    });
    const double t_omp = seconds([&] {
        omp_set =
            generate_scenarios(pools, 2000, 42, net.periods, net.delta_t, ExecMode::OpenMP);
    });
    std::printf("%-28s %12.4f %12.4f %8.2fx %s\n", "generate_scenarios(2000)", t_ser, t_omp,
                t_ser / t_omp, serial_set.to_csv() == omp_set.to_csv() ? "yes" : "NO");

    // Monte-Carlo probabilistic power flow over degenerate full-band areas.
    std::vector<FlexibilityArea> areas;
    for (std::size_t s = 0; s < pools.size(); ++s) {
        for (int t = 0; t < net.periods; ++t) {
            FlexibilityArea a;
            a.pool = static_cast<int>(s);
            a.period = t;
            a.beta = 1.0;
            a.lower_pu = 0.0;
            a.upper_pu = pools[s].p_max[t];
            a.lower_kw = 0.0;
            a.upper_kw = net.pu_to_kw(a.upper_pu);
            areas.push_back(a);
        }
    }
    ValidationReport ser_rep, omp_rep;
    const double v_ser =
        seconds([&] { ser_rep = mc_validate(net, pools, areas, 2000, 7, ExecMode::Serial); });
    const double v_omp =
        seconds([&] { omp_rep = mc_validate(net, pools, areas, 2000, 7, ExecMode::OpenMP); });
    std::printf("%-28s %12.4f %12.4f %8.2fx %s\n", "mc_validate(2000 sims)", v_ser, v_omp,
                v_ser / v_omp, ser_rep.to_json() == omp_rep.to_json() ? "yes" : "NO");

    return 0;
}
