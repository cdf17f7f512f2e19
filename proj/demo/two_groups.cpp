// Two Gaussian-blurred spike groups, sampled in the Fourier domain and
// separated again with KrUMMP.

#include <iostream>

#include <fmt/format.h>

#include "krummp/krummp.hpp"

int main()
{
    using namespace krummp;

    const MixtureModel model({
        SpikeGroup({0.12, 0.48, 0.81}, {4.0, -6.5, 3.2}, 0.005),
        SpikeGroup({0.25, 0.55, 0.90}, {-7.0, 5.0, 9.1}, 0.01),
    });

    const auto plans = choose_plans(model.scales(), {0.05, 0.05}, 3, 0.01, 0.6, 5);
    const auto report = run_krummp(model, plans, 3, NoiseSpec::none());
    if (report.partial()) {
        std::cerr << "stage " << report.failure->stage << " failed: " << report.failure->message << '\n';
        return 1;
    }

    for (std::size_t l = 0; l < report.estimates.size(); ++l) {
        const auto& plan = plans[l];
        fmt::print("group {}  (s = {}, m = {})\n", plan.group_index, plan.offset, plan.half_width);
        const auto match = match_spikes(model.group(l), report.estimates[l]);
        for (std::size_t j = 0; j < model.k(); ++j) {
            const auto e = match.permutation[j];
            fmt::print("  t = {:.4f}  t_hat = {:.6f}   u = {:+.2f}  u_hat = {:+.4f}{:+.4f}i\n",
                       model.group(l).locations()[j], report.estimates[l].locations[e],
                       model.group(l).amplitudes()[j].real(), report.estimates[l].amplitudes[e].real(),
                       report.estimates[l].amplitudes[e].imag());
        }
        fmt::print("  d_max = {:.2e}\n", match.d_max);
    }
}
