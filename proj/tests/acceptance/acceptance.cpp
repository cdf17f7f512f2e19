// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails. `--verbose` adds the success tables.

#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "krummp/krummp.hpp"
#include "oracles.hpp"

using namespace krummp;

namespace {

bool g_verbose = false;

struct Outcome
{
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

using RateTable = std::map<std::pair<int, int>, SuccessRate>; // (k, group)

RateTable table(const ExperimentResult& r)
{
    RateTable t;
    for (const auto& s : r.summary)
        t[{s.k, s.group}] = s;
    return t;
}

void print_table(const std::string& title, const RateTable& t)
{
    if (!g_verbose)
        return;
    std::cout << "    " << title << "  (k, group): d_max-success / d_avg-success\n";
    for (const auto& [key, s] : t)
        std::cout << fmt::format("      k={} l={}: {:.4f} / {:.4f}\n", key.first, key.second, s.d_max_success,
                                 s.d_avg_success);
}

ExperimentResult experiment(double c_mult, bool noisy)
{
    ExperimentConfig c;
    c.c_mult = c_mult;
    if (noisy)
        c.noise = NoiseSpec::gaussian(5e-5, 2024);
    return run_experiment(c);
}

// ---------------------------------------------------------------------------

Outcome noiseless_exactness()
{
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(derive_seed({0xA1}));
    std::uniform_int_distribution<int> offset(0, 50);
    double worst_d = 0.0, worst_u = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const int k = 1 + trial % 5;
        const int m = k + 2;
        const auto t = oracle::separated_locations(rng, k, 0.05);
        const auto u = oracle::random_amplitudes(rng, k, 1.0, 10.0);
        const std::int64_t s0 = offset(rng);
        const auto est = mmp_estimate(FourierWindow(s0, m, oracle::exp_window(t, u, s0, m)), k);
        const auto match = match_spikes(SpikeGroup(t, u, 1.0), est);
        worst_d = std::max(worst_d, match.d_max);
        for (double e : match.amplitude_error)
            worst_u = std::max(worst_u, e);
    }
    const double dt = seconds_since(t0);
    return {worst_d <= 1e-8 && worst_u <= 1e-6 && dt < 5.0,
            fmt::format("200 instances, max d_w {:.2e} (<= 1e-8), max |du| {:.2e} (<= 1e-6), {:.2f} s (< 5 s)", worst_d,
                        worst_u, dt)};
}

Outcome single_kernel_noise()
{
    const auto t0 = std::chrono::steady_clock::now();
    const double delta = 0.2, eps = 0.01;
    const int m = static_cast<int>(std::floor(2.0 / (delta - 2.0 * eps))) + 2;
    std::mt19937_64 rng(derive_seed({0xA2}));
    std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
    std::uniform_int_distribution<int> offset(0, 50);
    int within = 0, spikes = 0;
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int k = 1 + trial % 4;
        const auto t = oracle::separated_locations(rng, k, delta);
        const auto u = oracle::random_amplitudes(rng, k, 3.0, 10.0);
        const SpikeGroup truth(t, u, 1.0);
        theory::BoundContext ctx;
        ctx.u_max = truth.u_max();
        ctx.u_min = truth.u_min();
        ctx.k = k;
        const double eta = theory::corollary1_noise_bound(ctx, eps);
        const std::int64_t s0 = offset(rng);
        auto w = oracle::exp_window(t, u, s0, m);
        for (auto& x : w)
            x += std::polar(eta, phase(rng));
        const auto match = match_spikes(truth, mmp_estimate(FourierWindow(s0, m, w), k));
        for (double d : match.location_error) {
            ++spikes;
            within += d <= eps;
            worst = std::max(worst, d);
        }
    }
    const double dt = seconds_since(t0);
    return {within == spikes && dt < 30.0,
            fmt::format("m = {}, {}/{} spikes within eps = {}, worst d_w {:.2e}, {:.2f} s (< 30 s)", m, within, spikes,
                        eps, worst, dt)};
}

struct Floors
{
    double early = 0.99;      // l = 1, 2, d_max
    double max_k23 = 0.77;    // l = 3, 4, K in {2, 3}
    double avg_k23 = 0.88;
    double avg_k4 = 0.81;
    double avg_k5 = 0.68;
};

Outcome reproduction(const RateTable& t)
{
    const Floors f;
    std::vector<std::string> misses;
    double min_early = 1.0;
    for (const auto& [key, s] : t) {
        const auto [k, l] = key;
        auto need = [&](double have, double floor, const char* what) {
            if (have < floor)
                misses.push_back(fmt::format("k={} l={} {} {:.3f}<{:.2f}", k, l, what, have, floor));
        };
        if (l <= 2) {
            need(s.d_max_success, f.early, "d_max");
            min_early = std::min(min_early, s.d_max_success);
        } else if (k <= 3) {
            need(s.d_max_success, f.max_k23, "d_max");
            need(s.d_avg_success, f.avg_k23, "d_avg");
        } else if (k == 4) {
            need(s.d_avg_success, f.avg_k4, "d_avg");
        } else {
            need(s.d_avg_success, f.avg_k5, "d_avg");
        }
    }
    std::string detail = fmt::format("l=1,2 min d_max-success {:.3f}", min_early);
    if (misses.empty()) {
        detail += ", all floors met";
    } else {
        detail += fmt::format(", {} floor(s) missed:", misses.size());
        for (std::size_t i = 0; i < std::min<std::size_t>(misses.size(), 4); ++i)
            detail += " " + misses[i];
        if (misses.size() > 4)
            detail += " ...";
    }
    return {misses.empty(), detail};
}

Outcome contrast(const RateTable& c1_clean, const RateTable& c1_noisy, const RateTable& c06_noisy)
{
    double min_clean = 1.0;
    for (const auto& [key, s] : c1_clean)
        min_clean = std::min(min_clean, s.d_max_success);
    double min_gap = 1.0;
    for (const auto& [key, s] : c1_noisy)
        if (key.second >= 2)
            min_gap = std::min(min_gap, c06_noisy.at(key).d_max_success - s.d_max_success);
    return {min_clean >= 0.99 && min_gap >= 0.30,
            fmt::format("C=1 noiseless min d_max-success {:.3f} (>= 0.99); l=2..4 gap C=0.6 noisy - C=1 noisy "
                        "min {:+.3f} (>= +0.30)",
                        min_clean, min_gap)};
}

Outcome vandermonde_bound()
{
    std::mt19937_64 rng(derive_seed({0xA6}));
    std::uniform_real_distribution<double> target(0.04, 0.3);
    std::uniform_int_distribution<int> extra(0, 12);
    int ok = 0;
    double worst_slack = INFINITY;
    for (int trial = 0; trial < 1000; ++trial) {
        const double want = target(rng);
        const int k = std::max(1, std::min(1 + trial % 5, static_cast<int>(0.7 / want)));
        const auto t = oracle::separated_locations(rng, k, want);
        const SpikeGroup g(t, std::vector<cplx>(t.size(), 1.0), 1.0);
        const double delta = g.min_separation();
        const int m = static_cast<int>(std::floor(1.0 / delta + 1.0)) + 1 + extra(rng);
        std::vector<cplx> nodes;
        for (double x : t)
            nodes.push_back(std::polar(1.0, -2.0 * M_PI * x));
        const auto s = vandermonde_extremal_singular_values(nodes, m);
        const double hi = m + 1.0 / delta - 1.0, lo = m - 1.0 / delta - 1.0;
        const double smax2 = s.sigma_max * s.sigma_max, smin2 = s.sigma_min * s.sigma_min;
        ok += smax2 <= hi + 1e-9 && smin2 >= lo - 1e-9;
        worst_slack = std::min({worst_slack, hi - smax2, smin2 - lo});
    }
    return {ok == 1000, fmt::format("{}/1000 node sets inside the bracket, tightest slack {:.3e}", ok, worst_slack)};
}

Outcome metric_suite()
{
    constexpr int n = 100000;
    constexpr double slack = 1e-12;
    std::mt19937_64 rng(derive_seed({0xA7}));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> freq(-1000, 1000);
    std::normal_distribution<double> normal(0.0, 3.0);
    auto circle = [](double t) { return std::polar(1.0, 2.0 * M_PI * t); };

    int v45 = 0, v44 = 0, vb3 = 0, vb4 = 0, vb1 = 0;
    for (int i = 0; i < n; ++i) {
        const double t1 = unit(rng), t2 = unit(rng);
        const double dw = wrap_distance(t1, t2);
        const double chi = chordal_distance(circle(t1), circle(t2));
        v45 += !(chi / M_PI <= dw + slack && dw <= chi / 2.0 + slack);
        const double chord = std::abs(circle(t1) - circle(t2));
        v44 += !(chord / (2.0 * M_PI) <= dw + slack && dw <= chord / 4.0 + slack);
    }
    for (int i = 0; i < n; ++i) {
        const double t1 = unit(rng), t2 = unit(rng);
        const int k = freq(rng);
        const double dw = wrap_distance(t1, t2);
        const double lhs = std::abs(circle(k * t1) - circle(k * t2));
        vb3 += !(lhs <= 2.0 * std::abs(k) * M_PI * dw + slack);
    }
    for (int i = 0; i < n; ++i) {
        const double t1 = unit(rng), t2 = unit(rng);
        const int k = freq(rng);
        const cplx u1(normal(rng), normal(rng)), u2(normal(rng), normal(rng));
        const double dw = wrap_distance(t1, t2);
        const double lhs = std::abs(u1 * circle(k * t1) - u2 * circle(k * t2));
        const double rhs = 2.0 * M_PI * std::abs(u1) * std::abs(k) * dw + std::abs(u1 - u2);
        vb4 += !(lhs <= rhs + slack * (1.0 + rhs));
    }
    std::uniform_real_distribution<double> log_radius(-0.6, 0.6);
    std::uniform_real_distribution<double> turn(-0.1, 0.1);
    for (int drawn = 0; drawn < n;) {
        const double t1 = unit(rng);
        const cplx a1 = circle(t1);
        const cplx a2 = a1 * std::polar(std::exp(log_radius(rng)), 2.0 * M_PI * turn(rng));
        const double chi = chordal_distance(a1, a2);
        if (chi > 0.25)
            continue;
        ++drawn;
        const double t2 = wrap_unit(std::arg(a2) / (2.0 * M_PI));
        vb1 += !(wrap_distance(t1, t2) <= theory::kSingleKernelConstant * chi + slack);
    }
    const int total = v45 + v44 + vb3 + vb4 + vb1;
    return {total == 0, fmt::format("1e5 samples each; violations: sandwich(chi) {}, sandwich(|a1-a2|) {}, "
                                    "phase Lipschitz {}, weighted phase {}, off-circle {}",
                                    v45, v44, vb3, vb4, vb1)};
}

Outcome tail_bound()
{
    std::mt19937_64 rng(derive_seed({0xA8}));
    std::uniform_real_distribution<double> mu1(0.005, 0.05);
    std::uniform_real_distribution<double> ratio(1.3, 3.0);
    std::uniform_real_distribution<double> cmult(0.3, 1.5);
    int ok = 0;
    double worst_ratio = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int k = 1 + trial % 4;
        const double a = mu1(rng), b = a * ratio(rng);
        const auto t1 = oracle::separated_locations(rng, k, 0.1), t2 = oracle::separated_locations(rng, k, 0.1);
        const MixtureModel model({SpikeGroup(t1, oracle::random_amplitudes(rng, k, 3.0, 10.0), a),
                                  SpikeGroup(t2, oracle::random_amplitudes(rng, k, 3.0, 10.0), b)});
        const auto plans = choose_plans(model.scales(), {0.1, 0.1}, k, 0.01, cmult(rng), 2);
        const auto& p = plans[0];
        const double bound = theory::tail_perturbation_bound(model.scales(), 1, p.offset, p.half_width, k, model.u_max());
        double sup = 0.0;
        for (cplx e : oracle::stage1_tail(model, p.offset, p.half_width))
            sup = std::max(sup, std::abs(e));
        // K = 1 attains the bound at i = -m, so compare with rounding slack
        ok += sup <= bound * (1.0 + 1e-12);
        worst_ratio = std::max(worst_ratio, sup / bound);
    }
    return {ok == 100, fmt::format("{}/100 L=2 configurations within the bound, max measured/bound {:.15f}", ok,
                                   worst_ratio)};
}

Outcome determinism()
{
    ExperimentConfig c;
    c.k_values = {2, 5};
    c.trials = 40;
    c.noise = NoiseSpec::gaussian(5e-5, 9);
    auto csv = [&](unsigned threads) {
        std::ostringstream os;
        write_csv(os, run_experiment(c, threads).records);
        return os.str();
    };
    const auto a = csv(1), b = csv(1), p = csv(4);
    return {a == b && a == p,
            fmt::format("two sequential runs {}, 4-thread run {} ({} bytes)", a == b ? "identical" : "DIFFER",
                        a == p ? "identical" : "DIFFERS", a.size())};
}

} // namespace

int main(int argc, char** argv)
{
    for (int i = 1; i < argc; ++i)
        if (std::strcmp(argv[i], "--verbose") == 0)
            g_verbose = true;

    int failures = 0;
    auto report = [&](int id, const char* name, const Outcome& o) {
        std::cout << fmt::format("[{}] {}. {}: {}\n", o.pass ? "PASS" : "FAIL", id, name, o.detail) << std::flush;
        failures += !o.pass;
    };
    auto guarded = [](const std::function<Outcome()>& f) {
        try {
            return f();
        } catch (const std::exception& e) {
            return Outcome{false, std::string("exception: ") + e.what()};
        }
    };

    report(1, "noiseless exactness", guarded(noiseless_exactness));
    report(2, "single-kernel noise containment", guarded(single_kernel_noise));

    const auto t0 = std::chrono::steady_clock::now();
    const auto clean06 = table(experiment(0.6, false));
    print_table("C=0.6 noiseless", clean06);
    report(3, "experiment, noiseless, C=0.6",
           guarded([&] { return reproduction(clean06); }));
    const auto noisy06 = table(experiment(0.6, true));
    print_table("C=0.6 sigma=5e-5", noisy06);
    report(4, "experiment, sigma=5e-5, C=0.6", guarded([&] { return reproduction(noisy06); }));
    const auto clean1 = table(experiment(1.0, false));
    const auto noisy1 = table(experiment(1.0, true));
    print_table("C=1 noiseless", clean1);
    print_table("C=1 sigma=5e-5", noisy1);
    report(5, "contrast, C=1 vs C=0.6", guarded([&] { return contrast(clean1, noisy1, noisy06); }));
    if (g_verbose)
        std::cout << fmt::format("    experiments took {:.1f} s\n", seconds_since(t0));

    report(6, "Vandermonde singular value bracket", guarded(vandermonde_bound));
    report(7, "metric inequalities", guarded(metric_suite));
    report(8, "stage-1 tail bound", guarded(tail_bound));
    report(9, "determinism", guarded(determinism));

    std::cout << fmt::format("{} of 9 criteria passed\n", 9 - failures);
    return failures == 0 ? 0 : 1;
}
