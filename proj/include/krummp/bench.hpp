#pragma once

///
/// \file bench.hpp
///
/// Monte Carlo harness: random instances under a minimum separation
/// constraint, one KrUMMP run per trial, greedy matching per group and
/// success-rate summaries. Trials draw from streams keyed by (seed, trial_id),
/// so results do not depend on execution order or thread count.
///

#include <algorithm>
#include <atomic>
#include <exception>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <fmt/format.h>

#include "krummp/error.hpp"
#include "krummp/matching.hpp"
#include "krummp/rng.hpp"
#include "krummp/signal.hpp"
#include "krummp/unmix.hpp"

namespace krummp {

/// A group counts as recovered when its error statistic is at most this.
inline constexpr double kSuccessThreshold = 0.05;

struct ExperimentConfig
{
    int l_total = 4;
    std::vector<int> k_values{2, 3, 4, 5};
    double mu_last = 0.01;
    double mu_ratio = 0.5;
    double delta = 0.05;
    int m_pad = 5;
    double eps_last = 0.01;
    double c_mult = 0.6;
    int trials = 400;
    NoiseSpec noise{};
    double u_min = 3.0;
    double u_max = 10.0;
    std::uint64_t seed = 1;
    // constants used only by the bound evaluators
    double bound_c = 0.5;
    double bound_c_tilde = 2.0;

    void validate() const
    {
        if (l_total < 1)
            throw InvalidArgument("config: l_total must be >= 1");
        if (k_values.empty())
            throw InvalidArgument("config: k_values must be non-empty");
        for (int k : k_values) {
            if (k < 1)
                throw InvalidArgument("config: every k must be >= 1");
            if (!(delta * k < 1.0))
                throw InvalidArgument("config: delta * k must be < 1");
        }
        if (trials < 1)
            throw InvalidArgument("config: trials must be >= 1");
        if (!(mu_last > 0.0))
            throw InvalidArgument("config: mu_last must be positive");
        if (!(mu_ratio > 0.0 && mu_ratio < 1.0))
            throw InvalidArgument("config: mu_ratio must lie in (0,1)");
        if (!(delta > 0.0 && delta < 0.5))
            throw InvalidArgument("config: delta must lie in (0, 1/2)");
        if (!(u_min > 0.0 && u_min <= u_max))
            throw InvalidArgument("config: need 0 < u_min <= u_max");
        if (!(eps_last > 0.0 && eps_last < 1.0))
            throw InvalidArgument("config: eps_last must lie in (0,1)");
        if (!(c_mult > 0.0))
            throw InvalidArgument("config: c_mult must be positive");
        if (m_pad < 0)
            throw InvalidArgument("config: m_pad must be non-negative");
        noise.validate();
    }

    /// mu_L = mu_last, mu_l = mu_{l+1} * mu_ratio.
    std::vector<double> scales() const
    {
        std::vector<double> mu(static_cast<std::size_t>(l_total));
        double m = mu_last;
        for (auto i = mu.size(); i-- > 0;) {
            mu[i] = m;
            m *= mu_ratio;
        }
        return mu;
    }

    std::vector<StagePlan> plans(int k) const
    {
        return choose_plans(scales(), std::vector<double>(static_cast<std::size_t>(l_total), delta), k,
                            eps_last, c_mult, m_pad);
    }
};

struct GroupOutcome
{
    double delta_l = 0.0; ///< realized minimum separation
    double d_max = std::numeric_limits<double>::quiet_NaN();
    double d_avg = std::numeric_limits<double>::quiet_NaN();
    double amp_err_max = std::numeric_limits<double>::quiet_NaN();
    bool stage_failed = false;
};

struct TrialRecord
{
    int trial_id = 0;
    int k = 0;
    std::vector<GroupOutcome> per_group;

    std::vector<bool> stage_failures() const
    {
        std::vector<bool> f;
        for (const auto& g : per_group)
            f.push_back(g.stage_failed);
        return f;
    }
};

struct SuccessRate
{
    int k = 0;
    int group = 0;
    int trials = 0;
    double d_max_success = 0.0;
    double d_avg_success = 0.0;
};

struct ExperimentResult
{
    ExperimentConfig config;
    std::vector<TrialRecord> records;
    std::vector<SuccessRate> summary;
};

///
/// Draws one instance: per group, amplitudes |u| ~ U[u_min, u_max] with a
/// random sign, and locations resampled until every pairwise wrap-around
/// distance is at least delta. Groups are independent of each other.
///
inline MixtureModel generate_instance(const ExperimentConfig& config, int k, Stream& rng)
{
    if (k < 1)
        throw InvalidArgument("generate_instance: k must be >= 1");
    if (!(config.delta * k < 1.0))
        throw InvalidArgument("generate_instance: delta * k must be < 1");
    constexpr long kMaxAttempts = 1'000'000;

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> magnitude(config.u_min, config.u_max);
    std::bernoulli_distribution negative(0.5);

    const auto mu = config.scales();
    std::vector<SpikeGroup> groups;
    for (int l = 0; l < config.l_total; ++l) {
        std::vector<double> t(static_cast<std::size_t>(k));
        bool ok = false;
        for (long attempt = 0; attempt < kMaxAttempts && !ok; ++attempt) {
            for (auto& x : t)
                x = unit(rng);
            ok = true;
            for (std::size_t i = 0; i < t.size() && ok; ++i)
                for (std::size_t j = i + 1; j < t.size() && ok; ++j)
                    ok = wrap_distance(t[i], t[j]) >= config.delta;
        }
        if (!ok)
            throw Infeasible("generate_instance: could not place spikes with the requested separation");

        std::vector<cplx> u(static_cast<std::size_t>(k));
        for (auto& a : u) {
            const double v = magnitude(rng);
            a = negative(rng) ? -v : v;
        }
        groups.emplace_back(std::move(t), std::move(u), mu[static_cast<std::size_t>(l)]);
    }
    return MixtureModel(std::move(groups));
}

inline Stream instance_stream(const ExperimentConfig& config, int trial_id)
{
    return make_stream({config.seed, static_cast<std::uint64_t>(trial_id), 0x1ULL});
}

inline NoiseSpec trial_noise(const ExperimentConfig& config, int trial_id)
{
    NoiseSpec n = config.noise;
    n.seed = derive_seed({config.noise.seed, config.seed, static_cast<std::uint64_t>(trial_id), 0x2ULL});
    return n;
}

inline TrialRecord run_trial(const ExperimentConfig& config, int k, int trial_id)
{
    auto rng = instance_stream(config, trial_id);
    const auto model = generate_instance(config, k, rng);
    const auto report = run_krummp(model, config.plans(k), k, trial_noise(config, trial_id));

    TrialRecord rec;
    rec.trial_id = trial_id;
    rec.k = k;
    for (int l = 0; l < config.l_total; ++l) {
        GroupOutcome g;
        const auto& truth = model.group(static_cast<std::size_t>(l));
        g.delta_l = truth.min_separation();
        if (static_cast<std::size_t>(l) < report.estimates.size()) {
            const auto m = match_spikes(truth, report.estimates[static_cast<std::size_t>(l)]);
            g.d_max = m.d_max;
            g.d_avg = m.d_avg;
            g.amp_err_max = *std::max_element(m.amplitude_error.begin(), m.amplitude_error.end());
        } else {
            g.stage_failed = true;
        }
        rec.per_group.push_back(g);
    }
    return rec;
}

inline bool succeeded(double err) { return !std::isnan(err) && err <= kSuccessThreshold; }

inline std::vector<SuccessRate> summarize(const ExperimentConfig& config,
                                          const std::vector<TrialRecord>& records)
{
    std::vector<SuccessRate> out;
    for (int k : config.k_values) {
        for (int l = 1; l <= config.l_total; ++l) {
            SuccessRate s{k, l, 0, 0.0, 0.0};
            int max_ok = 0, avg_ok = 0;
            for (const auto& r : records) {
                if (r.k != k)
                    continue;
                const auto& g = r.per_group[static_cast<std::size_t>(l - 1)];
                ++s.trials;
                max_ok += succeeded(g.d_max) ? 1 : 0;
                avg_ok += succeeded(g.d_avg) ? 1 : 0;
            }
            if (s.trials > 0) {
                s.d_max_success = static_cast<double>(max_ok) / s.trials;
                s.d_avg_success = static_cast<double>(avg_ok) / s.trials;
            }
            out.push_back(s);
        }
    }
    return out;
}

///
/// Runs config.trials trials for every k in config.k_values. Trial ids run
/// consecutively over (k_values order, trial). threads = 0 uses the hardware
/// concurrency.
///
inline ExperimentResult run_experiment(const ExperimentConfig& config, unsigned threads = 0)
{
    config.validate();
    const int total = config.trials * static_cast<int>(config.k_values.size());
    std::vector<TrialRecord> records(static_cast<std::size_t>(total));

    auto work = [&](int id) {
        const int k = config.k_values[static_cast<std::size_t>(id / config.trials)];
        records[static_cast<std::size_t>(id)] = run_trial(config, k, id);
    };

    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(total));
    if (threads <= 1) {
        for (int id = 0; id < total; ++id)
            work(id);
    } else {
        std::atomic<int> next{0};
        std::vector<std::exception_ptr> errors(threads);
        {
            std::vector<std::jthread> pool;
            for (unsigned w = 0; w < threads; ++w) {
                pool.emplace_back([&, w] {
                    try {
                        for (int id = next++; id < total; id = next++)
                            work(id);
                    } catch (...) {
                        errors[w] = std::current_exception();
                        next = total;
                    }
                });
            }
        }
        for (auto& e : errors)
            if (e)
                std::rethrow_exception(e);
    }

    ExperimentResult result{config, std::move(records), {}};
    result.summary = summarize(config, result.records);
    return result;
}

// ---------------------------------------------------------------------------
// CSV

inline constexpr const char* kCsvHeader = "trial_id,k,group,delta_l,d_max,d_avg,amp_err_max,stage_failed";

inline void write_csv(std::ostream& os, const std::vector<TrialRecord>& records)
{
    os << kCsvHeader << '\n';
    for (const auto& r : records)
        for (std::size_t l = 0; l < r.per_group.size(); ++l) {
            const auto& g = r.per_group[l];
            os << fmt::format("{},{},{},{:.17g},{:.17g},{:.17g},{:.17g},{}\n", r.trial_id, r.k, l + 1,
                              g.delta_l, g.d_max, g.d_avg, g.amp_err_max, g.stage_failed ? 1 : 0);
        }
}

/// Inverse of write_csv. Rows of one trial must be contiguous and ordered by group.
inline std::vector<TrialRecord> read_csv(std::istream& is)
{
    std::string line;
    if (!std::getline(is, line) || line != kCsvHeader)
        throw InvalidArgument("read_csv: missing or unexpected header");
    std::vector<TrialRecord> out;
    int line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty())
            continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');)
            cells.push_back(cell);
        if (cells.size() != 8)
            throw InvalidArgument(fmt::format("read_csv: line {} has {} fields", line_no, cells.size()));
        try {
            const int trial = std::stoi(cells[0]);
            const int k = std::stoi(cells[1]);
            const int group = std::stoi(cells[2]);
            GroupOutcome g;
            g.delta_l = std::strtod(cells[3].c_str(), nullptr);
            g.d_max = std::strtod(cells[4].c_str(), nullptr);
            g.d_avg = std::strtod(cells[5].c_str(), nullptr);
            g.amp_err_max = std::strtod(cells[6].c_str(), nullptr);
            g.stage_failed = cells[7] == "1";
            if (out.empty() || out.back().trial_id != trial) {
                out.push_back(TrialRecord{trial, k, {}});
            }
            if (static_cast<std::size_t>(group) != out.back().per_group.size() + 1)
                throw InvalidArgument(fmt::format("read_csv: line {} breaks group order", line_no));
            out.back().per_group.push_back(g);
        } catch (const std::logic_error&) {
            throw InvalidArgument(fmt::format("read_csv: malformed number on line {}", line_no));
        }
    }
    return out;
}

} // namespace krummp
