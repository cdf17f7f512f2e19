#pragma once

#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include "krummp/error.hpp"
#include "krummp/metrics.hpp"
#include "krummp/signal.hpp"

namespace krummp {

struct MatchResult
{
    /// permutation[j] = index of the estimated spike matched to true spike j
    std::vector<std::size_t> permutation;
    std::vector<double> location_error;
    std::vector<double> amplitude_error;
    double d_max = 0.0;
    double d_avg = 0.0;
};

///
/// Greedy matching: repeatedly pair the (truth, estimate) couple with the
/// smallest wrap-around distance among those still unmatched. Ties go to the
/// lowest truth index, then the lowest estimate index.
///
inline MatchResult match_spikes(const SpikeGroup& truth, const SpikeEstimate& estimate)
{
    const std::size_t k = truth.size();
    if (estimate.size() != k || estimate.amplitudes.size() != k)
        throw InvalidArgument("match_spikes: truth and estimate differ in size");

    std::vector<double> dist(k * k);
    for (std::size_t j = 0; j < k; ++j)
        for (std::size_t e = 0; e < k; ++e)
            dist[j * k + e] = wrap_distance(truth.locations()[j], estimate.locations[e]);

    MatchResult r;
    r.permutation.assign(k, 0);
    std::vector<bool> truth_used(k, false), est_used(k, false);
    for (std::size_t round = 0; round < k; ++round) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t bj = 0, be = 0;
        for (std::size_t j = 0; j < k; ++j) {
            if (truth_used[j])
                continue;
            for (std::size_t e = 0; e < k; ++e) {
                if (!est_used[e] && dist[j * k + e] < best) {
                    best = dist[j * k + e];
                    bj = j;
                    be = e;
                }
            }
        }
        truth_used[bj] = est_used[be] = true;
        r.permutation[bj] = be;
    }

    r.location_error.resize(k);
    r.amplitude_error.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
        const auto e = r.permutation[j];
        r.location_error[j] = dist[j * k + e];
        r.amplitude_error[j] = std::abs(estimate.amplitudes[e] - truth.amplitudes()[j]);
        r.d_max = std::max(r.d_max, r.location_error[j]);
    }
    r.d_avg = std::accumulate(r.location_error.begin(), r.location_error.end(), 0.0) /
              static_cast<double>(k);
    return r;
}

} // namespace krummp
