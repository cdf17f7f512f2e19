#pragma once

///
/// \file signal.hpp
///
/// Spike-train mixtures under Gaussian blur, observed through their Fourier
/// transform
///
///   f(s) = sum_l gbar_l(s) sum_j u_{l,j} exp(i 2 pi s t_{l,j}),
///   gbar_l(s) = sqrt(2 pi) mu_l exp(-2 pi^2 s^2 mu_l^2).
///
/// Everything here is a pure function of its inputs; observation noise is
/// realized from explicitly seeded streams.
///

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "krummp/error.hpp"
#include "krummp/metrics.hpp"
#include "krummp/rng.hpp"

namespace krummp {

using cplx = std::complex<double>;

/// exp(i 2 pi x), with x reduced modulo 1 first so large frequencies keep
/// their phase accuracy.
inline cplx unit_phase(double x)
{
    return std::polar(1.0, 2.0 * std::numbers::pi * wrap_unit(x));
}

inline double gaussian_ft(double scale, double frequency)
{
    if (!std::isfinite(scale) || !std::isfinite(frequency))
        throw InvalidArgument("gaussian_ft: non-finite input");
    if (!(scale > 0.0))
        throw InvalidArgument("gaussian_ft: scale must be positive");
    constexpr double pi = std::numbers::pi;
    const double x = pi * frequency * scale;
    return std::sqrt(2.0 * pi) * scale * std::exp(-2.0 * x * x);
}

/// ln gbar(s); stays finite far past the point where gbar underflows.
inline double log_gaussian_ft(double scale, double frequency)
{
    if (!(scale > 0.0))
        throw InvalidArgument("log_gaussian_ft: scale must be positive");
    constexpr double pi = std::numbers::pi;
    const double x = pi * frequency * scale;
    return std::log(std::sqrt(2.0 * pi) * scale) - 2.0 * x * x;
}

///
/// One group of K point sources blurred by a Gaussian of scale mu.
///
class SpikeGroup
{
public:
    SpikeGroup(std::vector<double> locations, std::vector<cplx> amplitudes, double scale)
        : locations_(std::move(locations)), amplitudes_(std::move(amplitudes)), scale_(scale)
    {
        if (locations_.empty())
            throw InvalidArgument("SpikeGroup: needs at least one spike");
        if (locations_.size() != amplitudes_.size())
            throw InvalidArgument("SpikeGroup: locations/amplitudes length mismatch");
        if (!(scale_ > 0.0) || !std::isfinite(scale_))
            throw InvalidArgument("SpikeGroup: scale must be positive and finite");
        for (double t : locations_)
            if (!(t >= 0.0 && t < 1.0))
                throw InvalidArgument("SpikeGroup: location outside [0,1)");
        for (cplx u : amplitudes_)
            if (!(std::abs(u) > 0.0) || !std::isfinite(u.real()) || !std::isfinite(u.imag()))
                throw InvalidArgument("SpikeGroup: amplitudes must be finite and non-zero");
        if (!(min_separation() > 0.0))
            throw InvalidArgument("SpikeGroup: coincident locations");
    }

    const std::vector<double>& locations() const noexcept { return locations_; }
    const std::vector<cplx>& amplitudes() const noexcept { return amplitudes_; }
    double scale() const noexcept { return scale_; }
    std::size_t size() const noexcept { return locations_.size(); }

    /// Smallest pairwise wrap-around distance; 1 when there is a single spike.
    double min_separation() const
    {
        double best = 1.0;
        for (std::size_t i = 0; i < locations_.size(); ++i)
            for (std::size_t j = i + 1; j < locations_.size(); ++j)
                best = std::min(best, wrap_distance(locations_[i], locations_[j]));
        return best;
    }

    double u_max() const
    {
        double r = 0.0;
        for (cplx u : amplitudes_)
            r = std::max(r, std::abs(u));
        return r;
    }

    double u_min() const
    {
        double r = std::abs(amplitudes_.front());
        for (cplx u : amplitudes_)
            r = std::min(r, std::abs(u));
        return r;
    }

private:
    std::vector<double> locations_;
    std::vector<cplx> amplitudes_;
    double scale_;
};

///
/// L spike groups sharing the same K, ordered by strictly increasing scale.
///
class MixtureModel
{
public:
    explicit MixtureModel(std::vector<SpikeGroup> groups) : groups_(std::move(groups))
    {
        if (groups_.empty())
            throw InvalidArgument("MixtureModel: needs at least one group");
        for (std::size_t l = 1; l < groups_.size(); ++l) {
            if (!(groups_[l - 1].scale() < groups_[l].scale()))
                throw InvalidArgument("MixtureModel: scales must be strictly increasing");
            if (groups_[l].size() != groups_[0].size())
                throw InvalidArgument("MixtureModel: all groups must have the same K");
        }
    }

    const std::vector<SpikeGroup>& groups() const noexcept { return groups_; }
    const SpikeGroup& group(std::size_t index) const { return groups_.at(index); }
    std::size_t num_groups() const noexcept { return groups_.size(); }
    std::size_t k() const noexcept { return groups_.front().size(); }

    std::vector<double> scales() const
    {
        std::vector<double> mu;
        mu.reserve(groups_.size());
        for (const auto& g : groups_)
            mu.push_back(g.scale());
        return mu;
    }

    double u_max() const
    {
        double r = 0.0;
        for (const auto& g : groups_)
            r = std::max(r, g.u_max());
        return r;
    }

    double u_min() const
    {
        double r = groups_.front().u_min();
        for (const auto& g : groups_)
            r = std::min(r, g.u_min());
        return r;
    }

private:
    std::vector<SpikeGroup> groups_;
};

///
/// 2m consecutive integer-frequency samples centred on an offset s0.
/// Index i in [-m, m) holds the sample at frequency s0 + i.
///
struct FourierWindow
{
    std::int64_t offset = 0;
    int half_width = 0;
    std::vector<cplx> samples;

    FourierWindow() = default;
    FourierWindow(std::int64_t s0, int m, std::vector<cplx> values)
        : offset(s0), half_width(m), samples(std::move(values))
    {
        if (m < 1)
            throw InvalidArgument("FourierWindow: half_width must be >= 1");
        if (samples.size() != 2 * static_cast<std::size_t>(m))
            throw InvalidArgument("FourierWindow: expected 2*half_width samples");
    }

    cplx at(int i) const { return samples.at(static_cast<std::size_t>(i + half_width)); }
    std::int64_t frequency(int i) const noexcept { return offset + i; }
};

enum class NoiseKind { none, complex_gaussian };

///
/// Circular complex Gaussian observation noise: real and imaginary parts are
/// independent N(0, sigma^2).
///
struct NoiseSpec
{
    NoiseKind kind = NoiseKind::none;
    double sigma = 0.0;
    std::uint64_t seed = 0;

    static NoiseSpec none() { return {}; }

    static NoiseSpec gaussian(double sigma, std::uint64_t seed)
    {
        NoiseSpec n{NoiseKind::complex_gaussian, sigma, seed};
        n.validate();
        return n;
    }

    void validate() const
    {
        if (!(sigma >= 0.0) || !std::isfinite(sigma))
            throw InvalidArgument("NoiseSpec: sigma must be finite and non-negative");
        if ((sigma == 0.0) != (kind == NoiseKind::none))
            throw InvalidArgument("NoiseSpec: sigma == 0 exactly when kind == none");
    }
};

/// Contribution of one group, f_l(s).
inline cplx group_ft(const SpikeGroup& group, double frequency)
{
    cplx sum{0.0, 0.0};
    for (std::size_t j = 0; j < group.size(); ++j)
        sum += group.amplitudes()[j] * unit_phase(frequency * group.locations()[j]);
    return gaussian_ft(group.scale(), frequency) * sum;
}

/// Exact noiseless f(s).
inline cplx fourier_oracle(const MixtureModel& model, std::int64_t frequency)
{
    cplx f{0.0, 0.0};
    for (const auto& g : model.groups())
        f += group_ft(g, static_cast<double>(frequency));
    return f;
}

///
/// Observes f on [s0-m, s0+m) at the given stage. Noise is drawn from a stream
/// keyed by (noise.seed, stage), so every stage sees a fresh realization and a
/// rerun reproduces it bit for bit.
///
inline FourierWindow sample_window(const MixtureModel& model, std::int64_t offset,
                                   int half_width, const NoiseSpec& noise, int stage)
{
    if (half_width < 1)
        throw InvalidArgument("sample_window: half_width must be >= 1");
    noise.validate();
    std::vector<cplx> values(2 * static_cast<std::size_t>(half_width));
    for (int i = -half_width; i < half_width; ++i)
        values[static_cast<std::size_t>(i + half_width)] = fourier_oracle(model, offset + i);

    if (noise.kind == NoiseKind::complex_gaussian) {
        auto stream = make_stream({noise.seed, static_cast<std::uint64_t>(stage)});
        std::normal_distribution<double> normal(0.0, noise.sigma);
        for (auto& v : values) {
            const double re = normal(stream);
            const double im = normal(stream);
            v += cplx{re, im};
        }
    }
    return FourierWindow(offset, half_width, std::move(values));
}

///
/// Recovered (t_hat, u_hat) pairs for one group, sorted by location.
///
struct SpikeEstimate
{
    struct Diagnostics
    {
        double sigma_k_of_h0 = 0.0; ///< K-th singular value of the data pencil
        double residual_norm = 0.0; ///< ||V_hat u' - v||_2 of the amplitude fit
    };

    std::vector<double> locations;
    std::vector<cplx> amplitudes;
    int group_index = 1;
    Diagnostics diagnostics;

    std::size_t size() const noexcept { return locations.size(); }
};

/// fhat_l(s) = gbar_l(s) sum_j uhat_j exp(i 2 pi s that_j), the deflation term.
inline cplx estimate_ft(const SpikeEstimate& estimate, double scale, double frequency)
{
    cplx sum{0.0, 0.0};
    for (std::size_t j = 0; j < estimate.size(); ++j)
        sum += estimate.amplitudes[j] * unit_phase(frequency * estimate.locations[j]);
    return gaussian_ft(scale, frequency) * sum;
}

} // namespace krummp
