#pragma once

///
/// \file unmix.hpp
///
/// Sequential unmixing of L Gaussian-blurred spike groups (KrUMMP).
///
/// Stage l samples f deep enough in the Fourier tail that the wider kernels
/// l+1..L are negligible, subtracts the synthesized contribution of the groups
/// already recovered, divides by gbar_l and hands the result to the matrix
/// pencil estimator. Stages run in order of increasing scale and every stage
/// consumes the outputs of the previous ones.
///

#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "krummp/error.hpp"
#include "krummp/pencil.hpp"
#include "krummp/signal.hpp"

namespace krummp {

/// Theory values attached to a plan by theory::annotate_plans.
struct PlanBounds
{
    double error_envelope = 0.0; ///< E_l(eps_l)
    double offset_lower = 0.0;   ///< S_l (0 for the last stage)
    std::optional<double> d;     ///< D_l, l < L
    std::optional<double> f;     ///< F_l(eps_l), 2 <= l <= L-1
};

struct StagePlan
{
    int group_index = 1; ///< l, 1-based
    double epsilon = 0.0;
    int half_width = 1;
    std::int64_t offset = 0;
    std::optional<PlanBounds> bounds;
};

///
/// Experimental sampling schedule: eps_L = eps_last, eps_l = eps_{l+1}^2,
/// m_l = ceil(1/Delta_l) + m_pad, s_L = 0 and for l < L
///
///   s_l = m_l + ceil( C / sqrt(2 pi^2 (mu_{l+1}^2 - mu_l^2))
///                     * sqrt|log(mu_L / (mu_l eps_l))| ).
///
inline std::vector<StagePlan> choose_plans(const std::vector<double>& scales,
                                           const std::vector<double>& separations, int k,
                                           double eps_last, double c_mult, int m_pad)
{
    const auto L = scales.size();
    if (L == 0 || separations.size() != L)
        throw InvalidArgument("choose_plans: need one separation per scale");
    if (k < 1)
        throw InvalidArgument("choose_plans: k must be >= 1");
    if (!(eps_last > 0.0 && eps_last < 1.0))
        throw InvalidArgument("choose_plans: eps_last must lie in (0,1)");
    if (!(c_mult > 0.0))
        throw InvalidArgument("choose_plans: C must be positive");
    if (m_pad < 0)
        throw InvalidArgument("choose_plans: m_pad must be non-negative");
    for (std::size_t l = 0; l < L; ++l) {
        if (!(scales[l] > 0.0) || (l > 0 && !(scales[l - 1] < scales[l])))
            throw InvalidArgument("choose_plans: scales must be positive and strictly increasing");
        if (!(separations[l] > 0.0 && separations[l] <= 1.0))
            throw InvalidArgument("choose_plans: separations must lie in (0,1]");
    }

    std::vector<StagePlan> plans(L);
    double eps = eps_last;
    for (std::size_t idx = L; idx-- > 0;) {
        auto& p = plans[idx];
        p.group_index = static_cast<int>(idx + 1);
        if (idx + 1 < L) {
            eps = eps * eps;
            if (eps < 1e-300)
                throw InvalidArgument("choose_plans: epsilon cascade underflows");
        }
        p.epsilon = eps;
        // 1/Delta is often an integer up to rounding (1/0.05)
        p.half_width = static_cast<int>(std::ceil(1.0 / separations[idx] - 1e-9)) + m_pad;
        if (idx + 1 == L) {
            p.offset = 0;
        } else {
            constexpr double pi = std::numbers::pi;
            const double gap = 2.0 * pi * pi * (scales[idx + 1] * scales[idx + 1] - scales[idx] * scales[idx]);
            const double depth = c_mult / std::sqrt(gap) *
                                 std::sqrt(std::abs(std::log(scales[L - 1] / (scales[idx] * eps))));
            p.offset = p.half_width + static_cast<std::int64_t>(std::ceil(depth));
            if (p.offset <= p.half_width)
                p.offset = p.half_width + 1;
        }
    }
    return plans;
}

struct StageDiagnostics
{
    double max_deconvolved_magnitude = 0.0;
    double deflation_residual = 0.0; ///< max |sum_p fhat_p / gbar_l| over the window
};

namespace detail {

/// z * exp(log_factor), computed in magnitude/phase form when the factor is
/// too large to form directly.
inline cplx scale_by_exp(cplx z, double log_factor, std::int64_t frequency)
{
    if (std::abs(log_factor) <= 200.0)
        return z * std::exp(log_factor);
    const double mag = std::abs(z);
    if (mag == 0.0)
        return {0.0, 0.0};
    const double log_mag = std::log(mag) + log_factor;
    if (log_mag > std::log(std::numeric_limits<double>::max()))
        throw StageFailure("deconvolution overflow", frequency);
    return std::polar(std::exp(log_mag), std::arg(z));
}

} // namespace detail

///
/// d_i = (window[i] - sum_{p<l} fhat_p(s_l+i)) / gbar_l(s_l+i) for
/// i = -m..m-1, where prior[p-1] is the estimate of group p and l is 1-based.
///
inline std::vector<cplx> deflate_and_deconvolve(const FourierWindow& window,
                                                const std::vector<SpikeEstimate>& prior,
                                                const std::vector<double>& scales, int l,
                                                StageDiagnostics* diag = nullptr)
{
    if (l < 1 || static_cast<std::size_t>(l) > scales.size())
        throw InvalidArgument("deflate_and_deconvolve: group index out of range");
    if (prior.size() < static_cast<std::size_t>(l - 1))
        throw InvalidArgument("deflate_and_deconvolve: missing estimates for earlier groups");

    const double mu = scales[static_cast<std::size_t>(l - 1)];
    std::vector<cplx> out;
    out.reserve(window.samples.size());
    StageDiagnostics d;
    for (int i = -window.half_width; i < window.half_width; ++i) {
        const std::int64_t s = window.frequency(i);
        const double sd = static_cast<double>(s);
        const double log_g = log_gaussian_ft(mu, sd);

        cplx deflation{0.0, 0.0};
        for (int p = 1; p < l; ++p) {
            const auto& est = prior[static_cast<std::size_t>(p - 1)];
            cplx sum{0.0, 0.0};
            for (std::size_t j = 0; j < est.size(); ++j)
                sum += est.amplitudes[j] * unit_phase(sd * est.locations[j]);
            const double log_p = log_gaussian_ft(scales[static_cast<std::size_t>(p - 1)], sd);
            deflation += detail::scale_by_exp(sum, log_p - log_g, s);
        }

        const cplx value = detail::scale_by_exp(window.at(i), -log_g, s) - deflation;
        if (!std::isfinite(value.real()) || !std::isfinite(value.imag()))
            throw StageFailure("non-finite deconvolved sample", s);
        d.max_deconvolved_magnitude = std::max(d.max_deconvolved_magnitude, std::abs(value));
        d.deflation_residual = std::max(d.deflation_residual, std::abs(deflation));
        out.push_back(value);
    }
    if (diag)
        *diag = d;
    return out;
}

/// Anything that can hand out the window for a stage.
template <typename S>
concept SampleSource = requires(const S& src, std::int64_t offset, int half_width, int stage) {
    { src.scales() } -> std::convertible_to<std::vector<double>>;
    { src.window(offset, half_width, stage) } -> std::same_as<FourierWindow>;
};

/// Samples a known model on demand, with fresh noise per stage.
class ModelSource
{
public:
    ModelSource(const MixtureModel& model, NoiseSpec noise) : model_(&model), noise_(noise)
    {
        noise_.validate();
    }

    std::vector<double> scales() const { return model_->scales(); }

    FourierWindow window(std::int64_t offset, int half_width, int stage) const
    {
        return sample_window(*model_, offset, half_width, noise_, stage);
    }

private:
    const MixtureModel* model_;
    NoiseSpec noise_;
};

/// Replays pre-recorded windows, one per stage in order.
class RecordedSource
{
public:
    RecordedSource(std::vector<double> scales, std::vector<FourierWindow> windows)
        : scales_(std::move(scales)), windows_(std::move(windows))
    {
        if (scales_.size() != windows_.size())
            throw InvalidArgument("RecordedSource: need one window per scale");
    }

    std::vector<double> scales() const { return scales_; }

    FourierWindow window(std::int64_t offset, int half_width, int stage) const
    {
        if (stage < 1 || static_cast<std::size_t>(stage) > windows_.size())
            throw InvalidArgument("RecordedSource: stage out of range");
        const auto& w = windows_[static_cast<std::size_t>(stage - 1)];
        if (w.offset != offset || w.half_width != half_width)
            throw InvalidArgument("RecordedSource: recorded window does not match the stage plan");
        return w;
    }

    const std::vector<FourierWindow>& windows() const noexcept { return windows_; }

private:
    std::vector<double> scales_;
    std::vector<FourierWindow> windows_;
};

struct StageFailureInfo
{
    int stage = 0;
    std::string message;
    std::optional<std::int64_t> frequency;
};

struct UnmixReport
{
    std::vector<SpikeEstimate> estimates;
    std::vector<StagePlan> plans;
    std::vector<StageDiagnostics> diagnostics;
    std::optional<StageFailureInfo> failure;

    bool partial() const noexcept { return failure.has_value(); }
};

///
/// Runs all stages in order. A failing stage stops the run: the report keeps
/// the estimates of the stages before it and records the failure.
///
template <SampleSource Source>
UnmixReport run_krummp(const Source& source, const std::vector<StagePlan>& plans, int k,
                       const MmpOptions& opt = {})
{
    const auto scales = source.scales();
    if (plans.size() != scales.size())
        throw InvalidArgument("run_krummp: need one plan per group");
    if (k < 1)
        throw InvalidArgument("run_krummp: k must be >= 1");
    for (std::size_t i = 0; i < plans.size(); ++i)
        if (plans[i].group_index != static_cast<int>(i + 1))
            throw InvalidArgument("run_krummp: plans must be ordered l = 1..L");

    UnmixReport report;
    report.plans = plans;
    for (const auto& plan : plans) {
        const int l = plan.group_index;
        try {
            const auto window = source.window(plan.offset, plan.half_width, l);
            StageDiagnostics diag;
            auto d = deflate_and_deconvolve(window, report.estimates, scales, l, &diag);
            const FourierWindow deconvolved(plan.offset, plan.half_width, std::move(d));
            auto est = mmp_estimate(deconvolved, k, opt);
            est.group_index = l;
            report.estimates.push_back(std::move(est));
            report.diagnostics.push_back(diag);
        } catch (const StageFailure& e) {
            report.failure = StageFailureInfo{l, e.what(), e.frequency()};
            break;
        } catch (const InvalidArgument&) {
            throw;
        } catch (const Error& e) {
            report.failure = StageFailureInfo{l, e.what(), std::nullopt};
            break;
        }
    }
    return report;
}

inline UnmixReport run_krummp(const MixtureModel& model, const std::vector<StagePlan>& plans,
                              int k, const NoiseSpec& noise, const MmpOptions& opt = {})
{
    return run_krummp(ModelSource(model, noise), plans, k, opt);
}

} // namespace krummp
