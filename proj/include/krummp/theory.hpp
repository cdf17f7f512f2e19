#pragma once

///
/// \file theory.hpp
///
/// Closed-form recovery guarantees for the matrix pencil estimator and for
/// sequential unmixing, evaluated numerically so that a concrete plan (and a
/// concrete noise realization) can be checked against them.
///
/// Group numbers l are 1-based throughout, matching the stage plans.
///

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "krummp/error.hpp"
#include "krummp/signal.hpp"
#include "krummp/unmix.hpp"

namespace krummp::theory {

/// C = 10 + 1/(2 sqrt 2), the pencil perturbation constant.
inline const double kPencilConstant = 10.0 + 1.0 / (2.0 * std::numbers::sqrt2);

/// C = 20 + 1/sqrt 2, used by the single-kernel (L = 1) noisy guarantee.
inline const double kSingleKernelConstant = 20.0 + 1.0 / std::numbers::sqrt2;

struct BoundContext
{
    double u_max = 1.0;
    double u_min = 1.0;
    int k = 1;
    int l_total = 1;
    std::vector<double> scales;
    std::vector<double> separations;
    double c = 0.5;        ///< in (0,1)
    double c_tilde = 2.0;  ///< > 1
    double big_c = kPencilConstant;

    void validate() const
    {
        if (!(u_min > 0.0 && u_min <= u_max))
            throw InvalidArgument("BoundContext: need 0 < u_min <= u_max");
        if (k < 1 || l_total < 1)
            throw InvalidArgument("BoundContext: k and L must be >= 1");
        if (scales.size() != static_cast<std::size_t>(l_total) ||
            separations.size() != static_cast<std::size_t>(l_total))
            throw InvalidArgument("BoundContext: need L scales and L separations");
        if (!(c > 0.0 && c < 1.0))
            throw InvalidArgument("BoundContext: c must lie in (0,1)");
        if (!(c_tilde > 1.0))
            throw InvalidArgument("BoundContext: c_tilde must exceed 1");
    }

    double mu(int l) const { return scales.at(static_cast<std::size_t>(l - 1)); }
    double delta(int l) const { return separations.at(static_cast<std::size_t>(l - 1)); }
    double sqrt_k() const { return std::sqrt(static_cast<double>(k)); }
    double k_3_2() const { return std::pow(static_cast<double>(k), 1.5); }
    /// (1 + 48 u_max/u_min)
    double amp_ratio_48() const { return 1.0 + 48.0 * u_max / u_min; }
};

/// sqrt|log x|.
inline double log_half(double x) { return std::sqrt(std::abs(std::log(x))); }

/// sqrt(2 pi^2 (mu_{l+1}^2 - mu_l^2)).
inline double scale_gap(const BoundContext& ctx, int l)
{
    constexpr double pi = std::numbers::pi;
    const double a = ctx.mu(l), b = ctx.mu(l + 1);
    return std::sqrt(2.0 * pi * pi * (b * b - a * a));
}

/// eps u_min / (5 C sqrt K) (1 + 48 u_max/u_min)^{-1}: admissible eta_max for
/// a single pencil solve.
inline double corollary1_noise_bound(const BoundContext& ctx, double epsilon)
{
    if (!(epsilon > 0.0))
        throw InvalidArgument("corollary1_noise_bound: epsilon must be positive");
    return epsilon * ctx.u_min / (5.0 * ctx.big_c * ctx.sqrt_k()) / ctx.amp_ratio_48();
}

/// Amplitude error constant C~ of the single-solve guarantee for separation
/// delta, i.e. |u_hat - u| < (C~ + 2 pi u_max s0) eps.
inline double corollary1_amplitude_constant(const BoundContext& ctx, double delta)
{
    constexpr double pi = std::numbers::pi;
    const double m_plus = 2.0 / (delta * (1.0 - ctx.c)) + 1.0;
    const double r = ctx.u_max / ctx.u_min;
    return 4.0 * pi * ctx.k * ctx.u_max * m_plus +
           ctx.u_min / (ctx.big_c * ctx.sqrt_k()) / (1.0 + 16.0 * r * r);
}

struct Theorem3Constants
{
    double m_plus = 0.0;
    double c_tilde_l = 0.0;
    double c_bar_1 = 0.0;
    std::optional<double> c_bar_2;
    std::optional<double> d_l;
    std::optional<double> c_bar_3;
};

inline Theorem3Constants theorem3_constants(const BoundContext& ctx, int l)
{
    ctx.validate();
    if (l < 1 || l > ctx.l_total)
        throw InvalidArgument("theorem3_constants: l out of range");
    constexpr double pi = std::numbers::pi;
    Theorem3Constants out;
    out.m_plus = 2.0 / (ctx.delta(l) * (1.0 - ctx.c)) + 1.0;
    out.c_tilde_l = corollary1_amplitude_constant(ctx, ctx.delta(l));
    out.c_bar_1 = out.c_tilde_l;
    if (l < ctx.l_total) {
        out.c_bar_1 = out.c_tilde_l + 2.0 * pi * ctx.u_max * ctx.c_tilde * out.m_plus;
        out.c_bar_2 = 2.0 * pi * ctx.u_max * ctx.c_tilde / scale_gap(ctx, l);
        const double d = 5.0 * ctx.big_c * ctx.k_3_2() * (ctx.l_total - l) * ctx.u_max *
                         ctx.mu(ctx.l_total) / (ctx.u_min * ctx.mu(l)) * ctx.amp_ratio_48();
        out.d_l = d;
        out.c_bar_3 = (l == 1) ? d : 2.0 * d;
    }
    return out;
}

/// E_l(eps): amplitude error envelope of stage l.
inline double error_envelope(const BoundContext& ctx, int l, double epsilon)
{
    if (!(epsilon > 0.0))
        throw InvalidArgument("error_envelope: epsilon must be positive");
    const auto k3 = theorem3_constants(ctx, l);
    if (l == ctx.l_total)
        return k3.c_tilde_l * epsilon;
    return (k3.c_bar_1 + *k3.c_bar_2 * log_half(*k3.c_bar_3 / epsilon)) * epsilon;
}

/// F_l(eps) (noisy = false) or F'_l(eps) (noisy = true), 2 <= l <= L-1.
inline double f_envelope(const BoundContext& ctx, int l, double epsilon, bool noisy)
{
    if (l < 2 || l > ctx.l_total - 1)
        throw InvalidArgument("f_envelope: defined only for 2 <= l <= L-1");
    if (!(epsilon > 0.0))
        throw InvalidArgument("f_envelope: epsilon must be positive");
    const auto k3 = theorem3_constants(ctx, l);
    const double c1 = (ctx.c_tilde + 1.0) * k3.m_plus;
    const double c2 = ctx.c_tilde / scale_gap(ctx, l);
    return c1 + c2 * log_half((noisy ? 3.0 : 2.0) * *k3.d_l / epsilon);
}

///
/// S_l, the smallest admissible sampling offset of stage l < L. The noiseless
/// guarantee uses b_l = 5 (l = 1) or 10; the noisy one b_l = 10 or 15.
///
inline double offset_lower_bound(const BoundContext& ctx, int l, double epsilon, int half_width,
                                 bool noisy = false)
{
    ctx.validate();
    if (l < 1 || l >= ctx.l_total)
        throw InvalidArgument("offset_lower_bound: defined only for l < L");
    const double b = noisy ? (l == 1 ? 10.0 : 15.0) : (l == 1 ? 5.0 : 10.0);
    const double arg = b * ctx.big_c * ctx.k_3_2() * ctx.u_max * (ctx.l_total - l) *
                       ctx.mu(ctx.l_total) / (epsilon * ctx.u_min * ctx.mu(l)) * ctx.amp_ratio_48();
    return half_width + log_half(arg) / scale_gap(ctx, l);
}

///
/// Alternative plan generator: eps cascade eps_l = eps_{l+1}^2, m_l = ceil(1/Delta_l) + m_pad
/// and s_l = ceil(S_l) with the full offset bound above.
///
inline std::vector<StagePlan> choose_plans_theorem3(const BoundContext& ctx, double eps_last,
                                                    int m_pad, bool noisy = false)
{
    auto plans = choose_plans(ctx.scales, ctx.separations, ctx.k, eps_last, 1.0, m_pad);
    for (auto& p : plans) {
        if (p.group_index == ctx.l_total)
            continue;
        const double s = offset_lower_bound(ctx, p.group_index, p.epsilon, p.half_width, noisy);
        p.offset = std::max<std::int64_t>(static_cast<std::int64_t>(std::ceil(s)), p.half_width + 1);
    }
    return plans;
}

/// Fills StagePlan::bounds with E_l, S_l, D_l and F_l.
inline std::vector<StagePlan> annotate_plans(const BoundContext& ctx, std::vector<StagePlan> plans,
                                             bool noisy = false)
{
    for (auto& p : plans) {
        const int l = p.group_index;
        PlanBounds b;
        b.error_envelope = error_envelope(ctx, l, p.epsilon);
        if (l < ctx.l_total) {
            b.offset_lower = offset_lower_bound(ctx, l, p.epsilon, p.half_width, noisy);
            b.d = theorem3_constants(ctx, l).d_l;
        }
        if (l >= 2 && l <= ctx.l_total - 1)
            b.f = f_envelope(ctx, l, p.epsilon, noisy);
        p.bounds = b;
    }
    return plans;
}

///
/// Uniform bound on the stage-l perturbation left by the tails of groups
/// l+1..L when every earlier group is deflated exactly:
///
///   |eta'_{l,i}| <= K u_max (L-l) mu_L/mu_l exp(-2 pi^2 (s_l-m_l)^2 (mu_{l+1}^2 - mu_l^2)).
///
inline double tail_perturbation_bound(const std::vector<double>& scales, int l, std::int64_t offset,
                                      int half_width, int k, double u_max)
{
    const int L = static_cast<int>(scales.size());
    if (l < 1 || l >= L)
        throw InvalidArgument("tail_perturbation_bound: defined only for l < L");
    if (offset < half_width)
        throw InvalidArgument("tail_perturbation_bound: need offset >= half_width");
    constexpr double pi = std::numbers::pi;
    const double mu_l = scales[static_cast<std::size_t>(l - 1)];
    const double mu_n = scales[static_cast<std::size_t>(l)];
    const double edge = static_cast<double>(offset - half_width);
    return k * u_max * (L - l) * scales.back() / mu_l *
           std::exp(-2.0 * pi * pi * edge * edge * (mu_n * mu_n - mu_l * mu_l));
}

/// Admissible sup_i |w_l(i) / gbar_l(s_l+i)| for stage l.
inline double stage_noise_threshold(const BoundContext& ctx, int l, double epsilon)
{
    ctx.validate();
    if (ctx.l_total == 1)
        return epsilon * ctx.u_min / (10.0 * kSingleKernelConstant * ctx.sqrt_k()) / ctx.amp_ratio_48();
    const double b = (l == 1 || l == ctx.l_total) ? 10.0 : 15.0;
    return epsilon * ctx.u_min / (b * ctx.big_c * ctx.sqrt_k()) / ctx.amp_ratio_48();
}

inline std::vector<bool> theorem5_noise_admissible(const BoundContext& ctx,
                                                   const std::vector<StagePlan>& plans,
                                                   const std::vector<double>& noise_sup_per_stage)
{
    if (plans.size() != noise_sup_per_stage.size())
        throw InvalidArgument("theorem5_noise_admissible: plans and noise levels must align");
    std::vector<bool> ok;
    ok.reserve(plans.size());
    for (std::size_t i = 0; i < plans.size(); ++i)
        ok.push_back(noise_sup_per_stage[i] <=
                     stage_noise_threshold(ctx, plans[i].group_index, plans[i].epsilon));
    return ok;
}

/// sup_i |w(i) / gbar_l(s_l + i)| for a realized noise vector on a stage window.
inline double deconvolved_noise_sup(const std::vector<cplx>& noise, const StagePlan& plan, double mu)
{
    if (noise.size() != 2 * static_cast<std::size_t>(plan.half_width))
        throw InvalidArgument("deconvolved_noise_sup: noise length must be 2*half_width");
    double sup = 0.0;
    for (int i = -plan.half_width; i < plan.half_width; ++i) {
        const double log_ratio = std::log(std::abs(noise[static_cast<std::size_t>(i + plan.half_width)])) -
                                 log_gaussian_ft(mu, static_cast<double>(plan.offset + i));
        sup = std::max(sup, std::exp(log_ratio));
    }
    return sup;
}

struct ConditionRow
{
    std::string condition;
    int group = 0;
    bool satisfied = false;
    double lhs = 0.0;
    double rhs = 0.0;
};

///
/// Evaluates every explicit condition on (eps_l, m_l, s_l) of the sequential
/// guarantee and reports both sides. `noisy` switches to the constants of the
/// noisy guarantee (10C / 15C denominators, F'_l).
///
inline std::vector<ConditionRow> epsilon_cascade_check(const BoundContext& ctx,
                                                       const std::vector<StagePlan>& plans,
                                                       bool noisy = false)
{
    ctx.validate();
    const int L = ctx.l_total;
    if (plans.size() != static_cast<std::size_t>(L))
        throw InvalidArgument("epsilon_cascade_check: need one plan per group");
    constexpr double pi = std::numbers::pi;
    auto eps = [&](int l) { return plans[static_cast<std::size_t>(l - 1)].epsilon; };
    auto plan = [&](int l) -> const StagePlan& { return plans[static_cast<std::size_t>(l - 1)]; };
    auto F = [&](int l, double e) { return f_envelope(ctx, l, e, noisy); };

    std::vector<ConditionRow> rows;
    auto add = [&](std::string name, int l, double lhs, double rhs, bool strict) {
        rows.push_back({std::move(name), l, strict ? lhs < rhs : lhs <= rhs, lhs, rhs});
    };

    for (int l = 1; l <= L; ++l) {
        const auto k3 = theorem3_constants(ctx, l);
        add("eps_l < c*Delta_l/2", l, eps(l), ctx.c * ctx.delta(l) / 2.0, true);
        const double m_low = 2.0 / (ctx.delta(l) - 2.0 * eps(l));
        add("2/(Delta_l - 2 eps_l) <= m_l", l, m_low, plan(l).half_width, false);
        add("m_l < m+_l", l, plan(l).half_width, k3.m_plus, true);
        if (l == L) {
            add("s_L = 0", l, static_cast<double>(plan(l).offset), 0.0, false);
            continue;
        }
        const double S = offset_lower_bound(ctx, l, eps(l), plan(l).half_width, noisy);
        add("S_l <= s_l", l, S, static_cast<double>(plan(l).offset), false);
        add("s_l <= c_tilde*S_l", l, static_cast<double>(plan(l).offset), ctx.c_tilde * S, false);
        if (l > 1)
            add("(1a) eps_l < D_l", l, eps(l), *k3.d_l, true);
    }

    if (L >= 2) {
        // (1b)
        const int l = L - 1;
        const double m_plus_L = theorem3_constants(ctx, L).m_plus;
        const double lhs = 2.0 * pi * ctx.u_max * m_plus_L * eps(l) + error_envelope(ctx, l, eps(l));
        const double mu1 = ctx.mu(1), muL = ctx.mu(L);
        const double denom_c = noisy ? 10.0 : 5.0;
        const double rhs = eps(L) * ctx.u_min * muL *
                           std::exp(-2.0 * pi * pi * (muL * muL - mu1 * mu1) * m_plus_L * m_plus_L) /
                           (denom_c * ctx.big_c * ctx.k_3_2() * (L - 1) * ctx.mu(L - 1)) /
                           ctx.amp_ratio_48();
        add("(1b) 2 pi u_max m+_L eps_{L-1} + E_{L-1} <= tail budget", l, lhs, rhs, false);
    }

    for (int l = 1; l + 1 < L; ++l) {
        // (1c)
        add("(1c) eps_l <= eps_{l+1}", l, eps(l), eps(l + 1), false);
        add("(1c) E_l(eps_l) <= E_{l+1}(eps_{l+1})", l, error_envelope(ctx, l, eps(l)),
            error_envelope(ctx, l + 1, eps(l + 1)), false);
        const double mu1 = ctx.mu(1), mun = ctx.mu(l + 1);
        const double f_next = F(l + 1, eps(l + 1));
        const double lhs = 2.0 * pi * ctx.u_max * F(l + 1, eps(l)) * eps(l) + error_envelope(ctx, l, eps(l));
        const double denom_c = noisy ? 15.0 : 10.0;
        const double rhs = eps(l + 1) * std::exp(-2.0 * pi * pi * (mun * mun - mu1 * mu1) * f_next * f_next) *
                           ctx.u_min * mun / (denom_c * ctx.big_c * ctx.k_3_2() * l * ctx.mu(l)) /
                           ctx.amp_ratio_48();
        add("(1c) 2 pi u_max F_{l+1}(eps_l) eps_l + E_l <= tail budget", l, lhs, rhs, false);
    }
    return rows;
}

} // namespace krummp::theory
