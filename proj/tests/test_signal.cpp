#include <cmath>

#include <gtest/gtest.h>

#include "krummp/krummp.hpp"
#include "oracles.hpp"

using namespace krummp;

TEST(GaussianFt, ReferenceValues)
{
    // mpmath, 40 digits
    EXPECT_NEAR(gaussian_ft(0.01, 10.0), 0.02057612736833877, 1e-15);
    EXPECT_NEAR(log_gaussian_ft(0.01, 500.0), -497.1664517072513, 1e-10);
    EXPECT_NEAR(log_gaussian_ft(1.0, 0.0), 0.9189385332046727, 1e-15);
}

TEST(GaussianFt, EvenInFrequency)
{
    for (double s : {0.5, 3.0, 77.0, 412.0})
        EXPECT_EQ(gaussian_ft(0.004, s), gaussian_ft(0.004, -s));
}

TEST(GaussianFt, LogAgreesWhereRepresentable)
{
    for (double s : {0.0, 10.0, 100.0, 300.0})
        EXPECT_NEAR(std::exp(log_gaussian_ft(0.005, s)), gaussian_ft(0.005, s),
                    1e-13 * gaussian_ft(0.005, s));
}

TEST(GaussianFt, UnderflowsButLogStaysFinite)
{
    EXPECT_EQ(gaussian_ft(0.01, 5000.0), 0.0);
    EXPECT_TRUE(std::isfinite(log_gaussian_ft(0.01, 5000.0)));
}

TEST(GaussianFt, RejectsBadInput)
{
    EXPECT_THROW(gaussian_ft(0.0, 1.0), InvalidArgument);
    EXPECT_THROW(gaussian_ft(-1.0, 1.0), InvalidArgument);
    EXPECT_THROW(gaussian_ft(0.1, NAN), InvalidArgument);
    EXPECT_THROW(log_gaussian_ft(0.0, 1.0), InvalidArgument);
}

TEST(SpikeGroup, Validation)
{
    EXPECT_THROW(SpikeGroup({}, {}, 0.1), InvalidArgument);
    EXPECT_THROW(SpikeGroup({0.1}, {1.0, 2.0}, 0.1), InvalidArgument);
    EXPECT_THROW(SpikeGroup({1.0}, {1.0}, 0.1), InvalidArgument);
    EXPECT_THROW(SpikeGroup({-0.1}, {1.0}, 0.1), InvalidArgument);
    EXPECT_THROW(SpikeGroup({0.1}, {0.0}, 0.1), InvalidArgument);
    EXPECT_THROW(SpikeGroup({0.1}, {1.0}, 0.0), InvalidArgument);
    EXPECT_THROW(SpikeGroup({0.3, 0.3}, {1.0, 1.0}, 0.1), InvalidArgument);
}

TEST(SpikeGroup, SeparationAndAmplitudeRange)
{
    const SpikeGroup g({0.05, 0.5, 0.95}, {cplx(3, 4), -2.0, 7.0}, 0.1);
    EXPECT_NEAR(g.min_separation(), 0.1, 1e-15);
    EXPECT_DOUBLE_EQ(g.u_max(), 7.0);
    EXPECT_DOUBLE_EQ(g.u_min(), 2.0);
    EXPECT_EQ(SpikeGroup({0.4}, {1.0}, 0.1).min_separation(), 1.0);
}

TEST(MixtureModel, Validation)
{
    const SpikeGroup a({0.1}, {1.0}, 0.1), b({0.2}, {1.0}, 0.2), c({0.2, 0.6}, {1.0, 1.0}, 0.3);
    EXPECT_THROW(MixtureModel({}), InvalidArgument);
    EXPECT_THROW(MixtureModel({b, a}), InvalidArgument);
    EXPECT_THROW(MixtureModel({a, a}), InvalidArgument);
    EXPECT_THROW(MixtureModel({a, c}), InvalidArgument);
    const MixtureModel m({a, b});
    EXPECT_EQ(m.num_groups(), 2u);
    EXPECT_EQ(m.k(), 1u);
}

TEST(FourierOracle, TwoGroupReference)
{
    const MixtureModel m({SpikeGroup({0.3}, {1.0}, 0.1), SpikeGroup({0.7}, {2.0}, 0.2)});
    const cplx f = fourier_oracle(m, 1);
    EXPECT_NEAR(f.real(), -0.20426203024489906, 1e-15);
    EXPECT_NEAR(f.imag(), -0.23727268747916676, 1e-15);
}

TEST(FourierOracle, AtZeroIsWeightedMass)
{
    const MixtureModel m({SpikeGroup({0.1, 0.6}, {2.0, cplx(0, 1)}, 0.05)});
    const cplx f = fourier_oracle(m, 0);
    const double g0 = std::sqrt(2.0 * M_PI) * 0.05;
    EXPECT_NEAR(std::abs(f - g0 * cplx(2.0, 1.0)), 0.0, 1e-15);
}

TEST(FourierOracle, LargeFrequencyPhaseAccuracy)
{
    // s*t with s ~ 1e6: reducing modulo 1 keeps the phase exact.
    const SpikeGroup g({0.125}, {1.0}, 1e-9);
    const cplx f = group_ft(g, 1'000'001.0) / gaussian_ft(1e-9, 1'000'001.0);
    EXPECT_NEAR(std::abs(f - std::polar(1.0, 2.0 * M_PI * 0.125)), 0.0, 1e-12);
}

TEST(FourierWindow, Indexing)
{
    std::vector<cplx> v{1.0, 2.0, 3.0, 4.0};
    const FourierWindow w(10, 2, v);
    EXPECT_EQ(w.at(-2), cplx(1.0));
    EXPECT_EQ(w.at(1), cplx(4.0));
    EXPECT_EQ(w.frequency(-2), 8);
    EXPECT_THROW(FourierWindow(0, 2, {1.0}), InvalidArgument);
    EXPECT_THROW(FourierWindow(0, 0, {}), InvalidArgument);
}

TEST(NoiseSpec, Validation)
{
    EXPECT_NO_THROW(NoiseSpec::none().validate());
    EXPECT_THROW(NoiseSpec::gaussian(0.0, 1), InvalidArgument);
    EXPECT_THROW(NoiseSpec::gaussian(-1.0, 1), InvalidArgument);
    EXPECT_THROW((NoiseSpec{NoiseKind::none, 0.1, 0}.validate()), InvalidArgument);
}

TEST(SampleWindow, NoiselessMatchesOracle)
{
    const MixtureModel m({SpikeGroup({0.2, 0.7}, {1.0, -3.0}, 0.01), SpikeGroup({0.4, 0.9}, {2.0, 5.0}, 0.02)});
    const auto w = sample_window(m, 40, 6, NoiseSpec::none(), 1);
    for (int i = -6; i < 6; ++i)
        EXPECT_EQ(w.at(i), fourier_oracle(m, 40 + i));
}

TEST(SampleWindow, NoiseIsSeededPerStage)
{
    const MixtureModel m({SpikeGroup({0.2}, {1.0}, 0.01)});
    const auto noise = NoiseSpec::gaussian(0.5, 42);
    const auto a = sample_window(m, 0, 50, noise, 1);
    const auto b = sample_window(m, 0, 50, noise, 1);
    const auto c = sample_window(m, 0, 50, noise, 2);
    EXPECT_EQ(a.samples, b.samples);
    EXPECT_NE(a.samples, c.samples);
}

TEST(SampleWindow, NoiseHasRequestedSpread)
{
    const MixtureModel m({SpikeGroup({0.2}, {1.0}, 0.01)});
    const auto noise = NoiseSpec::gaussian(0.3, 7);
    const auto clean = sample_window(m, 0, 5000, NoiseSpec::none(), 1);
    const auto noisy = sample_window(m, 0, 5000, noise, 1);
    double re2 = 0.0, im2 = 0.0;
    for (std::size_t i = 0; i < clean.samples.size(); ++i) {
        const cplx d = noisy.samples[i] - clean.samples[i];
        re2 += d.real() * d.real();
        im2 += d.imag() * d.imag();
    }
    const double n = static_cast<double>(clean.samples.size());
    EXPECT_NEAR(std::sqrt(re2 / n), 0.3, 0.01);
    EXPECT_NEAR(std::sqrt(im2 / n), 0.3, 0.01);
}

TEST(Rng, DeriveSeedSeparatesKeys)
{
    EXPECT_EQ(derive_seed({1, 2}), derive_seed({1, 2}));
    EXPECT_NE(derive_seed({1, 2}), derive_seed({2, 1}));
    EXPECT_NE(derive_seed({1}), derive_seed({1, 0}));
}

TEST(EstimateFt, MatchesGroupFt)
{
    const SpikeGroup g({0.11, 0.52}, {cplx(1, 2), -4.0}, 0.03);
    SpikeEstimate e;
    e.locations = g.locations();
    e.amplitudes = g.amplitudes();
    for (double s : {0.0, 5.0, 31.0})
        EXPECT_NEAR(std::abs(estimate_ft(e, 0.03, s) - group_ft(g, s)), 0.0, 1e-15);
}
