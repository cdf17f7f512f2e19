#pragma once

///
/// \file pencil.hpp
///
/// Matrix pencil estimation of K complex exponentials from 2m consecutive
/// samples
///
///   f(s0 + i) = sum_j u'_j exp(i 2 pi i t_j),   i = -m, ..., m-1.
///
/// The Toeplitz pair
///
///   H0[r][c] = f(s0 + c - r),   H1[r][c] = f(s0 + c - r - 1)
///
/// factors as H0 = V D_u' V^H and H1 = V D_u' D_alpha V^H with
/// alpha_j = exp(-i 2 pi t_j) and V[r][j] = alpha_j^r, so the non-zero
/// generalized eigenvalues of (H1, H0) are the alpha_j. The estimator below
/// projects the noisy pair onto the top-K left singular subspace of H0 before
/// solving the K x K problem, then snaps every eigenvalue onto the unit circle.
///

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "krummp/error.hpp"
#include "krummp/metrics.hpp"
#include "krummp/signal.hpp"

namespace krummp {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

struct PencilPair
{
    CMatrix h0;
    CMatrix h1;
    std::int64_t offset = 0;
    int half_width = 0;
};

struct MmpOptions
{
    double rank_rel_tol = 1e-10;  ///< sigma_K(H0) must exceed this times sigma_1(H0)
    double lambda_abs_tol = 1e-12; ///< eigenvalues at or below this modulus are rejected
    double node_tie_tol = 1e-12;  ///< minimum |alpha_i - alpha_j| for the amplitude fit
};

inline PencilPair build_pencil(std::span<const cplx> samples, std::int64_t offset, int half_width)
{
    if (half_width < 1)
        throw InvalidArgument("build_pencil: half_width must be >= 1");
    if (samples.size() != 2 * static_cast<std::size_t>(half_width))
        throw InvalidArgument("build_pencil: window must hold exactly 2*half_width samples");

    const int m = half_width;
    auto at = [&](int i) { return samples[static_cast<std::size_t>(i + m)]; };
    PencilPair p{CMatrix(m, m), CMatrix(m, m), offset, m};
    for (int r = 0; r < m; ++r) {
        for (int c = 0; c < m; ++c) {
            p.h0(r, c) = at(c - r);
            p.h1(r, c) = at(c - r - 1);
        }
    }
    return p;
}

inline PencilPair build_pencil(const FourierWindow& window)
{
    return build_pencil(window.samples, window.offset, window.half_width);
}

///
/// m x K matrix with entry (r, j) = nodes[j]^r; nodes are unit modulus.
///
class VandermondeMatrix
{
public:
    VandermondeMatrix(std::vector<cplx> nodes, int rows) : nodes_(std::move(nodes)), rows_(rows)
    {
        if (rows_ < 1)
            throw InvalidArgument("VandermondeMatrix: rows must be >= 1");
        for (cplx a : nodes_)
            if (std::abs(std::abs(a) - 1.0) > 1e-12)
                throw InvalidArgument("VandermondeMatrix: nodes must have unit modulus");
    }

    const std::vector<cplx>& nodes() const noexcept { return nodes_; }
    int rows() const noexcept { return rows_; }
    Eigen::Index cols() const noexcept { return static_cast<Eigen::Index>(nodes_.size()); }

    CMatrix matrix() const
    {
        CMatrix v(rows_, cols());
        for (Eigen::Index j = 0; j < cols(); ++j) {
            cplx p{1.0, 0.0};
            for (int r = 0; r < rows_; ++r) {
                v(r, j) = p;
                p *= nodes_[static_cast<std::size_t>(j)];
            }
        }
        return v;
    }

private:
    std::vector<cplx> nodes_;
    int rows_;
};

struct LeastSquaresFit
{
    std::vector<cplx> coefficients;
    double residual_norm = 0.0;
};

///
/// Minimizes ||V x - rhs||_2 for the Vandermonde matrix on `nodes` with
/// rhs.size() rows.
///
inline LeastSquaresFit vandermonde_lstsq(std::span<const cplx> nodes, std::span<const cplx> rhs,
                                         double tie_tol = 1e-12)
{
    const auto k = nodes.size();
    if (k == 0)
        throw InvalidArgument("vandermonde_lstsq: no nodes");
    if (rhs.size() < k)
        throw InvalidArgument("vandermonde_lstsq: fewer rows than nodes");
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j)
            if (std::abs(nodes[i] - nodes[j]) < tie_tol)
                throw DegenerateInput("vandermonde_lstsq: coincident nodes",
                                      std::abs(nodes[i] - nodes[j]));

    const VandermondeMatrix vm({nodes.begin(), nodes.end()}, static_cast<int>(rhs.size()));
    const CMatrix v = vm.matrix();
    const CVector b = Eigen::Map<const CVector>(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
    const CVector x = v.colPivHouseholderQr().solve(b);

    LeastSquaresFit fit;
    fit.coefficients.assign(x.data(), x.data() + x.size());
    fit.residual_norm = (v * x - b).norm();
    return fit;
}

struct SingularRange
{
    double sigma_min = 0.0;
    double sigma_max = 0.0;
};

inline SingularRange vandermonde_extremal_singular_values(std::span<const cplx> nodes, int rows)
{
    if (rows < static_cast<int>(nodes.size()))
        throw InvalidArgument("vandermonde_extremal_singular_values: rows < K");
    const VandermondeMatrix vm({nodes.begin(), nodes.end()}, rows);
    Eigen::JacobiSVD<CMatrix> svd(vm.matrix());
    const auto& s = svd.singularValues();
    return {s(s.size() - 1), s(0)};
}

///
/// Eigenvalues of a^{-1} b, i.e. the generalized eigenvalues of the pencil
/// (b, a) when a is invertible. a is K x K with K small, so conditioning is
/// checked through sigma_min(a) instead of running a QZ solver.
///
inline std::vector<cplx> generalized_eigenvalues(const CMatrix& a, const CMatrix& b,
                                                 double rel_tol = 1e-10)
{
    if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows() || a.rows() == 0)
        throw InvalidArgument("generalized_eigenvalues: need two square matrices of equal size");

    Eigen::JacobiSVD<CMatrix> svd(a);
    const auto& s = svd.singularValues();
    const double smin = s(s.size() - 1);
    if (!(smin > rel_tol * s(0)))
        throw DegenerateInput("generalized_eigenvalues: left matrix is numerically singular", smin);

    const CMatrix m = a.fullPivLu().solve(b);
    Eigen::ComplexEigenSolver<CMatrix> es(m, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success)
        throw Error("generalized_eigenvalues: eigen solver did not converge");
    const CVector& ev = es.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

/// t = (-arg(alpha) / 2 pi) mod 1 with arg in (-pi, pi]; arg = pi gives 0.5.
inline double location_from_node(cplx alpha)
{
    return wrap_unit(-std::arg(alpha) / (2.0 * std::numbers::pi));
}

///
/// Modified matrix pencil estimate of K spikes.
///
/// \param pencil      (H0, H1) built from a window centred at pencil.offset.
/// \param k           number of spikes, 1 <= k <= m.
/// \param amplitude_samples  the m observed samples at offsets 0..m-1 of the
///                    window, used for the amplitude fit.
///
/// The result is sorted by location. Throws DegenerateInput when
/// sigma_K(H0) is below the rank tolerance and ZeroEigenvalue when a
/// recovered eigenvalue has no usable phase.
///
inline SpikeEstimate mmp_estimate(const PencilPair& pencil, int k,
                                  std::span<const cplx> amplitude_samples,
                                  const MmpOptions& opt = {})
{
    const int m = pencil.half_width;
    if (k < 1 || k > m)
        throw InvalidArgument("mmp_estimate: need 1 <= K <= m");
    if (pencil.h0.rows() != m || pencil.h0.cols() != m || pencil.h1.rows() != m ||
        pencil.h1.cols() != m)
        throw InvalidArgument("mmp_estimate: pencil matrices must be m x m");
    if (amplitude_samples.size() != static_cast<std::size_t>(m))
        throw InvalidArgument("mmp_estimate: need m amplitude samples");

    Eigen::JacobiSVD<CMatrix> svd(pencil.h0, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    const double sigma_k = sv(k - 1);
    if (!(sigma_k > opt.rank_rel_tol * sv(0)))
        throw DegenerateInput("mmp_estimate: sigma_K(H0) below rank tolerance", sigma_k);

    const CMatrix u = svd.matrixU().leftCols(k);
    const CMatrix a = u.adjoint() * pencil.h0 * u;
    const CMatrix b = u.adjoint() * pencil.h1 * u;
    const auto lambdas = generalized_eigenvalues(a, b, opt.rank_rel_tol);

    // alpha_hat = lambda / |lambda|; the amplitude system uses conj(alpha_hat)
    // because v_i = sum_j u'_j exp(+i 2 pi i t_j).
    std::vector<double> t(static_cast<std::size_t>(k));
    std::vector<cplx> fit_nodes(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) {
        const cplx lam = lambdas[static_cast<std::size_t>(j)];
        const double mod = std::abs(lam);
        if (!(mod > opt.lambda_abs_tol))
            throw ZeroEigenvalue("mmp_estimate: generalized eigenvalue at zero", mod);
        t[static_cast<std::size_t>(j)] = location_from_node(lam / mod);
        fit_nodes[static_cast<std::size_t>(j)] = std::conj(lam / mod);
    }

    const auto fit = vandermonde_lstsq(fit_nodes, amplitude_samples, opt.node_tie_tol);

    std::vector<std::size_t> order(static_cast<std::size_t>(k));
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return t[x] < t[y]; });

    SpikeEstimate est;
    est.diagnostics.sigma_k_of_h0 = sigma_k;
    est.diagnostics.residual_norm = fit.residual_norm;
    for (auto j : order) {
        est.locations.push_back(t[j]);
        // u_j = u'_j exp(-i 2 pi s0 t_j)
        est.amplitudes.push_back(fit.coefficients[j] *
                                 unit_phase(-static_cast<double>(pencil.offset) * t[j]));
    }
    return est;
}

/// Builds the pencil from `window` and runs the estimator on it.
inline SpikeEstimate mmp_estimate(const FourierWindow& window, int k, const MmpOptions& opt = {})
{
    const auto pencil = build_pencil(window);
    std::span<const cplx> v(window.samples);
    return mmp_estimate(pencil, k, v.subspan(static_cast<std::size_t>(window.half_width)), opt);
}

} // namespace krummp
