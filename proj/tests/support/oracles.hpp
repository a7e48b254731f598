// Test-only oracles, kept independent of the library code paths they check:
//  * plain-loop multivariate normal conditioning (no Eigen block algebra)
//  * truncated Fock-space density matrices and Uhlmann fidelity

#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "spinport/gaussian.hpp"

namespace spinport::testing {

struct ConditionedMoments {
    std::vector<double> mean;
    std::vector<std::vector<double>> cov;
};

/// Textbook conditioning of a joint normal on observing value m of the
/// linear functional c.v, written with plain loops.
inline ConditionedMoments condition_on_functional(const std::vector<double>& mean,
                                                  const std::vector<std::vector<double>>& cov,
                                                  const std::vector<double>& c, double m) {
    const std::size_t n = mean.size();
    double q_mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) q_mean += c[i] * mean[i];
    double q_var = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) q_var += c[i] * cov[i][j] * c[j];
    if (q_var <= 0.0) throw std::runtime_error("degenerate functional variance");

    std::vector<double> cross(n, 0.0);  // Cov(v_i, q)
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) cross[i] += cov[i][j] * c[j];

    ConditionedMoments out;
    out.mean.resize(n);
    out.cov.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        out.mean[i] = mean[i] + cross[i] * (m - q_mean) / q_var;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            out.cov[i][j] = cov[i][j] - cross[i] * cross[j] / q_var;
    return out;
}

using ComplexMatrix = Eigen::MatrixXcd;

inline ComplexMatrix annihilation_operator(int cutoff) {
    ComplexMatrix a = ComplexMatrix::Zero(cutoff, cutoff);
    for (int k = 1; k < cutoff; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
    return a;
}

/// Density matrix of a single-mode Gaussian state in the truncated number
/// basis, built as displaced/rotated/squeezed thermal. Self-checked: the
/// constructed moments must reproduce the requested mean and covariance.
inline ComplexMatrix fock_density_matrix(const GaussianState& state, int cutoff) {
    if (state.num_modes() != 1) throw std::invalid_argument("single mode required");
    const Eigen::Matrix2d v = state.cov();
    const Eigen::Vector2d mu = state.mean();

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(v);
    const double v1 = eig.eigenvalues()(0);
    const double v2 = eig.eigenvalues()(1);
    const double nu = std::sqrt(v1 * v2);
    const double nbar = std::max(0.0, nu - 0.5);
    const double squeeze = 0.25 * std::log(v2 / v1);
    Eigen::Matrix2d rot = eig.eigenvectors();
    if (rot.determinant() < 0) rot.col(1) *= -1.0;
    // rot = [[cos t, -sin t], [sin t, cos t]]
    const double theta = std::atan2(rot(1, 0), rot(0, 0));

    const ComplexMatrix a = annihilation_operator(cutoff);
    const ComplexMatrix ad = a.adjoint();
    const std::complex<double> i_unit(0.0, 1.0);

    // alpha from <x> = sqrt(2) Re alpha, <p> = sqrt(2) Im alpha.
    const std::complex<double> alpha((mu(0)) / std::sqrt(2.0), (mu(1)) / std::sqrt(2.0));

    ComplexMatrix rho = ComplexMatrix::Zero(cutoff, cutoff);
    double weight_sum = 0.0;
    for (int k = 0; k < cutoff; ++k) {
        const double w =
            nbar == 0.0 ? (k == 0 ? 1.0 : 0.0)
                        : std::pow(nbar / (1.0 + nbar), k) / (1.0 + nbar);
        rho(k, k) = w;
        weight_sum += w;
    }
    rho /= weight_sum;

    // x-squeeze along the second eigenvector frame: S = exp(s/2 (a^2 - a+^2))
    const ComplexMatrix squeezer = (0.5 * squeeze * (a * a - ad * ad)).exp();
    rho = squeezer * rho * squeezer.adjoint();
    // phase rotation exp(-i theta a+a) rotates (x, p) by theta
    const ComplexMatrix rotator = (-i_unit * theta * (ad * a)).exp();
    rho = rotator * rho * rotator.adjoint();
    const ComplexMatrix displacer = (alpha * ad - std::conj(alpha) * a).exp();
    rho = displacer * rho * displacer.adjoint();

    // Self check against the requested moments.
    const ComplexMatrix x_op = (a + ad) / std::sqrt(2.0);
    const ComplexMatrix p_op = i_unit * (ad - a) / std::sqrt(2.0);
    const double mx = (rho * x_op).trace().real();
    const double mp = (rho * p_op).trace().real();
    const double vxx = (rho * x_op * x_op).trace().real() - mx * mx;
    const double vpp = (rho * p_op * p_op).trace().real() - mp * mp;
    const double vxp =
        0.5 * ((rho * (x_op * p_op + p_op * x_op)).trace().real()) - mx * mp;
    const double err = std::max({std::abs(mx - mu(0)), std::abs(mp - mu(1)),
                                 std::abs(vxx - v(0, 0)), std::abs(vpp - v(1, 1)),
                                 std::abs(vxp - v(0, 1))});
    if (err > 1e-6)
        throw std::runtime_error("fock oracle self-check failed, error " +
                                 std::to_string(err));
    return rho;
}

inline ComplexMatrix psd_sqrt(const ComplexMatrix& m) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(m);
    Eigen::VectorXd clamped = eig.eigenvalues().cwiseMax(0.0);
    return eig.eigenvectors() * clamped.cwiseSqrt().asDiagonal() *
           eig.eigenvectors().adjoint();
}

/// Uhlmann fidelity (squared convention) via truncated density matrices.
inline double fock_fidelity(const GaussianState& a, const GaussianState& b,
                            int cutoff = 60) {
    const ComplexMatrix rho = fock_density_matrix(a, cutoff);
    const ComplexMatrix sigma = fock_density_matrix(b, cutoff);
    const ComplexMatrix root = psd_sqrt(rho);
    const ComplexMatrix inner = psd_sqrt(root * sigma * root);
    const double trace = inner.trace().real();
    return trace * trace;
}

}  // namespace spinport::testing
