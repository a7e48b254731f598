// gaussian.hpp
// Exact Gaussian states over bosonic modes and the phase-space operations
// used by the protocols: squeezing, QND coupling, phase rotation,
// displacement, destructive homodyne measurement with conditional update,
// partial trace and single-mode fidelity.
//
// Conventions, fixed once and used everywhere:
//   * quadrature ordering is interleaved (x1, p1, x2, p2, ...)
//   * vacuum variance is 1/2 per quadrature ([x, p] = i)
//   * phase_shift(theta) maps (x, p) -> (x cos t + p sin t, -x sin t + p cos t)
//   * two_mode_squeeze(r) squeezes the x-sum and p-difference:
//     Var(x_i + x_j) = Var(p_i - p_j) = e^{-2r} from vacuum
//   * qnd_gate(kappa) applies p_i += k x_j, p_j += k x_i with equal gains;
//     sign/axis variants are obtained by conjugating with phase_shift
//   * measurement is destructive: the measured mode is removed

#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

#include "spinport/rng.hpp"

namespace spinport {

inline constexpr double kVacuumVariance = 0.5;
inline constexpr double kSymmetryTol = 1e-10;
inline constexpr double kSymplecticTol = 1e-10;
inline constexpr double kUncertaintySlack = 1e-9;
inline constexpr double kDegenerateVarianceTol = 1e-12;

/// Mean vector plus covariance matrix over M modes. Immutable value type:
/// every operation returns a new state.
class GaussianState {
public:
    GaussianState() = default;  // zero modes
    GaussianState(Eigen::VectorXd mean, Eigen::MatrixXd cov,
                  std::vector<std::string> labels = {});

    static GaussianState vacuum(Eigen::Index modes);
    /// Vacuum-width state displaced to (x, p).
    static GaussianState coherent(double x, double p, std::string label = {});

    Eigen::Index num_modes() const { return static_cast<Eigen::Index>(labels_.size()); }
    const Eigen::VectorXd& mean() const { return mean_; }
    const Eigen::MatrixXd& cov() const { return cov_; }
    const std::vector<std::string>& labels() const { return labels_; }
    const std::string& label(Eigen::Index mode) const;
    Eigen::Index index_of(std::string_view label) const;  // -1 if absent

    double mean_x(Eigen::Index mode) const { return mean_(2 * mode); }
    double mean_p(Eigen::Index mode) const { return mean_(2 * mode + 1); }
    double var_x(Eigen::Index mode) const { return cov_(2 * mode, 2 * mode); }
    double var_p(Eigen::Index mode) const { return cov_(2 * mode + 1, 2 * mode + 1); }

    /// True when all symplectic eigenvalues are >= 1/2 - slack.
    bool satisfies_uncertainty(double slack = kUncertaintySlack) const;

private:
    Eigen::VectorXd mean_;
    Eigen::MatrixXd cov_;
    std::vector<std::string> labels_;
};

/// Linear phase-space map S together with a displacement d: v -> S v + d.
struct SymplecticTransform {
    Eigen::MatrixXd matrix;
    Eigen::VectorXd displacement;

    static SymplecticTransform identity(Eigen::Index modes);
    /// Max |S Omega S^T - Omega| entry.
    double symplectic_defect() const;
    bool is_symplectic(double tol = kSymplecticTol) const;
    /// this followed by next.
    SymplecticTransform then(const SymplecticTransform& next) const;
};

/// The antisymmetric form with 2x2 blocks [[0, 1], [-1, 0]].
Eigen::MatrixXd symplectic_form(Eigen::Index modes);

GaussianState apply(const GaussianState& state, const SymplecticTransform& t);

// Transform builders; the state-level operations below are thin wrappers.
SymplecticTransform displacement_transform(Eigen::Index modes, Eigen::Index mode,
                                           double dx, double dp);
SymplecticTransform phase_shift_transform(Eigen::Index modes, Eigen::Index mode,
                                          double theta);
SymplecticTransform two_mode_squeeze_transform(Eigen::Index modes, Eigen::Index i,
                                               Eigen::Index j, double r);
SymplecticTransform qnd_transform(Eigen::Index modes, Eigen::Index i, Eigen::Index j,
                                  double kappa);

GaussianState displace(const GaussianState& state, Eigen::Index mode, double dx,
                       double dp);
GaussianState phase_shift(const GaussianState& state, Eigen::Index mode, double theta);
GaussianState two_mode_squeeze(const GaussianState& state, Eigen::Index i,
                               Eigen::Index j, double r);
GaussianState qnd_gate(const GaussianState& state, Eigen::Index i, Eigen::Index j,
                       double kappa);

struct MeasurementOutcome {
    double outcome = 0.0;
    GaussianState posterior;  // measured mode removed
};

/// Destructive homodyne detection of cos(a) x + sin(a) p on one mode with a
/// fixed (externally supplied) outcome. The posterior is the conditional
/// Gaussian over the remaining modes.
MeasurementOutcome homodyne_measure(const GaussianState& state, Eigen::Index mode,
                                    double angle, double fixed_outcome);

/// Same, drawing the outcome from the marginal normal distribution.
MeasurementOutcome homodyne_measure(const GaussianState& state, Eigen::Index mode,
                                    double angle, rng::NormalStream& stream);

/// Keep the listed modes (in the order given), tracing out the rest.
GaussianState partial_trace(const GaussianState& state,
                            std::span<const Eigen::Index> keep);

/// The M Williamson invariants, sorted ascending. All >= 1/2 for physical
/// states; all == 1/2 for pure states.
std::vector<double> symplectic_eigenvalues(const GaussianState& state);

/// Uhlmann fidelity (squared-overlap convention) between two single-mode
/// Gaussian states. 1 iff the states coincide.
double gaussian_fidelity(const GaussianState& a, const GaussianState& b);

}  // namespace spinport
