#include "spinport/gaussian.hpp"

#include <cmath>
#include <stdexcept>

namespace spinport {

namespace {

std::vector<std::string> default_labels(Eigen::Index modes) {
    std::vector<std::string> labels;
    labels.reserve(static_cast<std::size_t>(modes));
    for (Eigen::Index m = 0; m < modes; ++m) labels.push_back("m" + std::to_string(m));
    return labels;
}

void check_mode(const GaussianState& state, Eigen::Index mode, const char* what) {
    if (mode < 0 || mode >= state.num_modes())
        throw std::out_of_range(std::string(what) + ": mode index " +
                                std::to_string(mode) + " out of range for " +
                                std::to_string(state.num_modes()) + " modes");
}

}  // namespace

GaussianState::GaussianState(Eigen::VectorXd mean, Eigen::MatrixXd cov,
                             std::vector<std::string> labels)
    : mean_(std::move(mean)), cov_(std::move(cov)), labels_(std::move(labels)) {
    const Eigen::Index dim = mean_.size();
    if (dim % 2 != 0) throw std::invalid_argument("GaussianState: odd mean length");
    if (cov_.rows() != dim || cov_.cols() != dim)
        throw std::invalid_argument("GaussianState: covariance shape does not match mean");
    if (!mean_.allFinite() || !cov_.allFinite())
        throw std::invalid_argument("GaussianState: non-finite entries");
    if (dim > 0) {
        const double defect = (cov_ - cov_.transpose()).cwiseAbs().maxCoeff();
        if (defect > kSymmetryTol)
            throw std::invalid_argument("GaussianState: covariance asymmetric by " +
                                        std::to_string(defect));
    }
    const auto modes = static_cast<std::size_t>(dim / 2);
    if (labels_.empty()) {
        labels_ = default_labels(dim / 2);
    } else if (labels_.size() != modes) {
        throw std::invalid_argument("GaussianState: label count does not match modes");
    }
}

GaussianState GaussianState::vacuum(Eigen::Index modes) {
    if (modes < 0) throw std::invalid_argument("vacuum: negative mode count");
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(2 * modes);
    Eigen::MatrixXd cov =
        kVacuumVariance * Eigen::MatrixXd::Identity(2 * modes, 2 * modes);
    return GaussianState(std::move(mean), std::move(cov));
}

GaussianState GaussianState::coherent(double x, double p, std::string label) {
    GaussianState state = vacuum(1);
    Eigen::VectorXd mean(2);
    mean << x, p;
    std::vector<std::string> labels;
    if (!label.empty()) labels.push_back(std::move(label));
    return GaussianState(std::move(mean), state.cov(), std::move(labels));
}

const std::string& GaussianState::label(Eigen::Index mode) const {
    check_mode(*this, mode, "label");
    return labels_[static_cast<std::size_t>(mode)];
}

Eigen::Index GaussianState::index_of(std::string_view label) const {
    for (std::size_t i = 0; i < labels_.size(); ++i)
        if (labels_[i] == label) return static_cast<Eigen::Index>(i);
    return -1;
}

bool GaussianState::satisfies_uncertainty(double slack) const {
    for (double nu : symplectic_eigenvalues(*this))
        if (nu < 0.5 - slack) return false;
    return true;
}

Eigen::MatrixXd symplectic_form(Eigen::Index modes) {
    Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(2 * modes, 2 * modes);
    for (Eigen::Index m = 0; m < modes; ++m) {
        omega(2 * m, 2 * m + 1) = 1.0;
        omega(2 * m + 1, 2 * m) = -1.0;
    }
    return omega;
}

SymplecticTransform SymplecticTransform::identity(Eigen::Index modes) {
    return {Eigen::MatrixXd::Identity(2 * modes, 2 * modes),
            Eigen::VectorXd::Zero(2 * modes)};
}

double SymplecticTransform::symplectic_defect() const {
    const Eigen::Index modes = matrix.rows() / 2;
    const Eigen::MatrixXd omega = symplectic_form(modes);
    if (matrix.rows() == 0) return 0.0;
    return (matrix * omega * matrix.transpose() - omega).cwiseAbs().maxCoeff();
}

bool SymplecticTransform::is_symplectic(double tol) const {
    return matrix.rows() == matrix.cols() && matrix.rows() % 2 == 0 &&
           symplectic_defect() <= tol;
}

SymplecticTransform SymplecticTransform::then(const SymplecticTransform& next) const {
    return {next.matrix * matrix, next.matrix * displacement + next.displacement};
}

GaussianState apply(const GaussianState& state, const SymplecticTransform& t) {
    if (t.matrix.rows() != state.mean().size())
        throw std::invalid_argument("apply: transform dimension mismatch");
    Eigen::VectorXd mean = t.matrix * state.mean() + t.displacement;
    Eigen::MatrixXd cov = t.matrix * state.cov() * t.matrix.transpose();
    return GaussianState(std::move(mean), std::move(cov), state.labels());
}

SymplecticTransform displacement_transform(Eigen::Index modes, Eigen::Index mode,
                                           double dx, double dp) {
    SymplecticTransform t = SymplecticTransform::identity(modes);
    t.displacement(2 * mode) = dx;
    t.displacement(2 * mode + 1) = dp;
    return t;
}

SymplecticTransform phase_shift_transform(Eigen::Index modes, Eigen::Index mode,
                                          double theta) {
    SymplecticTransform t = SymplecticTransform::identity(modes);
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    t.matrix(2 * mode, 2 * mode) = c;
    t.matrix(2 * mode, 2 * mode + 1) = s;
    t.matrix(2 * mode + 1, 2 * mode) = -s;
    t.matrix(2 * mode + 1, 2 * mode + 1) = c;
    return t;
}

SymplecticTransform two_mode_squeeze_transform(Eigen::Index modes, Eigen::Index i,
                                               Eigen::Index j, double r) {
    if (i == j) throw std::invalid_argument("two_mode_squeeze: modes must differ");
    SymplecticTransform t = SymplecticTransform::identity(modes);
    const double ch = std::cosh(r);
    const double sh = std::sinh(r);
    // x_i' = ch x_i - sh x_j, p_i' = ch p_i + sh p_j (and i <-> j):
    // squeezes x_i + x_j and p_i - p_j by e^{-r}.
    t.matrix(2 * i, 2 * i) = ch;
    t.matrix(2 * i, 2 * j) = -sh;
    t.matrix(2 * j, 2 * j) = ch;
    t.matrix(2 * j, 2 * i) = -sh;
    t.matrix(2 * i + 1, 2 * i + 1) = ch;
    t.matrix(2 * i + 1, 2 * j + 1) = sh;
    t.matrix(2 * j + 1, 2 * j + 1) = ch;
    t.matrix(2 * j + 1, 2 * i + 1) = sh;
    return t;
}

SymplecticTransform qnd_transform(Eigen::Index modes, Eigen::Index i, Eigen::Index j,
                                  double kappa) {
    if (i == j) throw std::invalid_argument("qnd_gate: modes must differ");
    SymplecticTransform t = SymplecticTransform::identity(modes);
    t.matrix(2 * i + 1, 2 * j) = kappa;
    t.matrix(2 * j + 1, 2 * i) = kappa;
    return t;
}

GaussianState displace(const GaussianState& state, Eigen::Index mode, double dx,
                       double dp) {
    check_mode(state, mode, "displace");
    return apply(state, displacement_transform(state.num_modes(), mode, dx, dp));
}

GaussianState phase_shift(const GaussianState& state, Eigen::Index mode, double theta) {
    check_mode(state, mode, "phase_shift");
    return apply(state, phase_shift_transform(state.num_modes(), mode, theta));
}

GaussianState two_mode_squeeze(const GaussianState& state, Eigen::Index i,
                               Eigen::Index j, double r) {
    check_mode(state, i, "two_mode_squeeze");
    check_mode(state, j, "two_mode_squeeze");
    return apply(state, two_mode_squeeze_transform(state.num_modes(), i, j, r));
}

GaussianState qnd_gate(const GaussianState& state, Eigen::Index i, Eigen::Index j,
                       double kappa) {
    check_mode(state, i, "qnd_gate");
    check_mode(state, j, "qnd_gate");
    return apply(state, qnd_transform(state.num_modes(), i, j, kappa));
}

namespace {

MeasurementOutcome condition_on(const GaussianState& state, Eigen::Index mode,
                                double angle, double outcome) {
    const Eigen::Index dim = state.mean().size();
    Eigen::VectorXd row = Eigen::VectorXd::Zero(dim);
    row(2 * mode) = std::cos(angle);
    row(2 * mode + 1) = std::sin(angle);

    const double variance = row.dot(state.cov() * row);
    if (!std::isfinite(variance))
        throw std::domain_error("homodyne_measure: non-finite marginal variance");
    if (variance < kDegenerateVarianceTol)
        throw std::domain_error("homodyne_measure: degenerate marginal variance " +
                                std::to_string(variance));
    const double expected = row.dot(state.mean());

    const Eigen::VectorXd cross = state.cov() * row;  // Cov(v, q)
    Eigen::VectorXd mean = state.mean() + cross * ((outcome - expected) / variance);
    Eigen::MatrixXd cov = state.cov() - (cross * cross.transpose()) / variance;

    // Drop the measured mode (destructive detection).
    std::vector<Eigen::Index> keep;
    keep.reserve(static_cast<std::size_t>(state.num_modes() - 1));
    for (Eigen::Index m = 0; m < state.num_modes(); ++m)
        if (m != mode) keep.push_back(m);
    GaussianState posterior =
        partial_trace(GaussianState(std::move(mean), std::move(cov), state.labels()),
                      keep);
    return {outcome, std::move(posterior)};
}

}  // namespace

MeasurementOutcome homodyne_measure(const GaussianState& state, Eigen::Index mode,
                                    double angle, double fixed_outcome) {
    check_mode(state, mode, "homodyne_measure");
    return condition_on(state, mode, angle, fixed_outcome);
}

MeasurementOutcome homodyne_measure(const GaussianState& state, Eigen::Index mode,
                                    double angle, rng::NormalStream& stream) {
    check_mode(state, mode, "homodyne_measure");
    const Eigen::Index dim = state.mean().size();
    Eigen::VectorXd row = Eigen::VectorXd::Zero(dim);
    row(2 * mode) = std::cos(angle);
    row(2 * mode + 1) = std::sin(angle);
    const double variance = row.dot(state.cov() * row);
    if (!std::isfinite(variance) || variance < 0.0)
        throw std::domain_error("homodyne_measure: invalid marginal variance");
    const double outcome = row.dot(state.mean()) + std::sqrt(variance) * stream.next();
    return condition_on(state, mode, angle, outcome);
}

GaussianState partial_trace(const GaussianState& state,
                            std::span<const Eigen::Index> keep) {
    std::vector<bool> seen(static_cast<std::size_t>(state.num_modes()), false);
    for (Eigen::Index m : keep) {
        check_mode(state, m, "partial_trace");
        if (seen[static_cast<std::size_t>(m)])
            throw std::invalid_argument("partial_trace: duplicate mode in keep set");
        seen[static_cast<std::size_t>(m)] = true;
    }
    const auto kept = static_cast<Eigen::Index>(keep.size());
    Eigen::VectorXd mean(2 * kept);
    Eigen::MatrixXd cov(2 * kept, 2 * kept);
    std::vector<std::string> labels;
    labels.reserve(keep.size());
    for (Eigen::Index a = 0; a < kept; ++a) {
        const Eigen::Index ma = keep[static_cast<std::size_t>(a)];
        mean.segment<2>(2 * a) = state.mean().segment<2>(2 * ma);
        labels.push_back(state.label(ma));
        for (Eigen::Index b = 0; b < kept; ++b) {
            const Eigen::Index mb = keep[static_cast<std::size_t>(b)];
            cov.block<2, 2>(2 * a, 2 * b) = state.cov().block<2, 2>(2 * ma, 2 * mb);
        }
    }
    return GaussianState(std::move(mean), std::move(cov), std::move(labels));
}

std::vector<double> symplectic_eigenvalues(const GaussianState& state) {
    const Eigen::Index modes = state.num_modes();
    if (modes == 0) return {};
    // Eigenvalues of Omega*Sigma come in +-i nu pairs; |lambda| recovers nu.
    const Eigen::MatrixXd m = symplectic_form(modes) * state.cov();
    Eigen::EigenSolver<Eigen::MatrixXd> solver(m, /*computeEigenvectors=*/false);
    std::vector<double> magnitudes;
    magnitudes.reserve(static_cast<std::size_t>(2 * modes));
    for (Eigen::Index k = 0; k < 2 * modes; ++k)
        magnitudes.push_back(std::abs(solver.eigenvalues()(k)));
    std::sort(magnitudes.begin(), magnitudes.end());
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(modes));
    for (Eigen::Index k = 0; k < modes; ++k)
        values.push_back(0.5 * (magnitudes[static_cast<std::size_t>(2 * k)] +
                                magnitudes[static_cast<std::size_t>(2 * k + 1)]));
    return values;
}

double gaussian_fidelity(const GaussianState& a, const GaussianState& b) {
    if (a.num_modes() != 1 || b.num_modes() != 1)
        throw std::invalid_argument("gaussian_fidelity: single-mode states required");
    const Eigen::Matrix2d va = a.cov();
    const Eigen::Matrix2d vb = b.cov();
    const Eigen::Vector2d d = a.mean() - b.mean();

    // Squared-overlap convention: vacuum vs itself -> 1, coherent vs thermal
    // n̄ -> 1/(1 + n̄). With sigma = 2V this is
    //   F = 2 exp(-d^T (2(Va+Vb))^{-1} d) / (sqrt(D + L) - sqrt(L)),
    //   D = det(2Va + 2Vb), L = (4 det Va - 1)(4 det Vb - 1).
    const Eigen::Matrix2d sum = va + vb;
    const double det_sum = sum.determinant();
    if (det_sum <= 0.0)
        throw std::domain_error("gaussian_fidelity: singular covariance sum");
    const double big_delta = 4.0 * det_sum;
    const double lambda = std::max(0.0, (4.0 * va.determinant() - 1.0)) *
                          std::max(0.0, (4.0 * vb.determinant() - 1.0));
    const double quad = d.dot(sum.inverse() * d);
    const double value =
        2.0 * std::exp(-0.5 * quad) / (std::sqrt(big_delta + lambda) - std::sqrt(lambda));
    return std::min(1.0, std::max(0.0, value));
}

}  // namespace spinport
