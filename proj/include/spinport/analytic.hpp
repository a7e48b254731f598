// analytic.hpp
// Exact moment propagation engine. The joint Gaussian over all declared
// modes is evolved step by step; a destructive measurement freezes the
// measured quadrature as a classical record (its row never changes again
// because dead modes are never touched), and outcome-linear feedforward
// displacements become exact rank-one updates. The result is the exact
// unconditional mean and covariance of every surviving mode together with
// the statistics of every measurement record.

#pragma once

#include <Eigen/Dense>

#include <map>
#include <string>
#include <vector>

#include "spinport/gaussian.hpp"
#include "spinport/steps.hpp"

namespace spinport {

struct OutcomeStat {
    std::string name;
    double mean = 0.0;
    double variance = 0.0;
};

/// Moments of the surviving modes (declaration order) plus outcome records.
struct EngineMoments {
    std::vector<int> mode_ids;
    std::vector<std::string> mode_labels;
    Eigen::VectorXd mean;  // 2 * surviving
    Eigen::MatrixXd cov;
    std::vector<OutcomeStat> outcomes;
};

using StateOverrides = std::map<std::string, GaussianState>;

/// Initial joint mean/covariance over all declared modes. Overrides replace
/// a declared mode's initial single-mode state by label.
void initial_moments(const ProtocolDef& def, const StateOverrides& overrides,
                     Eigen::VectorXd& mean, Eigen::MatrixXd& cov);

EngineMoments run_analytic(const ProtocolDef& def, const StateOverrides& overrides = {});

/// Mean-only propagation from explicit initial means over all declared
/// modes; exact, and linear in the input.
Eigen::VectorXd propagate_means(const ProtocolDef& def,
                                const Eigen::VectorXd& initial_means);

/// Exact linear map from signal-mode means to surviving-mode means,
/// obtained from mean propagation columnwise. Rows follow surviving-mode
/// declaration order, columns signal-mode declaration order (x then p).
Eigen::MatrixXd mean_gain_matrix(const ProtocolDef& def);

}  // namespace spinport
