// mc/program.hpp
// Monte Carlo trajectory engine. Each shot samples the initial joint
// Gaussian in phase space (Philox-seeded per shot), then replays the
// compiled step list as straight-line arithmetic: gates are small affine
// updates, a measurement records the current value of the measured
// quadrature, and feedforward adds outcome-linear displacements. For
// Gaussian states, linear optics and quadrature detection this classical
// propagation reproduces the full quantum outcome statistics exactly.
//
// The inner loop is data-parallel across shots. A scalar reference kernel
// and an AVX2 kernel (4 shots per pass) implement the identical operation
// sequence; they are required to produce bit-identical rows, which keeps
// reports byte-stable no matter which kernel or thread count ran them.

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "spinport/analytic.hpp"
#include "spinport/steps.hpp"

namespace spinport::mc {

enum class OpCode : std::uint8_t { Squeeze, Qnd, Phase, Measure, Displace };

/// One straight-line instruction over the shot's register file.
/// reg_a/reg_b index quadrature registers; c0/c1 are precomputed
/// coefficients (cosh/sinh, kappa, cos/sin).
struct ShotOp {
    OpCode code = OpCode::Phase;
    int reg_a = 0;
    int reg_b = 0;
    int outcome = 0;     // Measure: destination, Displace: unused
    int term_begin = 0;  // Displace: range into terms
    int term_count = 0;
    double c0 = 0.0;
    double c1 = 0.0;
    double offset = 0.0;  // Displace constant
};

struct ShotTerm {
    int outcome = 0;
    double gain = 0.0;
};

struct ShotProgram {
    int n_regs = 0;
    int n_outcomes = 0;
    Eigen::VectorXd mean;
    Eigen::MatrixXd chol;  // lower-triangular factor of the initial covariance
    std::vector<ShotOp> ops;
    std::vector<ShotTerm> terms;
    std::vector<int> out_regs;  // surviving quadrature registers, decl order

    int row_width() const { return static_cast<int>(out_regs.size()) + n_outcomes; }
};

ShotProgram compile_program(const ProtocolDef& def, const StateOverrides& overrides = {});

/// Kernel contract: fill rows[(shot - begin) * row_width() + k] for every
/// shot in [begin, end), k running over out_regs then outcomes.
using KernelFn = void (*)(const ShotProgram&, std::uint64_t seed, std::uint64_t begin,
                          std::uint64_t end, double* rows);

struct Kernel {
    const char* name;
    KernelFn run;
};

const Kernel& scalar_kernel();
/// Null when the build has no AVX2 code path or the CPU lacks it.
const Kernel* avx2_kernel();
/// Honors SPINPORT_KERNEL=scalar|avx2, otherwise picks the widest available.
const Kernel& active_kernel();

struct McMoments {
    std::vector<int> mode_ids;
    std::vector<std::string> mode_labels;
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;       // sample covariance (unbiased) of surviving quads
    Eigen::VectorXd mean_se;   // standard error of each mean
    Eigen::VectorXd var_se;    // standard error of each variance
    std::vector<OutcomeStat> outcomes;
    std::vector<double> outcome_mean_se;
    std::vector<double> outcome_var_se;
    std::uint64_t shots = 0;
    std::uint64_t seed = 0;
};

McMoments run_monte_carlo(const ProtocolDef& def, const StateOverrides& overrides,
                          std::uint64_t shots, std::uint64_t seed, int threads = 0,
                          const Kernel* kernel = nullptr);

}  // namespace spinport::mc
