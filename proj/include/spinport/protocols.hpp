// protocols.hpp
// The three shipped protocols as executable step sequences, plus the report
// assembly shared by the analytic and Monte Carlo engines.
//
// Canonical step lists (kappa = 1 defaults):
//
//   atom_to_light   EPR pass through the sample, destructive S_y detection,
//                   pi/2 spin rotation, auxiliary probe readout of the
//                   rotated spin, feedforward onto EPR beam 2, final frame
//                   rotation. Output mean equals the input mean; added
//                   noise per quadrature is e^{-2r}, plus 1/(2*ratio) on p
//                   from the finite-strength probe readout.
//
//   atom_to_atom    Alice's phase-shifted EPR pass + detection, Bob's probe
//                   readout, Alice's probe readout, Bob's EPR pass +
//                   detection, two feedforward displacements. Bob ends in
//                   Alice's state up to the fixed quarter-turn sign pattern
//                   x -> -p, p -> x; added noise e^{-2r} + 1/(2*ratio) per
//                   quadrature.
//
//   swap            One EPR beam passes through both samples along z, the
//                   other (phase shifted) along y; both are detected and
//                   all four transverse components are displaced. Each
//                   sample ends in minus the other's state with e^{-2r}
//                   added noise per quadrature.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spinport/analytic.hpp"
#include "spinport/gaussian.hpp"
#include "spinport/steps.hpp"

namespace spinport::protocols {

enum class Engine { Analytic, MonteCarlo };

struct ProtocolConfig {
    double r = 1.0;               // parametric gain of the EPR source
    double kappa = 1.0;           // QND gain of the EPR passes
    double readout_ratio = 1e6;   // probe photon number over EPR photon number
    std::optional<std::vector<double>> feedforward_gains;  // protocol-specific order
    Engine engine = Engine::Analytic;
    std::uint64_t shots = 100000;
    std::uint64_t seed = 0;
    int threads = 0;  // 0 = hardware default
};

void validate_config(const ProtocolConfig& cfg);

// Physical parameters baked into the built-in mode declarations. They fix
// the spin/light scale metadata only; canonical dynamics depend on cfg.
inline constexpr double kBuiltinSpinF = 4.0;
inline constexpr double kBuiltinAtomCount = 1e5;
inline constexpr double kBuiltinPhotonCount = 8e5;  // 2 F N

/// Hand-built step lists. The DSL builtins must compile to exactly these.
ProtocolDef atom_to_light_def(const ProtocolConfig& cfg);
ProtocolDef atom_to_atom_def(const ProtocolConfig& cfg);
ProtocolDef swap_def(const ProtocolConfig& cfg);

struct SystemReport {
    std::string label;
    std::array<double, 2> mean{};
    std::array<double, 4> cov{};  // row-major 2x2
    std::optional<std::array<double, 2>> mean_se;
    std::optional<std::array<double, 2>> var_se;
};

struct OutputReport {
    SystemReport moments;
    /// Rows (x, p) of the exact mean map restricted to this output; columns
    /// run over signal modes, x then p each.
    std::vector<std::vector<double>> gain;
    std::array<double, 2> added_noise{};
    /// Fidelity against the gain-mapped input state; absent when the mapped
    /// target is not a physical single-mode state.
    std::optional<double> fidelity_coherent;
};

struct MeasurementReport {
    std::string id;
    std::string mode_label;
    double angle = 0.0;
    double mean = 0.0;
    std::optional<double> variance;  // absent for a single trajectory
    std::optional<double> mean_se;
};

struct ProtocolReport {
    std::string schema = "spinport-report/1";
    std::string protocol;
    std::string engine;
    double r = 0.0;
    double kappa = 1.0;
    double readout_ratio = 1e6;
    std::uint64_t shots = 0;  // 0 for the analytic engine
    std::uint64_t seed = 0;
    std::vector<std::string> signal_labels;
    std::vector<SystemReport> inputs;
    std::vector<OutputReport> outputs;
    std::vector<MeasurementReport> measurements;
    std::string primary_output;
    std::optional<double> fidelity_coherent;  // primary output's value
    std::vector<std::string> warnings;
};

/// Run a compiled protocol under either engine and assemble the report.
ProtocolReport run_protocol(const ProtocolDef& def, const ProtocolConfig& cfg,
                            const StateOverrides& overrides = {});

ProtocolReport teleport_atom_to_light(const ProtocolConfig& cfg,
                                      const GaussianState& input);
ProtocolReport teleport_atom_to_atom(const ProtocolConfig& cfg,
                                     const GaussianState& alice,
                                     const GaussianState& bob);
ProtocolReport swap_states(const ProtocolConfig& cfg, const GaussianState& a,
                           const GaussianState& b);

}  // namespace spinport::protocols
