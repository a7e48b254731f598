// feasibility.hpp
// Experimental design calculator: coupling constant, unity-gain photon
// number, optical depth and geometry checks for a vapor-cell realization,
// with the cesium design point as the reference input file.

#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace spinport::feasibility {

enum class Transition { D1, D2 };
enum class Branch { FUpper, FLower };  // F = I + 1/2 or F = I - 1/2

/// Sign table of the dynamic vector polarizability:
/// D1 -> +1 / -1, D2 -> -1/2 / +1/2 for the upper / lower hyperfine branch.
double vector_polarizability(Transition transition, Branch branch);

struct PhysicalParams {
    std::optional<double> sigma;  // resonant cross section, cm^2
    std::optional<double> lambda; // wavelength, cm (sigma = sigma_scale * lambda^2)
    double sigma_scale = 1.0;
    double area = 0.0;   // beam cross section, cm^2
    double gamma = 0.0;  // natural linewidth, Hz (only ratios to delta are used)
    double delta = 0.0;  // detuning, Hz
    std::optional<double> alpha_v;
    std::optional<Transition> transition;
    std::optional<Branch> branch;
    double spin_f = 0.0;  // F
    std::optional<double> nuclear_i;
    double atom_count = 0.0;    // N
    double photon_count = 0.0;  // n
    std::optional<std::array<double, 3>> cell_cm;  // cell dimensions, cm
    std::optional<double> density;                 // cm^-3
    std::optional<double> pulse_duration;          // s
    std::optional<double> opo_bandwidth;           // Hz
};

enum class CheckStatus { Pass, Warn };

struct Check {
    std::string name;
    CheckStatus status = CheckStatus::Pass;
    double value = 0.0;
    double threshold = 0.0;
    std::string formula;  // what was evaluated, spelled out
};

struct FeasibilityReport {
    double sigma = 0.0;
    double alpha_v = 0.0;
    double a = 0.0;            // coupling constant
    double kappa = 0.0;        // |a| sqrt(F N n / 2) at the given n
    double n_required = 0.0;   // 2 F N, the unity-gain photon number
    double a_unity = 0.0;      // 2 / n_required
    double gamma_over_delta = 0.0;
    double alpha_delta = 0.0;  // sigma N gamma / (A |delta|)
    double sigma_n_over_area = 0.0;  // ratio between the two optical-depth forms
    double a_optimal = 0.0;    // self-consistent optimal beam cross section, cm^2
    std::vector<Check> checks;
    std::vector<std::string> warnings;
};

/// Pure function of the parameters; identical input gives an identical
/// report. Throws std::invalid_argument naming any missing field.
FeasibilityReport design_report(const PhysicalParams& params);

/// Flat key = value parameter file (with # comments), or a flat JSON object.
/// Returns the params or throws std::invalid_argument listing missing keys.
PhysicalParams parse_params_file(const std::string& text);

}  // namespace spinport::feasibility
