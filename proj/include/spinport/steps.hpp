// steps.hpp
// Compiled protocol representation shared by the analytic engine, the Monte
// Carlo engine and the Heisenberg propagation: declared modes plus an
// ordered list of gates, destructive measurements and outcome-linear
// displacements. Produced either by the hand-built protocol constructors or
// by compiling a DSL script; both paths must yield identical step lists.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace spinport {

enum class Quadrature : std::uint8_t { X = 0, P = 1 };

enum class ModeKind : std::uint8_t { Vacuum, Coherent, Spin, Light };

struct ModeDecl {
    std::string label;
    ModeKind kind = ModeKind::Vacuum;
    double x0 = 0.0;       // Coherent mean
    double p0 = 0.0;
    double spin_f = 0.0;   // Spin parameters
    double atom_count = 0.0;
    double photon_count = 0.0;  // Light parameter
    /// Physical amplitude per canonical unit (1 for vacuum/coherent).
    double scale = 1.0;
    /// True for modes that carry an unknown input state (Coherent decls);
    /// gain matrices and fidelities are computed with respect to these.
    bool signal = false;

    bool operator==(const ModeDecl&) const = default;
};

struct SqueezeStep {
    int mode_a = 0, mode_b = 0;
    double r = 0.0;
    bool operator==(const SqueezeStep&) const = default;
};

struct QndStep {
    int mode_a = 0, mode_b = 0;
    double kappa = 0.0;
    bool operator==(const QndStep&) const = default;
};

struct PhaseStep {
    int mode = 0;
    double theta = 0.0;
    bool operator==(const PhaseStep&) const = default;
};

struct MeasureStep {
    int mode = 0;
    double angle = 0.0;  // 0 measures x, pi/2 measures p
    int outcome = 0;     // index into ProtocolDef::outcome_names
    bool operator==(const MeasureStep&) const = default;
};

struct DisplaceTerm {
    int outcome = 0;
    double gain = 0.0;
    bool operator==(const DisplaceTerm&) const = default;
};

struct DisplaceStep {
    int mode = 0;
    Quadrature quad = Quadrature::X;
    std::vector<DisplaceTerm> terms;
    double offset = 0.0;
    bool operator==(const DisplaceStep&) const = default;
};

using Step = std::variant<SqueezeStep, QndStep, PhaseStep, MeasureStep, DisplaceStep>;

struct ProtocolDef {
    std::string name;
    std::vector<ModeDecl> modes;
    std::vector<Step> steps;
    std::vector<std::string> outcome_names;
    std::vector<std::string> warnings;  // linearization validity notes etc.

    int mode_index(std::string_view label) const {
        for (std::size_t i = 0; i < modes.size(); ++i)
            if (modes[i].label == label) return static_cast<int>(i);
        return -1;
    }

    /// Modes never consumed by a MeasureStep, in declaration order.
    std::vector<int> surviving_modes() const {
        std::vector<bool> dead(modes.size(), false);
        for (const Step& step : steps)
            if (const auto* m = std::get_if<MeasureStep>(&step))
                dead[static_cast<std::size_t>(m->mode)] = true;
        std::vector<int> alive;
        for (std::size_t i = 0; i < modes.size(); ++i)
            if (!dead[i]) alive.push_back(static_cast<int>(i));
        return alive;
    }

    std::vector<int> signal_modes() const {
        std::vector<int> out;
        for (std::size_t i = 0; i < modes.size(); ++i)
            if (modes[i].signal) out.push_back(static_cast<int>(i));
        return out;
    }
};

}  // namespace spinport
