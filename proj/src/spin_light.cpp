#include "spinport/spin_light.hpp"

#include <stdexcept>

namespace spinport::spin_light {

namespace {

constexpr double kMacroscopicThreshold = 100.0;

const char* axis_name(Axis axis) {
    switch (axis) {
        case Axis::X: return "x";
        case Axis::Y: return "y";
        case Axis::Z: return "z";
    }
    return "?";
}

// Cyclic successor: x -> y -> z -> x.
Axis next_axis(Axis axis) {
    switch (axis) {
        case Axis::X: return Axis::Y;
        case Axis::Y: return Axis::Z;
        case Axis::Z: return Axis::X;
    }
    return Axis::X;
}

std::string spin_component(Axis axis) { return std::string("F_") + axis_name(axis); }

void validate_ensemble(const SpinEnsemble& e) {
    if (e.atom_count < 1) throw std::invalid_argument("SpinEnsemble: N must be >= 1");
    const double twice_f = 2.0 * e.spin_f;
    if (e.spin_f <= 0.0 || std::abs(twice_f - std::round(twice_f)) > 1e-9)
        throw std::invalid_argument("SpinEnsemble: F must be a positive half-integer");
}

}  // namespace

ModeMap spin_to_mode(const SpinEnsemble& ensemble) {
    validate_ensemble(ensemble);
    const double macro = ensemble.atom_count * ensemble.spin_f;
    ModeMap map;
    map.scale = std::sqrt(macro);
    // For polarization along P, canonical x carries F_{P+2}, p carries F_{P+1}
    // (cyclically), so an x-polarized ensemble gives x = F_z, p = F_y.
    const Axis p_axis = next_axis(ensemble.polarization_axis);
    const Axis x_axis = next_axis(p_axis);
    map.x_component = spin_component(x_axis);
    map.p_component = spin_component(p_axis);
    map.vacuum_variance = 0.5;
    map.linearization_ok = macro >= kMacroscopicThreshold;
    return map;
}

ModeMap stokes_to_mode(const StokesField& field, StokesNorm norm) {
    if (field.photon_count < 1)
        throw std::invalid_argument("StokesField: n must be >= 1");
    ModeMap map;
    map.x_component = "S_z";
    map.p_component = "S_y";
    if (norm == StokesNorm::Canonical) {
        map.scale = std::sqrt(field.photon_count / 2.0);
        map.vacuum_variance = 0.5;  // coherent light: Var S_z = n/4
    } else {
        map.scale = std::sqrt(field.photon_count);
        map.vacuum_variance = 0.25;
    }
    map.linearization_ok = field.photon_count >= kMacroscopicThreshold;
    return map;
}

double coupling_a(double sigma, double area, double gamma, double delta,
                  double alpha_v, double spin_f) {
    if (area == 0.0 || spin_f == 0.0 || delta == 0.0)
        throw std::invalid_argument("coupling_a: zero denominator");
    return (sigma / (area * spin_f)) * (gamma / delta) * alpha_v;
}

double coupling_kappa(double a, double photon_count, double atom_count, double spin_f) {
    if (photon_count <= 0.0 || atom_count <= 0.0 || spin_f <= 0.0)
        throw std::invalid_argument("coupling_kappa: counts must be positive");
    return std::abs(a) * std::sqrt(spin_f * atom_count * photon_count / 2.0);
}

CouplingSpec CouplingSpec::from_physical(double sigma, double area, double gamma,
                                         double delta, double alpha_v, double spin_f,
                                         double atom_count, double photon_count) {
    CouplingSpec spec;
    spec.sigma = sigma;
    spec.area = area;
    spec.gamma = gamma;
    spec.delta = delta;
    spec.alpha_v = alpha_v;
    spec.spin_f = spin_f;
    spec.atom_count = atom_count;
    spec.photon_count = photon_count;
    spec.a = coupling_a(sigma, area, gamma, delta, alpha_v, spin_f);
    spec.kappa = coupling_kappa(spec.a, photon_count, atom_count, spin_f);
    return spec;
}

FrameRotation frame_rotation(const SpinEnsemble& ensemble, Axis rotation_axis,
                             double angle) {
    validate_ensemble(ensemble);
    if (rotation_axis != ensemble.polarization_axis)
        throw std::invalid_argument(
            "frame_rotation: only rotations about the polarization axis preserve the "
            "linearized map");
    constexpr double kHalfPi = M_PI / 2.0;
    const bool allowed = std::abs(angle) < 1e-12 ||
                         std::abs(std::abs(angle) - kHalfPi) < 1e-12 ||
                         std::abs(std::abs(angle) - M_PI) < 1e-12;
    if (!allowed)
        throw std::invalid_argument(
            "frame_rotation: protocol rotations are multiples of pi/2");

    const ModeMap base = spin_to_mode(ensemble);
    FrameRotation rot;
    rot.phase_angle = angle;
    // Quarter-turn bookkeeping for the physical component labels:
    // after +pi/2 about the polarization axis, canonical x carries the old p
    // component and canonical p carries minus the old x component.
    const int quarter = static_cast<int>(std::llround(angle / kHalfPi));
    std::array<std::string, 2> comp = {base.x_component, base.p_component};
    std::array<int, 2> sign = {1, 1};
    int turns = ((quarter % 4) + 4) % 4;
    for (int t = 0; t < turns; ++t) {
        std::array<std::string, 2> next_comp = {comp[1], comp[0]};
        std::array<int, 2> next_sign = {sign[1], -sign[0]};
        comp = next_comp;
        sign = next_sign;
    }
    rot.x_component = comp[0];
    rot.p_component = comp[1];
    rot.x_sign = sign[0];
    rot.p_sign = sign[1];
    return rot;
}

}  // namespace spinport::spin_light
