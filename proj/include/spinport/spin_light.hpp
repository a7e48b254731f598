// spin_light.hpp
// Maps macroscopic systems (polarized collective atomic spins and bright
// Stokes fields) onto canonical bosonic modes, and computes the QND gain
// from physical coupling parameters.
//
// For an ensemble polarized along +x the canonical pair is
//   x = F_z / sqrt(N F),  p = F_y / sqrt(N F),
// so a coherent spin state (Var F_z = N F / 2) maps exactly to vacuum.
// For a bright x-polarized field the canonical normalization is
//   x = S_z / sqrt(n/2),  p = S_y / sqrt(n/2),
// which maps coherent light (Var S_z = n/4) to vacuum as well. The
// alternative sqrt(n) normalization (vacuum variance 1/4) is kept available
// behind StokesNorm::SqrtN but is not used by the shipped protocols.

#pragma once

#include <array>
#include <cmath>
#include <string>

namespace spinport::spin_light {

enum class Axis { X, Y, Z };

struct SpinEnsemble {
    double spin_f = 0.5;   // total spin per atom (half-integer)
    double atom_count = 1; // N
    Axis polarization_axis = Axis::X;
    int polarization_sign = +1;
    std::string mode_label;
};

struct StokesField {
    double photon_count = 1;  // n; strong component polarized along x
    std::string mode_label;
};

enum class StokesNorm { Canonical, SqrtN };

/// Result of mapping a physical system to one canonical mode.
struct ModeMap {
    double scale = 1.0;           // physical amplitude per canonical unit
    std::string x_component;      // physical observable carried by canonical x
    std::string p_component;      // physical observable carried by canonical p
    double vacuum_variance = 0.5; // canonical variance of the reference state
    bool linearization_ok = true; // false when the macroscopic limit is doubtful
};

ModeMap spin_to_mode(const SpinEnsemble& ensemble);
ModeMap stokes_to_mode(const StokesField& field, StokesNorm norm = StokesNorm::Canonical);

/// Coupling constant a = (sigma / (A F)) (gamma / delta) alpha_v.
double coupling_a(double sigma, double area, double gamma, double delta,
                  double alpha_v, double spin_f);

/// QND gain kappa = |a| sqrt(F N n / 2); kappa = 1 is the balanced
/// joint-measurement condition.
double coupling_kappa(double a, double photon_count, double atom_count, double spin_f);

/// Gain plus the physical parameters backing it; `kappa` is always the value
/// recomputed from `a` and the counts (single source of truth).
struct CouplingSpec {
    double kappa = 0.0;
    double a = 0.0;
    double sigma = 0.0;
    double area = 0.0;
    double gamma = 0.0;
    double delta = 0.0;
    double alpha_v = 0.0;
    double spin_f = 0.0;
    double atom_count = 0.0;
    double photon_count = 0.0;

    static CouplingSpec from_physical(double sigma, double area, double gamma,
                                      double delta, double alpha_v, double spin_f,
                                      double atom_count, double photon_count);
};

/// Physical rotation of a polarized ensemble about its polarization axis.
/// Canonically this is a phase-space rotation by the same angle; the struct
/// records how the transverse spin components are relabeled.
struct FrameRotation {
    double phase_angle = 0.0;  // argument for gaussian phase_shift
    std::string x_component;   // physical meaning of canonical x afterwards
    std::string p_component;
    int x_sign = +1;
    int p_sign = +1;
};

FrameRotation frame_rotation(const SpinEnsemble& ensemble, Axis rotation_axis,
                             double angle);

}  // namespace spinport::spin_light
