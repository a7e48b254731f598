#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "spinport/gaussian.hpp"
#include "spinport/spin_light.hpp"

using namespace spinport;
using namespace spinport::spin_light;

TEST_CASE("spin ensemble mapping") {
    SpinEnsemble cs{4.0, 1e5, Axis::X, +1, "alice"};
    const ModeMap map = spin_to_mode(cs);
    CHECK(map.scale == doctest::Approx(632.4555320336759).epsilon(1e-12));
    CHECK(map.x_component == "F_z");
    CHECK(map.p_component == "F_y");
    CHECK(map.linearization_ok);

    SUBCASE("coherent spin state maps to vacuum variance") {
        // Var(F_z) = N F / 2 for the fully polarized ensemble.
        const double var_fz = cs.atom_count * cs.spin_f / 2.0;
        CHECK(var_fz / (map.scale * map.scale) == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("mean conversion") {
        CHECK(632.455532033676 / map.scale == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("small ensembles are flagged") {
        SpinEnsemble tiny{0.5, 10, Axis::X, +1, "tiny"};
        CHECK_FALSE(spin_to_mode(tiny).linearization_ok);
    }
    SUBCASE("round trip through the scale is exact") {
        const double fz_mean = 123.456;
        const double canonical = fz_mean / map.scale;
        CHECK(canonical * map.scale == doctest::Approx(fz_mean).epsilon(1e-12));
    }
    SUBCASE("invalid parameters are rejected") {
        CHECK_THROWS_AS((void)spin_to_mode(SpinEnsemble{0.4, 10, Axis::X, 1, ""}),
                        std::invalid_argument);
        CHECK_THROWS_AS((void)spin_to_mode(SpinEnsemble{0.5, 0, Axis::X, 1, ""}),
                        std::invalid_argument);
    }
}

TEST_CASE("stokes field mapping") {
    StokesField field{8e5, "epr1"};

    SUBCASE("canonical normalization") {
        const ModeMap map = stokes_to_mode(field);
        CHECK(map.scale == doctest::Approx(std::sqrt(4e5)).epsilon(1e-12));
        CHECK(map.scale == doctest::Approx(632.4555320336759).epsilon(1e-12));
        // Coherent light: Var(S_z) = n/4 maps to canonical 1/2.
        const double var_sz = field.photon_count / 4.0;
        CHECK(var_sz / (map.scale * map.scale) == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(map.vacuum_variance == 0.5);
    }
    SUBCASE("legacy sqrt(n) normalization has vacuum variance 1/4") {
        const ModeMap map = stokes_to_mode(field, StokesNorm::SqrtN);
        CHECK(map.scale == doctest::Approx(std::sqrt(8e5)).epsilon(1e-12));
        const double var_sz = field.photon_count / 4.0;
        CHECK(var_sz / (map.scale * map.scale) == doctest::Approx(0.25).epsilon(1e-12));
        CHECK(map.vacuum_variance == 0.25);
        // The two normalizations differ by exactly sqrt(2).
        CHECK(map.scale / stokes_to_mode(field).scale ==
              doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    }
}

TEST_CASE("coupling gain") {
    SUBCASE("unity condition") {
        // a = 2/n with n = 2 F N gives kappa = 1 exactly.
        const double f = 4.0, atoms = 1e5;
        const double n = 2.0 * f * atoms;
        const double a = 2.0 / n;
        CHECK(coupling_kappa(a, n, atoms, f) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("square root scaling in n") {
        const double a = 3e-6, f = 4.0, atoms = 1e5, n = 8e5;
        const double base = coupling_kappa(a, n, atoms, f);
        CHECK(coupling_kappa(a, 2.0 * n, atoms, f) ==
              doctest::Approx(std::sqrt(2.0) * base).epsilon(1e-12));
    }
    SUBCASE("formula structure of a") {
        const double a1 = coupling_a(1e-9, 1e-6, 5e6, 8e8, -0.5, 4.0);
        const double a2 = coupling_a(1e-9, 2e-6, 5e6, 8e8, -0.5, 4.0);
        CHECK(a1 == doctest::Approx(2.0 * a2).epsilon(1e-12));
        CHECK_THROWS_AS((void)coupling_a(1e-9, 0.0, 5e6, 8e8, -0.5, 4.0),
                        std::invalid_argument);
    }
    SUBCASE("spec recomputes kappa from its own backing parameters") {
        const CouplingSpec spec =
            CouplingSpec::from_physical(7.26e-9, 1e-6, 5e6, 8e8, -0.5, 4.0, 1e5, 8e5);
        CHECK(spec.kappa ==
              doctest::Approx(coupling_kappa(
                  coupling_a(spec.sigma, spec.area, spec.gamma, spec.delta, spec.alpha_v,
                             spec.spin_f),
                  spec.photon_count, spec.atom_count, spec.spin_f)).epsilon(1e-15));
    }
}

TEST_CASE("frame rotations about the polarization axis") {
    SpinEnsemble ens{4.0, 1e5, Axis::X, +1, "alice"};

    SUBCASE("quarter turn exchanges the transverse roles") {
        const FrameRotation rot = frame_rotation(ens, Axis::X, M_PI / 2.0);
        CHECK(rot.phase_angle == doctest::Approx(M_PI / 2.0));
        CHECK(rot.x_component == "F_y");
        CHECK(rot.x_sign == 1);
        CHECK(rot.p_component == "F_z");
        CHECK(rot.p_sign == -1);
    }
    SUBCASE("zero angle is the identity") {
        const FrameRotation rot = frame_rotation(ens, Axis::X, 0.0);
        CHECK(rot.x_component == "F_z");
        CHECK(rot.p_component == "F_y");
        CHECK(rot.x_sign == 1);
        CHECK(rot.p_sign == 1);
    }
    SUBCASE("two quarter turns equal a half turn") {
        const FrameRotation half = frame_rotation(ens, Axis::X, M_PI);
        CHECK(half.x_component == "F_z");
        CHECK(half.x_sign == -1);
        CHECK(half.p_component == "F_y");
        CHECK(half.p_sign == -1);
        // And the canonical action matches two successive quarter turns.
        GaussianState state = displace(GaussianState::vacuum(1), 0, 1.0, 0.5);
        GaussianState twice = phase_shift(
            phase_shift(state, 0, frame_rotation(ens, Axis::X, M_PI / 2).phase_angle), 0,
            frame_rotation(ens, Axis::X, M_PI / 2).phase_angle);
        GaussianState once = phase_shift(state, 0, half.phase_angle);
        CHECK((twice.mean() - once.mean()).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("rotations about other axes are rejected") {
        CHECK_THROWS_AS((void)frame_rotation(ens, Axis::Y, M_PI / 2.0),
                        std::invalid_argument);
        CHECK_THROWS_AS((void)frame_rotation(ens, Axis::Z, M_PI), std::invalid_argument);
    }
    SUBCASE("only protocol angles are allowed") {
        CHECK_THROWS_AS((void)frame_rotation(ens, Axis::X, 0.3), std::invalid_argument);
    }
}

TEST_CASE("mapped reference states pass the uncertainty check exactly") {
    // A coherent spin state / coherent beam maps to the vacuum, which is a
    // valid Gaussian state with symplectic eigenvalue exactly 1/2.
    const GaussianState vac = GaussianState::vacuum(1);
    const auto values = symplectic_eigenvalues(vac);
    CHECK(values[0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(vac.satisfies_uncertainty(0.0));
}
