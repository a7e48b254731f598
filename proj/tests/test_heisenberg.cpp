#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/rational.hpp>
#include <cmath>

#include "spinport/analytic.hpp"
#include "spinport/heisenberg.hpp"
#include "spinport/protocols.hpp"

using namespace spinport;
using namespace spinport::heisenberg;

namespace {

double coeff_of(const OperatorExpr<double>& expr, int symbol) {
    const auto it = expr.coeffs.find(symbol);
    return it == expr.coeffs.end() ? 0.0 : it->second;
}

}  // namespace

TEST_CASE("single qnd gate row") {
    ProtocolDef def;
    def.name = "qnd_only";
    def.modes.resize(2);
    def.modes[0].label = "atom";
    def.modes[1].label = "light";
    def.steps.push_back(QndStep{0, 1, 1.0});

    const auto table = propagate(def);
    // p_light^out = p_light + x_atom.
    const auto& p_light = table.ops[3];
    CHECK(coeff_of(p_light, 3) == 1.0);
    CHECK(coeff_of(p_light, 0) == 1.0);
    CHECK(coeff_of(p_light, 1) == 0.0);
    // x rows untouched.
    CHECK(coeff_of(table.ops[0], 0) == 1.0);
    CHECK(table.ops[0].coeffs.size() == 1);
}

TEST_CASE("atom-to-light output rows") {
    protocols::ProtocolConfig cfg;
    cfg.r = 1.0;
    const ProtocolDef def = protocols::atom_to_light_def(cfg);
    const auto table = propagate(def);

    const int alice = def.mode_index("alice");
    const int epr1 = def.mode_index("epr1");
    const int epr2 = def.mode_index("epr2");
    const int probe = def.mode_index("probe");
    REQUIRE(alice == 0);

    const auto x_out = table.substituted(table.ops[static_cast<std::size_t>(2 * epr2)]);
    const auto p_out = table.substituted(table.ops[static_cast<std::size_t>(2 * epr2 + 1)]);

    // Unit signal gain: x_out carries x_alice, p_out carries p_alice.
    CHECK(coeff_of(x_out, 2 * alice) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(coeff_of(x_out, 2 * alice + 1) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(coeff_of(p_out, 2 * alice + 1) == doctest::Approx(1.0).epsilon(1e-12));

    // x_out noise is the squeezed p difference: e^{-r} (p1 - p2), a canonical
    // norm of sqrt(2) e^{-r} and variance e^{-2r}.
    const double expected = std::exp(-cfg.r);
    CHECK(coeff_of(x_out, 2 * epr1 + 1) == doctest::Approx(expected).epsilon(1e-9));
    CHECK(coeff_of(x_out, 2 * epr2 + 1) == doctest::Approx(-expected).epsilon(1e-9));
    double noise_sq = 0.0;
    for (const auto& [sym, c] : x_out.coeffs)
        if (sym != 2 * alice) noise_sq += c * c;
    CHECK(std::sqrt(noise_sq) == doctest::Approx(std::sqrt(2.0) * expected).epsilon(1e-9));
    CHECK(0.5 * noise_sq == doctest::Approx(std::exp(-2.0 * cfg.r)).epsilon(1e-9));

    // p_out additionally carries the probe shot noise suppressed by 1/kappa_probe.
    const double inv_kp = 1.0 / (cfg.kappa * std::sqrt(cfg.readout_ratio));
    CHECK(coeff_of(p_out, 2 * probe + 1) == doctest::Approx(inv_kp).epsilon(1e-12));
    double p_noise_sq = 0.0;
    for (const auto& [sym, c] : p_out.coeffs)
        if (sym != 2 * alice + 1) p_noise_sq += c * c;
    CHECK(0.5 * p_noise_sq ==
          doctest::Approx(std::exp(-2.0 * cfg.r) + 0.5 / cfg.readout_ratio).epsilon(1e-9));
}

TEST_CASE("atom-to-atom rows realize the documented sign pattern") {
    protocols::ProtocolConfig cfg;
    cfg.r = 20.0;
    const ProtocolDef def = protocols::atom_to_atom_def(cfg);
    const auto table = propagate(def);

    const int alice = def.mode_index("alice");
    const int bob = def.mode_index("bob");
    const auto x_bob = table.substituted(table.ops[static_cast<std::size_t>(2 * bob)]);
    const auto p_bob = table.substituted(table.ops[static_cast<std::size_t>(2 * bob + 1)]);

    // x_bob = -p_alice + noise, p_bob = x_alice + noise.
    CHECK(coeff_of(x_bob, 2 * alice + 1) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(coeff_of(x_bob, 2 * alice) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(coeff_of(x_bob, 2 * bob) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(coeff_of(p_bob, 2 * alice) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(coeff_of(p_bob, 2 * bob + 1) == doctest::Approx(0.0).epsilon(1e-12));

    // At r = 20 the EPR noise coefficients collapse to e^{-20}.
    double noise_sq = 0.0;
    for (const auto& [sym, c] : x_bob.coeffs)
        if (sym != 2 * alice + 1) noise_sq += c * c;
    CHECK(0.5 * noise_sq ==
          doctest::Approx(std::exp(-40.0) + 0.5 / cfg.readout_ratio).epsilon(1e-9));
}

TEST_CASE("commutator preservation over the config grid") {
    for (const auto& make : {protocols::atom_to_light_def, protocols::atom_to_atom_def,
                             protocols::swap_def}) {
        for (double r : {0.0, 0.5, 1.0, 2.0}) {
            for (double ratio : {1e2, 1e6}) {
                protocols::ProtocolConfig cfg;
                cfg.r = r;
                cfg.readout_ratio = ratio;
                const ProtocolDef def = make(cfg);
                const auto table = propagate(def);
                const auto alive = def.surviving_modes();
                for (std::size_t i = 0; i < alive.size(); ++i) {
                    for (std::size_t j = 0; j < alive.size(); ++j) {
                        const auto& xi = table.ops[static_cast<std::size_t>(2 * alive[i])];
                        const auto& pi =
                            table.ops[static_cast<std::size_t>(2 * alive[i] + 1)];
                        const auto& xj = table.ops[static_cast<std::size_t>(2 * alive[j])];
                        const auto& pj =
                            table.ops[static_cast<std::size_t>(2 * alive[j] + 1)];
                        const double expected = i == j ? 1.0 : 0.0;
                        CHECK(commutator_value(table, xi, pj) ==
                              doctest::Approx(expected).epsilon(1e-12));
                        CHECK(commutator_value(table, xi, xj) ==
                              doctest::Approx(0.0).epsilon(1e-12));
                        CHECK(commutator_value(table, pi, pj) ==
                              doctest::Approx(0.0).epsilon(1e-12));
                    }
                }
            }
        }
    }
}

TEST_CASE("exact rational commutators along the default path") {
    using Rational = boost::rational<long long>;
    // Squeeze coefficients from the rational parametrization
    // ch = (1 + t^2) / (1 - t^2), sh = 2t / (1 - t^2): ch^2 - sh^2 = 1 exactly.
    const Rational t(1, 3);
    const Rational ch = (Rational(1) + t * t) / (Rational(1) - t * t);
    const Rational sh = Rational(2) * t / (Rational(1) - t * t);
    REQUIRE(ch * ch - sh * sh == Rational(1));

    const Rational kappa(1);
    const Rational kappa_probe(7);
    const Rational inv_probe = Rational(1) / kappa_probe;
    const Rational zero(0), one(1);

    // Mirror the atom-to-light sequence with exact quarter-turn phases:
    // modes: alice 0, epr1 1, epr2 2, probe 3.
    std::vector<LinearStep<Rational>> steps;
    steps.push_back(SqueezeCoeffStep<Rational>{1, 2, ch, sh});
    steps.push_back(QndCoeffStep<Rational>{0, 1, kappa});
    steps.push_back(MeasureCoeffStep<Rational>{1, zero, one, 0});  // measure p
    steps.push_back(RotStep<Rational>{0, zero, one});              // quarter turn
    steps.push_back(QndCoeffStep<Rational>{0, 3, kappa_probe});
    steps.push_back(MeasureCoeffStep<Rational>{3, zero, one, 1});
    steps.push_back(DisplaceCoeffStep<Rational>{2, Quadrature::P, {{0, -one}}, zero});
    steps.push_back(DisplaceCoeffStep<Rational>{2, Quadrature::X, {{1, inv_probe}}, zero});
    steps.push_back(RotStep<Rational>{2, zero, -one});  // minus quarter turn

    const auto table = propagate<Rational>(4, steps);
    const auto& x_out = table.ops[4];
    const auto& p_out = table.ops[5];
    const auto& x_alice = table.ops[0];
    const auto& p_alice = table.ops[1];
    CHECK(commutator_value<Rational>(table, x_out, p_out) == one);
    CHECK(commutator_value<Rational>(table, x_alice, p_alice) == one);
    CHECK(commutator_value<Rational>(table, x_out, p_alice) == zero);
    CHECK(commutator_value<Rational>(table, x_out, x_alice) == zero);

    // The signal coefficient is exactly one.
    const auto x_sub = table.substituted(x_out);
    CHECK(x_sub.coeffs.at(0) == one);
}

TEST_CASE("oracle moments agree with the analytic engine") {
    protocols::ProtocolConfig cfg;
    cfg.r = 0.7;
    cfg.readout_ratio = 1e4;
    const ProtocolDef def = protocols::atom_to_atom_def(cfg);

    Eigen::VectorXd mean0;
    Eigen::MatrixXd cov0;
    initial_moments(def, {}, mean0, cov0);
    mean0(0) = 0.7;   // give alice a mean
    mean0(1) = -0.3;

    const OracleMoments oracle = oracle_moments(def, mean0, cov0);
    StateOverrides overrides{{"alice", GaussianState::coherent(0.7, -0.3)}};
    const EngineMoments analytic = run_analytic(def, overrides);

    CHECK((oracle.mean - analytic.mean).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((oracle.cov - analytic.cov).cwiseAbs().maxCoeff() < 1e-12);
    for (std::size_t k = 0; k < oracle.outcome_means.size(); ++k) {
        CHECK(oracle.outcome_means[k] ==
              doctest::Approx(analytic.outcomes[k].mean).epsilon(1e-12));
        CHECK(oracle.outcome_variances[k] ==
              doctest::Approx(analytic.outcomes[k].variance).epsilon(1e-12));
    }
}

TEST_CASE("touching a measured mode is rejected") {
    ProtocolDef def;
    def.modes.resize(2);
    def.modes[0].label = "a";
    def.modes[1].label = "b";
    def.outcome_names = {"m"};
    def.steps.push_back(MeasureStep{0, 0.0, 0});
    def.steps.push_back(QndStep{0, 1, 1.0});
    CHECK_THROWS_AS((void)propagate(def), std::invalid_argument);
}
