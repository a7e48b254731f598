#include "spinport/protocols.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "spinport/mc/program.hpp"
#include "spinport/spin_light.hpp"

namespace spinport::protocols {

namespace {

constexpr double kHalfPi = M_PI / 2.0;

void require(bool condition, const char* message) {
    if (!condition) throw std::invalid_argument(message);
}

ModeDecl spin_mode(std::string label, double f, double atoms) {
    spin_light::SpinEnsemble ensemble{f, atoms, spin_light::Axis::X, +1, label};
    const spin_light::ModeMap map = spin_light::spin_to_mode(ensemble);
    ModeDecl decl;
    decl.label = std::move(label);
    decl.kind = ModeKind::Spin;
    decl.spin_f = f;
    decl.atom_count = atoms;
    decl.scale = map.scale;
    decl.signal = true;
    return decl;
}

ModeDecl light_mode(std::string label, double photons) {
    spin_light::StokesField field{photons, label};
    const spin_light::ModeMap map = spin_light::stokes_to_mode(field);
    ModeDecl decl;
    decl.label = std::move(label);
    decl.kind = ModeKind::Light;
    decl.photon_count = photons;
    decl.scale = map.scale;
    return decl;
}

void append_linearization_warnings(ProtocolDef& def) {
    for (const ModeDecl& decl : def.modes) {
        if (decl.kind == ModeKind::Spin && decl.spin_f * decl.atom_count < 100.0)
            def.warnings.push_back("mode '" + decl.label +
                                   "': N*F < 100, linearized spin map is marginal");
        if (decl.kind == ModeKind::Light && decl.photon_count < 100.0)
            def.warnings.push_back("mode '" + decl.label +
                                   "': n < 100, bright-beam approximation is marginal");
    }
}

// Probe pass along y: conjugating the standard gate with +pi/2 phases on
// both modes turns (p_i += k x_j, p_j += k x_i) into
// (x_atom -= k p_light, x_light -= k p_atom).
void push_probe_pass(std::vector<Step>& steps, int atom, int light, double kappa) {
    steps.push_back(PhaseStep{atom, kHalfPi});
    steps.push_back(PhaseStep{light, kHalfPi});
    steps.push_back(QndStep{atom, light, kappa});
    steps.push_back(PhaseStep{atom, -kHalfPi});
    steps.push_back(PhaseStep{light, -kHalfPi});
}

std::vector<double> gains_or_default(const ProtocolConfig& cfg,
                                     std::vector<double> defaults) {
    if (!cfg.feedforward_gains.has_value()) return defaults;
    require(cfg.feedforward_gains->size() == defaults.size(),
            "feedforward_gains: wrong number of gains for this protocol");
    return *cfg.feedforward_gains;
}

}  // namespace

void validate_config(const ProtocolConfig& cfg) {
    require(cfg.r >= 0.0, "config: r must be >= 0");
    require(cfg.kappa >= 0.0, "config: kappa must be >= 0");
    require(cfg.readout_ratio > 0.0, "config: readout_ratio must be > 0");
    require(std::isfinite(cfg.r) && std::isfinite(cfg.kappa) &&
                std::isfinite(cfg.readout_ratio),
            "config: non-finite parameter");
    if (cfg.engine == Engine::MonteCarlo)
        require(cfg.shots >= 1, "config: monte_carlo requires shots >= 1");
}

ProtocolDef atom_to_light_def(const ProtocolConfig& cfg) {
    validate_config(cfg);
    require(cfg.kappa > 0.0, "atom_to_light: kappa = 0 gives no joint measurement");
    const double kappa_probe = cfg.kappa * std::sqrt(cfg.readout_ratio);
    const std::vector<double> gains =
        gains_or_default(cfg, {-1.0, 1.0 / kappa_probe});

    ProtocolDef def;
    def.name = "atom_to_light";
    def.modes = {spin_mode("alice", kBuiltinSpinF, kBuiltinAtomCount),
                 light_mode("epr1", kBuiltinPhotonCount),
                 light_mode("epr2", kBuiltinPhotonCount),
                 light_mode("probe", kBuiltinPhotonCount * cfg.readout_ratio)};
    def.outcome_names = {"d_light", "d_probe"};

    const int alice = 0, epr1 = 1, epr2 = 2, probe = 3;
    def.steps.push_back(SqueezeStep{epr1, epr2, cfg.r});
    def.steps.push_back(QndStep{alice, epr1, cfg.kappa});
    def.steps.push_back(MeasureStep{epr1, kHalfPi, 0});
    def.steps.push_back(PhaseStep{alice, kHalfPi});  // pi/2 spin rotation about x
    def.steps.push_back(QndStep{alice, probe, kappa_probe});
    def.steps.push_back(MeasureStep{probe, kHalfPi, 1});
    def.steps.push_back(DisplaceStep{epr2, Quadrature::P, {{0, gains[0]}}, 0.0});
    def.steps.push_back(DisplaceStep{epr2, Quadrature::X, {{1, gains[1]}}, 0.0});
    // Align the output frame with the input: undo the fixed quarter turn the
    // feedforward leaves behind, so unit gain is the identity map.
    def.steps.push_back(PhaseStep{epr2, -kHalfPi});
    append_linearization_warnings(def);
    return def;
}

ProtocolDef atom_to_atom_def(const ProtocolConfig& cfg) {
    validate_config(cfg);
    const double kappa_probe = cfg.kappa * std::sqrt(cfg.readout_ratio);
    const std::vector<double> gains =
        gains_or_default(cfg, {1.0 / kappa_probe, -1.0, 1.0, 1.0 / kappa_probe});

    ProtocolDef def;
    def.name = "atom_to_atom";
    def.modes = {spin_mode("alice", kBuiltinSpinF, kBuiltinAtomCount),
                 spin_mode("bob", kBuiltinSpinF, kBuiltinAtomCount),
                 light_mode("epr1", kBuiltinPhotonCount),
                 light_mode("epr2", kBuiltinPhotonCount),
                 light_mode("probe_b", kBuiltinPhotonCount * cfg.readout_ratio),
                 light_mode("probe_a", kBuiltinPhotonCount * cfg.readout_ratio)};
    def.outcome_names = {"d_a1", "d_b1", "d_a2", "d_b2"};

    const int alice = 0, bob = 1, epr1 = 2, epr2 = 3, probe_b = 4, probe_a = 5;
    def.steps.push_back(SqueezeStep{epr1, epr2, cfg.r});
    // Alice's beam is phase shifted by a quarter turn before her sample.
    def.steps.push_back(PhaseStep{epr1, -kHalfPi});
    def.steps.push_back(QndStep{alice, epr1, cfg.kappa});
    def.steps.push_back(MeasureStep{epr1, kHalfPi, 0});
    push_probe_pass(def.steps, bob, probe_b, kappa_probe);
    def.steps.push_back(MeasureStep{probe_b, 0.0, 1});
    push_probe_pass(def.steps, alice, probe_a, kappa_probe);
    def.steps.push_back(MeasureStep{probe_a, 0.0, 2});
    def.steps.push_back(QndStep{bob, epr2, cfg.kappa});
    def.steps.push_back(MeasureStep{epr2, kHalfPi, 3});
    def.steps.push_back(
        DisplaceStep{bob, Quadrature::X, {{2, gains[0]}, {3, gains[1]}}, 0.0});
    def.steps.push_back(
        DisplaceStep{bob, Quadrature::P, {{0, gains[2]}, {1, gains[3]}}, 0.0});
    append_linearization_warnings(def);
    return def;
}

ProtocolDef swap_def(const ProtocolConfig& cfg) {
    validate_config(cfg);
    const std::vector<double> gains = gains_or_default(cfg, {-1.0, -1.0});

    ProtocolDef def;
    def.name = "swap";
    def.modes = {spin_mode("a", kBuiltinSpinF, kBuiltinAtomCount),
                 spin_mode("b", kBuiltinSpinF, kBuiltinAtomCount),
                 light_mode("epr1", kBuiltinPhotonCount),
                 light_mode("epr2", kBuiltinPhotonCount)};
    def.outcome_names = {"d1", "d2"};

    const int a = 0, b = 1, epr1 = 2, epr2 = 3;
    def.steps.push_back(SqueezeStep{epr1, epr2, cfg.r});
    // Beam 1 passes through both samples along z and is detected.
    def.steps.push_back(QndStep{a, epr1, cfg.kappa});
    def.steps.push_back(QndStep{b, epr1, cfg.kappa});
    def.steps.push_back(MeasureStep{epr1, kHalfPi, 0});
    // Beam 2, phase shifted, passes along y: conjugate so that
    // x_atom += k p_beam and x_beam += k p_atom.
    def.steps.push_back(PhaseStep{a, -kHalfPi});
    def.steps.push_back(PhaseStep{b, -kHalfPi});
    def.steps.push_back(PhaseStep{epr2, kHalfPi});
    def.steps.push_back(QndStep{a, epr2, cfg.kappa});
    def.steps.push_back(QndStep{b, epr2, cfg.kappa});
    def.steps.push_back(PhaseStep{a, kHalfPi});
    def.steps.push_back(PhaseStep{b, kHalfPi});
    def.steps.push_back(PhaseStep{epr2, -kHalfPi});
    def.steps.push_back(MeasureStep{epr2, 0.0, 1});
    def.steps.push_back(DisplaceStep{a, Quadrature::X, {{0, gains[0]}}, 0.0});
    def.steps.push_back(DisplaceStep{b, Quadrature::X, {{0, gains[0]}}, 0.0});
    def.steps.push_back(DisplaceStep{a, Quadrature::P, {{1, gains[1]}}, 0.0});
    def.steps.push_back(DisplaceStep{b, Quadrature::P, {{1, gains[1]}}, 0.0});
    append_linearization_warnings(def);
    return def;
}

namespace {

SystemReport input_report(const ModeDecl& decl, const StateOverrides& overrides) {
    SystemReport rep;
    rep.label = decl.label;
    const auto it = overrides.find(decl.label);
    if (it != overrides.end()) {
        rep.mean = {it->second.mean()(0), it->second.mean()(1)};
        const Eigen::Matrix2d c = it->second.cov();
        rep.cov = {c(0, 0), c(0, 1), c(1, 0), c(1, 1)};
    } else {
        rep.mean = {decl.kind == ModeKind::Coherent ? decl.x0 : 0.0,
                    decl.kind == ModeKind::Coherent ? decl.p0 : 0.0};
        rep.cov = {kVacuumVariance, 0.0, 0.0, kVacuumVariance};
    }
    return rep;
}

Eigen::Matrix2d cov_of(const SystemReport& rep) {
    Eigen::Matrix2d m;
    m << rep.cov[0], rep.cov[1], rep.cov[2], rep.cov[3];
    return m;
}

}  // namespace

ProtocolReport run_protocol(const ProtocolDef& def, const ProtocolConfig& cfg,
                            const StateOverrides& overrides) {
    validate_config(cfg);
    for (const auto& [label, state] : overrides)
        if (def.mode_index(label) < 0)
            throw std::invalid_argument("run_protocol: unknown mode '" + label + "'");

    ProtocolReport report;
    report.protocol = def.name;
    report.engine = cfg.engine == Engine::Analytic ? "analytic" : "monte_carlo";
    report.r = cfg.r;
    report.kappa = cfg.kappa;
    report.readout_ratio = cfg.readout_ratio;
    report.warnings = def.warnings;

    const std::vector<int> signals = def.signal_modes();
    const std::vector<int> alive = def.surviving_modes();
    for (int s : signals) {
        report.signal_labels.push_back(def.modes[static_cast<std::size_t>(s)].label);
        report.inputs.push_back(input_report(def.modes[static_cast<std::size_t>(s)], overrides));
    }

    // Exact mean map and intended (gain-mapped) output moments.
    const Eigen::MatrixXd gain = mean_gain_matrix(def);
    Eigen::MatrixXd signal_cov =
        Eigen::MatrixXd::Zero(2 * signals.size(), 2 * signals.size());
    for (std::size_t s = 0; s < signals.size(); ++s)
        signal_cov.block<2, 2>(2 * s, 2 * s) = cov_of(report.inputs[s]);
    Eigen::VectorXd initial_mean;
    Eigen::MatrixXd initial_cov;
    initial_moments(def, overrides, initial_mean, initial_cov);
    const Eigen::VectorXd intended_all = propagate_means(def, initial_mean);

    // Engine run.
    Eigen::VectorXd out_mean;
    Eigen::MatrixXd out_cov;
    std::vector<OutcomeStat> outcomes;
    std::optional<mc::McMoments> mc_result;
    if (cfg.engine == Engine::Analytic) {
        EngineMoments moments = run_analytic(def, overrides);
        out_mean = std::move(moments.mean);
        out_cov = std::move(moments.cov);
        outcomes = std::move(moments.outcomes);
    } else {
        mc_result = mc::run_monte_carlo(def, overrides, cfg.shots, cfg.seed, cfg.threads);
        out_mean = mc_result->mean;
        out_cov = mc_result->cov;
        outcomes = mc_result->outcomes;
        report.shots = mc_result->shots;
        report.seed = mc_result->seed;
    }

    for (std::size_t a = 0; a < alive.size(); ++a) {
        const int mode = alive[a];
        OutputReport out;
        out.moments.label = def.modes[static_cast<std::size_t>(mode)].label;
        out.moments.mean = {out_mean(2 * a), out_mean(2 * a + 1)};
        out.moments.cov = {out_cov(2 * a, 2 * a), out_cov(2 * a, 2 * a + 1),
                           out_cov(2 * a + 1, 2 * a), out_cov(2 * a + 1, 2 * a + 1)};
        if (mc_result.has_value() && cfg.shots > 1) {
            out.moments.mean_se = {mc_result->mean_se(2 * a), mc_result->mean_se(2 * a + 1)};
            out.moments.var_se = {mc_result->var_se(2 * a), mc_result->var_se(2 * a + 1)};
        }

        const Eigen::MatrixXd g = gain.middleRows(2 * a, 2);
        out.gain.resize(2);
        for (int row = 0; row < 2; ++row)
            for (Eigen::Index col = 0; col < g.cols(); ++col)
                out.gain[static_cast<std::size_t>(row)].push_back(g(row, col));

        const Eigen::Matrix2d target_cov = g * signal_cov * g.transpose();
        const bool estimated = !(cfg.engine == Engine::MonteCarlo && cfg.shots == 1);
        if (estimated) {
            out.added_noise = {out_cov(2 * a, 2 * a) - target_cov(0, 0),
                               out_cov(2 * a + 1, 2 * a + 1) - target_cov(1, 1)};
        } else {
            // A single trajectory carries no variance estimate.
            out.added_noise = {std::numeric_limits<double>::quiet_NaN(),
                               std::numeric_limits<double>::quiet_NaN()};
        }

        // Fidelity against the intended state, when that state is physical.
        const double target_purity = target_cov.determinant();
        if (estimated && target_purity >= 0.25 * (1.0 - 1e-9)) {
            Eigen::Vector2d target_mean = intended_all.segment<2>(2 * mode);
            Eigen::Vector2d actual_mean(out_mean(2 * a), out_mean(2 * a + 1));
            Eigen::Matrix2d actual_cov = out_cov.block<2, 2>(2 * a, 2 * a);
            // Symmetrize the sampled covariance before handing it over.
            actual_cov = 0.5 * (actual_cov + actual_cov.transpose()).eval();
            const GaussianState target(target_mean, target_cov,
                                       {out.moments.label + "_target"});
            const GaussianState actual(actual_mean, actual_cov, {out.moments.label});
            out.fidelity_coherent = gaussian_fidelity(target, actual);
        }
        report.outputs.push_back(std::move(out));
    }
    if (!report.outputs.empty()) {
        report.primary_output = report.outputs.back().moments.label;
        report.fidelity_coherent = report.outputs.back().fidelity_coherent;
    }

    for (std::size_t k = 0; k < outcomes.size(); ++k) {
        MeasurementReport m;
        m.id = outcomes[k].name;
        for (const Step& step : def.steps) {
            if (const auto* ms = std::get_if<MeasureStep>(&step)) {
                if (static_cast<std::size_t>(ms->outcome) == k) {
                    m.mode_label = def.modes[static_cast<std::size_t>(ms->mode)].label;
                    m.angle = ms->angle;
                }
            }
        }
        m.mean = outcomes[k].mean;
        if (!(cfg.engine == Engine::MonteCarlo && cfg.shots == 1))
            m.variance = outcomes[k].variance;
        if (mc_result.has_value() && cfg.shots > 1)
            m.mean_se = mc_result->outcome_mean_se[k];
        report.measurements.push_back(std::move(m));
    }

    // Hard floor for exact engines; sampled estimates may fluctuate below
    // zero by their own standard error.
    for (const OutputReport& out : report.outputs) {
        for (int q = 0; q < 2; ++q) {
            const double noise = out.added_noise[static_cast<std::size_t>(q)];
            double slack = 1e-9;
            if (out.moments.var_se.has_value())
                slack += 5.0 * (*out.moments.var_se)[static_cast<std::size_t>(q)];
            if (std::isfinite(noise) && noise < -slack)
                throw std::runtime_error("run_protocol: negative added noise " +
                                         std::to_string(noise) + " on '" +
                                         out.moments.label + "'");
        }
    }
    return report;
}

ProtocolReport teleport_atom_to_light(const ProtocolConfig& cfg,
                                      const GaussianState& input) {
    return run_protocol(atom_to_light_def(cfg), cfg, {{"alice", input}});
}

ProtocolReport teleport_atom_to_atom(const ProtocolConfig& cfg,
                                     const GaussianState& alice,
                                     const GaussianState& bob) {
    return run_protocol(atom_to_atom_def(cfg), cfg, {{"alice", alice}, {"bob", bob}});
}

ProtocolReport swap_states(const ProtocolConfig& cfg, const GaussianState& a,
                           const GaussianState& b) {
    return run_protocol(swap_def(cfg), cfg, {{"a", a}, {"b", b}});
}

}  // namespace spinport::protocols
