#include "spinport/analytic.hpp"

#include <cmath>
#include <stdexcept>

namespace spinport {

// The engine propagates the mean vector and a square-root factor A of the
// covariance (Sigma = A A^T). Gates act on rows of A; a measurement
// snapshots the measured quadrature as a row over the initial coordinates;
// feedforward adds outcome rows onto the target row. Assembling variances
// as sums of squares keeps them accurate even when intermediate
// anti-squeezed variances reach e^{4r}: naive Sigma propagation would
// cancel catastrophically there.

namespace {

struct Propagation {
    Eigen::VectorXd mean;
    Eigen::MatrixXd factor;  // empty for mean-only runs
    std::vector<Eigen::VectorXd> outcome_rows;  // over initial coordinates
    std::vector<double> outcome_means;
    std::vector<bool> outcome_ready;
    bool with_factor = false;
};

void apply_block(Propagation& ctx, const std::vector<int>& vars,
                 const Eigen::MatrixXd& block) {
    const auto n = static_cast<Eigen::Index>(vars.size());
    Eigen::VectorXd mean_sub(n);
    for (Eigen::Index k = 0; k < n; ++k)
        mean_sub(k) = ctx.mean(vars[static_cast<std::size_t>(k)]);
    const Eigen::VectorXd new_mean = block * mean_sub;
    for (Eigen::Index k = 0; k < n; ++k)
        ctx.mean(vars[static_cast<std::size_t>(k)]) = new_mean(k);
    if (!ctx.with_factor) return;

    Eigen::MatrixXd rows(n, ctx.factor.cols());
    for (Eigen::Index k = 0; k < n; ++k)
        rows.row(k) = ctx.factor.row(vars[static_cast<std::size_t>(k)]);
    const Eigen::MatrixXd new_rows = block * rows;
    for (Eigen::Index k = 0; k < n; ++k)
        ctx.factor.row(vars[static_cast<std::size_t>(k)]) = new_rows.row(k);
}

void apply_step(Propagation& ctx, const Step& step) {
    if (const auto* s = std::get_if<SqueezeStep>(&step)) {
        const double ch = std::cosh(s->r);
        const double sh = std::sinh(s->r);
        Eigen::MatrixXd block(4, 4);
        block << ch, 0, -sh, 0,
                 0, ch, 0, sh,
                 -sh, 0, ch, 0,
                 0, sh, 0, ch;
        apply_block(ctx, {2 * s->mode_a, 2 * s->mode_a + 1, 2 * s->mode_b, 2 * s->mode_b + 1},
                    block);
    } else if (const auto* q = std::get_if<QndStep>(&step)) {
        Eigen::MatrixXd block = Eigen::MatrixXd::Identity(4, 4);
        block(1, 2) = q->kappa;
        block(3, 0) = q->kappa;
        apply_block(ctx, {2 * q->mode_a, 2 * q->mode_a + 1, 2 * q->mode_b, 2 * q->mode_b + 1},
                    block);
    } else if (const auto* p = std::get_if<PhaseStep>(&step)) {
        const double c = std::cos(p->theta);
        const double s = std::sin(p->theta);
        Eigen::MatrixXd block(2, 2);
        block << c, s, -s, c;
        apply_block(ctx, {2 * p->mode, 2 * p->mode + 1}, block);
    } else if (const auto* m = std::get_if<MeasureStep>(&step)) {
        const auto id = static_cast<std::size_t>(m->outcome);
        if (id >= ctx.outcome_ready.size() || ctx.outcome_ready[id])
            throw std::logic_error("analytic: bad outcome index");
        const double c = std::cos(m->angle);
        const double s = std::sin(m->angle);
        ctx.outcome_means[id] =
            c * ctx.mean(2 * m->mode) + s * ctx.mean(2 * m->mode + 1);
        if (ctx.with_factor)
            ctx.outcome_rows[id] = c * ctx.factor.row(2 * m->mode).transpose() +
                                   s * ctx.factor.row(2 * m->mode + 1).transpose();
        ctx.outcome_ready[id] = true;
    } else if (const auto* d = std::get_if<DisplaceStep>(&step)) {
        const Eigen::Index target = 2 * d->mode + (d->quad == Quadrature::P ? 1 : 0);
        double mean_shift = d->offset;
        for (const DisplaceTerm& term : d->terms) {
            const auto id = static_cast<std::size_t>(term.outcome);
            if (id >= ctx.outcome_ready.size() || !ctx.outcome_ready[id])
                throw std::logic_error("analytic: displacement before measurement");
            mean_shift += term.gain * ctx.outcome_means[id];
            if (ctx.with_factor)
                ctx.factor.row(target) +=
                    term.gain * ctx.outcome_rows[id].transpose();
        }
        ctx.mean(target) += mean_shift;
    }
}

Propagation make_propagation(const ProtocolDef& def, const StateOverrides& overrides,
                             bool with_factor) {
    Propagation ctx;
    ctx.with_factor = with_factor;
    Eigen::MatrixXd cov;
    initial_moments(def, overrides, ctx.mean, cov);
    if (with_factor) {
        Eigen::LLT<Eigen::MatrixXd> llt(cov);
        if (llt.info() != Eigen::Success)
            throw std::invalid_argument("run_analytic: initial covariance not positive definite");
        ctx.factor = llt.matrixL();
    }
    const std::size_t n_outcomes = def.outcome_names.size();
    ctx.outcome_rows.resize(n_outcomes);
    ctx.outcome_means.assign(n_outcomes, 0.0);
    ctx.outcome_ready.assign(n_outcomes, false);
    return ctx;
}

}  // namespace

void initial_moments(const ProtocolDef& def, const StateOverrides& overrides,
                     Eigen::VectorXd& mean, Eigen::MatrixXd& cov) {
    const auto modes = static_cast<Eigen::Index>(def.modes.size());
    mean = Eigen::VectorXd::Zero(2 * modes);
    cov = kVacuumVariance * Eigen::MatrixXd::Identity(2 * modes, 2 * modes);
    for (Eigen::Index m = 0; m < modes; ++m) {
        const ModeDecl& decl = def.modes[static_cast<std::size_t>(m)];
        if (decl.kind == ModeKind::Coherent) {
            mean(2 * m) = decl.x0;
            mean(2 * m + 1) = decl.p0;
        }
        const auto it = overrides.find(decl.label);
        if (it != overrides.end()) {
            const GaussianState& state = it->second;
            if (state.num_modes() != 1)
                throw std::invalid_argument("initial state override for '" + decl.label +
                                            "' must be single-mode");
            mean.segment<2>(2 * m) = state.mean();
            cov.block<2, 2>(2 * m, 2 * m) = state.cov();
        }
    }
}

EngineMoments run_analytic(const ProtocolDef& def, const StateOverrides& overrides) {
    Propagation ctx = make_propagation(def, overrides, /*with_factor=*/true);
    for (const Step& step : def.steps) apply_step(ctx, step);

    const std::vector<int> alive = def.surviving_modes();
    EngineMoments out;
    out.mode_ids = alive;
    const auto n = static_cast<Eigen::Index>(alive.size());
    out.mean.resize(2 * n);
    Eigen::MatrixXd alive_rows(2 * n, ctx.factor.cols());
    for (Eigen::Index a = 0; a < n; ++a) {
        const int ma = alive[static_cast<std::size_t>(a)];
        out.mode_labels.push_back(def.modes[static_cast<std::size_t>(ma)].label);
        out.mean.segment<2>(2 * a) = ctx.mean.segment<2>(2 * ma);
        alive_rows.row(2 * a) = ctx.factor.row(2 * ma);
        alive_rows.row(2 * a + 1) = ctx.factor.row(2 * ma + 1);
    }
    out.cov = alive_rows * alive_rows.transpose();
    for (std::size_t k = 0; k < ctx.outcome_rows.size(); ++k)
        out.outcomes.push_back({def.outcome_names[k], ctx.outcome_means[k],
                                ctx.outcome_rows[k].squaredNorm()});
    return out;
}

Eigen::VectorXd propagate_means(const ProtocolDef& def,
                                const Eigen::VectorXd& initial_means) {
    if (initial_means.size() != static_cast<Eigen::Index>(2 * def.modes.size()))
        throw std::invalid_argument("propagate_means: dimension mismatch");
    Propagation ctx = make_propagation(def, {}, /*with_factor=*/false);
    ctx.mean = initial_means;
    for (const Step& step : def.steps) apply_step(ctx, step);
    return ctx.mean;
}

Eigen::MatrixXd mean_gain_matrix(const ProtocolDef& def) {
    const std::vector<int> alive = def.surviving_modes();
    const std::vector<int> signals = def.signal_modes();
    const auto dim = static_cast<Eigen::Index>(2 * def.modes.size());

    const Eigen::VectorXd zero_out = propagate_means(def, Eigen::VectorXd::Zero(dim));
    Eigen::MatrixXd gain(2 * alive.size(), 2 * signals.size());
    for (std::size_t s = 0; s < signals.size(); ++s) {
        for (int quad = 0; quad < 2; ++quad) {
            Eigen::VectorXd unit = Eigen::VectorXd::Zero(dim);
            unit(2 * signals[s] + quad) = 1.0;
            const Eigen::VectorXd column = propagate_means(def, unit) - zero_out;
            for (std::size_t a = 0; a < alive.size(); ++a) {
                gain(static_cast<Eigen::Index>(2 * a), static_cast<Eigen::Index>(2 * s + quad)) =
                    column(2 * alive[a]);
                gain(static_cast<Eigen::Index>(2 * a + 1), static_cast<Eigen::Index>(2 * s + quad)) =
                    column(2 * alive[a] + 1);
            }
        }
    }
    return gain;
}

}  // namespace spinport
