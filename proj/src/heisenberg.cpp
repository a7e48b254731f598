#include "spinport/heisenberg.hpp"

namespace spinport::heisenberg {

std::vector<LinearStep<double>> to_linear_steps(const ProtocolDef& def) {
    std::vector<LinearStep<double>> out;
    out.reserve(def.steps.size());
    for (const Step& step : def.steps) {
        if (const auto* s = std::get_if<SqueezeStep>(&step)) {
            out.push_back(SqueezeCoeffStep<double>{s->mode_a, s->mode_b, std::cosh(s->r),
                                                   std::sinh(s->r)});
        } else if (const auto* q = std::get_if<QndStep>(&step)) {
            out.push_back(QndCoeffStep<double>{q->mode_a, q->mode_b, q->kappa});
        } else if (const auto* p = std::get_if<PhaseStep>(&step)) {
            out.push_back(RotStep<double>{p->mode, std::cos(p->theta), std::sin(p->theta)});
        } else if (const auto* m = std::get_if<MeasureStep>(&step)) {
            out.push_back(MeasureCoeffStep<double>{m->mode, std::cos(m->angle),
                                                   std::sin(m->angle), m->outcome});
        } else if (const auto* d = std::get_if<DisplaceStep>(&step)) {
            DisplaceCoeffStep<double> disp;
            disp.mode = d->mode;
            disp.quad = d->quad;
            disp.offset = d->offset;
            for (const DisplaceTerm& term : d->terms)
                disp.terms.emplace_back(term.outcome, term.gain);
            out.push_back(std::move(disp));
        }
    }
    return out;
}

PropagationTable<double> propagate(const ProtocolDef& def) {
    return propagate<double>(static_cast<int>(def.modes.size()), to_linear_steps(def));
}

Eigen::VectorXd coefficient_vector(const PropagationTable<double>& table,
                                   const OperatorExpr<double>& expr) {
    const OperatorExpr<double> sub = table.substituted(expr);
    Eigen::VectorXd vec = Eigen::VectorXd::Zero(2 * table.n_modes);
    for (const auto& [sym, c] : sub.coeffs) vec(sym) = c;
    return vec;
}

double expr_mean(const PropagationTable<double>& table, const OperatorExpr<double>& expr,
                 const Eigen::VectorXd& initial_mean) {
    const OperatorExpr<double> sub = table.substituted(expr);
    double value = sub.constant;
    for (const auto& [sym, c] : sub.coeffs) value += c * initial_mean(sym);
    return value;
}

double expr_covariance(const PropagationTable<double>& table,
                       const OperatorExpr<double>& a, const OperatorExpr<double>& b,
                       const Eigen::MatrixXd& initial_cov) {
    const Eigen::VectorXd va = coefficient_vector(table, a);
    const Eigen::VectorXd vb = coefficient_vector(table, b);
    return va.dot(initial_cov * vb);
}

OracleMoments oracle_moments(const ProtocolDef& def, const Eigen::VectorXd& initial_mean,
                             const Eigen::MatrixXd& initial_cov) {
    const PropagationTable<double> table = propagate(def);
    const std::vector<int> alive = def.surviving_modes();

    OracleMoments out;
    out.mode_ids = alive;
    const auto n = static_cast<Eigen::Index>(alive.size());
    out.mean.resize(2 * n);
    out.cov.resize(2 * n, 2 * n);

    std::vector<Eigen::VectorXd> vectors;
    vectors.reserve(static_cast<std::size_t>(2 * n));
    for (Eigen::Index a = 0; a < n; ++a) {
        const int mode = alive[static_cast<std::size_t>(a)];
        for (int quad = 0; quad < 2; ++quad) {
            const auto& expr = table.ops[static_cast<std::size_t>(2 * mode + quad)];
            out.mean(2 * a + quad) = expr_mean(table, expr, initial_mean);
            vectors.push_back(coefficient_vector(table, expr));
        }
    }
    for (Eigen::Index i = 0; i < 2 * n; ++i)
        for (Eigen::Index j = 0; j < 2 * n; ++j)
            out.cov(i, j) = vectors[static_cast<std::size_t>(i)].dot(
                initial_cov * vectors[static_cast<std::size_t>(j)]);

    for (const auto& outcome : table.outcomes) {
        out.outcome_means.push_back(expr_mean(table, outcome, initial_mean));
        const Eigen::VectorXd vec = coefficient_vector(table, outcome);
        out.outcome_variances.push_back(vec.dot(initial_cov * vec));
    }
    return out;
}

}  // namespace spinport::heisenberg
