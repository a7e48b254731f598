// heisenberg.hpp
// Independent verification engine. Every canonical operator is carried
// through the protocol symbolically as a linear combination of the
// initial-time operators plus recorded measurement outcomes. Moments then
// follow from the initial covariance alone, giving a route to the final
// state that shares no code with the covariance-propagation engine.
//
// The propagation core is generic over the coefficient scalar so the same
// algebra can run in exact rational arithmetic for commutator checks
// (gates with rational coefficients, quarter-turn phases).

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <stdexcept>
#include <variant>
#include <vector>

#include "spinport/steps.hpp"

namespace spinport::heisenberg {

/// Initial-operator symbol: 2 * mode + (0 for x, 1 for p).
using OpSymbol = int;

template <class Scalar>
struct OperatorExpr {
    std::map<OpSymbol, Scalar> coeffs;       // over initial operators
    std::map<int, Scalar> outcome_terms;     // over measurement records
    Scalar constant{};

    void add_coeff(OpSymbol sym, const Scalar& value) {
        auto [it, inserted] = coeffs.try_emplace(sym, value);
        if (!inserted) {
            it->second = it->second + value;
            if (it->second == Scalar{}) coeffs.erase(it);
        } else if (it->second == Scalar{}) {
            coeffs.erase(it);
        }
    }
    void add_outcome(int id, const Scalar& value) {
        auto [it, inserted] = outcome_terms.try_emplace(id, value);
        if (!inserted) {
            it->second = it->second + value;
            if (it->second == Scalar{}) outcome_terms.erase(it);
        } else if (it->second == Scalar{}) {
            outcome_terms.erase(it);
        }
    }
};

template <class Scalar>
OperatorExpr<Scalar> scaled(const OperatorExpr<Scalar>& expr, const Scalar& factor) {
    OperatorExpr<Scalar> out;
    for (const auto& [sym, c] : expr.coeffs)
        if (!(factor * c == Scalar{})) out.coeffs.emplace(sym, factor * c);
    for (const auto& [id, c] : expr.outcome_terms)
        if (!(factor * c == Scalar{})) out.outcome_terms.emplace(id, factor * c);
    out.constant = factor * expr.constant;
    return out;
}

template <class Scalar>
void accumulate(OperatorExpr<Scalar>& into, const OperatorExpr<Scalar>& expr,
                const Scalar& factor) {
    for (const auto& [sym, c] : expr.coeffs) into.add_coeff(sym, factor * c);
    for (const auto& [id, c] : expr.outcome_terms) into.add_outcome(id, factor * c);
    into.constant = into.constant + factor * expr.constant;
}

// Elementary linear steps with explicit coefficients. The double
// instantiation is produced from a ProtocolDef; exact-arithmetic tests build
// these directly (e.g. squeeze with a rational cosh/sinh pair).
template <class Scalar>
struct RotStep {
    int mode;
    Scalar c, s;  // x' = c x + s p, p' = c p - s x
};
template <class Scalar>
struct SqueezeCoeffStep {
    int mode_a, mode_b;
    Scalar ch, sh;  // must satisfy ch^2 - sh^2 = 1
};
template <class Scalar>
struct QndCoeffStep {
    int mode_a, mode_b;
    Scalar kappa;
};
template <class Scalar>
struct MeasureCoeffStep {
    int mode;
    Scalar c, s;
    int outcome;
};
template <class Scalar>
struct DisplaceCoeffStep {
    int mode;
    Quadrature quad;
    std::vector<std::pair<int, Scalar>> terms;  // (outcome id, gain)
    Scalar offset{};
};

template <class Scalar>
using LinearStep = std::variant<RotStep<Scalar>, SqueezeCoeffStep<Scalar>,
                                QndCoeffStep<Scalar>, MeasureCoeffStep<Scalar>,
                                DisplaceCoeffStep<Scalar>>;

template <class Scalar>
struct PropagationTable {
    int n_modes = 0;
    /// Current expression for each canonical operator, indexed 2*mode+quad.
    std::vector<OperatorExpr<Scalar>> ops;
    /// Frozen expression (over initial operators only) of each outcome.
    std::vector<OperatorExpr<Scalar>> outcomes;
    std::vector<bool> outcome_ready;
    std::vector<bool> mode_dead;

    /// Expression with outcome symbols substituted by their frozen content.
    OperatorExpr<Scalar> substituted(const OperatorExpr<Scalar>& expr) const {
        OperatorExpr<Scalar> out;
        for (const auto& [sym, c] : expr.coeffs) out.add_coeff(sym, c);
        out.constant = expr.constant;
        for (const auto& [id, gain] : expr.outcome_terms)
            accumulate(out, outcomes[static_cast<std::size_t>(id)], gain);
        return out;
    }
};

template <class Scalar>
PropagationTable<Scalar> propagate(int n_modes,
                                   const std::vector<LinearStep<Scalar>>& steps) {
    PropagationTable<Scalar> table;
    table.n_modes = n_modes;
    table.ops.resize(static_cast<std::size_t>(2 * n_modes));
    table.mode_dead.assign(static_cast<std::size_t>(n_modes), false);
    for (int k = 0; k < 2 * n_modes; ++k)
        table.ops[static_cast<std::size_t>(k)].coeffs.emplace(k, Scalar(1));

    auto check_alive = [&](int mode) {
        if (table.mode_dead[static_cast<std::size_t>(mode)])
            throw std::invalid_argument("heisenberg: step touches a measured mode");
    };

    for (const LinearStep<Scalar>& any_step : steps) {
        if (const auto* rot = std::get_if<RotStep<Scalar>>(&any_step)) {
            check_alive(rot->mode);
            auto& x = table.ops[static_cast<std::size_t>(2 * rot->mode)];
            auto& p = table.ops[static_cast<std::size_t>(2 * rot->mode + 1)];
            OperatorExpr<Scalar> new_x = scaled(x, rot->c);
            accumulate(new_x, p, rot->s);
            OperatorExpr<Scalar> new_p = scaled(p, rot->c);
            accumulate(new_p, x, Scalar{} - rot->s);
            x = std::move(new_x);
            p = std::move(new_p);
        } else if (const auto* sq = std::get_if<SqueezeCoeffStep<Scalar>>(&any_step)) {
            check_alive(sq->mode_a);
            check_alive(sq->mode_b);
            auto& xa = table.ops[static_cast<std::size_t>(2 * sq->mode_a)];
            auto& pa = table.ops[static_cast<std::size_t>(2 * sq->mode_a + 1)];
            auto& xb = table.ops[static_cast<std::size_t>(2 * sq->mode_b)];
            auto& pb = table.ops[static_cast<std::size_t>(2 * sq->mode_b + 1)];
            OperatorExpr<Scalar> nxa = scaled(xa, sq->ch);
            accumulate(nxa, xb, Scalar{} - sq->sh);
            OperatorExpr<Scalar> nxb = scaled(xb, sq->ch);
            accumulate(nxb, xa, Scalar{} - sq->sh);
            OperatorExpr<Scalar> npa = scaled(pa, sq->ch);
            accumulate(npa, pb, sq->sh);
            OperatorExpr<Scalar> npb = scaled(pb, sq->ch);
            accumulate(npb, pa, sq->sh);
            xa = std::move(nxa);
            xb = std::move(nxb);
            pa = std::move(npa);
            pb = std::move(npb);
        } else if (const auto* qnd = std::get_if<QndCoeffStep<Scalar>>(&any_step)) {
            check_alive(qnd->mode_a);
            check_alive(qnd->mode_b);
            accumulate(table.ops[static_cast<std::size_t>(2 * qnd->mode_a + 1)],
                       table.ops[static_cast<std::size_t>(2 * qnd->mode_b)], qnd->kappa);
            accumulate(table.ops[static_cast<std::size_t>(2 * qnd->mode_b + 1)],
                       table.ops[static_cast<std::size_t>(2 * qnd->mode_a)], qnd->kappa);
        } else if (const auto* meas = std::get_if<MeasureCoeffStep<Scalar>>(&any_step)) {
            check_alive(meas->mode);
            const auto id = static_cast<std::size_t>(meas->outcome);
            if (id >= table.outcomes.size()) {
                table.outcomes.resize(id + 1);
                table.outcome_ready.resize(id + 1, false);
            }
            if (table.outcome_ready[id])
                throw std::invalid_argument("heisenberg: outcome measured twice");
            OperatorExpr<Scalar> record =
                scaled(table.ops[static_cast<std::size_t>(2 * meas->mode)], meas->c);
            accumulate(record, table.ops[static_cast<std::size_t>(2 * meas->mode + 1)],
                       meas->s);
            table.outcomes[id] = std::move(record);
            table.outcome_ready[id] = true;
            table.mode_dead[static_cast<std::size_t>(meas->mode)] = true;
        } else if (const auto* disp = std::get_if<DisplaceCoeffStep<Scalar>>(&any_step)) {
            check_alive(disp->mode);
            auto& target = table.ops[static_cast<std::size_t>(
                2 * disp->mode + (disp->quad == Quadrature::P ? 1 : 0))];
            for (const auto& [id, gain] : disp->terms) {
                if (static_cast<std::size_t>(id) >= table.outcomes.size() ||
                    !table.outcome_ready[static_cast<std::size_t>(id)])
                    throw std::invalid_argument("heisenberg: displacement references "
                                                "an unmeasured outcome");
                target.add_outcome(id, gain);
            }
            target.constant = target.constant + disp->offset;
        }
    }
    return table;
}

std::vector<LinearStep<double>> to_linear_steps(const ProtocolDef& def);
PropagationTable<double> propagate(const ProtocolDef& def);

/// Dense substituted coefficient vector over initial operators.
Eigen::VectorXd coefficient_vector(const PropagationTable<double>& table,
                                   const OperatorExpr<double>& expr);

/// Mean of an expression for given initial means.
double expr_mean(const PropagationTable<double>& table, const OperatorExpr<double>& expr,
                 const Eigen::VectorXd& initial_mean);

/// Covariance of two expressions for a given initial covariance.
double expr_covariance(const PropagationTable<double>& table,
                       const OperatorExpr<double>& a, const OperatorExpr<double>& b,
                       const Eigen::MatrixXd& initial_cov);

/// Symplectic product of two (substituted) expressions: the value of the
/// commutator [A, B] / i. Canonical pairs must give exactly +1.
template <class Scalar>
Scalar commutator_value(const PropagationTable<Scalar>& table,
                        const OperatorExpr<Scalar>& a, const OperatorExpr<Scalar>& b) {
    const OperatorExpr<Scalar> sa = table.substituted(a);
    const OperatorExpr<Scalar> sb = table.substituted(b);
    Scalar total{};
    for (const auto& [sym, ca] : sa.coeffs) {
        const int mode = sym / 2;
        const bool is_x = (sym % 2) == 0;
        const OpSymbol partner = is_x ? sym + 1 : sym - 1;
        const auto it = sb.coeffs.find(partner);
        if (it == sb.coeffs.end()) continue;
        (void)mode;
        if (is_x)
            total = total + ca * it->second;
        else
            total = total - ca * it->second;
    }
    return total;
}

/// Means and covariance of the surviving modes straight from the table;
/// used to cross-check the analytic engine.
struct OracleMoments {
    std::vector<int> mode_ids;
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
    std::vector<double> outcome_means;
    std::vector<double> outcome_variances;
};

OracleMoments oracle_moments(const ProtocolDef& def,
                             const Eigen::VectorXd& initial_mean,
                             const Eigen::MatrixXd& initial_cov);

}  // namespace spinport::heisenberg
