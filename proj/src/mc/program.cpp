#include "spinport/mc/program.hpp"

#include <cmath>
#include <stdexcept>

namespace spinport::mc {

ShotProgram compile_program(const ProtocolDef& def, const StateOverrides& overrides) {
    ShotProgram prog;
    prog.n_regs = static_cast<int>(2 * def.modes.size());
    prog.n_outcomes = static_cast<int>(def.outcome_names.size());

    Eigen::MatrixXd cov;
    initial_moments(def, overrides, prog.mean, cov);
    // The initial covariance is block diagonal and positive definite for any
    // valid input state, so a plain Cholesky factor exists.
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("compile_program: initial covariance not positive definite");
    prog.chol = llt.matrixL();

    for (const Step& step : def.steps) {
        ShotOp op;
        if (const auto* s = std::get_if<SqueezeStep>(&step)) {
            op.code = OpCode::Squeeze;
            op.reg_a = 2 * s->mode_a;
            op.reg_b = 2 * s->mode_b;
            op.c0 = std::cosh(s->r);
            op.c1 = std::sinh(s->r);
        } else if (const auto* q = std::get_if<QndStep>(&step)) {
            op.code = OpCode::Qnd;
            op.reg_a = 2 * q->mode_a;
            op.reg_b = 2 * q->mode_b;
            op.c0 = q->kappa;
        } else if (const auto* p = std::get_if<PhaseStep>(&step)) {
            op.code = OpCode::Phase;
            op.reg_a = 2 * p->mode;
            op.c0 = std::cos(p->theta);
            op.c1 = std::sin(p->theta);
        } else if (const auto* m = std::get_if<MeasureStep>(&step)) {
            op.code = OpCode::Measure;
            op.reg_a = 2 * m->mode;
            op.outcome = m->outcome;
            op.c0 = std::cos(m->angle);
            op.c1 = std::sin(m->angle);
        } else if (const auto* d = std::get_if<DisplaceStep>(&step)) {
            op.code = OpCode::Displace;
            op.reg_a = 2 * d->mode + (d->quad == Quadrature::P ? 1 : 0);
            op.term_begin = static_cast<int>(prog.terms.size());
            op.term_count = static_cast<int>(d->terms.size());
            op.offset = d->offset;
            for (const DisplaceTerm& term : d->terms)
                prog.terms.push_back({term.outcome, term.gain});
        }
        prog.ops.push_back(op);
    }

    for (int mode : def.surviving_modes()) {
        prog.out_regs.push_back(2 * mode);
        prog.out_regs.push_back(2 * mode + 1);
    }
    return prog;
}

}  // namespace spinport::mc
