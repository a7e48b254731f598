// Scalar reference kernel. The AVX2 kernel mirrors this operation order
// exactly; any change here must be made there as well, and the two are held
// bit-identical by the kernel equivalence tests.

#include "spinport/mc/kernel_common.hpp"
#include "spinport/mc/program.hpp"
#include "spinport/rng.hpp"

namespace spinport::mc {

namespace {

void run_scalar(const ShotProgram& prog, std::uint64_t seed, std::uint64_t begin,
                std::uint64_t end, double* rows) {
    const int n = prog.n_regs;
    const int width = prog.row_width();
    double z[kMaxRegisters];
    double v[kMaxRegisters];
    double o[kMaxOutcomes];

    for (std::uint64_t shot = begin; shot < end; ++shot) {
        rng::fill_normals(seed, shot, {z, static_cast<std::size_t>(n)});
        for (int i = 0; i < n; ++i) {
            double acc = prog.mean(i);
            for (int j = 0; j <= i; ++j) acc = acc + prog.chol(i, j) * z[j];
            v[i] = acc;
        }

        for (const ShotOp& op : prog.ops) {
            switch (op.code) {
                case OpCode::Squeeze: {
                    const double xa = v[op.reg_a];
                    const double pa = v[op.reg_a + 1];
                    const double xb = v[op.reg_b];
                    const double pb = v[op.reg_b + 1];
                    v[op.reg_a] = op.c0 * xa - op.c1 * xb;
                    v[op.reg_b] = op.c0 * xb - op.c1 * xa;
                    v[op.reg_a + 1] = op.c0 * pa + op.c1 * pb;
                    v[op.reg_b + 1] = op.c0 * pb + op.c1 * pa;
                    break;
                }
                case OpCode::Qnd:
                    v[op.reg_a + 1] = v[op.reg_a + 1] + op.c0 * v[op.reg_b];
                    v[op.reg_b + 1] = v[op.reg_b + 1] + op.c0 * v[op.reg_a];
                    break;
                case OpCode::Phase: {
                    const double x = v[op.reg_a];
                    const double p = v[op.reg_a + 1];
                    v[op.reg_a] = op.c0 * x + op.c1 * p;
                    v[op.reg_a + 1] = op.c0 * p - op.c1 * x;
                    break;
                }
                case OpCode::Measure:
                    o[op.outcome] = op.c0 * v[op.reg_a] + op.c1 * v[op.reg_a + 1];
                    break;
                case OpCode::Displace: {
                    double acc = op.offset;
                    for (int t = 0; t < op.term_count; ++t) {
                        const ShotTerm& term =
                            prog.terms[static_cast<std::size_t>(op.term_begin + t)];
                        acc = acc + term.gain * o[term.outcome];
                    }
                    v[op.reg_a] = v[op.reg_a] + acc;
                    break;
                }
            }
        }

        double* row = rows + static_cast<std::size_t>(shot - begin) * width;
        const auto n_out = prog.out_regs.size();
        for (std::size_t k = 0; k < n_out; ++k)
            row[k] = v[prog.out_regs[k]];
        for (int k = 0; k < prog.n_outcomes; ++k)
            row[n_out + static_cast<std::size_t>(k)] = o[k];
    }
}

}  // namespace

const Kernel& scalar_kernel() {
    static const Kernel kernel{"scalar", &run_scalar};
    return kernel;
}

}  // namespace spinport::mc
