// AVX2 kernel: four shots per pass, one shot per lane. Lanes never interact,
// and every vector instruction performs the same IEEE operation in the same
// order as the scalar reference, so the outputs are bit-identical to it.
// The shot-count remainder is delegated to the scalar kernel.

#include "spinport/mc/kernel_common.hpp"
#include "spinport/mc/program.hpp"
#include "spinport/rng.hpp"

#include <immintrin.h>

namespace spinport::mc {

namespace {

void run_avx2(const ShotProgram& prog, std::uint64_t seed, std::uint64_t begin,
              std::uint64_t end, double* rows) {
    const int n = prog.n_regs;
    const int width = prog.row_width();
    const std::uint64_t total = end - begin;
    const std::uint64_t vec_shots = total - total % 4;

    alignas(32) double z[4][kMaxRegisters];
    alignas(32) double lane_out[4];
    __m256d zv[kMaxRegisters];
    __m256d v[kMaxRegisters];
    __m256d o[kMaxOutcomes];

    for (std::uint64_t base = 0; base < vec_shots; base += 4) {
        const std::uint64_t shot0 = begin + base;
        for (int lane = 0; lane < 4; ++lane)
            rng::fill_normals(seed, shot0 + static_cast<std::uint64_t>(lane),
                              {z[lane], static_cast<std::size_t>(n)});
        for (int j = 0; j < n; ++j)
            zv[j] = _mm256_set_pd(z[3][j], z[2][j], z[1][j], z[0][j]);

        for (int i = 0; i < n; ++i) {
            __m256d acc = _mm256_set1_pd(prog.mean(i));
            for (int j = 0; j <= i; ++j)
                acc = _mm256_add_pd(acc,
                                    _mm256_mul_pd(_mm256_set1_pd(prog.chol(i, j)), zv[j]));
            v[i] = acc;
        }

        for (const ShotOp& op : prog.ops) {
            switch (op.code) {
                case OpCode::Squeeze: {
                    const __m256d c0 = _mm256_set1_pd(op.c0);
                    const __m256d c1 = _mm256_set1_pd(op.c1);
                    const __m256d xa = v[op.reg_a];
                    const __m256d pa = v[op.reg_a + 1];
                    const __m256d xb = v[op.reg_b];
                    const __m256d pb = v[op.reg_b + 1];
                    v[op.reg_a] = _mm256_sub_pd(_mm256_mul_pd(c0, xa), _mm256_mul_pd(c1, xb));
                    v[op.reg_b] = _mm256_sub_pd(_mm256_mul_pd(c0, xb), _mm256_mul_pd(c1, xa));
                    v[op.reg_a + 1] =
                        _mm256_add_pd(_mm256_mul_pd(c0, pa), _mm256_mul_pd(c1, pb));
                    v[op.reg_b + 1] =
                        _mm256_add_pd(_mm256_mul_pd(c0, pb), _mm256_mul_pd(c1, pa));
                    break;
                }
                case OpCode::Qnd: {
                    const __m256d k = _mm256_set1_pd(op.c0);
                    v[op.reg_a + 1] =
                        _mm256_add_pd(v[op.reg_a + 1], _mm256_mul_pd(k, v[op.reg_b]));
                    v[op.reg_b + 1] =
                        _mm256_add_pd(v[op.reg_b + 1], _mm256_mul_pd(k, v[op.reg_a]));
                    break;
                }
                case OpCode::Phase: {
                    const __m256d c0 = _mm256_set1_pd(op.c0);
                    const __m256d c1 = _mm256_set1_pd(op.c1);
                    const __m256d x = v[op.reg_a];
                    const __m256d p = v[op.reg_a + 1];
                    v[op.reg_a] = _mm256_add_pd(_mm256_mul_pd(c0, x), _mm256_mul_pd(c1, p));
                    v[op.reg_a + 1] =
                        _mm256_sub_pd(_mm256_mul_pd(c0, p), _mm256_mul_pd(c1, x));
                    break;
                }
                case OpCode::Measure:
                    o[op.outcome] = _mm256_add_pd(
                        _mm256_mul_pd(_mm256_set1_pd(op.c0), v[op.reg_a]),
                        _mm256_mul_pd(_mm256_set1_pd(op.c1), v[op.reg_a + 1]));
                    break;
                case OpCode::Displace: {
                    __m256d acc = _mm256_set1_pd(op.offset);
                    for (int t = 0; t < op.term_count; ++t) {
                        const ShotTerm& term =
                            prog.terms[static_cast<std::size_t>(op.term_begin + t)];
                        acc = _mm256_add_pd(
                            acc, _mm256_mul_pd(_mm256_set1_pd(term.gain), o[term.outcome]));
                    }
                    v[op.reg_a] = _mm256_add_pd(v[op.reg_a], acc);
                    break;
                }
            }
        }

        const auto n_out = prog.out_regs.size();
        for (std::size_t k = 0; k < n_out; ++k) {
            _mm256_store_pd(lane_out, v[prog.out_regs[k]]);
            for (int lane = 0; lane < 4; ++lane)
                rows[(base + static_cast<std::uint64_t>(lane)) * width + k] = lane_out[lane];
        }
        for (int k = 0; k < prog.n_outcomes; ++k) {
            _mm256_store_pd(lane_out, o[k]);
            for (int lane = 0; lane < 4; ++lane)
                rows[(base + static_cast<std::uint64_t>(lane)) * width + n_out +
                     static_cast<std::size_t>(k)] = lane_out[lane];
        }
    }

    if (vec_shots < total)
        scalar_kernel().run(prog, seed, begin + vec_shots, end,
                            rows + vec_shots * static_cast<std::uint64_t>(width));
}

}  // namespace

const Kernel* avx2_kernel_impl() {
    static const Kernel kernel{"avx2", &run_avx2};
    return &kernel;
}

}  // namespace spinport::mc
