// Kernel selection, shot sharding across threads, and the deterministic
// reduction pass. Threads fill disjoint slices of one row buffer and the
// reduction always walks shots in order, so the result depends only on
// (program, shots, seed) — not on thread count or kernel choice.

#include "spinport/mc/kernel_common.hpp"
#include "spinport/mc/program.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>

namespace spinport::mc {

const Kernel* avx2_kernel_impl();  // defined in kernel_avx2.cpp when built

const Kernel* avx2_kernel() {
#ifdef SPINPORT_HAVE_AVX2
    if (__builtin_cpu_supports("avx2")) return avx2_kernel_impl();
#endif
    return nullptr;
}

const Kernel& active_kernel() {
    if (const char* choice = std::getenv("SPINPORT_KERNEL")) {
        const std::string name(choice);
        if (name == "scalar") return scalar_kernel();
        if (name == "avx2") {
            const Kernel* k = avx2_kernel();
            if (k == nullptr)
                throw std::runtime_error("SPINPORT_KERNEL=avx2 but AVX2 is unavailable");
            return *k;
        }
        throw std::runtime_error("SPINPORT_KERNEL must be 'scalar' or 'avx2'");
    }
    if (const Kernel* k = avx2_kernel()) return *k;
    return scalar_kernel();
}

McMoments run_monte_carlo(const ProtocolDef& def, const StateOverrides& overrides,
                          std::uint64_t shots, std::uint64_t seed, int threads,
                          const Kernel* kernel) {
    if (shots < 1) throw std::invalid_argument("run_monte_carlo: shots must be >= 1");
    const ShotProgram prog = compile_program(def, overrides);
    if (prog.n_regs > kMaxRegisters || prog.n_outcomes > kMaxOutcomes)
        throw std::invalid_argument("run_monte_carlo: protocol too large for the kernels");
    const Kernel& active = kernel != nullptr ? *kernel : active_kernel();

    const int width = prog.row_width();
    std::vector<double> rows(static_cast<std::size_t>(shots) *
                             static_cast<std::size_t>(width));

    unsigned n_threads = threads > 0 ? static_cast<unsigned>(threads)
                                     : std::max(1u, std::thread::hardware_concurrency());
    n_threads = static_cast<unsigned>(
        std::min<std::uint64_t>(n_threads, std::max<std::uint64_t>(1, shots / 1024)));
    if (n_threads <= 1) {
        active.run(prog, seed, 0, shots, rows.data());
    } else {
        std::vector<std::thread> pool;
        const std::uint64_t chunk = (shots + n_threads - 1) / n_threads;
        for (unsigned t = 0; t < n_threads; ++t) {
            const std::uint64_t begin = t * chunk;
            const std::uint64_t end = std::min(shots, begin + chunk);
            if (begin >= end) break;
            pool.emplace_back([&, begin, end] {
                active.run(prog, seed, begin, end,
                           rows.data() + begin * static_cast<std::uint64_t>(width));
            });
        }
        for (std::thread& t : pool) t.join();
    }

    // Two-pass reduction in shot order.
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(width);
    for (std::uint64_t s = 0; s < shots; ++s)
        for (int k = 0; k < width; ++k)
            sum(k) += rows[s * static_cast<std::uint64_t>(width) + static_cast<std::uint64_t>(k)];
    const Eigen::VectorXd mean_all = sum / static_cast<double>(shots);

    Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(width, width);
    if (shots > 1) {
        Eigen::VectorXd delta(width);
        for (std::uint64_t s = 0; s < shots; ++s) {
            for (int k = 0; k < width; ++k)
                delta(k) = rows[s * static_cast<std::uint64_t>(width) +
                                static_cast<std::uint64_t>(k)] -
                           mean_all(k);
            scatter += delta * delta.transpose();
        }
        scatter /= static_cast<double>(shots - 1);
    }

    const auto n_mode_vars = static_cast<Eigen::Index>(prog.out_regs.size());
    McMoments result;
    result.shots = shots;
    result.seed = seed;
    result.mode_ids = def.surviving_modes();
    for (int m : result.mode_ids)
        result.mode_labels.push_back(def.modes[static_cast<std::size_t>(m)].label);
    result.mean = mean_all.head(n_mode_vars);
    result.cov = scatter.topLeftCorner(n_mode_vars, n_mode_vars);
    result.mean_se.resize(n_mode_vars);
    result.var_se.resize(n_mode_vars);
    const double inv_sqrt_shots = 1.0 / std::sqrt(static_cast<double>(shots));
    const double var_factor =
        shots > 1 ? std::sqrt(2.0 / static_cast<double>(shots - 1)) : 0.0;
    for (Eigen::Index k = 0; k < n_mode_vars; ++k) {
        result.mean_se(k) = std::sqrt(std::max(0.0, result.cov(k, k))) * inv_sqrt_shots;
        result.var_se(k) = result.cov(k, k) * var_factor;
    }
    for (int k = 0; k < prog.n_outcomes; ++k) {
        const Eigen::Index idx = n_mode_vars + k;
        result.outcomes.push_back({def.outcome_names[static_cast<std::size_t>(k)],
                                   mean_all(idx), scatter(idx, idx)});
        result.outcome_mean_se.push_back(std::sqrt(std::max(0.0, scatter(idx, idx))) *
                                         inv_sqrt_shots);
        result.outcome_var_se.push_back(scatter(idx, idx) * var_factor);
    }
    return result;
}

}  // namespace spinport::mc
