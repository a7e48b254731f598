// Shared kernel limits. Register files live on the kernel stack, so the
// compiler caps the mode count; compile_program rejects anything larger.

#pragma once

namespace spinport::mc {

inline constexpr int kMaxRegisters = 64;  // 32 modes
inline constexpr int kMaxOutcomes = 64;

}  // namespace spinport::mc
