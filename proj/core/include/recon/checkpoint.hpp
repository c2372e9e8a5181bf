#pragma once

#include <filesystem>
#include <iosfwd>

#include "recon/trainer.hpp"

namespace recon {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Little-endian binary layout:
///   "RCTR", u32 version, u64 V, u64 d, u8 normalize, V*d f64 table (row-major),
///   u8 has_momentum [, f64 mu, V*d f64 momentum table],
///   u8 has_train_state [, u64 step, u64 queue_capacity, u64 queue_len,
///     queue_len*d f64, u8 has_adam [, u64 updates, V*d f64 m, V*d f64 v]].
void write_checkpoint(std::ostream& out, const TrainState& state);
TrainState read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const TrainState& state);
TrainState load_checkpoint(const std::filesystem::path& path);

}  // namespace recon
