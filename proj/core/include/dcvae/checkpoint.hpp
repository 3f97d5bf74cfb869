#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>

#include "dcvae/adam.hpp"
#include "dcvae/model.hpp"

namespace dcvae {

struct TrainingState {
  std::size_t epochs_completed = 0;
  AdamState adam;
};

struct Checkpoint {
  Model model;
  std::optional<TrainingState> training;
};

/// Binary layout, all integers and doubles little-endian:
///
///   char[8]  magic "DCVAECKP"
///   u32      version (1)
///   u32      input_dim, dim_v, dim_z
///   u32      n encoder hidden widths, then that many u32
///   u32      n decoder hidden widths, then that many u32
///   f64      batchnorm momentum, batchnorm epsilon
///   u32      n arrays; each array is u64 count then count f64 values:
///            every parameter (Model::parameters() order), then every
///            running statistic (Model::buffers() order)
///   u32      1 if training state follows, else 0
///   [u64 epochs_completed, u64 adam step, then per parameter the first-
///    and second-moment arrays in the same u64 count + f64 form]
void save_checkpoint(const std::filesystem::path& path, Model& model, const TrainingState* state = nullptr);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace dcvae
