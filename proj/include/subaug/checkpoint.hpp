#pragma once

#include <cstdint>
#include <string>

#include "subaug/model.hpp"

namespace subaug {

/// Checkpoint container, versioned binary, little-endian throughout:
///
///   bytes 0..7   magic "SAUGCKPT"
///   u32          format version (currently 1)
///   u64          header length in bytes
///   ...          header: one JSON object {"activation", "epoch",
///                "head_hidden_dims", "hidden_dim", "input_dim", "dtype",
///                "node_readout", "num_layers", "output_dim", "seed",
///                "view_pool"} (nlohmann's sorted-key dump)
///   u32          array count
///   per array, in canonical parameter-view order:
///     u32        name length, then the name bytes
///     u8         element size (4 for float32, 8 for float64)
///     u64        element count
///     ...        raw element bytes
///
/// Reload is bit-identical: the raw bytes written are the raw bytes read.

enum class Dtype { f32, f64 };

std::string to_string(Dtype dtype);
Dtype parse_dtype(const std::string& name);

template <typename Real>
constexpr Dtype dtype_of() {
  return sizeof(Real) == 4 ? Dtype::f32 : Dtype::f64;
}

struct CheckpointInfo {
  ModelConfig model;
  std::uint64_t seed = 0;
  int epoch = 0;
  Dtype dtype = Dtype::f32;
};

template <typename Real>
void save_checkpoint(const std::string& path, const Parameters<Real>& params,
                     const ModelConfig& config, std::uint64_t seed, int epoch);

/// Reads only the header.
CheckpointInfo peek_checkpoint(const std::string& path);

/// Loads a full checkpoint; Real must match the stored dtype. Fills `info`
/// when given.
template <typename Real>
Parameters<Real> load_checkpoint(const std::string& path, CheckpointInfo* info = nullptr);

}  // namespace subaug
