#pragma once

#include <map>
#include <string>

#include "iest/config.hpp"
#include "iest/model.hpp"

namespace iest {

// Binary tensor container, little-endian:
//   magic "IESTM1", version u16,
//   u32 blob length + UTF-8 config blob (key=value lines),
//   u32 tensor count, then per tensor:
//     u16 name length + name, u8 rank, rank x u32 dims, float32 data.
struct Checkpoint {
  KV config;
  std::map<std::string, Tensor<float>> tensors;
};

inline constexpr char kCheckpointMagic[6] = {'I', 'E', 'S', 'T', 'M', '1'};
inline constexpr std::uint16_t kCheckpointVersion = 1;

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

Checkpoint model_to_checkpoint(const Model<float>& model);
Model<float> model_from_checkpoint(const Checkpoint& ckpt);

void save_model(const Model<float>& model, const std::string& path);
Model<float> load_model(const std::string& path);

// Probability cache: one tensor `proba` [N x 6] plus an example-order
// manifest (example count and dataset digest) in the config blob.
void save_probability_matrix(const Tensor<double>& probs,
                             const std::string& dataset_digest,
                             const std::string& path);
Tensor<double> load_probability_matrix(const std::string& path,
                                       std::string* dataset_digest = nullptr);

}  // namespace iest
