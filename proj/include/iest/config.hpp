#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>

#include "iest/model.hpp"
#include "iest/training.hpp"

namespace iest {

// Flat `key = value` configuration text. '#' starts a comment; blank lines
// are ignored. Duplicate keys are an error.
using KV = std::map<std::string, std::string>;

KV parse_kv(std::string_view text);
std::string serialize_kv(const KV& kv);

std::string format_double(double v);  // round-trippable, locale-free

// Converters. `consumed` collects the keys each parser recognized so the
// CLI can reject unknown keys across the combined schema.
ModelConfig model_config_from_kv(const KV& kv, std::set<std::string>* consumed);
KV model_config_to_kv(const ModelConfig& cfg);

TrainConfig train_config_from_kv(const KV& kv, std::set<std::string>* consumed);
KV train_config_to_kv(const TrainConfig& cfg);

// Parses a full config file; throws on keys unknown to both schemas.
struct FullConfig {
  ModelConfig model;
  TrainConfig train;
};
FullConfig parse_config_file(const std::string& path);
FullConfig parse_config_text(std::string_view text);

// Applies one `key=value` override on top of existing kv.
void apply_override(KV& kv, std::string_view assignment);

}  // namespace iest
