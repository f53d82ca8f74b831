#include "iest/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace iest {

static_assert(std::endian::native == std::endian::little,
              "checkpoint writer assumes a little-endian host");

namespace {

template <class T>
void write_pod(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <class T>
T read_pod(std::istream& in, const char* what) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw std::runtime_error(std::string("checkpoint: truncated ") + what);
  return v;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  write_pod<std::uint16_t>(out, kCheckpointVersion);

  const std::string blob = serialize_kv(ckpt.config);
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(blob.size()));
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));

  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.tensors.size()));
  for (const auto& [name, t] : ckpt.tensors) {
    write_pod<std::uint16_t>(out, static_cast<std::uint16_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_pod<std::uint8_t>(out, static_cast<std::uint8_t>(t.shape.size()));
    for (std::size_t d : t.shape) write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(d));
    out.write(reinterpret_cast<const char*>(t.data.data()),
              static_cast<std::streamsize>(t.data.size() * sizeof(float)));
  }
  if (!out) throw std::runtime_error("write failure: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[sizeof(kCheckpointMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0)
    throw std::runtime_error("not a checkpoint file: " + path);
  const auto version = read_pod<std::uint16_t>(in, "version");
  if (version != kCheckpointVersion)
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));

  Checkpoint ckpt;
  const auto blob_len = read_pod<std::uint32_t>(in, "config length");
  std::string blob(blob_len, '\0');
  in.read(blob.data(), blob_len);
  if (!in) throw std::runtime_error("checkpoint: truncated config blob");
  ckpt.config = parse_kv(blob);

  const auto count = read_pod<std::uint32_t>(in, "tensor count");
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = read_pod<std::uint16_t>(in, "tensor name length");
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    const auto rank = read_pod<std::uint8_t>(in, "tensor rank");
    Tensor<float> t;
    t.shape.resize(rank);
    std::size_t numel = 1;
    for (std::uint8_t d = 0; d < rank; ++d) {
      t.shape[d] = read_pod<std::uint32_t>(in, "tensor dim");
      numel *= t.shape[d];
    }
    t.data.resize(numel);
    in.read(reinterpret_cast<char*>(t.data.data()),
            static_cast<std::streamsize>(numel * sizeof(float)));
    if (!in) throw std::runtime_error("checkpoint: truncated tensor " + name);
    ckpt.tensors.emplace(std::move(name), std::move(t));
  }
  return ckpt;
}

Checkpoint model_to_checkpoint(const Model<float>& model) {
  Checkpoint ckpt;
  ckpt.config = model_config_to_kv(model.config);
  if (!model.word_vocab.empty()) {
    std::string joined;
    for (std::size_t i = 0; i < model.word_vocab.size(); ++i) {
      if (i) joined += ' ';
      joined += model.word_vocab[i];
    }
    ckpt.config["word_vocab_list"] = joined;
  }
  for (const auto& [name, t] : model.params) {
    Tensor<float> copy;
    copy.shape = t.shape;
    copy.data = t.data;
    ckpt.tensors.emplace(name, std::move(copy));
  }
  return ckpt;
}

Model<float> model_from_checkpoint(const Checkpoint& ckpt) {
  Model<float> model;
  std::set<std::string> consumed;
  model.config = model_config_from_kv(ckpt.config, &consumed);
  model.config.validate();
  if (auto it = ckpt.config.find("word_vocab_list"); it != ckpt.config.end()) {
    std::istringstream ss(it->second);
    std::string word;
    while (ss >> word) model.word_vocab.push_back(word);
    model.rebuild_word_index();
  }
  for (const auto& [name, t] : ckpt.tensors) {
    Tensor<float> p;
    p.shape = t.shape;
    p.data = t.data;
    p.set_requires_grad(true);
    model.params.emplace(name, std::move(p));
  }
  return model;
}

void save_model(const Model<float>& model, const std::string& path) {
  save_checkpoint(model_to_checkpoint(model), path);
}

Model<float> load_model(const std::string& path) {
  return model_from_checkpoint(load_checkpoint(path));
}

void save_probability_matrix(const Tensor<double>& probs,
                             const std::string& dataset_digest,
                             const std::string& path) {
  Checkpoint ckpt;
  ckpt.config["kind"] = "probability_matrix";
  ckpt.config["num_examples"] = std::to_string(probs.rows());
  ckpt.config["dataset_digest"] = dataset_digest;
  Tensor<float> t(probs.rows(), probs.cols());
  for (std::size_t i = 0; i < probs.data.size(); ++i)
    t.data[i] = static_cast<float>(probs.data[i]);
  ckpt.tensors.emplace("proba", std::move(t));
  save_checkpoint(ckpt, path);
}

Tensor<double> load_probability_matrix(const std::string& path,
                                       std::string* dataset_digest) {
  Checkpoint ckpt = load_checkpoint(path);
  auto it = ckpt.tensors.find("proba");
  if (it == ckpt.tensors.end())
    throw std::runtime_error("probability cache missing 'proba' tensor: " + path);
  if (dataset_digest) {
    auto d = ckpt.config.find("dataset_digest");
    *dataset_digest = d == ckpt.config.end() ? "" : d->second;
  }
  Tensor<double> out(it->second.rows(), it->second.cols());
  for (std::size_t i = 0; i < out.data.size(); ++i)
    out.data[i] = static_cast<double>(it->second.data[i]);
  return out;
}

}  // namespace iest
