#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "actionslot/model.hpp"

namespace actionslot {

inline nlohmann::json model_config_to_json(const ModelConfig& cfg) {
  nlohmann::json j;
  j["clip_len"] = cfg.clip_len;
  j["image_h"] = cfg.image_h;
  j["image_w"] = cfg.image_w;
  j["channels"] = cfg.channels;
  j["slot_dim"] = cfg.slot_dim;
  j["attn_dim"] = cfg.attn_dim;
  j["iterations"] = cfg.iterations;
  j["dropout"] = cfg.dropout;
  j["update"] = cfg.flags.update == UpdateMode::kParallel ? "parallel" : "recurrent";
  j["attn_norm"] = cfg.flags.attn_norm == AttnNorm::kSlot ? "slot" : "cross";
  j["background_slot"] = cfg.flags.background_slot;
  j["ego_head"] = cfg.flags.ego_head;
  j["gated_recurrent"] = cfg.flags.gated_recurrent;
  j["classes"] = cfg.classes;
  return j;
}

inline ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig cfg;
  cfg.clip_len = j.value("clip_len", cfg.clip_len);
  cfg.image_h = j.value("image_h", cfg.image_h);
  cfg.image_w = j.value("image_w", cfg.image_w);
  if (j.contains("channels")) {
    for (int i = 0; i < 4; ++i) cfg.channels[i] = j["channels"][i];
  }
  cfg.slot_dim = j.value("slot_dim", cfg.slot_dim);
  cfg.attn_dim = j.value("attn_dim", cfg.attn_dim);
  cfg.iterations = j.value("iterations", cfg.iterations);
  cfg.dropout = j.value("dropout", cfg.dropout);
  if (j.contains("update")) {
    cfg.flags.update = j["update"] == "recurrent" ? UpdateMode::kRecurrent
                                                  : UpdateMode::kParallel;
  }
  if (j.contains("attn_norm")) {
    cfg.flags.attn_norm =
        j["attn_norm"] == "cross" ? AttnNorm::kCross : AttnNorm::kSlot;
  }
  cfg.flags.background_slot = j.value("background_slot", cfg.flags.background_slot);
  cfg.flags.ego_head = j.value("ego_head", cfg.flags.ego_head);
  cfg.flags.gated_recurrent = j.value("gated_recurrent", cfg.flags.gated_recurrent);
  if (j.contains("classes")) {
    cfg.classes = j["classes"].get<std::vector<std::string>>();
  }
  return cfg;
}

// Binary container: magic "ASLT", version, a JSON header (config, catalog
// hash, RNG seed) and named float32 parameter arrays.
inline constexpr uint32_t kCheckpointVersion = 1;

template <typename T>
void save_checkpoint(const std::string& path, ActionSlotModel<T>& model,
                     uint64_t seed) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path);

  nlohmann::json header;
  header["config"] = model_config_to_json(model.config());
  header["catalog_hash"] = ClassCatalog::subset(model.config().classes).hash();
  header["seed"] = seed;
  std::string hdr = header.dump();

  out.write("ASLT", 4);
  uint32_t version = kCheckpointVersion;
  out.write(reinterpret_cast<const char*>(&version), sizeof(version));
  uint64_t hdr_len = hdr.size();
  out.write(reinterpret_cast<const char*>(&hdr_len), sizeof(hdr_len));
  out.write(hdr.data(), static_cast<std::streamsize>(hdr.size()));

  auto params = model.params();
  uint64_t count = params.size();
  out.write(reinterpret_cast<const char*>(&count), sizeof(count));
  for (const auto& p : params) {
    uint32_t name_len = static_cast<uint32_t>(p.name.size());
    out.write(reinterpret_cast<const char*>(&name_len), sizeof(name_len));
    out.write(p.name.data(), name_len);
    uint32_t ndim = static_cast<uint32_t>(p.value->shape.size());
    out.write(reinterpret_cast<const char*>(&ndim), sizeof(ndim));
    for (int d : p.value->shape) {
      int32_t v = d;
      out.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
    std::vector<float> buf(p.value->data.begin(), p.value->data.end());
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * sizeof(float)));
  }
  if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

template <typename T>
ActionSlotModel<T> load_checkpoint(const std::string& path,
                                   uint64_t* seed_out = nullptr,
                                   uint64_t* catalog_hash_out = nullptr) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path);

  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "ASLT", 4) != 0) {
    throw std::runtime_error("not a checkpoint file: " + path);
  }
  uint32_t version = 0;
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  if (version != kCheckpointVersion) {
    throw std::runtime_error("unsupported checkpoint version in " + path);
  }
  uint64_t hdr_len = 0;
  in.read(reinterpret_cast<char*>(&hdr_len), sizeof(hdr_len));
  std::string hdr(hdr_len, '\0');
  in.read(hdr.data(), static_cast<std::streamsize>(hdr_len));
  nlohmann::json header = nlohmann::json::parse(hdr);

  ModelConfig cfg = model_config_from_json(header["config"]);
  uint64_t seed = header.value("seed", 0ull);
  if (seed_out) *seed_out = seed;
  if (catalog_hash_out) *catalog_hash_out = header.value("catalog_hash", 0ull);

  ActionSlotModel<T> model(cfg, seed);
  auto params = model.params();

  uint64_t count = 0;
  in.read(reinterpret_cast<char*>(&count), sizeof(count));
  for (uint64_t i = 0; i < count; ++i) {
    uint32_t name_len = 0;
    in.read(reinterpret_cast<char*>(&name_len), sizeof(name_len));
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    uint32_t ndim = 0;
    in.read(reinterpret_cast<char*>(&ndim), sizeof(ndim));
    std::vector<int> shape(ndim);
    size_t total = 1;
    for (uint32_t d = 0; d < ndim; ++d) {
      int32_t v = 0;
      in.read(reinterpret_cast<char*>(&v), sizeof(v));
      shape[d] = v;
      total *= static_cast<size_t>(v);
    }
    std::vector<float> buf(total);
    in.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(total * sizeof(float)));
    bool matched = false;
    for (auto& p : params) {
      if (p.name != name) continue;
      if (p.value->shape != shape) {
        throw std::runtime_error("checkpoint parameter shape mismatch for " + name);
      }
      std::copy(buf.begin(), buf.end(), p.value->data.begin());
      matched = true;
      break;
    }
    if (!matched) {
      throw std::runtime_error("checkpoint has unknown parameter " + name);
    }
  }
  if (!in) throw std::runtime_error("truncated checkpoint " + path);
  return model;
}

}  // namespace actionslot
