// Copyright 2026 The gnnpeft Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "gnnpeft/registry.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "gnnpeft/errors.hpp"
#include "gnnpeft/rng.hpp"

namespace gnnpeft {
namespace {

constexpr std::string_view kFormat = "gnnpeft-checkpoint-v1";

template <typename Map>
auto& lookup(Map& map, std::string_view name, const char* what) {
  const auto it = map.find(name);
  if (it == map.end()) {
    throw std::out_of_range(std::string("no ") + what + " named '" +
                            std::string(name) + "'");
  }
  return it->second;
}

void put_u32_le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::uint32_t get_u32_le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

struct Fnv {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ULL;
    }
  }
  void text(std::string_view s) { bytes(s.data(), s.size()); }
};

void hash_tensor(Fnv& f, const std::string& name, const Tensor& t) {
  f.text(name);
  for (const auto e : t.shape()) {
    const auto v = static_cast<std::uint64_t>(e);
    f.bytes(&v, sizeof v);
  }
  for (const double x : t.data()) {
    const auto bits = std::bit_cast<std::uint64_t>(x);
    f.bytes(&bits, sizeof bits);
  }
}

}  // namespace

std::string_view to_string(ParamGroup group) {
  switch (group) {
    case ParamGroup::kBackbone:
      return "backbone";
    case ParamGroup::kPeft:
      return "peft";
    case ParamGroup::kClassifier:
      return "classifier";
  }
  return "unknown";
}

ParamGroup parse_param_group(std::string_view name) {
  if (name == "backbone") return ParamGroup::kBackbone;
  if (name == "peft") return ParamGroup::kPeft;
  if (name == "classifier") return ParamGroup::kClassifier;
  throw CheckpointError("unknown parameter group '" + std::string(name) + "'");
}

Tensor& ParamRegistry::add(const std::string& name, Tensor tensor,
                           ParamGroup group, bool trainable) {
  if (params_.contains(name) || buffers_.contains(name)) {
    throw std::invalid_argument("duplicate registry name '" + name + "'");
  }
  tensor.set_requires_grad(trainable);
  auto [it, _] = params_.emplace(name, ParamEntry{std::move(tensor), trainable, group});
  return it->second.tensor;
}

Tensor& ParamRegistry::add_buffer(const std::string& name, Tensor tensor) {
  if (params_.contains(name) || buffers_.contains(name)) {
    throw std::invalid_argument("duplicate registry name '" + name + "'");
  }
  tensor.set_requires_grad(false);
  return buffers_.emplace(name, std::move(tensor)).first->second;
}

bool ParamRegistry::contains(std::string_view name) const {
  return params_.find(name) != params_.end();
}

bool ParamRegistry::contains_buffer(std::string_view name) const {
  return buffers_.find(name) != buffers_.end();
}

const Tensor& ParamRegistry::get(std::string_view name) const {
  return lookup(params_, name, "parameter").tensor;
}

const ParamEntry& ParamRegistry::entry(std::string_view name) const {
  return lookup(params_, name, "parameter");
}

const Tensor& ParamRegistry::buffer(std::string_view name) const {
  return lookup(buffers_, name, "buffer");
}

void ParamRegistry::set_trainable(std::string_view name, bool trainable) {
  auto& e = lookup(params_, name, "parameter");
  if (e.trainable == trainable && e.tensor.requires_grad() == trainable) return;
  e.trainable = trainable;
  e.tensor.set_requires_grad(trainable);
}

void ParamRegistry::set_all_trainable(bool trainable) {
  for (auto& [name, e] : params_) set_trainable(name, trainable);
}

void ParamRegistry::erase(std::string_view name) {
  const auto it = params_.find(name);
  if (it == params_.end()) {
    throw std::out_of_range("no parameter named '" + std::string(name) + "'");
  }
  params_.erase(it);
}

void ParamRegistry::zero_grad() {
  for (auto& [_, e] : params_)
    if (e.trainable) e.tensor.zero_grad();
}

ParamRegistry ParamRegistry::clone() const {
  ParamRegistry out;
  for (const auto& [name, e] : params_) out.add(name, e.tensor.clone(), e.group, e.trainable);
  for (const auto& [name, t] : buffers_) out.add_buffer(name, t.clone());
  return out;
}

std::uint64_t registry_hash(const ParamRegistry& registry) {
  Fnv f;
  for (const auto& [name, e] : registry.params()) hash_tensor(f, name, e.tensor);
  for (const auto& [name, t] : registry.buffers()) hash_tensor(f, name, t);
  return f.h;
}

std::uint64_t file_hash(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CheckpointError("cannot open " + path.string());
  Fnv f;
  char buf[1 << 14];
  while (is.read(buf, sizeof buf) || is.gcount() > 0) {
    f.bytes(buf, static_cast<std::size_t>(is.gcount()));
  }
  return f.h;
}

std::string hex64(std::uint64_t value) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << value;
  return os.str();
}

void save_checkpoint(const std::filesystem::path& path,
                     const ParamRegistry& registry, const nlohmann::json& meta,
                     const CheckpointFilter& filter) {
  nlohmann::ordered_json manifest;
  manifest["format"] = kFormat;
  manifest["meta"] = meta;
  manifest["tensors"] = nlohmann::ordered_json::array();
  std::string payload;
  auto emit = [&](const std::string& name, const Tensor& t, std::string_view kind,
                  std::string_view group, bool trainable) {
    nlohmann::ordered_json item;
    item["name"] = name;
    item["shape"] = t.shape();
    item["dtype"] = "f32";
    item["offset"] = payload.size();
    item["kind"] = kind;
    item["group"] = group;
    item["trainable"] = trainable;
    manifest["tensors"].push_back(std::move(item));
    for (const double x : t.data()) {
      put_u32_le(payload, std::bit_cast<std::uint32_t>(static_cast<float>(x)));
    }
  };
  for (const auto& [name, e] : registry.params()) {
    if (filter && !filter(name, e)) continue;
    emit(name, e.tensor, "param", to_string(e.group), e.trainable);
  }
  for (const auto& [name, t] : registry.buffers()) emit(name, t, "buffer", "buffer", false);

  const std::string text = manifest.dump();
  std::ofstream os(path, std::ios::binary);
  if (!os) throw CheckpointError("cannot write " + path.string());
  std::string header;
  const auto len = static_cast<std::uint64_t>(text.size());
  for (int i = 0; i < 8; ++i) header.push_back(static_cast<char>((len >> (8 * i)) & 0xffu));
  os << header << text << payload;
  if (!os) throw CheckpointError("failed writing " + path.string());
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CheckpointError("cannot open checkpoint " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  if (bytes.size() < 8) throw CheckpointError(path.string() + ": truncated header");
  std::uint64_t len = 0;
  for (int i = 0; i < 8; ++i)
    len |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[static_cast<std::size_t>(i)]))
           << (8 * i);
  if (len > bytes.size() - 8) throw CheckpointError(path.string() + ": truncated manifest");
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(bytes.substr(8, len));
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(path.string() + ": bad manifest: " + e.what());
  }
  if (manifest.value("format", "") != kFormat) {
    throw CheckpointError(path.string() + ": not a gnnpeft checkpoint");
  }
  const auto* payload = reinterpret_cast<const unsigned char*>(bytes.data()) + 8 + len;
  const std::size_t payload_size = bytes.size() - 8 - len;

  LoadedCheckpoint out;
  out.meta = manifest.value("meta", nlohmann::json::object());
  for (const auto& item : manifest.at("tensors")) {
    const auto name = item.at("name").get<std::string>();
    const auto shape = item.at("shape").get<Shape>();
    const auto offset = item.at("offset").get<std::size_t>();
    if (item.at("dtype").get<std::string>() != "f32") {
      throw CheckpointError(name + ": unsupported dtype");
    }
    const std::size_t n = shape_numel(shape);
    if (offset + 4 * n > payload_size) throw CheckpointError(name + ": payload truncated");
    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i) {
      values[i] = static_cast<double>(std::bit_cast<float>(get_u32_le(payload + offset + 4 * i)));
    }
    Tensor t = Tensor::from(shape, std::move(values));
    if (item.at("kind").get<std::string>() == "buffer") {
      out.registry.add_buffer(name, std::move(t));
    } else {
      out.registry.add(name, std::move(t), parse_param_group(item.at("group").get<std::string>()),
                       item.at("trainable").get<bool>());
    }
  }
  return out;
}

void overlay(ParamRegistry& target, const ParamRegistry& source) {
  auto copy_into = [](const std::string& name, const Tensor& dst_const, const Tensor& src) {
    if (dst_const.shape() != src.shape()) {
      throw CheckpointError(name + ": shape " + shape_str(src.shape()) +
                            " does not match " + shape_str(dst_const.shape()));
    }
    Tensor dst = dst_const;
    std::copy(src.data().begin(), src.data().end(), dst.data().begin());
  };
  for (const auto& [name, e] : source.params()) {
    if (!target.contains(name)) throw CheckpointError("checkpoint entry '" + name + "' has no target");
    copy_into(name, target.get(name), e.tensor);
  }
  for (const auto& [name, t] : source.buffers()) {
    if (!target.contains_buffer(name)) throw CheckpointError("checkpoint buffer '" + name + "' has no target");
    copy_into(name, target.buffer(name), t);
  }
}

}  // namespace gnnpeft
