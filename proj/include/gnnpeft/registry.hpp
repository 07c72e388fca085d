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

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <string_view>

#include <json.hpp>

#include "gnnpeft/tensor.hpp"

namespace gnnpeft {

enum class ParamGroup { kBackbone, kPeft, kClassifier };

std::string_view to_string(ParamGroup group);
ParamGroup parse_param_group(std::string_view name);

struct ParamEntry {
  Tensor tensor;
  bool trainable = true;
  ParamGroup group = ParamGroup::kBackbone;
};

// Named parameters plus non-trainable buffers (BN running statistics).
// Names are hierarchical ("layer.3.mlp.0.weight") and iterate in sorted
// order, which fixes the order of every traversal. A tensor's requires_grad
// always mirrors its trainable flag.
class ParamRegistry {
 public:
  Tensor& add(const std::string& name, Tensor tensor, ParamGroup group,
              bool trainable);
  Tensor& add_buffer(const std::string& name, Tensor tensor);

  bool contains(std::string_view name) const;
  bool contains_buffer(std::string_view name) const;
  // Throws std::out_of_range naming the missing entry.
  const Tensor& get(std::string_view name) const;
  const ParamEntry& entry(std::string_view name) const;
  const Tensor& buffer(std::string_view name) const;

  void set_trainable(std::string_view name, bool trainable);
  void set_all_trainable(bool trainable);
  void erase(std::string_view name);

  const std::map<std::string, ParamEntry, std::less<>>& params() const { return params_; }
  const std::map<std::string, Tensor, std::less<>>& buffers() const { return buffers_; }

  void zero_grad();
  // Deep copy: no storage is shared with the source.
  ParamRegistry clone() const;

 private:
  std::map<std::string, ParamEntry, std::less<>> params_;
  std::map<std::string, Tensor, std::less<>> buffers_;
};

// 64-bit FNV-1a over names, shapes and the raw bytes of every value.
std::uint64_t registry_hash(const ParamRegistry& registry);
std::uint64_t file_hash(const std::filesystem::path& path);
std::string hex64(std::uint64_t value);

// Selects which entries a checkpoint keeps.
using CheckpointFilter = std::function<bool(const std::string& name, const ParamEntry&)>;

// Checkpoint layout: an 8-byte little-endian manifest length, the manifest as
// UTF-8 JSON, then the payload of little-endian float32 values. Each manifest
// tensor lists {name, shape, dtype, offset, kind, group, trainable}; offsets
// are byte offsets into the payload. Buffers are always stored.
void save_checkpoint(const std::filesystem::path& path,
                     const ParamRegistry& registry,
                     const nlohmann::json& meta = nlohmann::json::object(),
                     const CheckpointFilter& filter = nullptr);

struct LoadedCheckpoint {
  ParamRegistry registry;
  nlohmann::json meta;
};

// Values are widened to float64.
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

// Copies values of every parameter and buffer present in `source` into the
// same-named entries of `target`, keeping target flags. Throws
// CheckpointError on a missing name or a shape mismatch.
void overlay(ParamRegistry& target, const ParamRegistry& source);

}  // namespace gnnpeft
