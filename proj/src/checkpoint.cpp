// Copyright 2026 The hiertool Authors
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

#include "hiertool/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <fstream>

#include "hiertool/error.hpp"

namespace hiertool {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'H', 'T', 'C', 'K', 'P', 'T', '0', '1'};

}  // namespace

const ad::Tensor* Checkpoint::find(const std::string& name) const {
  for (const auto& [n, t] : tensors)
    if (n == name) return &t;
  return nullptr;
}

void save_checkpoint(const std::string& path,
                     const std::vector<std::pair<std::string, ad::Tensor>>& tensors,
                     const nlohmann::json& meta) {
  nlohmann::json index;
  index["version"] = 1;
  index["meta"] = meta;
  index["tensors"] = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto& [name, t] : tensors) {
    nlohmann::json entry;
    entry["name"] = name;
    entry["shape"] = t.shape();
    entry["offset"] = offset;
    entry["count"] = t.size();
    entry["dtype"] = "f32";
    index["tensors"].push_back(entry);
    offset += static_cast<std::uint64_t>(t.size()) * sizeof(float);
  }
  std::string index_str = index.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) fail("checkpoint: cannot write '" + path + "'");
  out.write(kMagic, sizeof(kMagic));
  std::uint64_t index_len = index_str.size();
  out.write(reinterpret_cast<const char*>(&index_len), sizeof(index_len));
  out.write(index_str.data(), static_cast<std::streamsize>(index_str.size()));
  std::vector<float> buffer;
  for (const auto& [name, t] : tensors) {
    buffer.assign(t.data().begin(), t.data().end());
    out.write(reinterpret_cast<const char*>(buffer.data()),
              static_cast<std::streamsize>(buffer.size() * sizeof(float)));
  }
  if (!out) fail("checkpoint: write to '" + path + "' failed");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("checkpoint: cannot open '" + path + "'");
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || !std::equal(magic, magic + sizeof(magic), kMagic))
    fail("checkpoint: '" + path + "' has an unrecognized header");
  std::uint64_t index_len = 0;
  in.read(reinterpret_cast<char*>(&index_len), sizeof(index_len));
  std::string index_str(index_len, '\0');
  in.read(index_str.data(), static_cast<std::streamsize>(index_len));
  if (!in) fail("checkpoint: truncated index in '" + path + "'");

  nlohmann::json index;
  try {
    index = nlohmann::json::parse(index_str);
  } catch (const std::exception& e) {
    fail("checkpoint: bad index in '" + path + "': " + e.what());
  }
  require(index.at("version").get<int>() == 1,
          "checkpoint: unsupported version in '" + path + "'");

  Checkpoint ckpt;
  ckpt.meta = index.value("meta", nlohmann::json::object());
  for (const auto& entry : index.at("tensors")) {
    auto shape = entry.at("shape").get<std::vector<int>>();
    auto count = entry.at("count").get<std::int64_t>();
    std::vector<float> buffer(static_cast<std::size_t>(count));
    in.read(reinterpret_cast<char*>(buffer.data()),
            static_cast<std::streamsize>(buffer.size() * sizeof(float)));
    if (!in) fail("checkpoint: truncated tensor data in '" + path + "'");
    std::vector<double> data(buffer.begin(), buffer.end());
    ckpt.tensors.emplace_back(entry.at("name").get<std::string>(),
                              ad::Tensor::from_data(shape, std::move(data)));
  }
  return ckpt;
}

}  // namespace hiertool
