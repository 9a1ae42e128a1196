// Copyright 2026 The AWI Authors. All Rights Reserved.
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
// =============================================================================

#include "awi/checkpoint.h"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "awi/errors.h"

namespace awi {
namespace {

using nlohmann::json;

json config_to_json(const ModelConfig& c) {
  return {{"vocab_size", c.vocab_size}, {"embed", c.embed},
          {"hidden", c.hidden},         {"align", c.align},
          {"layers", c.layers},         {"plain_lstm", c.plain_lstm},
          {"carry_state", c.carry_state}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  c.vocab_size = j.at("vocab_size").get<std::size_t>();
  c.embed = j.at("embed").get<std::size_t>();
  c.hidden = j.at("hidden").get<std::size_t>();
  c.align = j.at("align").get<std::size_t>();
  c.layers = j.at("layers").get<std::size_t>();
  c.plain_lstm = j.at("plain_lstm").get<bool>();
  c.carry_state = j.value("carry_state", true);
  return c;
}

void put_double(std::ostream& out, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  std::array<char, 8> bytes;
  for (auto& b : bytes) {
    b = static_cast<char>(bits & 0xffu);
    bits >>= 8;
  }
  out.write(bytes.data(), bytes.size());
}

double get_double(std::istream& in) {
  std::array<unsigned char, 8> bytes;
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (in.gcount() != static_cast<std::streamsize>(bytes.size())) {
    throw CheckpointError("checkpoint truncated inside tensor payload");
  }
  std::uint64_t bits = 0;
  for (std::size_t i = bytes.size(); i-- > 0;) bits = (bits << 8) | bytes[i];
  return std::bit_cast<double>(bits);
}

}  // namespace

void write_checkpoint(std::ostream& out, const AwiParams& params,
                      const Vocab& vocab) {
  if (vocab.size() != params.config().vocab_size) {
    throw CheckpointError("vocab has " + std::to_string(vocab.size()) +
                          " tokens but model expects " +
                          std::to_string(params.config().vocab_size));
  }
  json tensors = json::array();
  params.for_each([&tensors](const Parameter& p) {
    tensors.push_back(
        {{"name", p.name}, {"rows", p.value.rows()}, {"cols", p.value.cols()}});
  });
  const json header = {{"format_version", kCheckpointVersion},
                       {"config", config_to_json(params.config())},
                       {"vocab", vocab.tokens()},
                       {"tensors", std::move(tensors)}};
  out << kCheckpointMagic << '\n' << header.dump() << '\n';
  params.for_each([&out](const Parameter& p) {
    for (double v : p.value.data()) put_double(out, v);
  });
  if (!out) throw CheckpointError("failed writing checkpoint");
}

Checkpoint read_checkpoint(std::istream& in) {
  std::string magic;
  if (!std::getline(in, magic) || magic != kCheckpointMagic) {
    throw CheckpointError("not a checkpoint (bad magic)");
  }
  std::string header_line;
  if (!std::getline(in, header_line)) {
    throw CheckpointError("checkpoint truncated before header");
  }
  json header;
  try {
    header = json::parse(header_line);
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("unreadable checkpoint header: ") +
                          e.what());
  }

  ModelConfig config;
  std::vector<std::string> words;
  json table;
  try {
    const int version = header.at("format_version").get<int>();
    if (version != kCheckpointVersion) {
      throw CheckpointError("unsupported checkpoint version " +
                            std::to_string(version));
    }
    config = config_from_json(header.at("config"));
    words = header.at("vocab").get<std::vector<std::string>>();
    table = header.at("tensors");
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("malformed checkpoint header: ") +
                          e.what());
  }

  Checkpoint ck;
  try {
    config.validate();
    ck.params = AwiParams(config);
  } catch (const Error& e) {
    throw CheckpointError(std::string("bad checkpoint config: ") + e.what());
  }
  if (words.size() != config.vocab_size) {
    throw CheckpointError("checkpoint vocab has " + std::to_string(words.size()) +
                          " tokens, config says " +
                          std::to_string(config.vocab_size));
  }
  const Vocab specials;
  for (std::size_t i = 0; i < kNumSpecials; ++i) {
    if (words[i] != specials.tokens()[i]) {
      throw CheckpointError("checkpoint vocab lacks special token " +
                            specials.tokens()[i]);
    }
  }
  try {
    ck.vocab = Vocab::FromWords(
        std::vector<std::string>(words.begin() + kNumSpecials, words.end()));
  } catch (const Error& e) {
    throw CheckpointError(std::string("bad checkpoint vocab: ") + e.what());
  }

  const std::vector<Parameter*> params = ck.params.parameters();
  if (!table.is_array() || table.size() != params.size()) {
    throw CheckpointError("checkpoint tensor table does not match the model");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const json& entry = table[i];
    const Parameter& p = *params[i];
    try {
      const auto name = entry.at("name").get<std::string>();
      const auto rows = entry.at("rows").get<std::size_t>();
      const auto cols = entry.at("cols").get<std::size_t>();
      if (name != p.name || rows != p.value.rows() || cols != p.value.cols()) {
        throw CheckpointError("checkpoint tensor " + name + " " +
                              std::to_string(rows) + "x" +
                              std::to_string(cols) + " does not match model " +
                              p.name + " " + p.value.shape_string());
      }
    } catch (const json::exception& e) {
      throw CheckpointError(std::string("malformed tensor table: ") + e.what());
    }
  }
  for (Parameter* p : params) {
    for (double& v : p->value.data()) v = get_double(in);
    p->grad = Tensor(p->value.rows(), p->value.cols());
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw CheckpointError("trailing bytes after checkpoint payload");
  }
  return ck;
}

void save_checkpoint(const AwiParams& params, const Vocab& vocab,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot write " + path.string());
  write_checkpoint(out, params, vocab);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open " + path.string());
  return read_checkpoint(in);
}

}  // namespace awi
