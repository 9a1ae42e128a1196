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

// Checkpoint layout:
//
//   "AWI1\n"
//   one line of JSON: {"format_version": 1, "config": {...},
//                      "vocab": [...], "tensors": [{"name", "rows", "cols"}]}
//   tensor payloads in table order, row-major little-endian IEEE-754 doubles
//
// Values round-trip bit-exactly.

#ifndef AWI_CHECKPOINT_H_
#define AWI_CHECKPOINT_H_

#include <filesystem>
#include <iosfwd>

#include "awi/model.h"
#include "awi/vocab.h"

namespace awi {

inline constexpr char kCheckpointMagic[] = "AWI1";
inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  AwiParams params;
  Vocab vocab;
};

void write_checkpoint(std::ostream& out, const AwiParams& params,
                      const Vocab& vocab);
Checkpoint read_checkpoint(std::istream& in);

void save_checkpoint(const AwiParams& params, const Vocab& vocab,
                     const std::filesystem::path& path);
// Throws CheckpointError on bad magic, unknown version, shape or vocabulary
// inconsistencies, truncation or trailing bytes.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace awi

#endif  // AWI_CHECKPOINT_H_
