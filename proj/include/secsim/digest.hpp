/*
 * Copyright (C) 2026 The Secsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace secsim {

// All digests in the model are SHA-256; the value doubles as the format
// constant in serialized structures.
using Digest = std::array<uint8_t, 32>;

Digest sha256(const uint8_t* data, size_t len);
Digest sha256(const std::vector<uint8_t>& data);
Digest sha256(const std::string& data);

std::string to_hex(const Digest& d);
std::string to_hex(const std::vector<uint8_t>& bytes);
std::vector<uint8_t> from_hex(const std::string& hex);

// Deterministic keyed digest standing in for a real signature scheme.
// The model verifies structure (who signed what), not cryptanalysis, so
// sign and verify share the key secret. Swap this pair out to back the
// model with an asymmetric scheme.
std::vector<uint8_t> toy_sign(const std::string& key_secret, const std::vector<uint8_t>& message);
bool toy_verify(const std::string& key_secret, const std::vector<uint8_t>& message,
                const std::vector<uint8_t>& signature);

}  // namespace secsim
