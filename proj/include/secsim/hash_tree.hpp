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

#include <cstdint>
#include <vector>

#include "secsim/world.hpp"

namespace secsim {

// Block-level integrity tree. Leaf i is the digest of block i (the last block
// zero-padded to block_size); an interior node is the digest of the
// concatenation of its children, a lone child hashing up unpaired. Only the
// root is covered by the partition's signed metadata; the tree itself is
// stored beside the partition and re-checked on every access.

HashTree build_hash_tree(const std::vector<uint8_t>& data, uint32_t block_size);

enum class BlockCheck { Ok, Corrupt };

// Verifies one block against the stored tree and the signed root: leaf match,
// then every parent on the path recomputed from stored nodes, ending at
// expected_root.
BlockCheck verify_block(const std::vector<uint8_t>& data, uint32_t index, const HashTree& tree,
                        const Digest& expected_root);

// Structural check: level shape matches block count, block size matches the
// descriptor.
bool tree_shape_ok(const HashTree& tree, uint32_t block_size, uint32_t num_blocks);

std::vector<uint8_t> serialize_hash_tree(const HashTree& tree);
HashTree parse_hash_tree(const std::vector<uint8_t>& bytes);

}  // namespace secsim
