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

#include "secsim/hash_tree.hpp"

#include <algorithm>
#include <cstring>

#include "secsim/error.hpp"

namespace secsim {

namespace {

Digest hash_padded_block(const uint8_t* data, size_t len, uint32_t block_size) {
    std::vector<uint8_t> buf(block_size, 0);
    std::memcpy(buf.data(), data, len);
    return sha256(buf);
}

Digest hash_pair(const Digest& a, const Digest& b) {
    std::vector<uint8_t> cat(a.begin(), a.end());
    cat.insert(cat.end(), b.begin(), b.end());
    return sha256(cat);
}

Digest hash_single(const Digest& a) { return sha256(a.data(), a.size()); }

void put_u16(std::vector<uint8_t>& out, uint16_t v) {
    out.push_back(static_cast<uint8_t>(v & 0xff));
    out.push_back(static_cast<uint8_t>(v >> 8));
}

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xff));
}

uint16_t get_u16(const std::vector<uint8_t>& in, size_t& off) {
    if (off + 2 > in.size()) throw SimError(Err::BadWorld, "truncated tree");
    uint16_t v = static_cast<uint16_t>(in[off] | (in[off + 1] << 8));
    off += 2;
    return v;
}

uint32_t get_u32(const std::vector<uint8_t>& in, size_t& off) {
    if (off + 4 > in.size()) throw SimError(Err::BadWorld, "truncated tree");
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(in[off + i]) << (8 * i);
    off += 4;
    return v;
}

}  // namespace

HashTree build_hash_tree(const std::vector<uint8_t>& data, uint32_t block_size) {
    if (block_size == 0) throw SimError(Err::BadWorld, "zero block size");
    if (data.empty()) throw SimError(Err::BadWorld, "empty partition");
    HashTree tree;
    tree.block_size = block_size;
    tree.num_blocks = static_cast<uint32_t>((data.size() + block_size - 1) / block_size);

    std::vector<Digest> level;
    level.reserve(tree.num_blocks);
    for (uint32_t i = 0; i < tree.num_blocks; ++i) {
        size_t off = static_cast<size_t>(i) * block_size;
        size_t len = std::min<size_t>(block_size, data.size() - off);
        level.push_back(hash_padded_block(data.data() + off, len, block_size));
    }
    tree.levels.push_back(std::move(level));
    while (tree.levels.back().size() > 1) {
        const auto& below = tree.levels.back();
        std::vector<Digest> up;
        up.reserve((below.size() + 1) / 2);
        for (size_t i = 0; i < below.size(); i += 2) {
            if (i + 1 < below.size()) {
                up.push_back(hash_pair(below[i], below[i + 1]));
            } else {
                up.push_back(hash_single(below[i]));
            }
        }
        tree.levels.push_back(std::move(up));
    }
    return tree;
}

BlockCheck verify_block(const std::vector<uint8_t>& data, uint32_t index, const HashTree& tree,
                        const Digest& expected_root) {
    if (tree.levels.empty() || index >= tree.num_blocks ||
        tree.levels[0].size() != tree.num_blocks) {
        throw SimError(Err::IndexOutOfRange, "block index outside the tree");
    }
    size_t off = static_cast<size_t>(index) * tree.block_size;
    if (off >= data.size()) return BlockCheck::Corrupt;
    size_t len = std::min<size_t>(tree.block_size, data.size() - off);

    if (hash_padded_block(data.data() + off, len, tree.block_size) != tree.levels[0][index]) {
        return BlockCheck::Corrupt;
    }
    // Walk the path to the root recomputing each parent from the stored
    // children; any tampered node on the path breaks the chain.
    size_t node = index;
    for (size_t lvl = 0; lvl + 1 < tree.levels.size(); ++lvl) {
        const auto& below = tree.levels[lvl];
        const auto& above = tree.levels[lvl + 1];
        size_t left = node & ~size_t{1};
        Digest parent;
        if (left + 1 < below.size()) {
            parent = hash_pair(below[left], below[left + 1]);
        } else {
            parent = hash_single(below[left]);
        }
        node /= 2;
        if (node >= above.size() || parent != above[node]) return BlockCheck::Corrupt;
    }
    if (tree.levels.back().size() != 1 || tree.levels.back()[0] != expected_root) {
        return BlockCheck::Corrupt;
    }
    return BlockCheck::Ok;
}

bool tree_shape_ok(const HashTree& tree, uint32_t block_size, uint32_t num_blocks) {
    if (tree.block_size != block_size || tree.num_blocks != num_blocks) return false;
    if (tree.levels.empty() || tree.levels[0].size() != num_blocks) return false;
    for (size_t lvl = 0; lvl + 1 < tree.levels.size(); ++lvl) {
        size_t want = (tree.levels[lvl].size() + 1) / 2;
        if (tree.levels[lvl + 1].size() != want) return false;
    }
    return tree.levels.back().size() == 1;
}

std::vector<uint8_t> serialize_hash_tree(const HashTree& tree) {
    std::vector<uint8_t> out;
    out.insert(out.end(), {'S', 'V', 'T', '1'});
    put_u32(out, tree.block_size);
    put_u32(out, tree.num_blocks);
    put_u16(out, static_cast<uint16_t>(tree.levels.size()));
    for (const auto& level : tree.levels) {
        put_u32(out, static_cast<uint32_t>(level.size()));
        for (const auto& d : level) out.insert(out.end(), d.begin(), d.end());
    }
    return out;
}

HashTree parse_hash_tree(const std::vector<uint8_t>& bytes) {
    size_t off = 0;
    if (bytes.size() < 4 || std::memcmp(bytes.data(), "SVT1", 4) != 0) {
        throw SimError(Err::BadWorld, "bad tree magic");
    }
    off = 4;
    HashTree tree;
    tree.block_size = get_u32(bytes, off);
    tree.num_blocks = get_u32(bytes, off);
    uint16_t n_levels = get_u16(bytes, off);
    for (uint16_t l = 0; l < n_levels; ++l) {
        uint32_t count = get_u32(bytes, off);
        std::vector<Digest> level;
        level.reserve(count);
        for (uint32_t i = 0; i < count; ++i) {
            if (off + 32 > bytes.size()) throw SimError(Err::BadWorld, "truncated tree");
            Digest d;
            std::copy(bytes.begin() + off, bytes.begin() + off + 32, d.begin());
            off += 32;
            level.push_back(d);
        }
        tree.levels.push_back(std::move(level));
    }
    if (off != bytes.size()) throw SimError(Err::BadWorld, "trailing bytes after tree");
    return tree;
}

}  // namespace secsim
