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
#include <string>
#include <vector>

#include "secsim/digest.hpp"

namespace secsim {

// Canonical text serialization used for world digests and golden traces.
// Format rules (see docs/format.md): one record per line, LF terminated,
// fields in fixed order, map keys pre-sorted by the caller, unsigned
// integers zero-padded to 20 digits so the encoding is width-stable.
class CanonicalWriter {
  public:
    CanonicalWriter& line(const std::string& s) {
        buf_ += s;
        buf_ += '\n';
        return *this;
    }

    CanonicalWriter& kv(const std::string& key, const std::string& value) {
        buf_ += key;
        buf_ += '=';
        buf_ += value;
        buf_ += '\n';
        return *this;
    }

    CanonicalWriter& kv(const std::string& key, uint64_t value) { return kv(key, u64(value)); }

    static std::string u64(uint64_t v) {
        char out[21];
        for (int i = 19; i >= 0; --i) {
            out[i] = static_cast<char>('0' + v % 10);
            v /= 10;
        }
        out[20] = '\0';
        return std::string(out);
    }

    const std::string& str() const { return buf_; }
    Digest digest() const { return sha256(buf_); }

  private:
    std::string buf_;
};

}  // namespace secsim
