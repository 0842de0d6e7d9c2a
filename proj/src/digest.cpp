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

#include "secsim/digest.hpp"

#include <openssl/sha.h>

#include <stdexcept>

namespace secsim {

Digest sha256(const uint8_t* data, size_t len) {
    Digest out{};
    SHA256(data, len, out.data());
    return out;
}

Digest sha256(const std::vector<uint8_t>& data) {
    return sha256(data.data(), data.size());
}

Digest sha256(const std::string& data) {
    return sha256(reinterpret_cast<const uint8_t*>(data.data()), data.size());
}

static const char kHexDigits[] = "0123456789abcdef";

std::string to_hex(const Digest& d) {
    std::string s;
    s.reserve(64);
    for (uint8_t b : d) {
        s.push_back(kHexDigits[b >> 4]);
        s.push_back(kHexDigits[b & 0xf]);
    }
    return s;
}

std::string to_hex(const std::vector<uint8_t>& bytes) {
    std::string s;
    s.reserve(bytes.size() * 2);
    for (uint8_t b : bytes) {
        s.push_back(kHexDigits[b >> 4]);
        s.push_back(kHexDigits[b & 0xf]);
    }
    return s;
}

static int hex_nibble(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

std::vector<uint8_t> from_hex(const std::string& hex) {
    if (hex.size() % 2 != 0) throw std::invalid_argument("odd-length hex string");
    std::vector<uint8_t> out;
    out.reserve(hex.size() / 2);
    for (size_t i = 0; i < hex.size(); i += 2) {
        int hi = hex_nibble(hex[i]);
        int lo = hex_nibble(hex[i + 1]);
        if (hi < 0 || lo < 0) throw std::invalid_argument("bad hex digit");
        out.push_back(static_cast<uint8_t>((hi << 4) | lo));
    }
    return out;
}

std::vector<uint8_t> toy_sign(const std::string& key_secret, const std::vector<uint8_t>& message) {
    std::vector<uint8_t> buf;
    buf.reserve(key_secret.size() + message.size() + 5);
    const char* tag = "sig|";
    buf.insert(buf.end(), tag, tag + 4);
    buf.insert(buf.end(), key_secret.begin(), key_secret.end());
    buf.push_back('|');
    buf.insert(buf.end(), message.begin(), message.end());
    Digest d = sha256(buf);
    return std::vector<uint8_t>(d.begin(), d.end());
}

bool toy_verify(const std::string& key_secret, const std::vector<uint8_t>& message,
                const std::vector<uint8_t>& signature) {
    return toy_sign(key_secret, message) == signature;
}

}  // namespace secsim
