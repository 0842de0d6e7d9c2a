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

#include <optional>
#include <string>
#include <vector>

#include "secsim/world.hpp"

namespace secsim {

// Tiered authentication and hardware-backed keys. Only the primary tier
// (knowledge factor) unlocks from a fully locked state or makes CE storage
// available; secondary (biometric) and tertiary (trusted device/place) tiers
// only extend an existing unlock window.

struct AuthConfig {
    // Secondary modalities stop working this long after the last primary
    // authentication and fall back to the knowledge factor.
    uint64_t secondary_fallback_s = 72 * 3600;
    // Weak and convenience biometrics fall back on a shorter idle window.
    uint64_t weak_fallback_s = 24 * 3600;
    // Tertiary modalities additionally stop extending the unlock after this
    // much idle time.
    uint64_t tertiary_idle_s = 4 * 3600;
};

struct AuthResult {
    bool success = false;
    std::string reason;  // failure reason, empty on success
};

// Attempts authentication with an enrolled modality at simulated time `now`.
// Tier constraints (first unlock after boot must be primary; fallback and
// idle windows) are enforced before factor verification. `sample` is the
// presented knowledge factor for primary modalities; biometric and tertiary
// modalities match iff `sample` equals the enrolled factor.
AuthResult authenticate(DeviceWorld& world, int user, const std::string& modality,
                        const std::string& sample, uint64_t now, const AuthConfig& cfg = {});

struct GatekeeperResult {
    bool pass = false;
    std::optional<AuthToken> token;
};

// Knowledge-factor verification in the TEE (or the tamper-resistant element
// for enrollments flagged weaver): compares against the enrolled factor and
// mints an auth token on success.
GatekeeperResult gatekeeper_verify(DeviceWorld& world, int user, const std::string& factor,
                                   uint64_t now);

enum class KeyGate { Usable, Locked };

// Gate for auth-bound keys: requires a live token of sufficient tier. Strong
// biometric tokens satisfy keys not pinned to the primary tier; weak,
// convenience and tertiary tokens never do. Keys demanding user presence
// additionally require a presence event.
KeyGate key_gate(const DeviceWorld& world, const std::string& key_id, bool presence_event);

// Uses a keystore key to sign data, subject to key_gate. Key material is
// never exported; a kernel-level compromise can use a currently usable key as
// an oracle but cannot read it.
std::vector<uint8_t> key_sign(const DeviceWorld& world, const std::string& key_id,
                              const std::string& data, bool presence_event);

struct Confirmation {
    std::string key_id;
    Digest message_digest{};
    std::vector<uint8_t> signature;
};

// Protected confirmation: signs the message digest only upon a physical
// button press routed to the trusted app. Returns nothing without the press;
// a compromised kernel cannot fabricate one.
std::optional<Confirmation> protected_confirm(DeviceWorld& world, const std::string& package,
                                              const std::string& message, bool button_pressed);
bool verify_confirmation(const DeviceWorld& world, const Confirmation& confirmation,
                         const std::string& message);

// Firmware update of the tamper-resistant element. Requires the vendor
// signature; without the user's credential the update proceeds but the
// credential-derived secrets are destroyed, so updated firmware can never be
// used to extract them (insider attack resistance).
void trh_update(DeviceWorld& world, const SignedImage& firmware,
                const std::optional<std::pair<int, std::string>>& credential);

void enroll_modality(DeviceWorld& world, int user, const Modality& modality);
void lock_screen(DeviceWorld& world, int user);
bool ce_available(const DeviceWorld& world, int user);

// Reboot side effects on auth state: screens lock, tokens drop, CE storage
// becomes unavailable until the next primary authentication.
void on_reboot_auth(DeviceWorld& world);

}  // namespace secsim
