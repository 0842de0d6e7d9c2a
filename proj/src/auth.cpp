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

#include "secsim/auth.hpp"

#include "secsim/boot.hpp"

namespace secsim {

namespace {

UserRecord& user_record(DeviceWorld& world, int user) {
    auto it = world.users.find(user);
    if (it == world.users.end()) throw SimError(Err::UnknownUser, std::to_string(user));
    return it->second;
}

const Modality* primary_modality(const UserRecord& u) {
    for (const auto& [name, m] : u.enrolled) {
        (void)name;
        if (m.tier() == AuthTier::Primary) return &m;
    }
    return nullptr;
}

void apply_success(UserRecord& u, const Modality& mod, int user, uint64_t now) {
    AuthToken token;
    token.user = user;
    token.tier = mod.tier();
    token.bio_class = mod.bio_class;
    token.time = now;
    token.trh_backed = mod.weaver;
    u.auth.current_token = token;
    u.auth.last_any_success = now;
    u.auth.screen_locked = false;
    if (mod.tier() == AuthTier::Primary) {
        u.auth.last_primary_success = now;
        u.auth.boot_unlocked_once = true;
        // Only the knowledge factor can derive the credential-encrypted
        // storage key.
        u.ce_available = u.ce_secret_present;
    }
}

}  // namespace

void enroll_modality(DeviceWorld& world, int user, const Modality& modality) {
    UserRecord& u = user_record(world, user);
    if (modality.tier() != AuthTier::Primary && primary_modality(u) == nullptr) {
        // Weaker tiers only ever narrow an existing primary factor; without
        // one there is nothing for them to fall back to.
        throw SimError(Err::TierLockout, "enroll a knowledge factor first");
    }
    u.enrolled[modality.name] = modality;
    if (modality.tier() == AuthTier::Primary) {
        // Credential set while the device is running: the session stays
        // unlocked and storage is re-bound to the new factor in place.
        u.auth.boot_unlocked_once = true;
        if (!u.auth.last_primary_success) u.auth.last_primary_success = world.clock;
        if (!u.auth.last_any_success) u.auth.last_any_success = world.clock;
    }
}

GatekeeperResult gatekeeper_verify(DeviceWorld& world, int user, const std::string& factor,
                                   uint64_t now) {
    UserRecord& u = user_record(world, user);
    const Modality* primary = primary_modality(u);
    if (primary == nullptr) throw SimError(Err::NotEnrolled, "no knowledge factor enrolled");
    if (primary->factor_secret != factor) return {false, std::nullopt};
    AuthToken token;
    token.user = user;
    token.tier = AuthTier::Primary;
    token.bio_class = BiometricClass::None;
    token.time = now;
    token.trh_backed = primary->weaver;
    return {true, token};
}

AuthResult authenticate(DeviceWorld& world, int user, const std::string& modality,
                        const std::string& sample, uint64_t now, const AuthConfig& cfg) {
    UserRecord& u = user_record(world, user);
    auto mit = u.enrolled.find(modality);
    if (mit == u.enrolled.end()) throw SimError(Err::NotEnrolled, modality);
    const Modality& mod = mit->second;
    AuthTier tier = mod.tier();

    if (tier != AuthTier::Primary) {
        // From the fully locked state (fresh boot) nothing below the primary
        // tier may unlock: storage keys exist only behind the knowledge
        // factor.
        if (!u.auth.boot_unlocked_once || !u.auth.last_primary_success) {
            return {false, "primary-required-after-boot"};
        }
        uint64_t window = (tier == AuthTier::Secondary && mod.bio_class != BiometricClass::Strong)
                              ? cfg.weak_fallback_s
                              : cfg.secondary_fallback_s;
        uint64_t since_primary = now - *u.auth.last_primary_success;
        if (since_primary >= window) {
            return {false, "fallback-to-primary"};
        }
        if (tier == AuthTier::Tertiary) {
            if (!u.auth.last_any_success || now - *u.auth.last_any_success > cfg.tertiary_idle_s) {
                return {false, "idle-timeout"};
            }
        }
    }

    if (tier == AuthTier::Primary) {
        GatekeeperResult gk = gatekeeper_verify(world, user, sample, now);
        if (!gk.pass) return {false, "bad-factor"};
        // The enrolled primary may differ from the named modality only in
        // name; apply state with the modality that actually matched.
        apply_success(u, *primary_modality(u), user, now);
        return {true, ""};
    }
    if (mod.factor_secret != sample) return {false, "no-match"};
    apply_success(u, mod, user, now);
    return {true, ""};
}

KeyGate key_gate(const DeviceWorld& world, const std::string& key_id, bool presence_event) {
    auto it = world.keystore.find(key_id);
    if (it == world.keystore.end()) throw SimError(Err::UnknownKey, key_id);
    if (!world.keystore_initialized) throw SimError(Err::KeystoreUnavailable, "keystore offline");
    const KeyEntry& k = it->second;
    if (k.requires_user_presence && !presence_event) return KeyGate::Locked;
    if (!k.auth_bound) return KeyGate::Usable;

    auto uit = world.users.find(k.user);
    if (uit == world.users.end()) return KeyGate::Locked;
    const AuthState& st = uit->second.auth;
    if (st.screen_locked || !st.current_token) return KeyGate::Locked;
    const AuthToken& t = *st.current_token;
    if (t.user != k.user) return KeyGate::Locked;
    switch (t.tier) {
        case AuthTier::Primary:
            return KeyGate::Usable;
        case AuthTier::Secondary:
            // Only a strong biometric may stand in for the credential, and
            // only for keys not pinned to the primary tier.
            return (t.bio_class == BiometricClass::Strong && k.min_auth_tier != AuthTier::Primary)
                       ? KeyGate::Usable
                       : KeyGate::Locked;
        case AuthTier::Tertiary:
            return KeyGate::Locked;
    }
    return KeyGate::Locked;
}

std::vector<uint8_t> key_sign(const DeviceWorld& world, const std::string& key_id,
                              const std::string& data, bool presence_event) {
    if (key_gate(world, key_id, presence_event) != KeyGate::Usable) {
        throw SimError(Err::KeystoreUnavailable, key_id + " is locked");
    }
    const KeyEntry& k = world.keystore.at(key_id);
    return toy_sign(k.secret, std::vector<uint8_t>(data.begin(), data.end()));
}

std::optional<Confirmation> protected_confirm(DeviceWorld& world, const std::string& package,
                                              const std::string& message, bool button_pressed) {
    const KeyEntry* key = nullptr;
    for (const auto& [id, k] : world.keystore) {
        (void)id;
        if (k.for_confirmation && k.owner_package == package) {
            key = &k;
            break;
        }
    }
    if (key == nullptr) {
        throw SimError(Err::KeystoreUnavailable, "no confirmation key for " + package);
    }
    // The signing path only runs off the physical button; a compromised
    // kernel can suppress the dialog but cannot press the button, so no
    // press means no signature, ever.
    if (!button_pressed) return std::nullopt;
    Confirmation c;
    c.key_id = key->id;
    c.message_digest = sha256("confirm|" + message);
    std::vector<uint8_t> body(c.message_digest.begin(), c.message_digest.end());
    c.signature = toy_sign(key->secret, body);
    return c;
}

bool verify_confirmation(const DeviceWorld& world, const Confirmation& confirmation,
                         const std::string& message) {
    auto it = world.keystore.find(confirmation.key_id);
    if (it == world.keystore.end()) return false;
    if (confirmation.message_digest != sha256("confirm|" + message)) return false;
    std::vector<uint8_t> body(confirmation.message_digest.begin(),
                              confirmation.message_digest.end());
    return toy_verify(it->second.secret, body, confirmation.signature);
}

void trh_update(DeviceWorld& world, const SignedImage& firmware,
                const std::optional<std::pair<int, std::string>>& credential) {
    const SigningKey* vendor = nullptr;
    for (const auto& [id, k] : world.keyring) {
        (void)id;
        if (k.role == KeyRole::TrhVendor) {
            vendor = &k;
            break;
        }
    }
    if (vendor == nullptr || !verify_image(firmware, *vendor)) {
        throw SimError(Err::BadSignature, "firmware not signed by the element vendor");
    }

    bool authorized = false;
    if (credential && world.users.count(credential->first)) {
        GatekeeperResult gk =
            gatekeeper_verify(world, credential->first, credential->second, world.clock);
        authorized = gk.pass;
    }
    if (authorized) return;

    // Update without the user's credential proceeds, but the element erases
    // every credential-derived secret first: new firmware can never be used
    // to open old data.
    for (auto& [id, u] : world.users) {
        (void)id;
        u.ce_secret_present = false;
        u.ce_available = false;
        u.auth.current_token.reset();
        u.auth.screen_locked = true;
    }
    std::vector<std::string> doomed;
    for (const auto& [path, obj] : world.objects) {
        if (obj.ce_protected) doomed.push_back(path);
    }
    for (const auto& p : doomed) world.remove_object(p);
    for (auto it = world.keystore.begin(); it != world.keystore.end();) {
        if (it->second.backing == KeyBacking::TrhStrongbox) {
            it = world.keystore.erase(it);
        } else {
            ++it;
        }
    }
}

void lock_screen(DeviceWorld& world, int user) {
    UserRecord& u = user_record(world, user);
    u.auth.screen_locked = true;
    u.auth.current_token.reset();
}

bool ce_available(const DeviceWorld& world, int user) {
    auto it = world.users.find(user);
    if (it == world.users.end()) throw SimError(Err::UnknownUser, std::to_string(user));
    return it->second.ce_available;
}

void on_reboot_auth(DeviceWorld& world) {
    for (auto& [id, u] : world.users) {
        (void)id;
        bool has_primary = primary_modality(u) != nullptr;
        u.auth.boot_unlocked_once = false;
        u.auth.current_token.reset();
        u.auth.screen_locked = has_primary;
        u.ce_available = has_primary ? false : u.ce_secret_present;
    }
}

}  // namespace secsim
