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

#include "secsim/world.hpp"

#include <cstdio>

#include "secsim/boot.hpp"
#include "secsim/canonical.hpp"
#include "secsim/hash_tree.hpp"

namespace secsim {

const char* party_class_name(PartyClass c) {
    switch (c) {
        case PartyClass::User: return "user";
        case PartyClass::Developer: return "developer";
        case PartyClass::Platform: return "platform";
        case PartyClass::Organization: return "organization";
    }
    return "unknown";
}

const char* consent_value_name(ConsentValue v) {
    switch (v) {
        case ConsentValue::AllowAlways: return "allow-always";
        case ConsentValue::AllowOnce: return "allow-once";
        case ConsentValue::AllowInForeground: return "allow-in-foreground";
        case ConsentValue::DenyOnce: return "deny-once";
        case ConsentValue::DenyAlways: return "deny-always";
    }
    return "unknown";
}

const char* resolution_name(Resolution r) {
    switch (r) {
        case Resolution::Allow: return "allow";
        case Resolution::Deny: return "deny";
        case Resolution::Ask: return "ask";
    }
    return "unknown";
}

std::optional<ConsentValue> consent_value_from_name(const std::string& s) {
    if (s == "allow-always") return ConsentValue::AllowAlways;
    if (s == "allow-once") return ConsentValue::AllowOnce;
    if (s == "allow-in-foreground") return ConsentValue::AllowInForeground;
    if (s == "deny-once") return ConsentValue::DenyOnce;
    if (s == "deny-always") return ConsentValue::DenyAlways;
    return std::nullopt;
}

const char* prot_level_name(ProtLevel l) {
    switch (l) {
        case ProtLevel::Normal: return "normal";
        case ProtLevel::Dangerous: return "dangerous";
        case ProtLevel::Special: return "special";
        case ProtLevel::Privileged: return "privileged";
        case ProtLevel::Signature: return "signature";
    }
    return "unknown";
}

std::optional<ProtLevel> prot_level_from_name(const std::string& s) {
    if (s == "normal") return ProtLevel::Normal;
    if (s == "dangerous") return ProtLevel::Dangerous;
    if (s == "special") return ProtLevel::Special;
    if (s == "privileged") return ProtLevel::Privileged;
    if (s == "signature") return ProtLevel::Signature;
    return std::nullopt;
}

const char* perm_status_name(PermStatus s) {
    switch (s) {
        case PermStatus::Granted: return "granted";
        case PermStatus::Denied: return "denied";
        case PermStatus::Ask: return "ask";
        case PermStatus::ForegroundOnly: return "foreground-only";
        case PermStatus::OneTime: return "one-time";
    }
    return "unknown";
}

const char* fs_location_name(FsLocation l) {
    switch (l) {
        case FsLocation::AppPrivate: return "app-private";
        case FsLocation::SharedStorage: return "shared-storage";
        case FsLocation::ExternalAppDir: return "external-app-dir";
        case FsLocation::System: return "system";
    }
    return "unknown";
}

std::optional<FsLocation> fs_location_from_name(const std::string& s) {
    if (s == "app-private") return FsLocation::AppPrivate;
    if (s == "shared-storage") return FsLocation::SharedStorage;
    if (s == "external-app-dir") return FsLocation::ExternalAppDir;
    if (s == "system") return FsLocation::System;
    return std::nullopt;
}

const char* key_role_name(KeyRole r) {
    switch (r) {
        case KeyRole::RomRoot: return "rom-root";
        case KeyRole::Bootloader: return "bootloader";
        case KeyRole::VbMetaRoot: return "vbmeta-root";
        case KeyRole::UserRoot: return "user-root";
        case KeyRole::Partition: return "partition";
        case KeyRole::Apk: return "apk";
        case KeyRole::PlatformSigning: return "platform-signing";
        case KeyRole::Attestation: return "attestation";
        case KeyRole::TrhVendor: return "trh-vendor";
    }
    return "unknown";
}

std::optional<KeyRole> key_role_from_name(const std::string& s) {
    static const std::map<std::string, KeyRole> names = {
        {"rom-root", KeyRole::RomRoot},
        {"bootloader", KeyRole::Bootloader},
        {"vbmeta-root", KeyRole::VbMetaRoot},
        {"user-root", KeyRole::UserRoot},
        {"partition", KeyRole::Partition},
        {"apk", KeyRole::Apk},
        {"platform-signing", KeyRole::PlatformSigning},
        {"attestation", KeyRole::Attestation},
        {"trh-vendor", KeyRole::TrhVendor},
    };
    auto it = names.find(s);
    if (it == names.end()) return std::nullopt;
    return it->second;
}

const char* boot_color_name(BootColor c) {
    switch (c) {
        case BootColor::GREEN: return "GREEN";
        case BootColor::YELLOW: return "YELLOW";
        case BootColor::ORANGE: return "ORANGE";
        case BootColor::RED: return "RED";
    }
    return "unknown";
}

const char* modality_kind_name(ModalityKind k) {
    switch (k) {
        case ModalityKind::Password: return "password";
        case ModalityKind::Pin: return "pin";
        case ModalityKind::Pattern: return "pattern";
        case ModalityKind::Biometric: return "biometric";
        case ModalityKind::TrustedDevice: return "trusted-device";
        case ModalityKind::TrustedPlace: return "trusted-place";
    }
    return "unknown";
}

std::optional<ModalityKind> modality_kind_from_name(const std::string& s) {
    if (s == "password") return ModalityKind::Password;
    if (s == "pin") return ModalityKind::Pin;
    if (s == "pattern") return ModalityKind::Pattern;
    if (s == "biometric") return ModalityKind::Biometric;
    if (s == "trusted-device") return ModalityKind::TrustedDevice;
    if (s == "trusted-place") return ModalityKind::TrustedPlace;
    return std::nullopt;
}

const char* auth_tier_name(AuthTier t) {
    switch (t) {
        case AuthTier::Primary: return "primary";
        case AuthTier::Secondary: return "secondary";
        case AuthTier::Tertiary: return "tertiary";
    }
    return "unknown";
}

const char* biometric_class_name(BiometricClass c) {
    switch (c) {
        case BiometricClass::None: return "none";
        case BiometricClass::Strong: return "strong";
        case BiometricClass::Weak: return "weak";
        case BiometricClass::Convenience: return "convenience";
    }
    return "unknown";
}

AuthTier tier_of(ModalityKind kind) {
    switch (kind) {
        case ModalityKind::Password:
        case ModalityKind::Pin:
        case ModalityKind::Pattern:
            return AuthTier::Primary;
        case ModalityKind::Biometric:
            return AuthTier::Secondary;
        case ModalityKind::TrustedDevice:
        case ModalityKind::TrustedPlace:
            return AuthTier::Tertiary;
    }
    return AuthTier::Tertiary;
}

BiometricClass classify_biometric(double sar_percent, bool pipeline_secure,
                                  const BiometricClassConfig& cfg) {
    // A spoofable capture path caps the class no matter how good the
    // matcher's acceptance rate looks.
    if (!pipeline_secure) return BiometricClass::Convenience;
    if (sar_percent <= cfg.strong_max_sar) return BiometricClass::Strong;
    if (sar_percent <= cfg.weak_max_sar) return BiometricClass::Weak;
    return BiometricClass::Convenience;
}

void ConsentStore::erase_party(const std::string& party) {
    erase_if([&](const std::string& p, const std::string&) { return p == party; });
}

void ConsentStore::erase_if(
    const std::function<bool(const std::string&, const std::string&)>& pred) {
    for (auto it = entries_.begin(); it != entries_.end();) {
        if (pred(it->first.first, it->first.second)) {
            it = entries_.erase(it);
        } else {
            ++it;
        }
    }
}

std::string user_party_id(int user) { return "user:" + std::to_string(user); }
std::string app_party_id(const std::string& package) { return "app:" + package; }
std::string org_party_id(const std::string& dpc_package) { return "org:" + dpc_package; }

// ---------------------------------------------------------------------------
// Defaults
// ---------------------------------------------------------------------------

std::map<std::string, PermissionDef> default_permission_registry() {
    std::map<std::string, PermissionDef> reg;
    auto add = [&](const std::string& name, ProtLevel level, const std::string& group = "",
                   const std::set<std::string>& flags = {}) {
        PermissionDef d;
        d.name = name;
        d.level = level;
        d.group = group;
        d.flags = flags;
        reg[name] = d;
    };
    add("INTERNET", ProtLevel::Normal);
    add("VIBRATE", ProtLevel::Normal);
    add("QUERY_ALL_PACKAGES", ProtLevel::Normal);
    add("READ_CONTACTS", ProtLevel::Dangerous, "contacts");
    add("WRITE_CONTACTS", ProtLevel::Dangerous, "contacts");
    add("READ_CALENDAR", ProtLevel::Dangerous, "calendar");
    add("ACCESS_FINE_LOCATION", ProtLevel::Dangerous, "location");
    add("ACCESS_COARSE_LOCATION", ProtLevel::Dangerous, "location");
    add("RECORD_AUDIO", ProtLevel::Dangerous, "microphone");
    add("CAMERA", ProtLevel::Dangerous, "camera");
    add("READ_SMS", ProtLevel::Dangerous, "sms");
    add("READ_EXTERNAL_STORAGE", ProtLevel::Dangerous, "storage");
    add("WRITE_EXTERNAL_STORAGE", ProtLevel::Dangerous, "storage");
    add("SYSTEM_ALERT_WINDOW", ProtLevel::Special);
    add("WRITE_SETTINGS", ProtLevel::Special);
    add("MANAGE_EXTERNAL_STORAGE", ProtLevel::Special);
    add("REBOOT", ProtLevel::Signature);
    add("INSTALL_PACKAGES", ProtLevel::Signature, "", {"privileged"});
    add("MANAGE_USERS", ProtLevel::Privileged);
    return reg;
}

MacPolicy default_mac_policy() {
    MacPolicy mac;
    auto allow = [&](const std::string& subj, const std::string& obj, const std::string& modes) {
        for (char m : modes) mac.allow.insert({subj, obj, m});
    };
    // Ordinary apps reach their own data and the mediated storage views.
    allow("untrusted_app", "app_data_file", "rw");
    allow("untrusted_app", "shared_storage_file", "rw");
    allow("untrusted_app", "external_app_file", "rw");
    allow("untrusted_app", "system_file", "rx");
    allow("platform_app", "app_data_file", "rw");
    allow("platform_app", "shared_storage_file", "rw");
    allow("platform_app", "external_app_file", "rw");
    allow("platform_app", "system_file", "rx");
    allow("system_server", "app_data_file", "rw");
    allow("system_server", "shared_storage_file", "rw");
    allow("system_server", "external_app_file", "rw");
    allow("system_server", "system_file", "rx");
    // Root is not subject to DAC but stays inside mandatory policy: no write
    // to the verified system partition.
    allow("root_domain", "app_data_file", "rw");
    allow("root_domain", "shared_storage_file", "rw");
    allow("root_domain", "external_app_file", "rw");
    allow("root_domain", "system_file", "rx");
    // isolated_app: no triples at all.
    return mac;
}

std::string mac_label_for_location(FsLocation loc) {
    switch (loc) {
        case FsLocation::AppPrivate: return "app_data_file";
        case FsLocation::SharedStorage: return "shared_storage_file";
        case FsLocation::ExternalAppDir: return "external_app_file";
        case FsLocation::System: return "system_file";
    }
    return "unlabeled";
}

std::string mac_label_for_uid(const DeviceWorld& world, uint32_t uid) {
    if (uid == kRootUid) return "root_domain";
    if (uid == kSystemUid) return "system_server";
    for (const auto& pkg : world.packages_for_uid(uid)) {
        const auto& m = world.packages.at(pkg).manifest;
        if (m.isolated) return "isolated_app";
        if (m.system_app || m.priv_allowlisted) return "platform_app";
    }
    if (!world.packages_for_uid(uid).empty()) return "untrusted_app";
    return "unlabeled";
}

// ---------------------------------------------------------------------------
// World construction
// ---------------------------------------------------------------------------

namespace {

FsObject make_shared_storage_root(int user, const std::string& controller) {
    FsObject o;
    o.path = "/storage/emulated/" + std::to_string(user);
    o.owner_uid = kSystemUid;
    o.mode = 0771;
    o.location = FsLocation::SharedStorage;
    o.creator_uid = kSystemUid;
    o.controller = controller;
    o.ce_protected = false;
    return o;
}

}  // namespace

DeviceWorld DeviceWorld::bootstrap(const WorldSeed& seed) {
    DeviceWorld w;
    w.boot = seed.boot;
    w.keyring = seed.keyring;
    w.perm_registry =
        seed.platform_perms.empty() ? default_permission_registry() : seed.platform_perms;
    w.mac = seed.mac.allow.empty() ? default_mac_policy() : seed.mac;

    Party platform;
    platform.id = platform_party_id();
    platform.cls = PartyClass::Platform;
    w.parties[platform.id] = platform;

    UserRecord owner;
    owner.id = 0;
    // No credential enrolled on a fresh device: storage is reachable and the
    // screen has nothing to lock.
    owner.ce_available = true;
    owner.auth.screen_locked = false;
    w.users[0] = owner;
    Party owner_party;
    owner_party.id = user_party_id(0);
    owner_party.cls = PartyClass::User;
    w.parties[owner_party.id] = owner_party;

    verify_boot_chain(w.boot, w.keyring);

    FsObject system_obj;
    system_obj.path = "/system";
    system_obj.owner_uid = kRootUid;
    system_obj.mode = 0755;
    system_obj.location = FsLocation::System;
    system_obj.creator_uid = kRootUid;
    system_obj.controller = platform_party_id();
    system_obj.ce_protected = false;
    w.add_object(system_obj);
    w.add_object(make_shared_storage_root(0, user_party_id(0)));
    return w;
}

DeviceWorld DeviceWorld::bootstrap_default() { return bootstrap(make_default_seed()); }

WorldSeed DeviceWorld::seed() const {
    WorldSeed s;
    s.boot = boot;
    s.keyring = keyring;
    for (const auto& [name, def] : perm_registry) {
        if (def.declarer == "platform") s.platform_perms[name] = def;
    }
    s.mac = mac;
    return s;
}

Party& DeviceWorld::party(const std::string& id) {
    auto it = parties.find(id);
    if (it == parties.end()) throw SimError(Err::UnknownParty, id);
    return it->second;
}

const Party& DeviceWorld::party(const std::string& id) const {
    auto it = parties.find(id);
    if (it == parties.end()) throw SimError(Err::UnknownParty, id);
    return it->second;
}

void DeviceWorld::add_object(FsObject obj) {
    if (!obj.controller.empty()) {
        auto it = parties.find(obj.controller);
        if (it != parties.end()) it->second.state.objects.insert(obj.path);
    }
    objects[obj.path] = std::move(obj);
}

void DeviceWorld::remove_object(const std::string& path) {
    auto it = objects.find(path);
    if (it == objects.end()) return;
    auto pit = parties.find(it->second.controller);
    if (pit != parties.end()) pit->second.state.objects.erase(path);
    objects.erase(it);
}

std::string DeviceWorld::uid_key(const std::string& package) const {
    auto it = packages.find(package);
    if (it == packages.end()) throw SimError(Err::UnknownPackage, package);
    const auto& group = it->second.manifest.shared_uid_request;
    if (!group.empty()) {
        auto git = shared_uid_app_id.find(group);
        if (git != shared_uid_app_id.end() && git->second == it->second.app_id) return group;
    }
    return package;
}

std::vector<std::string> DeviceWorld::packages_for_uid(uint32_t uid) const {
    Aid aid = Aid::from_uid(uid);
    std::vector<std::string> out;
    for (const auto& [name, rec] : packages) {
        if (rec.app_id == aid.app_id && rec.users.count(aid.user_id)) out.push_back(name);
    }
    return out;
}

bool DeviceWorld::is_foreground(const std::string& package) const {
    auto it = parties.find(app_party_id(package));
    if (it == parties.end()) return false;
    return it->second.state.attr_true("ui-foreground") ||
           it->second.state.attr_true("foreground-service");
}

// ---------------------------------------------------------------------------
// Canonical serialization
// ---------------------------------------------------------------------------

namespace {

std::string octal_mode(uint32_t mode) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%o", mode);
    return std::string(buf);
}

std::string opt_u64(const std::optional<uint64_t>& v) {
    return v ? CanonicalWriter::u64(*v) : "none";
}

void canonical_manifest(CanonicalWriter& w, const Manifest& m) {
    w.kv("manifest", m.package_name);
    w.kv("target-sdk", static_cast<uint64_t>(m.target_sdk));
    w.kv("shared-uid", m.shared_uid_request.empty() ? "-" : m.shared_uid_request);
    w.kv("flags", std::string(m.debuggable ? "debuggable," : "") +
                      (m.system_app ? "system," : "") + (m.priv_allowlisted ? "priv," : "") +
                      (m.isolated ? "isolated," : ""));
    for (const auto& p : m.requested_permissions) w.kv("uses-permission", p);
    for (const auto& d : m.declared_permissions) {
        std::string flags;
        for (const auto& f : d.flags) flags += f + ",";
        w.kv("declares", d.name + "|" + prot_level_name(d.level) + "|" + flags + "|" + d.group);
    }
    for (const auto& q : m.queries) w.kv("queries", q);
}

void canonical_boot(CanonicalWriter& w, const BootChain& b) {
    w.line("[boot]");
    w.kv("bootloader", to_hex(sha256(b.bootloader.content)) + "|" + b.bootloader.signed_by + "|" +
                           to_hex(b.bootloader.signature));
    w.kv("final-bootloader", to_hex(sha256(b.final_bootloader.content)) + "|" +
                                 b.final_bootloader.signed_by + "|" +
                                 to_hex(b.final_bootloader.signature));
    for (const auto& [name, data] : b.partitions) {
        w.kv("partition", name + "|" + to_hex(sha256(data)) + "|" +
                              CanonicalWriter::u64(data.size()));
    }
    for (const auto& [name, tree] : b.trees) {
        w.kv("tree", name + "|" + to_hex(sha256(serialize_hash_tree(tree))));
    }
    for (const auto& [name, meta] : b.vbmetas) {
        w.kv("vbmeta", name + "|" + to_hex(serialize_vbmeta(meta)));
    }
    w.kv("device-locked", b.device_locked ? "true" : "false");
    w.kv("rom-key", b.rom_key);
    w.kv("bootloader-key", b.bootloader_key);
    w.kv("manufacturer-root", b.manufacturer_root);
    w.kv("user-root", b.user_root.empty() ? "-" : b.user_root);
    for (const auto& [slot, idx] : b.rollback.slots) {
        w.kv("rollback", slot + "|" + CanonicalWriter::u64(idx));
    }
    w.kv("frp-enabled", b.frp_enabled ? "true" : "false");
    w.kv("frp-record", b.frp_record);
    w.kv("os-version", b.os_version);
    std::string reasons;
    for (const auto& r : b.last_boot.reasons) reasons += r + ",";
    w.kv("last-boot", std::string(boot_color_name(b.last_boot.color)) + "|" +
                          (b.last_boot.device_locked ? "locked" : "unlocked") + "|" + reasons);
}

void canonical_keyring(CanonicalWriter& w, const std::map<std::string, SigningKey>& keyring) {
    w.line("[keyring]");
    for (const auto& [id, k] : keyring) {
        w.kv("key", id + "|" + key_role_name(k.role) + "|" + k.secret);
    }
}

void canonical_perm_registry(CanonicalWriter& w,
                             const std::map<std::string, PermissionDef>& reg) {
    w.line("[permissions]");
    for (const auto& [name, d] : reg) {
        std::string flags;
        for (const auto& f : d.flags) flags += f + ",";
        w.kv("perm", name + "|" + prot_level_name(d.level) + "|" + flags + "|" + d.group + "|" +
                         d.declarer + "|" + d.declarer_key);
    }
}

void canonical_mac(CanonicalWriter& w, const MacPolicy& mac) {
    w.line("[mac]");
    for (const auto& [subj, obj, mode] : mac.allow) {
        w.kv("allow", subj + "|" + obj + "|" + std::string(1, mode));
    }
}

}  // namespace

std::string DeviceWorld::canonical_serialization() const {
    CanonicalWriter w;
    w.line("world-format 1");

    w.line("[parties]");
    for (const auto& [id, p] : parties) {
        w.kv("party", id + "|" + party_class_name(p.cls) + "|" +
                          CanonicalWriter::u64(generation(id)));
        for (const auto& o : p.state.objects) w.kv("object", o);
        for (const auto& [k, v] : p.state.attributes) w.kv("attr", k + "|" + v);
    }

    w.line("[consent]");
    for (const auto& [key, v] : consent.entries()) {
        w.kv("entry", key.first + "|" + key.second + "|" + consent_value_name(v));
    }

    w.line("[users]");
    for (const auto& [id, u] : users) {
        w.kv("user", CanonicalWriter::u64(static_cast<uint64_t>(id)));
        for (const auto& [name, m] : u.enrolled) {
            w.kv("modality", name + "|" + modality_kind_name(m.kind) + "|" +
                                 biometric_class_name(m.bio_class) + "|" + m.factor_secret + "|" +
                                 (m.weaver ? "trh" : "tee"));
        }
        w.kv("last-primary", opt_u64(u.auth.last_primary_success));
        w.kv("last-any", opt_u64(u.auth.last_any_success));
        w.kv("boot-unlocked-once", u.auth.boot_unlocked_once ? "true" : "false");
        w.kv("screen-locked", u.auth.screen_locked ? "true" : "false");
        if (u.auth.current_token) {
            const auto& t = *u.auth.current_token;
            w.kv("token", std::string(auth_tier_name(t.tier)) + "|" +
                              biometric_class_name(t.bio_class) + "|" +
                              CanonicalWriter::u64(t.time) + "|" + (t.trh_backed ? "trh" : "tee"));
        } else {
            w.kv("token", "none");
        }
        w.kv("ce-available", u.ce_available ? "true" : "false");
        w.kv("ce-secret-present", u.ce_secret_present ? "true" : "false");
        w.kv("work-profile", u.is_work_profile ? std::to_string(u.parent_user) : "-");
    }

    w.line("[packages]");
    for (const auto& [name, rec] : packages) {
        w.kv("package", name + "|" + rec.key_id + "|" + CanonicalWriter::u64(rec.app_id));
        std::string lineage;
        for (const auto& k : rec.lineage.keys) lineage += k + ",";
        w.kv("lineage", lineage);
        for (const auto& sig : rec.lineage.link_sigs) w.kv("lineage-sig", to_hex(sig));
        std::string users_joined;
        for (int u : rec.users) users_joined += std::to_string(u) + ",";
        w.kv("installed-for", users_joined);
        canonical_manifest(w, rec.manifest);
    }
    w.line("[shared-uids]");
    for (const auto& [group, app_id] : shared_uid_app_id) {
        auto kit = shared_uid_key.find(group);
        w.kv("shared", group + "|" + CanonicalWriter::u64(app_id) + "|" +
                           (kit == shared_uid_key.end() ? "-" : kit->second));
    }

    w.line("[objects]");
    for (const auto& [path, o] : objects) {
        std::string labels;
        for (const auto& l : o.labels) labels += l + ",";
        w.kv("fs", path + "|" + CanonicalWriter::u64(o.owner_uid) + "|" + octal_mode(o.mode) +
                       "|" + fs_location_name(o.location) + "|" + labels + "|" +
                       CanonicalWriter::u64(o.creator_uid) + "|" + o.controller + "|" +
                       (o.ce_protected ? "ce" : "de"));
    }

    canonical_mac(w, mac);
    canonical_perm_registry(w, perm_registry);

    w.line("[grants]");
    for (const auto& [key, v] : install_grants) w.kv("grant", key + "|" + (v ? "true" : "false"));
    for (const auto& s : onetime_sessions) w.kv("one-time", s);

    w.line("[scopes]");
    for (const auto& [id, s] : scopes) {
        w.kv("scope", CanonicalWriter::u64(id) + "|" + s.granter + "|" +
                          CanonicalWriter::u64(s.granter_generation) + "|" + s.grantee);
        for (const auto& [path, modes] : s.objects) w.kv("scope-object", path + "|" + modes.str());
    }
    w.kv("next-scope", next_scope_id);

    canonical_boot(w, boot);
    canonical_keyring(w, keyring);

    w.line("[keystore]");
    for (const auto& [id, k] : keystore) {
        w.kv("entry", id + "|" + (k.backing == KeyBacking::TrhStrongbox ? "strongbox" : "tee") +
                          "|" + (k.auth_bound ? "bound" : "free") + "|" +
                          (k.requires_user_presence ? "presence" : "-") + "|" +
                          auth_tier_name(k.min_auth_tier) + "|" +
                          CanonicalWriter::u64(static_cast<uint64_t>(k.user)) + "|" +
                          k.owner_package + "|" + k.secret + "|" +
                          (k.for_confirmation ? "confirm" : "-"));
    }
    w.kv("keystore-initialized", keystore_initialized ? "true" : "false");

    w.line("[org]");
    if (org) {
        std::string denied;
        for (const auto& d : org->denied_action_classes) denied += d + ",";
        w.kv("policy", org->dpc_package + "|" + (org->device_owner ? "device" : "profile") + "|" +
                           denied + "|" + std::to_string(org->profile_user) + "|" + org->party_id);
    } else {
        w.kv("policy", "none");
    }

    w.line("[misc]");
    w.kv("kernel-compromised", kernel_compromised ? "true" : "false");
    w.kv("prompt-count", prompt_count);
    w.kv("next-app-id", static_cast<uint64_t>(next_app_id));
    w.kv("next-user-id", static_cast<uint64_t>(next_user_id));
    // The simulated clock is runner scaffolding, deliberately not device
    // state: two worlds that differ only in elapsed time are the same device.
    return w.str();
}

Digest DeviceWorld::digest() const { return sha256(canonical_serialization()); }

std::string canonical_seed(const WorldSeed& seed) {
    CanonicalWriter w;
    w.line("seed-format 1");
    canonical_boot(w, seed.boot);
    canonical_keyring(w, seed.keyring);
    canonical_perm_registry(w, seed.platform_perms);
    canonical_mac(w, seed.mac);
    return w.str();
}

// ---------------------------------------------------------------------------
// Default seed
// ---------------------------------------------------------------------------

WorldSeed make_default_seed(const DefaultBootOptions& opts) {
    WorldSeed seed;
    auto& keyring = seed.keyring;
    auto add_key = [&](const std::string& id, KeyRole role) {
        keyring[id] = SigningKey{id, role, "secret-" + id};
    };
    add_key("rom-key", KeyRole::RomRoot);
    add_key("bootloader-key", KeyRole::Bootloader);
    add_key("oem-root", KeyRole::VbMetaRoot);
    add_key("vendor-key", KeyRole::Partition);
    add_key("platform-key", KeyRole::PlatformSigning);
    add_key("attest-key", KeyRole::Attestation);
    add_key("trh-vendor-key", KeyRole::TrhVendor);
    if (!opts.user_root.empty()) add_key(opts.user_root, KeyRole::UserRoot);

    BootChain& chain = seed.boot;
    chain.rom_key = "rom-key";
    chain.bootloader_key = "bootloader-key";
    chain.manufacturer_root = "oem-root";
    chain.user_root = opts.user_root;
    chain.device_locked = opts.locked;
    chain.frp_enabled = opts.frp_enabled;
    chain.frp_record = opts.frp_record;

    std::string bl = "bootloader|" + opts.os_version;
    chain.bootloader.content.assign(bl.begin(), bl.end());
    sign_image(chain.bootloader, keyring["rom-key"]);
    std::string fbl = "final-bootloader|" + opts.os_version;
    chain.final_bootloader.content.assign(fbl.begin(), fbl.end());
    sign_image(chain.final_bootloader, keyring["bootloader-key"]);

    BootPayloadOptions payload;
    payload.version = opts.os_version;
    payload.rollback_index = opts.rollback_index;
    payload.block_size = opts.block_size;
    payload.top_signer = opts.user_root.empty() ? chain.manufacturer_root : opts.user_root;
    populate_boot_payload(chain, keyring, payload);
    return seed;
}

}  // namespace secsim
