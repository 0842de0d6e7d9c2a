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
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "secsim/digest.hpp"
#include "secsim/error.hpp"

namespace secsim {

// ---------------------------------------------------------------------------
// Stakeholders and consent
// ---------------------------------------------------------------------------

enum class PartyClass { User, Developer, Platform, Organization };

const char* party_class_name(PartyClass c);

// Internal state of a stakeholder: the data objects it controls plus free-form
// attributes (e.g. ui-foreground). Control, not legal ownership.
struct StakeholderState {
    std::set<std::string> objects;
    std::map<std::string, std::string> attributes;

    bool attr_true(const std::string& name) const {
        auto it = attributes.find(name);
        return it != attributes.end() && it->second == "true";
    }
};

struct Party {
    std::string id;
    PartyClass cls;
    StakeholderState state;
};

enum class ConsentValue { AllowAlways, AllowOnce, AllowInForeground, DenyOnce, DenyAlways };
enum class Resolution { Allow, Deny, Ask };

const char* consent_value_name(ConsentValue v);
const char* resolution_name(Resolution r);
std::optional<ConsentValue> consent_value_from_name(const std::string& s);

// Cached consent responses keyed by (party id, action class). One-shot values
// are erased when consumed; an absent entry resolves to Ask.
class ConsentStore {
  public:
    void put(const std::string& party, const std::string& action_class, ConsentValue v) {
        entries_[{party, action_class}] = v;
    }
    std::optional<ConsentValue> peek(const std::string& party, const std::string& action_class) const {
        auto it = entries_.find({party, action_class});
        if (it == entries_.end()) return std::nullopt;
        return it->second;
    }
    void erase(const std::string& party, const std::string& action_class) {
        entries_.erase({party, action_class});
    }
    // Removes every entry cached by the given party.
    void erase_party(const std::string& party);
    // Removes entries matching a (party, action_class) predicate; used when a
    // party is removed and entries toward it must go as well.
    void erase_if(const std::function<bool(const std::string&, const std::string&)>& pred);

    const std::map<std::pair<std::string, std::string>, ConsentValue>& entries() const {
        return entries_;
    }

  private:
    std::map<std::pair<std::string, std::string>, ConsentValue> entries_;
};

struct AccessModes {
    bool read = false;
    bool write = false;

    std::string str() const {
        std::string s;
        if (read) s += 'r';
        if (write) s += 'w';
        return s.empty() ? "-" : s;
    }
};

struct ScopeRequest {
    std::string object;  // path
    AccessModes mode;
};

// One interaction between the parties of a current action.
struct Action {
    std::string id;
    std::string action_class;
    std::vector<std::string> parties;  // party ids
    std::vector<ScopeRequest> requested_scope;
};

// A granted scope over a subset of the granter's state. Registered in the
// world so access checks can honor it; invalidated when the granter resets.
struct AccessScope {
    uint64_t scope_id = 0;
    std::string granter;
    uint64_t granter_generation = 0;
    std::string grantee;  // party id
    std::map<std::string, AccessModes> objects;
};

// ---------------------------------------------------------------------------
// Permissions
// ---------------------------------------------------------------------------

enum class ProtLevel { Normal, Dangerous, Special, Privileged, Signature };

const char* prot_level_name(ProtLevel l);
std::optional<ProtLevel> prot_level_from_name(const std::string& s);

struct PermissionDef {
    std::string name;
    ProtLevel level = ProtLevel::Normal;
    std::set<std::string> flags;   // e.g. "privileged"
    std::string group;             // only meaningful for dangerous permissions
    std::string declarer = "platform";
    std::string declarer_key = "platform-key";
};

enum class PermStatus { Granted, Denied, Ask, ForegroundOnly, OneTime };

const char* perm_status_name(PermStatus s);

// ---------------------------------------------------------------------------
// Packages and the sandbox
// ---------------------------------------------------------------------------

inline constexpr int kAidUserOffset = 100000;
inline constexpr int kAidAppStart = 10000;
inline constexpr int kAidAppEnd = 19999;
inline constexpr uint32_t kRootUid = 0;
inline constexpr uint32_t kSystemUid = 1000;
// Package visibility is filtered for apps targeting this API level or later.
inline constexpr int kVisibilityEnforcedSdk = 30;
// Private app data directories default to 0700 from this target level on.
inline constexpr int kPrivateDirLockdownSdk = 24;
// External storage access is scoped to app-owned files from this level on.
inline constexpr int kScopedStorageSdk = 29;

struct Aid {
    int user_id = 0;
    int app_id = 0;

    uint32_t uid() const { return static_cast<uint32_t>(user_id) * kAidUserOffset + app_id; }
    static Aid from_uid(uint32_t uid) {
        return Aid{static_cast<int>(uid / kAidUserOffset), static_cast<int>(uid % kAidUserOffset)};
    }
    bool is_app() const { return app_id >= kAidAppStart && app_id <= kAidAppEnd; }
};

struct Manifest {
    std::string package_name;
    std::vector<std::string> requested_permissions;
    std::vector<PermissionDef> declared_permissions;
    int target_sdk = 30;
    std::string shared_uid_request;  // empty = none
    bool debuggable = false;
    std::vector<std::string> queries;  // declared package-interaction filters
    bool system_app = false;
    bool priv_allowlisted = false;
    // Isolated-process package: runs with an empty permission set and a
    // minimal MAC label that reaches nothing.
    bool isolated = false;
};

// APK Signature Scheme v3 style proof-of-rotation: ordered keys, each link
// signed by its predecessor.
struct SigningLineage {
    std::vector<std::string> keys;                   // oldest .. current
    std::vector<std::vector<uint8_t>> link_sigs;     // size = keys.size() - 1

    bool empty() const { return keys.empty(); }
};

struct PackageRecord {
    Manifest manifest;
    std::string key_id;
    SigningLineage lineage;
    int app_id = 0;
    std::set<int> users;  // user ids this package is installed for
};

enum class FsLocation { AppPrivate, SharedStorage, ExternalAppDir, System };

const char* fs_location_name(FsLocation l);
std::optional<FsLocation> fs_location_from_name(const std::string& s);

struct FsObject {
    std::string path;
    uint32_t owner_uid = 0;
    uint32_t mode = 0600;
    FsLocation location = FsLocation::AppPrivate;
    std::set<std::string> labels;
    uint32_t creator_uid = 0;  // provenance for scoped storage
    std::string controller;    // party id controlling this object
    bool ce_protected = true;  // credential- vs device-encrypted storage class
};

// Abstract mandatory policy: explicit allow triples, absence denies.
struct MacPolicy {
    std::set<std::tuple<std::string, std::string, char>> allow;  // (subject, object, 'r'|'w')

    bool allows(const std::string& subject, const std::string& object, char mode) const {
        return allow.count({subject, object, mode}) > 0;
    }
};

// ---------------------------------------------------------------------------
// Verified boot
// ---------------------------------------------------------------------------

enum class KeyRole {
    RomRoot,         // K_A, immutable for the device lifetime
    Bootloader,      // K_B
    VbMetaRoot,      // K_C
    UserRoot,        // K_C'
    Partition,       // K_D
    Apk,             // K_E
    PlatformSigning,
    Attestation,
    TrhVendor,
};

const char* key_role_name(KeyRole r);
std::optional<KeyRole> key_role_from_name(const std::string& s);

struct SigningKey {
    std::string id;
    KeyRole role = KeyRole::Apk;
    std::string secret;
};

struct HashTree {
    uint32_t block_size = 4096;
    uint32_t num_blocks = 0;
    // levels[0] = leaf digests, each next level hashes pairs of the previous,
    // levels.back() has exactly one node (the root).
    std::vector<std::vector<Digest>> levels;

    Digest root() const { return levels.empty() ? Digest{} : levels.back()[0]; }
};

// Signed metadata names only the root digest; the tree itself is stored
// beside the partition, uncovered by the signature, and revalidated on
// every read.
struct HashDescriptor {
    std::string partition;
    uint32_t block_size = 4096;
    uint32_t num_blocks = 0;
    Digest root{};
};

struct ChainDescriptor {
    std::string partition;       // names the chained vbmeta scope
    std::string expected_key;    // key that must sign the chained vbmeta
};

struct VbMeta {
    std::string signed_by;
    uint64_t rollback_index = 0;
    std::vector<HashDescriptor> hash_descs;
    std::vector<ChainDescriptor> chain_descs;
    std::vector<uint8_t> signature;
};

struct RollbackStore {
    std::map<std::string, uint64_t> slots;  // scope ("vbmeta" or chained name) -> counter
};

enum class BootColor { GREEN, YELLOW, ORANGE, RED };

const char* boot_color_name(BootColor c);

struct BootState {
    BootColor color = BootColor::RED;
    bool device_locked = true;
    std::vector<std::string> reasons;
};

struct SignedImage {
    std::vector<uint8_t> content;
    std::string signed_by;
    std::vector<uint8_t> signature;
};

struct BootChain {
    SignedImage bootloader;        // verified under the ROM key K_A
    SignedImage final_bootloader;  // verified under K_B
    std::map<std::string, std::vector<uint8_t>> partitions;
    std::map<std::string, HashTree> trees;  // on-disk trees, one per hashed partition
    std::map<std::string, VbMeta> vbmetas;  // "vbmeta" plus chained "vbmeta_<p>"
    bool device_locked = true;
    std::string rom_key;            // K_A id
    std::string bootloader_key;     // K_B id
    std::string manufacturer_root;  // K_C id
    std::string user_root;          // K_C' id; empty = unset
    RollbackStore rollback;
    bool frp_enabled = false;
    std::string frp_record;
    std::string os_version = "11";
    BootState last_boot;
};

struct AttestationRecord {
    bool device_locked = true;
    BootColor boot_state = BootColor::GREEN;
    Digest vbmeta_digest{};
    std::string challenge;
    std::string key_id;
    std::vector<uint8_t> signature;
};

// ---------------------------------------------------------------------------
// Authentication & keys
// ---------------------------------------------------------------------------

enum class ModalityKind { Password, Pin, Pattern, Biometric, TrustedDevice, TrustedPlace };
enum class AuthTier { Primary, Secondary, Tertiary };
enum class BiometricClass { None, Strong, Weak, Convenience };

const char* modality_kind_name(ModalityKind k);
std::optional<ModalityKind> modality_kind_from_name(const std::string& s);
const char* auth_tier_name(AuthTier t);
const char* biometric_class_name(BiometricClass c);
AuthTier tier_of(ModalityKind kind);

// Classification axes for secondary modalities: spoof acceptance rate and
// pipeline security. Cut-off values are configuration, not claims of
// fidelity; tests use class labels directly.
struct BiometricClassConfig {
    double strong_max_sar = 7.0;
    double weak_max_sar = 20.0;
};
BiometricClass classify_biometric(double sar_percent, bool pipeline_secure,
                                  const BiometricClassConfig& cfg = {});

struct Modality {
    std::string name;
    ModalityKind kind = ModalityKind::Pin;
    BiometricClass bio_class = BiometricClass::None;
    std::string factor_secret;  // knowledge factor template (primary only)
    bool weaver = false;        // verification routed through the TRH

    AuthTier tier() const { return tier_of(kind); }
};

struct AuthToken {
    int user = 0;
    AuthTier tier = AuthTier::Primary;
    BiometricClass bio_class = BiometricClass::None;
    uint64_t time = 0;
    bool trh_backed = false;
};

struct AuthState {
    std::optional<uint64_t> last_primary_success;
    std::optional<uint64_t> last_any_success;
    bool boot_unlocked_once = false;
    bool screen_locked = true;
    std::optional<AuthToken> current_token;
};

struct UserRecord {
    int id = 0;
    std::map<std::string, Modality> enrolled;
    AuthState auth;
    bool ce_available = false;     // credential-encrypted storage unlocked
    bool ce_secret_present = true; // false once wiped by insider-attack resistance
    bool is_work_profile = false;
    int parent_user = -1;
};

enum class KeyBacking { TeeKeymaster, TrhStrongbox };

struct KeyEntry {
    std::string id;
    KeyBacking backing = KeyBacking::TeeKeymaster;
    bool auth_bound = false;
    bool requires_user_presence = false;
    AuthTier min_auth_tier = AuthTier::Secondary;
    int user = 0;
    std::string owner_package;
    std::string secret;
    bool for_confirmation = false;
};

// ---------------------------------------------------------------------------
// Enterprise
// ---------------------------------------------------------------------------

struct OrgPolicy {
    std::string dpc_package;
    bool device_owner = false;  // DO controls the whole device, PO only the profile
    std::set<std::string> denied_action_classes;
    int profile_user = -1;
    std::string party_id;
};

// ---------------------------------------------------------------------------
// The device world
// ---------------------------------------------------------------------------

// Everything bootstrap needs that is covered by verified boot (system images,
// hardware key material, platform-defined policy). Factory reset rebuilds the
// world from exactly this plus the FRP record inside the boot chain.
struct WorldSeed {
    BootChain boot;
    std::map<std::string, SigningKey> keyring;
    std::map<std::string, PermissionDef> platform_perms;  // empty = built-in defaults
    MacPolicy mac;                                        // empty = built-in defaults
};

struct DeviceWorld {
    std::map<std::string, Party> parties;
    ConsentStore consent;
    std::map<int, UserRecord> users;
    std::map<std::string, PackageRecord> packages;
    std::map<std::string, int> shared_uid_app_id;          // group -> app id
    std::map<std::string, std::string> shared_uid_key;     // group -> signing key id
    std::map<std::string, FsObject> objects;               // path -> object
    MacPolicy mac;
    std::map<std::string, PermissionDef> perm_registry;
    // Install-time grant table for normal/signature/privileged/special
    // classes, keyed "user|uidkey|perm".
    std::map<std::string, bool> install_grants;
    // Live one-time permission sessions, keyed "user|uidkey|class".
    std::set<std::string> onetime_sessions;
    std::map<uint64_t, AccessScope> scopes;
    std::map<std::string, uint64_t> party_generation;
    uint64_t next_scope_id = 1;
    BootChain boot;
    std::map<std::string, SigningKey> keyring;
    std::map<std::string, KeyEntry> keystore;
    bool keystore_initialized = true;
    std::optional<OrgPolicy> org;
    bool kernel_compromised = false;
    uint64_t prompt_count = 0;
    int next_app_id = kAidAppStart;
    int next_user_id = 10;
    // Simulated clock (seconds). Scenario scaffolding, not device state: it
    // is advanced by event timestamps and excluded from the world digest.
    uint64_t clock = 0;

    static DeviceWorld bootstrap(const WorldSeed& seed);
    // Convenience: bootstrap with a default valid boot chain and keyring.
    static DeviceWorld bootstrap_default();

    // Extracts the verified-boot-covered inputs of this world, suitable for
    // reconstructing a factory-fresh equivalent.
    WorldSeed seed() const;

    Digest digest() const;
    std::string canonical_serialization() const;

    Party& party(const std::string& id);
    const Party& party(const std::string& id) const;
    bool has_party(const std::string& id) const { return parties.count(id) > 0; }

    uint64_t generation(const std::string& party_id) const {
        auto it = party_generation.find(party_id);
        return it == party_generation.end() ? 0 : it->second;
    }
    void bump_generation(const std::string& party_id) { party_generation[party_id]++; }

    // Object bookkeeping keeps FsObject.controller and party state in sync.
    void add_object(FsObject obj);
    void remove_object(const std::string& path);

    // Packages sharing a validated shared UID also share consent decisions;
    // this key names the consent/grant subject for a package.
    std::string uid_key(const std::string& package) const;
    // All packages mapped to the app id of this uid (several under shared UID).
    std::vector<std::string> packages_for_uid(uint32_t uid) const;

    bool is_foreground(const std::string& package) const;
};

// Party id conventions.
std::string user_party_id(int user);
std::string app_party_id(const std::string& package);
inline const char* platform_party_id() { return "platform"; }
std::string org_party_id(const std::string& dpc_package);

// Default permission registry and MAC policy used when a seed leaves them
// empty (and by tests).
std::map<std::string, PermissionDef> default_permission_registry();
MacPolicy default_mac_policy();

// Built-in MAC labels.
std::string mac_label_for_uid(const DeviceWorld& world, uint32_t uid);
std::string mac_label_for_location(FsLocation loc);

// Builds a default, correctly signed boot chain (bootloader stages, top-level
// vbmeta with a chained vendor partition, hash trees, keys).
struct DefaultBootOptions {
    std::string os_version = "11";
    uint64_t rollback_index = 1;
    uint32_t block_size = 64;
    bool locked = true;
    std::string user_root;  // non-empty: sign vbmeta with this user root key
    bool frp_enabled = false;
    std::string frp_record;
};
WorldSeed make_default_seed(const DefaultBootOptions& opts = {});

// Canonical text form of a seed, for comparing what survives into a
// factory-fresh world.
std::string canonical_seed(const WorldSeed& seed);

}  // namespace secsim
