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

// Acceptance suite: one independently checked property per core guarantee.
// Each criterion prints exactly one PASS/FAIL line; the process exits
// nonzero if any criterion fails. Every randomized criterion runs from a
// fixed seed so the suite is deterministic.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "secsim/auth.hpp"
#include "secsim/boot.hpp"
#include "secsim/consent.hpp"
#include "secsim/error.hpp"
#include "secsim/hash_tree.hpp"
#include "secsim/permissions.hpp"
#include "secsim/sandbox.hpp"
#include "secsim/scenario.hpp"
#include "secsim/world.hpp"

namespace {

using namespace secsim;
using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string format_seconds(double s) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2fs", s);
    return buf;
}

// ---------------------------------------------------------------------------
// Criterion 1: consent is a conjunction. The engine returns allow if and only
// if every party in the action resolves to allow, and the vetoing party is
// the first party that does not. Checked against a hand-rolled resolver over
// random 4-party configurations.

Outcome criterion_veto() {
    auto start = Clock::now();
    std::mt19937_64 rng(0xC0115E47u);

    DeviceWorld world = DeviceWorld::bootstrap_default();
    Manifest ma;
    ma.package_name = "com.a";
    register_app(world, "k0", ma);
    Manifest mb;
    mb.package_name = "com.b";
    register_app(world, "k1", mb);

    const std::vector<std::string> party_ids = {user_party_id(0), platform_party_id(),
                                                app_party_id("com.a"), app_party_id("com.b")};
    const ConsentValue values[] = {ConsentValue::AllowAlways, ConsentValue::AllowOnce,
                                   ConsentValue::AllowInForeground, ConsentValue::DenyOnce,
                                   ConsentValue::DenyAlways};

    const int kConfigs = 10000;
    int counterexamples = 0;
    int allows = 0;
    std::string first_bad;

    for (int iter = 0; iter < kConfigs; ++iter) {
        // Random foreground context for the two app parties; an action is in
        // the foreground when any developer party is.
        bool fg = false;
        for (const char* pkg : {"com.a", "com.b"}) {
            Party& p = world.parties.at(app_party_id(pkg));
            p.state.attributes.clear();
            if (rng() % 2) {
                p.state.attributes[rng() % 2 ? "ui-foreground" : "foreground-service"] = "true";
                fg = true;
            }
        }

        // Each party either has a cached entry or answers a fresh prompt.
        ConsentStore store;
        std::map<std::string, ConsentValue> effective;
        std::map<std::string, ConsentValue> prompted;
        for (const auto& pid : party_ids) {
            ConsentValue v = values[rng() % 5];
            effective[pid] = v;
            if (rng() % 2) {
                store.put(pid, "cls-test", v);
            } else {
                prompted[pid] = v;
            }
        }
        ConsentResponder responder = [&](const std::string& party,
                                         const std::string&) -> std::optional<ConsentValue> {
            auto it = prompted.find(party);
            if (it == prompted.end()) return std::nullopt;
            return it->second;
        };

        Action action = make_action(world, "act", "cls-test", party_ids);
        ConsentDecision got = evaluate_consent(action, store, world, &responder);

        // Independent resolver: one-shot and sticky allows pass, foreground
        // allows pass only in a foreground interaction, denies veto.
        bool want_allow = true;
        std::string want_veto;
        for (const auto& pid : party_ids) {
            ConsentValue v = effective[pid];
            bool allow = v == ConsentValue::AllowAlways || v == ConsentValue::AllowOnce ||
                         (v == ConsentValue::AllowInForeground && fg);
            if (!allow) {
                want_allow = false;
                want_veto = pid;
                break;
            }
        }

        if (got.allow) ++allows;
        if (got.allow != want_allow || got.vetoing_party != want_veto) {
            ++counterexamples;
            if (first_bad.empty()) {
                first_bad = "iter " + std::to_string(iter) + " got allow=" +
                            (got.allow ? "1" : "0") + " veto=" + got.vetoing_party;
            }
        }
    }

    // A party that stays silent is a hard deny, not a default allow.
    int silent_failures = 0;
    for (int iter = 0; iter < 100; ++iter) {
        ConsentStore store;
        std::string silent = party_ids[rng() % party_ids.size()];
        ConsentResponder responder = [&](const std::string& party,
                                         const std::string&) -> std::optional<ConsentValue> {
            if (party == silent) return std::nullopt;
            return ConsentValue::AllowAlways;
        };
        Action action = make_action(world, "act", "cls-test", party_ids);
        bool threw = false;
        try {
            evaluate_consent(action, store, world, &responder);
        } catch (const SimError& e) {
            threw = e.code() == Err::MissingConsent;
        }
        if (!threw) ++silent_failures;
    }

    double dt = seconds_since(start);
    bool pass = counterexamples == 0 && silent_failures == 0 && dt < 10.0;
    std::string detail = std::to_string(kConfigs) + " configs (" + std::to_string(allows) +
                         " allowed), " + std::to_string(counterexamples) + " counterexamples, " +
                         std::to_string(silent_failures) + " silent-party misses, " +
                         format_seconds(dt);
    if (!first_bad.empty()) detail += " [" + first_bad + "]";
    return {pass, detail};
}

// ---------------------------------------------------------------------------
// Criterion 2: factory reset erases exactly the user-space history. A trace
// of random user-space events followed by a platform reset must land on the
// same world digest as a twin world that saw only the trace's boot-covered
// events (system updates and reboots) before the same reset.

struct TraceOp {
    enum Kind {
        RegApp,
        InstallForUser,
        RuntimeRequest,
        ConsentPut,
        SettingsToggle,
        AddObject,
        Enroll,
        Auth,
        LockScreen,
        Uninstall,
        Evaluate,
        DevReset,
        CreateProfile,
        Ota,
        Reboot,
    };
    Kind kind;
    std::string s1;
    std::string s2;
    uint64_t a = 0;
    uint64_t b = 0;

    bool boot_covered() const { return kind == Ota || kind == Reboot; }
};

void apply_trace_op(DeviceWorld& world, const TraceOp& op) {
    try {
        switch (op.kind) {
            case TraceOp::RegApp: {
                Manifest m;
                m.package_name = op.s1;
                m.target_sdk = op.a % 2 ? 30 : 23;
                m.isolated = op.a % 10 == 3;
                if (op.a % 3 == 0) m.requested_permissions = {"READ_EXTERNAL_STORAGE"};
                register_app(world, op.s2, m);
                break;
            }
            case TraceOp::InstallForUser:
                install_for_user(world, op.s1, static_cast<int>(op.a));
                break;
            case TraceOp::RuntimeRequest: {
                if (op.a % 2 && world.parties.count(app_party_id(op.s1))) {
                    world.parties.at(app_party_id(op.s1))
                        .state.attributes["ui-foreground"] = "true";
                }
                RuntimeResponse responses[] = {RuntimeResponse::Allow,
                                               RuntimeResponse::AllowForeground,
                                               RuntimeResponse::AllowOneTime,
                                               RuntimeResponse::Deny,
                                               RuntimeResponse::DenyAlways};
                request_runtime(world, op.s1, 0, "READ_EXTERNAL_STORAGE", responses[op.b % 5]);
                break;
            }
            case TraceOp::ConsentPut: {
                ConsentValue values[] = {ConsentValue::AllowAlways, ConsentValue::AllowOnce,
                                         ConsentValue::AllowInForeground, ConsentValue::DenyOnce,
                                         ConsentValue::DenyAlways};
                world.consent.put(op.s1, "cls-" + std::to_string(op.a % 3), values[op.b % 5]);
                break;
            }
            case TraceOp::SettingsToggle:
                settings_toggle(world, op.s1, 0, "MANAGE_EXTERNAL_STORAGE", op.a % 2 == 0);
                break;
            case TraceOp::AddObject: {
                FsObject obj;
                obj.path = op.s1;
                obj.owner_uid = world.packages.count(op.s2)
                                    ? Aid{0, world.packages.at(op.s2).app_id}.uid()
                                    : kSystemUid;
                obj.mode = op.a % 2 ? 0644 : 0600;
                obj.location = op.b % 2 ? FsLocation::SharedStorage : FsLocation::AppPrivate;
                obj.creator_uid = obj.owner_uid;
                obj.controller = user_party_id(0);
                obj.ce_protected = op.a % 3 == 0;
                world.add_object(obj);
                break;
            }
            case TraceOp::Enroll: {
                Modality m;
                if (op.a % 2 == 0) {
                    m.name = "pin";
                    m.kind = ModalityKind::Pin;
                    m.factor_secret = "1234";
                } else {
                    m.name = "finger";
                    m.kind = ModalityKind::Biometric;
                    m.bio_class = BiometricClass::Strong;
                    m.factor_secret = "F";
                }
                enroll_modality(world, 0, m);
                break;
            }
            case TraceOp::Auth:
                authenticate(world, 0, op.a % 2 ? "pin" : "finger",
                             op.b % 2 ? "1234" : "wrong", op.b * 997);
                break;
            case TraceOp::LockScreen:
                lock_screen(world, 0);
                break;
            case TraceOp::Uninstall:
                uninstall_app(world, op.s1);
                break;
            case TraceOp::Evaluate: {
                ConsentResponder responder =
                    [](const std::string&, const std::string&) -> std::optional<ConsentValue> {
                    return ConsentValue::AllowOnce;
                };
                Action action =
                    make_action(world, "act", "cls-ev",
                                {user_party_id(0), platform_party_id(), app_party_id(op.s1)});
                evaluate_consent(action, world.consent, world, &responder);
                break;
            }
            case TraceOp::DevReset:
                reset_party(world, app_party_id(op.s1));
                break;
            case TraceOp::CreateProfile:
                create_work_profile(world, op.s1, op.a % 2 == 0, {"cls-0"});
                break;
            case TraceOp::Ota:
                apply_ota(world, op.s1, op.a);
                break;
            case TraceOp::Reboot:
                verify_boot_chain(world.boot, world.keyring);
                on_reboot_auth(world);
                break;
        }
    } catch (const SimError&) {
        // Random traces legitimately hit rejection paths (duplicate names,
        // background requests, missing enrollments). A rejected event is
        // still an event; the property quantifies over whatever happened.
    }
}

Outcome criterion_safe_reset() {
    auto start = Clock::now();
    std::mt19937_64 rng(0x5AFE7E5Eu);

    WorldSeed base = make_default_seed();
    for (const char* k : {"k0", "k1", "k2"}) {
        base.keyring[k] = SigningKey{k, KeyRole::Apk, std::string("secret-") + k};
    }
    const Digest pristine_digest = DeviceWorld::bootstrap(base).digest();

    const int kTraces = 1000;
    int mismatches = 0;
    int pristine_mismatches = 0;
    std::string first_bad;

    for (int t = 0; t < kTraces; ++t) {
        int len = 1 + static_cast<int>(rng() % 30);
        std::vector<TraceOp> ops;
        std::vector<std::string> names;
        bool any_boot = false;
        for (int i = 0; i < len; ++i) {
            TraceOp op;
            op.a = rng();
            op.b = rng();
            int kind = static_cast<int>(rng() % 15);
            op.kind = static_cast<TraceOp::Kind>(kind);
            std::string pick = names.empty()
                                   ? "com.none"
                                   : names[rng() % names.size()];
            switch (op.kind) {
                case TraceOp::RegApp:
                    op.s1 = "com.t" + std::to_string(t) + "x" + std::to_string(i);
                    op.s2 = "k" + std::to_string(rng() % 3);
                    names.push_back(op.s1);
                    break;
                case TraceOp::InstallForUser:
                    op.s1 = pick;
                    op.a = 10;
                    break;
                case TraceOp::RuntimeRequest:
                case TraceOp::SettingsToggle:
                case TraceOp::Uninstall:
                case TraceOp::Evaluate:
                case TraceOp::DevReset:
                case TraceOp::CreateProfile:
                    op.s1 = pick;
                    break;
                case TraceOp::ConsentPut: {
                    const char* parties[] = {"user:0", "platform"};
                    op.s1 = op.a % 3 == 2 && !names.empty() ? app_party_id(pick)
                                                            : parties[op.a % 2];
                    break;
                }
                case TraceOp::AddObject:
                    op.s1 = "/data/user/0/zz" + std::to_string(t) + "x" + std::to_string(i);
                    op.s2 = pick;
                    break;
                case TraceOp::Ota:
                    op.s1 = "12." + std::to_string(op.a % 4);
                    op.a = 1 + op.a % 3;
                    any_boot = true;
                    break;
                case TraceOp::Reboot:
                    any_boot = true;
                    break;
                default:
                    break;
            }
            ops.push_back(op);
        }

        DeviceWorld full = DeviceWorld::bootstrap(base);
        DeviceWorld twin = DeviceWorld::bootstrap(base);
        for (const auto& op : ops) apply_trace_op(full, op);
        for (const auto& op : ops) {
            if (op.boot_covered()) apply_trace_op(twin, op);
        }

        reset_party(full, platform_party_id());
        reset_party(twin, platform_party_id());

        if (full.digest() != twin.digest()) {
            ++mismatches;
            if (first_bad.empty()) first_bad = "trace " + std::to_string(t);
        } else if (!any_boot && full.digest() != pristine_digest) {
            // No update and no reboot happened: reset must land on the exact
            // out-of-the-box world.
            ++pristine_mismatches;
            if (first_bad.empty()) first_bad = "trace " + std::to_string(t) + " (pristine)";
        }
        if (!full.packages.empty() || full.parties.size() != 2) {
            ++mismatches;
            if (first_bad.empty()) first_bad = "trace " + std::to_string(t) + " (residue)";
        }
    }

    double dt = seconds_since(start);
    bool pass = mismatches == 0 && pristine_mismatches == 0;
    std::string detail = std::to_string(kTraces) + " traces, " + std::to_string(mismatches) +
                         " digest mismatches, " + std::to_string(pristine_mismatches) +
                         " pristine mismatches, " + format_seconds(dt);
    if (!first_bad.empty()) detail += " [" + first_bad + "]";
    return {pass, detail};
}

// ---------------------------------------------------------------------------
// Criterion 3: the access decision equals an independent re-derivation that
// applies the storage gate, profile wall, DAC bits, MAC triples, and the
// permission layer one by one, for every (subject, object, mode) in a
// 2-user, 3-app micro-world, in both storage-lock states.

struct OracleVerdict {
    bool allow = false;
    std::string mechanism;
};

OracleVerdict access_oracle(DeviceWorld& world, uint32_t uid, const FsObject& obj, char mode) {
    auto is_app = [](uint32_t u) { return Aid::from_uid(u).is_app(); };

    // Storage gate: credential-protected data of a locked user is absent.
    if (obj.ce_protected && is_app(obj.owner_uid)) {
        auto uit = world.users.find(Aid::from_uid(obj.owner_uid).user_id);
        if (uit != world.users.end() && !uit->second.ce_available) return {false, "storage"};
    }

    // Profile wall: app uids never cross user boundaries for app-owned data.
    // (No scope grants exist in this micro-world.)
    if (is_app(uid) && is_app(obj.owner_uid) &&
        Aid::from_uid(uid).user_id != Aid::from_uid(obj.owner_uid).user_id) {
        return {false, "MAC"};
    }

    // DAC: owner/other mode bits; root bypasses; the mediated storage views
    // are decided by the permission layer instead.
    if (uid != kRootUid && obj.location != FsLocation::SharedStorage &&
        obj.location != FsLocation::ExternalAppDir) {
        uint32_t bit = mode == 'r' ? 04u : mode == 'w' ? 02u : 01u;
        uint32_t bits = uid == obj.owner_uid ? (obj.mode >> 6) : obj.mode;
        if ((bits & bit) == 0) return {false, "DAC"};
    }

    // MAC: explicit allow triples, default deny, root included.
    std::string slabel;
    if (uid == kRootUid) {
        slabel = "root_domain";
    } else if (uid == kSystemUid) {
        slabel = "system_server";
    } else {
        auto pkgs = world.packages_for_uid(uid);
        if (pkgs.empty()) {
            slabel = "unlabeled";
        } else {
            slabel = "untrusted_app";
            for (const auto& p : pkgs) {
                const Manifest& m = world.packages.at(p).manifest;
                if (m.isolated) slabel = "isolated_app";
                if (m.system_app || m.priv_allowlisted) slabel = "platform_app";
            }
        }
    }
    std::string olabel = obj.labels.empty() ? mac_label_for_location(obj.location)
                                            : *obj.labels.begin();
    if (!world.mac.allows(slabel, olabel, mode)) return {false, "MAC"};

    // Permission layer for app subjects on the mediated storage views. In
    // this micro-world the only grants are sticky allows, so a dangerous
    // permission holds exactly when the owning user's consent entry says
    // allow-always; no one holds the all-files special permission (an absent
    // consent entry already decides that, so install flags need not be
    // consulted).
    if (is_app(uid)) {
        auto pkgs = world.packages_for_uid(uid);
        if (pkgs.empty()) return {false, "permission"};
        for (const auto& p : pkgs) {
            if (world.packages.at(p).manifest.isolated && obj.location != FsLocation::AppPrivate &&
                obj.location != FsLocation::System) {
                return {false, "permission"};
            }
        }
        int user = Aid::from_uid(uid).user_id;
        int target_sdk = 0;
        for (const auto& p : pkgs) {
            target_sdk = std::max(target_sdk, world.packages.at(p).manifest.target_sdk);
        }
        auto holds = [&](const std::string& perm) {
            bool isolated = false;
            for (const auto& p : pkgs) isolated |= world.packages.at(p).manifest.isolated;
            if (isolated) return false;
            auto entry = world.consent.peek(
                user_party_id(user), permission_action_class(world, pkgs.front(), perm));
            return entry.has_value() && *entry == ConsentValue::AllowAlways;
        };
        if (obj.location == FsLocation::SharedStorage) {
            if (obj.creator_uid == uid) return {true, ""};
            if (holds("MANAGE_EXTERNAL_STORAGE")) return {true, ""};
            if (mode == 'w' && target_sdk >= kScopedStorageSdk) return {false, "permission"};
            if (!holds(mode == 'w' ? "WRITE_EXTERNAL_STORAGE" : "READ_EXTERNAL_STORAGE")) {
                return {false, "permission"};
            }
        } else if (obj.location == FsLocation::ExternalAppDir && obj.owner_uid != uid) {
            if (target_sdk >= kScopedStorageSdk) return {false, "permission"};
            if (!holds(mode == 'w' ? "WRITE_EXTERNAL_STORAGE" : "READ_EXTERNAL_STORAGE")) {
                return {false, "permission"};
            }
        }
    }
    return {true, ""};
}

Outcome criterion_sandbox() {
    auto start = Clock::now();
    DeviceWorld world = DeviceWorld::bootstrap_default();

    // Second user, mirroring the platform's user-creation path.
    {
        UserRecord u;
        u.id = 10;
        u.ce_available = true;
        u.auth.screen_locked = false;
        world.users[10] = u;
        Party p;
        p.id = user_party_id(10);
        p.cls = PartyClass::User;
        world.parties[p.id] = p;
        FsObject shared;
        shared.path = "/storage/emulated/10";
        shared.owner_uid = kSystemUid;
        shared.mode = 0771;
        shared.location = FsLocation::SharedStorage;
        shared.creator_uid = kSystemUid;
        shared.controller = p.id;
        shared.ce_protected = false;
        world.add_object(shared);
        world.next_user_id = 11;
    }

    Manifest ma;
    ma.package_name = "com.alpha";
    ma.target_sdk = 30;
    register_app(world, "k0", ma);
    install_for_user(world, "com.alpha", 10);

    Manifest mb;
    mb.package_name = "com.bravo";
    mb.target_sdk = 23;
    mb.requested_permissions = {"READ_EXTERNAL_STORAGE", "WRITE_EXTERNAL_STORAGE"};
    register_app(world, "k1", mb);
    for (const char* perm : {"READ_EXTERNAL_STORAGE", "WRITE_EXTERNAL_STORAGE"}) {
        world.consent.put(user_party_id(0), permission_action_class(world, "com.bravo", perm),
                          ConsentValue::AllowAlways);
    }

    Manifest mc;
    mc.package_name = "com.charlie";
    mc.target_sdk = 30;
    mc.isolated = true;
    register_app(world, "k2", mc);

    uint32_t ua0 = Aid{0, world.packages.at("com.alpha").app_id}.uid();
    uint32_t ua10 = Aid{10, world.packages.at("com.alpha").app_id}.uid();
    uint32_t ub0 = Aid{0, world.packages.at("com.bravo").app_id}.uid();
    uint32_t uc0 = Aid{0, world.packages.at("com.charlie").app_id}.uid();

    auto add = [&](const std::string& path, uint32_t owner, uint32_t creator, uint32_t mode,
                   FsLocation loc, bool ce, std::set<std::string> labels = {}) {
        FsObject o;
        o.path = path;
        o.owner_uid = owner;
        o.creator_uid = creator;
        o.mode = mode;
        o.location = loc;
        o.ce_protected = ce;
        o.controller = user_party_id(Aid::from_uid(owner).user_id);
        o.labels = std::move(labels);
        world.add_object(o);
    };
    add("/storage/emulated/0/DCIM/alpha.png", ua0, ua0, 0600, FsLocation::SharedStorage, false);
    add("/storage/emulated/0/DCIM/bravo.png", ub0, ub0, 0600, FsLocation::SharedStorage, true);
    add("/storage/emulated/10/DCIM/alpha.png", ua10, ua10, 0600, FsLocation::SharedStorage, true);
    add("/data/user/0/com.alpha/shared.txt", ua0, ua0, 0644, FsLocation::AppPrivate, true);
    add("/system/etc/hosts", kRootUid, kRootUid, 0644, FsLocation::System, false);
    add("/data/misc/vault", kSystemUid, kSystemUid, 0666, FsLocation::AppPrivate, false,
        {"vault_file"});

    const std::vector<uint32_t> subjects = {kRootUid,
                                            kSystemUid,
                                            ua0,
                                            ua10,
                                            ub0,
                                            uc0,
                                            Aid{0, 10999}.uid(),
                                            Aid{10, 10999}.uid()};
    const char modes[] = {'r', 'w', 'x'};

    int checked = 0;
    int mismatches = 0;
    std::map<std::string, int> outcomes;
    std::string first_bad;
    for (int round = 0; round < 2; ++round) {
        // Round 1: everything unlocked. Round 2: the second user's storage
        // keys are still locked.
        world.users.at(10).ce_available = round == 0;
        std::vector<std::string> paths;
        for (const auto& [path, obj] : world.objects) {
            (void)obj;
            paths.push_back(path);
        }
        for (uint32_t uid : subjects) {
            for (const auto& path : paths) {
                for (char mode : modes) {
                    const FsObject obj = world.objects.at(path);
                    OracleVerdict want = access_oracle(world, uid, obj, mode);
                    AccessDecision got = check_access(world, uid, path, mode, /*spend=*/false);
                    ++checked;
                    ++outcomes[got.allow ? "allow" : got.mechanism];
                    if (got.allow != want.allow ||
                        (!want.allow && got.mechanism != want.mechanism)) {
                        ++mismatches;
                        if (first_bad.empty()) {
                            first_bad = "uid " + std::to_string(uid) + " " + path + " " +
                                        std::string(1, mode) + " got " +
                                        (got.allow ? "allow" : got.mechanism) + " want " +
                                        (want.allow ? "allow" : want.mechanism);
                        }
                    }
                }
            }
        }
    }

    double dt = seconds_since(start);
    // Every mechanism must actually fire somewhere or the enumeration is not
    // exercising the stack.
    bool covered = outcomes.count("allow") && outcomes.count("storage") &&
                   outcomes.count("DAC") && outcomes.count("MAC") &&
                   outcomes.count("permission");
    bool pass = mismatches == 0 && covered;
    std::string detail = std::to_string(checked) + " accesses, " + std::to_string(mismatches) +
                         " oracle mismatches (";
    bool first = true;
    for (const auto& [k, n] : outcomes) {
        if (!first) detail += " ";
        first = false;
        detail += k + "=" + std::to_string(n);
    }
    detail += "), " + format_seconds(dt);
    if (!covered) detail += " [mechanism never fired]";
    if (!first_bad.empty()) detail += " [" + first_bad + "]";
    return {pass, detail};
}

// ---------------------------------------------------------------------------
// Shared fixture for the boot criteria: a locked chain with one 16-block
// partition, toy keys, and a fresh rollback store.

struct BootFixture {
    Keyring keyring;
    BootChain chain;
    std::vector<uint8_t> data;
};

BootFixture make_boot_fixture(std::mt19937_64& rng, bool locked, bool user_root) {
    BootFixture f;
    for (auto [id, role] : std::initializer_list<std::pair<const char*, KeyRole>>{
             {"rom", KeyRole::RomRoot},
             {"bl", KeyRole::Bootloader},
             {"oem", KeyRole::VbMetaRoot},
             {"user", KeyRole::UserRoot}}) {
        f.keyring[id] = SigningKey{id, role, std::string("secret-") + id};
    }

    f.data.resize(16 * 64);
    for (auto& b : f.data) b = static_cast<uint8_t>(rng());

    f.chain.device_locked = locked;
    f.chain.rom_key = "rom";
    f.chain.bootloader_key = "bl";
    f.chain.manufacturer_root = "oem";
    if (user_root) f.chain.user_root = "user";

    f.chain.bootloader.content = {0xb0, 0x07};
    sign_image(f.chain.bootloader, f.keyring.at("rom"));
    f.chain.final_bootloader.content = {0xb0, 0x08};
    sign_image(f.chain.final_bootloader, f.keyring.at("bl"));

    f.chain.partitions["system"] = f.data;
    f.chain.trees["system"] = build_hash_tree(f.data, 64);

    VbMeta meta;
    meta.rollback_index = 1;
    HashDescriptor d;
    d.partition = "system";
    d.block_size = 64;
    d.num_blocks = 16;
    d.root = f.chain.trees["system"].root();
    meta.hash_descs.push_back(d);
    sign_vbmeta(meta, f.keyring.at(user_root ? "user" : "oem"));
    f.chain.vbmetas["vbmeta"] = meta;
    return f;
}

// Criterion 4: the four boot factors map onto the four colors exactly.
// Expected table, checked by hand against the boot-state semantics:
//   os-found=0                                  -> RED    (all 8 combos)
//   os-found=1, locked=0                        -> ORANGE (any root, any verify)
//   os-found=1, locked=1, verify-ok=0           -> RED
//   os-found=1, locked=1, verify-ok=1, oem root -> GREEN
//   os-found=1, locked=1, verify-ok=1, own root -> YELLOW

Outcome criterion_boot_table() {
    std::mt19937_64 rng(0xB007B007u);
    int checked = 0;
    int mismatches = 0;
    std::string first_bad;

    for (int locked = 0; locked < 2; ++locked) {
        for (int user_root = 0; user_root < 2; ++user_root) {
            for (int verify_ok = 0; verify_ok < 2; ++verify_ok) {
                for (int os_found = 0; os_found < 2; ++os_found) {
                    BootFixture f = make_boot_fixture(rng, locked != 0, user_root != 0);
                    if (!verify_ok) f.chain.partitions["system"][5] ^= 0x01;
                    if (!os_found) f.chain.partitions["system"].clear();

                    BootColor want;
                    if (!os_found) {
                        want = BootColor::RED;
                    } else if (!locked) {
                        want = BootColor::ORANGE;
                    } else if (!verify_ok) {
                        want = BootColor::RED;
                    } else {
                        want = user_root ? BootColor::YELLOW : BootColor::GREEN;
                    }

                    BootState st = verify_boot_chain(f.chain, f.keyring);
                    ++checked;
                    if (st.color != want) {
                        ++mismatches;
                        if (first_bad.empty()) {
                            first_bad = std::string("locked=") + std::to_string(locked) +
                                        " user-root=" + std::to_string(user_root) +
                                        " verify-ok=" + std::to_string(verify_ok) +
                                        " os-found=" + std::to_string(os_found) + " got " +
                                        boot_color_name(st.color) + " want " +
                                        boot_color_name(want);
                        }
                    }
                }
            }
        }
    }

    bool pass = mismatches == 0 && checked == 16;
    std::string detail = std::to_string(checked) + " combinations, " +
                         std::to_string(mismatches) + " mismatches";
    if (!first_bad.empty()) detail += " [" + first_bad + "]";
    return {pass, detail};
}

// Criterion 5: every single-bit flip in the partition data or the stored
// integrity tree turns the boot state non-green; the untampered image stays
// green every time it is re-verified.

Outcome criterion_hash_tree() {
    auto start = Clock::now();
    std::mt19937_64 rng(0x7EE7B175u);
    BootFixture base = make_boot_fixture(rng, /*locked=*/true, /*user_root=*/false);

    int false_rejects = 0;
    for (int i = 0; i < 8; ++i) {
        BootChain chain = base.chain;
        if (verify_boot_chain(chain, base.keyring).color != BootColor::GREEN) ++false_rejects;
    }

    int flips = 0;
    int false_accepts = 0;
    std::string first_bad;

    // Data bits.
    for (size_t byte = 0; byte < base.data.size(); ++byte) {
        for (int bit = 0; bit < 8; ++bit) {
            BootChain chain = base.chain;
            chain.partitions["system"][byte] ^= static_cast<uint8_t>(1u << bit);
            ++flips;
            if (verify_boot_chain(chain, base.keyring).color == BootColor::GREEN) {
                ++false_accepts;
                if (first_bad.empty()) {
                    first_bad = "data byte " + std::to_string(byte) + " bit " +
                                std::to_string(bit);
                }
            }
        }
    }

    // Stored tree node bits, every level including the root.
    const HashTree& tree = base.chain.trees.at("system");
    for (size_t lvl = 0; lvl < tree.levels.size(); ++lvl) {
        for (size_t node = 0; node < tree.levels[lvl].size(); ++node) {
            for (size_t byte = 0; byte < tree.levels[lvl][node].size(); ++byte) {
                for (int bit = 0; bit < 8; ++bit) {
                    BootChain chain = base.chain;
                    chain.trees.at("system").levels[lvl][node][byte] ^=
                        static_cast<uint8_t>(1u << bit);
                    ++flips;
                    if (verify_boot_chain(chain, base.keyring).color == BootColor::GREEN) {
                        ++false_accepts;
                        if (first_bad.empty()) {
                            first_bad = "tree level " + std::to_string(lvl) + " node " +
                                        std::to_string(node) + " byte " + std::to_string(byte);
                        }
                    }
                }
            }
        }
    }

    double dt = seconds_since(start);
    bool pass = false_accepts == 0 && false_rejects == 0 && dt < 5.0;
    std::string detail = std::to_string(flips) + " bit flips, " + std::to_string(false_accepts) +
                         " false accepts, " + std::to_string(false_rejects) +
                         " false rejects, " + format_seconds(dt);
    if (!first_bad.empty()) detail += " [" + first_bad + "]";
    return {pass, detail};
}

// Criterion 6: rollback counters are monotone. Every (stored, image) index
// pair rejects exactly the strictly older image, and across random flash and
// boot sequences the stored counter never decreases and only verified boots
// advance it.

Outcome criterion_rollback() {
    std::mt19937_64 rng(0x0110BACCu);
    int mismatches = 0;
    std::string first_bad;

    for (uint64_t stored = 0; stored <= 8; ++stored) {
        for (uint64_t image = 0; image <= 8; ++image) {
            RollbackStore store;
            commit_rollback(store, "vbmeta", stored);
            bool rejected = check_rollback(store, "vbmeta", image) == RollbackCheck::Rejected;
            if (rejected != (image < stored)) {
                ++mismatches;
                if (first_bad.empty()) {
                    first_bad = "pair stored=" + std::to_string(stored) +
                                " image=" + std::to_string(image);
                }
            }
            commit_rollback(store, "vbmeta", image);
            uint64_t want = std::max(stored, image);
            if (store.slots.at("vbmeta") != want) {
                ++mismatches;
                if (first_bad.empty()) {
                    first_bad = "commit stored=" + std::to_string(stored) +
                                " image=" + std::to_string(image);
                }
            }
        }
    }

    int boots = 0;
    for (int seq = 0; seq < 100; ++seq) {
        BootFixture f = make_boot_fixture(rng, /*locked=*/true, /*user_root=*/false);
        uint64_t mirror = 0;
        for (int step = 0; step < 20; ++step) {
            uint64_t index = rng() % 9;
            bool corrupt = rng() % 4 == 0;
            VbMeta meta = f.chain.vbmetas.at("vbmeta");
            meta.rollback_index = index;
            sign_vbmeta(meta, f.keyring.at("oem"));
            f.chain.vbmetas["vbmeta"] = meta;
            f.chain.partitions["system"] = f.data;
            if (corrupt) f.chain.partitions["system"][step % f.data.size()] ^= 0x80;

            uint64_t before = f.chain.rollback.slots.count("vbmeta")
                                  ? f.chain.rollback.slots.at("vbmeta")
                                  : 0;
            BootState st = verify_boot_chain(f.chain, f.keyring);
            uint64_t after = f.chain.rollback.slots.count("vbmeta")
                                 ? f.chain.rollback.slots.at("vbmeta")
                                 : 0;
            ++boots;

            BootColor want_color =
                corrupt || index < mirror ? BootColor::RED : BootColor::GREEN;
            if (want_color == BootColor::GREEN) mirror = std::max(mirror, index);
            if (st.color != want_color || after < before || after != mirror) {
                ++mismatches;
                if (first_bad.empty()) {
                    first_bad = "seq " + std::to_string(seq) + " step " + std::to_string(step) +
                                " index " + std::to_string(index) +
                                (corrupt ? " corrupt" : "") + " got " +
                                boot_color_name(st.color) + " counter " + std::to_string(after);
                }
            }
        }
    }

    bool pass = mismatches == 0;
    std::string detail = "81 index pairs, " + std::to_string(boots) + " random boots, " +
                         std::to_string(mismatches) + " mismatches";
    if (!first_bad.empty()) detail += " [" + first_bad + "]";
    return {pass, detail};
}

// ---------------------------------------------------------------------------
// Criterion 7: tier timers. A step-by-step mirror of the authentication
// rules predicts every outcome over randomized clocks, and three global
// invariants hold: no secondary success at or past the 72 h primary gap, no
// tertiary success past a 4 h idle gap, and nothing below the primary tier
// ever performs the first unlock after a boot.

Outcome criterion_auth_timers() {
    auto start = Clock::now();
    std::mt19937_64 rng(0x7173A017u);

    const uint64_t kStrongWindow = 72 * 3600;
    const uint64_t kWeakWindow = 24 * 3600;
    const uint64_t kIdleWindow = 4 * 3600;

    DeviceWorld tmpl = DeviceWorld::bootstrap_default();
    {
        Modality pin;
        pin.name = "pin";
        pin.kind = ModalityKind::Pin;
        pin.factor_secret = "1234";
        enroll_modality(tmpl, 0, pin);
        Modality finger;
        finger.name = "finger";
        finger.kind = ModalityKind::Biometric;
        finger.bio_class = BiometricClass::Strong;
        finger.factor_secret = "F";
        enroll_modality(tmpl, 0, finger);
        Modality face;
        face.name = "face";
        face.kind = ModalityKind::Biometric;
        face.bio_class = BiometricClass::Weak;
        face.factor_secret = "W";
        enroll_modality(tmpl, 0, face);
        Modality watch;
        watch.name = "watch";
        watch.kind = ModalityKind::TrustedDevice;
        watch.factor_secret = "T";
        enroll_modality(tmpl, 0, watch);
    }

    struct Mod {
        const char* name;
        const char* good;
        bool primary;
        bool tertiary;
        uint64_t window;
    };
    const Mod mods[] = {{"pin", "1234", true, false, 0},
                        {"finger", "F", false, false, kStrongWindow},
                        {"face", "W", false, false, kWeakWindow},
                        {"watch", "T", false, true, kStrongWindow}};

    const int kTraces = 10000;
    int mismatches = 0;
    int gap_violations = 0;
    int idle_violations = 0;
    int first_unlock_violations = 0;
    int successes = 0;
    int window_rejects = 0;
    std::string first_bad;

    for (int t = 0; t < kTraces; ++t) {
        DeviceWorld w = tmpl;
        // Mirror of the tier state. Enrolling the knowledge factor counted
        // as a primary success at time zero.
        bool boot_unlocked = true;
        std::optional<uint64_t> last_primary = 0;
        std::optional<uint64_t> last_any = 0;
        uint64_t now = 0;

        if (rng() % 2) {
            on_reboot_auth(w);
            boot_unlocked = false;
        }

        int events = 6 + static_cast<int>(rng() % 12);
        for (int e = 0; e < events; ++e) {
            now += rng() % (30 * 3600 + 1);
            uint64_t pick = rng() % 100;
            if (pick < 15) {
                verify_boot_chain(w.boot, w.keyring);
                on_reboot_auth(w);
                boot_unlocked = false;
                continue;
            }
            if (pick < 30) {
                lock_screen(w, 0);
                continue;
            }

            const Mod& m = mods[rng() % 4];
            bool good = rng() % 4 != 0;
            std::string sample = good ? m.good : "nope";

            bool want;
            if (m.primary) {
                want = good;
            } else if (!boot_unlocked || !last_primary) {
                want = false;
            } else if (now - *last_primary >= m.window) {
                want = false;
                ++window_rejects;
            } else if (m.tertiary && (!last_any || now - *last_any > kIdleWindow)) {
                want = false;
                ++window_rejects;
            } else {
                want = good;
            }

            uint64_t gap_before =
                last_primary ? now - *last_primary : ~uint64_t{0};
            uint64_t idle_before = last_any ? now - *last_any : ~uint64_t{0};
            bool unlocked_before = boot_unlocked;

            AuthResult got = authenticate(w, 0, m.name, sample, now);
            if (got.success) ++successes;
            if (got.success != want) {
                ++mismatches;
                if (first_bad.empty()) {
                    first_bad = "trace " + std::to_string(t) + " event " + std::to_string(e) +
                                " " + m.name + " got " + (got.success ? "pass" : got.reason);
                }
            }
            if (got.success && !m.primary) {
                if (gap_before >= kStrongWindow) ++gap_violations;
                if (m.tertiary && idle_before > kIdleWindow) ++idle_violations;
                if (!unlocked_before) ++first_unlock_violations;
            }
            if (want) {
                last_any = now;
                if (m.primary) {
                    last_primary = now;
                    boot_unlocked = true;
                }
            }
        }
    }

    double dt = seconds_since(start);
    // The clocks must actually cross the windows or the timer checks are
    // vacuous.
    bool exercised = successes > 0 && window_rejects > 0;
    bool pass = mismatches == 0 && gap_violations == 0 && idle_violations == 0 &&
                first_unlock_violations == 0 && exercised;
    std::string detail = std::to_string(kTraces) + " traces (" + std::to_string(successes) +
                         " unlocks, " + std::to_string(window_rejects) + " window rejects), " +
                         std::to_string(mismatches) + " mirror mismatches, " +
                         std::to_string(gap_violations) + " gap / " +
                         std::to_string(idle_violations) + " idle / " +
                         std::to_string(first_unlock_violations) + " first-unlock violations, " +
                         format_seconds(dt);
    if (!first_bad.empty()) detail += " [" + first_bad + "]";
    return {pass, detail};
}

// ---------------------------------------------------------------------------
// Criterion 8: update acceptance across signer histories. Same key and a
// rotation carrying its certification history are accepted; a rotation
// without history and a tampered certification link are rejected.

Outcome criterion_lineage() {
    Keyring keyring;
    keyring["w1"] = SigningKey{"w1", KeyRole::Apk, "s1"};
    keyring["w2"] = SigningKey{"w2", KeyRole::Apk, "s2"};

    SigningLineage rotated = make_lineage(keyring, {"w1", "w2"});
    SigningLineage forged = rotated;
    forged.link_sigs[0][0] ^= 0x01;

    struct Case {
        const char* name;
        const char* candidate;
        SigningLineage lineage;
        UpdateDecision want;
    };
    const Case cases[] = {
        {"same-key", "w1", SigningLineage{}, UpdateDecision::Allow},
        {"rotated-with-lineage", "w2", rotated, UpdateDecision::Allow},
        {"rotated-without-lineage", "w2", SigningLineage{}, UpdateDecision::Deny},
        {"forged-link", "w2", forged, UpdateDecision::Deny},
    };

    int mismatches = 0;
    std::string first_bad;
    for (const Case& c : cases) {
        UpdateDecision got = verify_apk_update(keyring, "w1", c.candidate, c.lineage);
        if (got != c.want) {
            ++mismatches;
            if (first_bad.empty()) first_bad = c.name;
        }
    }

    bool pass = mismatches == 0;
    std::string detail = "4 cases, " + std::to_string(mismatches) + " mismatches";
    if (!first_bad.empty()) detail += " [" + first_bad + "]";
    return {pass, detail};
}

// ---------------------------------------------------------------------------
// Criterion 9: the committed scenario corpus replays byte-identically: two
// in-process runs agree with each other and with the frozen trace files, the
// corpus holds at least ten scenarios, and together they cover every threat
// tag.

Outcome criterion_determinism() {
    namespace fs = std::filesystem;
    const std::string scenario_dir = SECSIM_SCENARIO_DIR;
    const std::string golden_dir = SECSIM_GOLDEN_DIR;

    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(scenario_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".scn") {
            files.push_back(entry.path().string());
        }
    }
    std::sort(files.begin(), files.end());

    int scenarios = 0;
    int mismatches = 0;
    std::set<std::string> tags;
    std::string first_bad;

    for (const auto& path : files) {
        Scenario sc = load_scenario_file(path);
        ++scenarios;
        tags.insert(sc.tags.begin(), sc.tags.end());

        std::string run1 = format_trace(run_scenario(sc, 0), /*machine=*/true);
        std::string run2 = format_trace(run_scenario(sc, 0), /*machine=*/true);

        std::string stem = fs::path(path).stem().string();
        std::ifstream in(golden_dir + "/" + stem + ".trace", std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        std::string golden = buf.str();

        if (run1 != run2 || !in || run1 != golden) {
            ++mismatches;
            if (first_bad.empty()) first_bad = stem;
        }
    }

    bool tags_complete = tags == known_threat_tags();
    bool pass = scenarios >= 10 && mismatches == 0 && tags_complete;
    std::string detail = std::to_string(scenarios) + " scenarios, " +
                         std::to_string(mismatches) + " replay mismatches, " +
                         std::to_string(tags.size()) + "/" +
                         std::to_string(known_threat_tags().size()) + " threat tags";
    if (!first_bad.empty()) detail += " [" + first_bad + "]";
    return {pass, detail};
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        Outcome (*fn)();
    };
    const Criterion criteria[] = {
        {"veto-property", criterion_veto},
        {"safe-reset", criterion_safe_reset},
        {"sandbox-separation", criterion_sandbox},
        {"boot-state-table", criterion_boot_table},
        {"hash-tree-sensitivity", criterion_hash_tree},
        {"rollback-monotonicity", criterion_rollback},
        {"auth-timers", criterion_auth_timers},
        {"update-lineage", criterion_lineage},
        {"replay-determinism", criterion_determinism},
    };

    int failures = 0;
    int index = 0;
    for (const Criterion& c : criteria) {
        ++index;
        Outcome o;
        try {
            o = c.fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failures;
        std::printf("%s  %d %-22s %s\n", o.pass ? "PASS" : "FAIL", index, c.name,
                    o.detail.c_str());
    }
    std::printf("%d/9 acceptance criteria passed\n", 9 - failures);
    return failures == 0 ? 0 : 1;
}
