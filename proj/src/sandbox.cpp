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

#include "secsim/sandbox.hpp"

#include <algorithm>

#include "secsim/consent.hpp"
#include "secsim/permissions.hpp"

namespace secsim {

namespace {

bool is_app_uid(uint32_t uid) { return Aid::from_uid(uid).is_app(); }

// Objects owned by core system uids carry no user affinity; everything owned
// by an app uid lives in that app user's slice of the filesystem.
bool object_is_global(const FsObject& obj) { return !is_app_uid(obj.owner_uid); }

bool scope_grant_covers(const DeviceWorld& world, uint32_t uid, const std::string& path,
                        char mode) {
    if (mode != 'r' && mode != 'w') return false;
    std::set<std::string> subject_parties;
    for (const auto& pkg : world.packages_for_uid(uid)) {
        subject_parties.insert(app_party_id(pkg));
    }
    if (subject_parties.empty()) return false;
    for (const auto& [id, scope] : world.scopes) {
        (void)id;
        if (!subject_parties.count(scope.grantee)) continue;
        if (scope_allows(world, scope, path, mode)) return true;
    }
    return false;
}

int first_target_sdk(const DeviceWorld& world, const std::vector<std::string>& pkgs) {
    int sdk = 0;
    for (const auto& p : pkgs) sdk = std::max(sdk, world.packages.at(p).manifest.target_sdk);
    return sdk;
}

}  // namespace

std::string subject_label(const DeviceWorld& world, uint32_t uid) {
    return mac_label_for_uid(world, uid);
}

std::string object_label(const FsObject& obj) {
    if (!obj.labels.empty()) return *obj.labels.begin();
    return mac_label_for_location(obj.location);
}

Aid assign_uid(DeviceWorld& world, int user, const std::string& package,
               const std::string& shared_uid_group, const std::string& signing_key) {
    if (!world.users.count(user)) throw SimError(Err::UnknownUser, std::to_string(user));
    (void)package;
    if (!shared_uid_group.empty()) {
        auto it = world.shared_uid_app_id.find(shared_uid_group);
        if (it != world.shared_uid_app_id.end()) {
            // Joining an existing group demands the same signing key: shared
            // UID merges sandboxes, which only the key holder may authorize.
            if (world.shared_uid_key.at(shared_uid_group) != signing_key) {
                throw SimError(Err::SharedUidKeyMismatch, shared_uid_group);
            }
            return Aid{user, it->second};
        }
    }
    if (world.next_app_id > kAidAppEnd) {
        throw SimError(Err::RangeExhausted, "app id range exhausted");
    }
    int app_id = world.next_app_id++;
    if (!shared_uid_group.empty()) {
        world.shared_uid_app_id[shared_uid_group] = app_id;
        world.shared_uid_key[shared_uid_group] = signing_key;
    }
    return Aid{user, app_id};
}

AccessDecision check_access(DeviceWorld& world, uint32_t subject_uid, const std::string& path,
                            char mode, bool spend) {
    auto oit = world.objects.find(path);
    if (oit == world.objects.end()) throw SimError(Err::UnknownObject, path);
    const FsObject& obj = oit->second;
    if (mode != 'r' && mode != 'w' && mode != 'x') {
        throw SimError(Err::BadWorld, std::string("bad access mode ") + mode);
    }

    // Storage gate: credential-encrypted data is simply absent before the
    // owning user's first unlock.
    if (obj.ce_protected && is_app_uid(obj.owner_uid)) {
        int data_user = Aid::from_uid(obj.owner_uid).user_id;
        auto uit = world.users.find(data_user);
        if (uit != world.users.end() && !uit->second.ce_available) {
            return {false, "storage", "credential-encrypted data locked"};
        }
    }

    bool scope_ok = scope_grant_covers(world, subject_uid, path, mode);

    // Profile separation sits in the mandatory layer ahead of everything
    // discretionary: app uids never cross user boundaries, whatever the mode
    // bits say, unless the platform brokered a scope grant.
    if (is_app_uid(subject_uid) && !object_is_global(obj)) {
        int subj_user = Aid::from_uid(subject_uid).user_id;
        int obj_user = Aid::from_uid(obj.owner_uid).user_id;
        if (subj_user != obj_user && !scope_ok) {
            return {false, "MAC", "cross-user access"};
        }
    }

    // DAC. Root bypasses; the mediated storage views defer to the permission
    // layer; otherwise classic owner/other mode bits plus scoped grants.
    if (subject_uid != kRootUid && obj.location != FsLocation::SharedStorage &&
        obj.location != FsLocation::ExternalAppDir) {
        uint32_t bit = mode == 'r' ? 04 : mode == 'w' ? 02 : 01;
        bool dac_ok;
        if (subject_uid == obj.owner_uid) {
            dac_ok = ((obj.mode >> 6) & bit) != 0;
        } else {
            dac_ok = (obj.mode & bit) != 0;
        }
        if (!dac_ok && !scope_ok) return {false, "DAC", "mode bits"};
    }

    // MAC: explicit allow required, root included.
    std::string slabel = subject_label(world, subject_uid);
    std::string olabel = object_label(obj);
    if (!world.mac.allows(slabel, olabel, mode)) {
        return {false, "MAC", slabel + " -> " + olabel + " " + std::string(1, mode)};
    }

    // Android permission layer for the mediated storage views.
    if (is_app_uid(subject_uid)) {
        auto pkgs = world.packages_for_uid(subject_uid);
        if (pkgs.empty()) return {false, "permission", "uid has no package"};
        PermContext ctx;
        for (const auto& p : pkgs) ctx.foreground = ctx.foreground || world.is_foreground(p);
        int target_sdk = first_target_sdk(world, pkgs);

        if (obj.location == FsLocation::SharedStorage) {
            if (obj.creator_uid == subject_uid) return {true, "", "own media"};
            if (scope_ok) return {true, "", "scoped grant"};
            if (check_permission(world, subject_uid, "MANAGE_EXTERNAL_STORAGE", ctx, spend)) {
                return {true, "", "manage-external-storage"};
            }
            if (mode == 'w' && target_sdk >= kScopedStorageSdk) {
                return {false, "permission", "scoped storage forbids writing others' media"};
            }
            std::string need = mode == 'w' ? "WRITE_EXTERNAL_STORAGE" : "READ_EXTERNAL_STORAGE";
            if (!check_permission(world, subject_uid, need, ctx, spend)) {
                return {false, "permission", need};
            }
        } else if (obj.location == FsLocation::ExternalAppDir) {
            if (obj.owner_uid != subject_uid && !scope_ok) {
                if (target_sdk >= kScopedStorageSdk) {
                    return {false, "permission", "scoped storage hides other app dirs"};
                }
                std::string need =
                    mode == 'w' ? "WRITE_EXTERNAL_STORAGE" : "READ_EXTERNAL_STORAGE";
                if (!check_permission(world, subject_uid, need, ctx, spend)) {
                    return {false, "permission", need};
                }
            }
        }
    }
    return {true, "", ""};
}

std::vector<std::string> query_packages(const DeviceWorld& world, uint32_t caller_uid) {
    std::vector<std::string> out;
    if (caller_uid == kRootUid || caller_uid == kSystemUid) {
        for (const auto& [name, rec] : world.packages) {
            (void)rec;
            out.push_back(name);
        }
        return out;
    }
    Aid aid = Aid::from_uid(caller_uid);
    auto own = world.packages_for_uid(caller_uid);
    if (own.empty()) return out;

    bool see_all = false;
    std::set<std::string> declared;
    for (const auto& p : own) {
        const auto& m = world.packages.at(p).manifest;
        if (m.target_sdk < kVisibilityEnforcedSdk) see_all = true;
        for (const auto& q : m.queries) declared.insert(q);
    }
    PermContext ctx;
    DeviceWorld& mut = const_cast<DeviceWorld&>(world);
    if (check_permission(mut, caller_uid, "QUERY_ALL_PACKAGES", ctx, /*spend=*/false)) {
        see_all = true;
    }

    for (const auto& [name, rec] : world.packages) {
        if (!rec.users.count(aid.user_id)) continue;  // other profiles stay invisible
        bool own_pkg = rec.app_id == aid.app_id;
        bool visible = own_pkg || see_all || declared.count(name) || rec.manifest.system_app;
        if (visible) out.push_back(name);
    }
    return out;
}

int create_work_profile(DeviceWorld& world, const std::string& dpc_package, bool device_owner,
                        const std::set<std::string>& denied_action_classes) {
    if (world.org) throw SimError(Err::ProfileExists, world.org->dpc_package);
    if (!world.packages.count(dpc_package)) throw SimError(Err::UnknownPackage, dpc_package);

    int profile = world.next_user_id++;
    UserRecord u;
    u.id = profile;
    u.is_work_profile = true;
    u.parent_user = 0;
    u.ce_available = true;
    u.auth.screen_locked = false;
    world.users[profile] = u;

    Party org;
    org.id = org_party_id(dpc_package);
    org.cls = PartyClass::Organization;
    world.parties[org.id] = org;

    OrgPolicy policy;
    policy.dpc_package = dpc_package;
    policy.device_owner = device_owner;
    policy.denied_action_classes = denied_action_classes;
    policy.profile_user = profile;
    policy.party_id = org.id;
    world.org = policy;

    FsObject shared;
    shared.path = "/storage/emulated/" + std::to_string(profile);
    shared.owner_uid = kSystemUid;
    shared.mode = 0771;
    shared.location = FsLocation::SharedStorage;
    shared.creator_uid = kSystemUid;
    shared.controller = org.id;
    shared.ce_protected = false;
    world.add_object(shared);

    install_for_user(world, dpc_package, profile);
    return profile;
}

}  // namespace secsim
