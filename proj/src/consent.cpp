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

#include "secsim/consent.hpp"

#include <algorithm>

#include "secsim/permissions.hpp"
#include "secsim/sandbox.hpp"

namespace secsim {

namespace {

void validate_action(const DeviceWorld& world, const Action& action) {
    if (action.id.empty() || action.action_class.empty()) {
        throw SimError(Err::BadWorld, "action needs an id and a class");
    }
    int users = 0, platforms = 0, orgs = 0, devs = 0;
    for (const auto& pid : action.parties) {
        switch (world.party(pid).cls) {
            case PartyClass::User: users++; break;
            case PartyClass::Platform: platforms++; break;
            case PartyClass::Organization: orgs++; break;
            case PartyClass::Developer: devs++; break;
        }
    }
    if (users != 1 || platforms != 1 || orgs > 1 || devs < 1) {
        throw SimError(Err::BadWorld,
                       "action parties must be one user, one platform, at most one organization "
                       "and at least one developer");
    }
}

std::string private_dir_path(int user, const std::string& package) {
    return "/data/user/" + std::to_string(user) + "/" + package;
}

std::string external_dir_path(int user, const std::string& package) {
    return "/storage/emulated/" + std::to_string(user) + "/Android/data/" + package;
}

void create_install_dirs(DeviceWorld& world, const std::string& package, int user) {
    const PackageRecord& rec = world.packages.at(package);
    uint32_t uid = Aid{user, rec.app_id}.uid();

    FsObject priv;
    priv.path = private_dir_path(user, package);
    priv.owner_uid = uid;
    // Pre-lockdown targets could mark their home data world readable; the
    // directory object carries that whole legacy surface in its other bits.
    priv.mode = rec.manifest.target_sdk >= kPrivateDirLockdownSdk ? 0700 : 0755;
    priv.location = FsLocation::AppPrivate;
    priv.creator_uid = uid;
    priv.controller = app_party_id(package);
    priv.ce_protected = true;
    world.add_object(priv);

    FsObject ext;
    ext.path = external_dir_path(user, package);
    ext.owner_uid = uid;
    ext.mode = 0700;
    ext.location = FsLocation::ExternalAppDir;
    ext.creator_uid = uid;
    ext.controller = app_party_id(package);
    ext.ce_protected = false;
    world.add_object(ext);
}

// Removes every object rooted in the package's per-user directories plus
// anything else still owned by that uid outside shared storage (media the app
// created there belongs to the user and survives).
void remove_install_dirs(DeviceWorld& world, const std::string& package, int user, int app_id) {
    uint32_t uid = Aid{user, app_id}.uid();
    std::vector<std::string> doomed;
    std::string priv = private_dir_path(user, package);
    std::string ext = external_dir_path(user, package);
    for (const auto& [path, obj] : world.objects) {
        bool under_dir = path == priv || path == ext || path.rfind(priv + "/", 0) == 0 ||
                         path.rfind(ext + "/", 0) == 0;
        bool owned_private =
            obj.owner_uid == uid && obj.location != FsLocation::SharedStorage;
        if (under_dir || owned_private) doomed.push_back(path);
    }
    for (const auto& p : doomed) world.remove_object(p);
}

bool shared_group_has_other_member(const DeviceWorld& world, const std::string& group,
                                   const std::string& except_package, int user) {
    auto git = world.shared_uid_app_id.find(group);
    if (git == world.shared_uid_app_id.end()) return false;
    for (const auto& [name, rec] : world.packages) {
        if (name == except_package) continue;
        if (rec.app_id == git->second && rec.manifest.shared_uid_request == group &&
            (user < 0 || rec.users.count(user))) {
            return true;
        }
    }
    return false;
}

// Clears grant bookkeeping toward a package's uid key for one user (or all
// users when user < 0). Shared grants survive while the group still has other
// members for that user.
void sweep_grants_for_package(DeviceWorld& world, const std::string& package,
                              const std::string& key_of_pkg, int user) {
    const bool is_group = world.shared_uid_app_id.count(key_of_pkg) > 0;
    if (is_group && shared_group_has_other_member(world, key_of_pkg, package, user)) return;

    auto user_matches = [&](const std::string& composite) {
        if (user < 0) return true;
        return composite.rfind(std::to_string(user) + "|", 0) == 0;
    };
    std::string grant_marker = "|" + key_of_pkg + "|";
    for (auto it = world.install_grants.begin(); it != world.install_grants.end();) {
        if (user_matches(it->first) && it->first.find(grant_marker) != std::string::npos) {
            it = world.install_grants.erase(it);
        } else {
            ++it;
        }
    }
    for (auto it = world.onetime_sessions.begin(); it != world.onetime_sessions.end();) {
        if (user_matches(*it) && it->find(grant_marker) != std::string::npos) {
            it = world.onetime_sessions.erase(it);
        } else {
            ++it;
        }
    }
    std::string class_prefix = "perm:" + key_of_pkg + ":";
    world.consent.erase_if([&](const std::string&, const std::string& cls) {
        return cls.rfind(class_prefix, 0) == 0;
    });
}

void remove_scopes_touching(DeviceWorld& world, const std::string& party_id) {
    for (auto it = world.scopes.begin(); it != world.scopes.end();) {
        if (it->second.granter == party_id || it->second.grantee == party_id) {
            it = world.scopes.erase(it);
        } else {
            ++it;
        }
    }
}

void remove_user_state(DeviceWorld& world, int user_id);

}  // namespace

Action make_action(const DeviceWorld& world, const std::string& id, const std::string& action_class,
                   const std::vector<std::string>& parties,
                   const std::vector<ScopeRequest>& requested_scope) {
    Action a;
    a.id = id;
    a.action_class = action_class;
    a.parties = parties;
    a.requested_scope = requested_scope;
    validate_action(world, a);
    return a;
}

bool interaction_foreground(const DeviceWorld& world, const Action& action) {
    for (const auto& pid : action.parties) {
        const Party& p = world.party(pid);
        if (p.cls != PartyClass::Developer) continue;
        if (p.state.attr_true("ui-foreground") || p.state.attr_true("foreground-service")) {
            return true;
        }
    }
    return false;
}

Resolution resolve_cached(const Party& party, const Action& action, ConsentStore& store,
                          bool foreground) {
    auto v = store.peek(party.id, action.action_class);
    if (!v) return Resolution::Ask;
    switch (*v) {
        case ConsentValue::AllowAlways:
            return Resolution::Allow;
        case ConsentValue::DenyAlways:
            return Resolution::Deny;
        case ConsentValue::AllowOnce:
            store.erase(party.id, action.action_class);
            return Resolution::Allow;
        case ConsentValue::DenyOnce:
            store.erase(party.id, action.action_class);
            return Resolution::Deny;
        case ConsentValue::AllowInForeground:
            return foreground ? Resolution::Allow : Resolution::Deny;
    }
    return Resolution::Ask;
}

ConsentDecision evaluate_consent(const Action& action, ConsentStore& store, DeviceWorld& world,
                                 const ConsentResponder* responder) {
    validate_action(world, action);
    bool fg = interaction_foreground(world, action);

    // First pass without consumption: every party must be resolvable before
    // any one-shot value is spent, so a failed action leaves consent intact.
    for (const auto& pid : action.parties) {
        const Party& p = world.party(pid);
        if (store.peek(pid, action.action_class)) continue;
        if (p.cls == PartyClass::Organization && world.org) continue;  // policy default applies
        if (responder != nullptr) {
            world.prompt_count++;
            auto v = (*responder)(pid, action.action_class);
            if (v) {
                store.put(pid, action.action_class, *v);
                continue;
            }
        }
        throw SimError(Err::MissingConsent,
                       "party " + pid + " has no consent recorded for " + action.action_class);
    }

    ConsentDecision dec;
    dec.allow = true;
    for (const auto& pid : action.parties) {
        const Party& p = world.party(pid);
        Resolution r = resolve_cached(p, action, store, fg);
        if (r == Resolution::Ask && p.cls == PartyClass::Organization && world.org) {
            r = world.org->denied_action_classes.count(action.action_class) ? Resolution::Deny
                                                                            : Resolution::Allow;
        }
        dec.resolutions.push_back(PartyResolution{pid, r});
        if (r != Resolution::Allow && dec.allow) {
            dec.allow = false;
            dec.vetoing_party = pid;
        }
    }
    return dec;
}

AccessScope grant_scope(DeviceWorld& world, const Action& action, const std::string& granting_party,
                        const std::string& grantee_party) {
    if (std::find(action.parties.begin(), action.parties.end(), granting_party) ==
            action.parties.end() ||
        std::find(action.parties.begin(), action.parties.end(), grantee_party) ==
            action.parties.end()) {
        throw SimError(Err::UnknownParty, "scope parties must belong to the action");
    }
    const Party& granter = world.party(granting_party);
    world.party(grantee_party);

    AccessScope scope;
    scope.scope_id = world.next_scope_id++;
    scope.granter = granting_party;
    scope.granter_generation = world.generation(granting_party);
    scope.grantee = grantee_party;
    // Never wider than asked for, never wider than what the granter controls.
    for (const auto& req : action.requested_scope) {
        if (granter.state.objects.count(req.object)) scope.objects[req.object] = req.mode;
    }
    world.scopes[scope.scope_id] = scope;
    return scope;
}

bool scope_allows(const DeviceWorld& world, const AccessScope& scope, const std::string& path,
                  char mode) {
    auto live = world.scopes.find(scope.scope_id);
    if (live == world.scopes.end()) return false;
    if (world.generation(scope.granter) != scope.granter_generation) return false;
    if (!world.objects.count(path)) return false;
    auto it = live->second.objects.find(path);
    if (it == live->second.objects.end()) return false;
    return (mode == 'r' && it->second.read) || (mode == 'w' && it->second.write);
}

void uninstall_app(DeviceWorld& world, const std::string& package) {
    auto it = world.packages.find(package);
    if (it == world.packages.end()) throw SimError(Err::UnknownPackage, package);
    PackageRecord rec = it->second;
    std::string key_of_pkg = world.uid_key(package);
    std::string pid = app_party_id(package);

    for (int user : rec.users) {
        remove_install_dirs(world, package, user, rec.app_id);
        sweep_grants_for_package(world, package, key_of_pkg, user);
    }
    world.bump_generation(pid);
    remove_scopes_touching(world, pid);
    world.consent.erase_party(pid);
    for (auto kit = world.keystore.begin(); kit != world.keystore.end();) {
        if (kit->second.owner_package == package) {
            kit = world.keystore.erase(kit);
        } else {
            ++kit;
        }
    }
    for (auto rit = world.perm_registry.begin(); rit != world.perm_registry.end();) {
        if (rit->second.declarer == package) {
            rit = world.perm_registry.erase(rit);
        } else {
            ++rit;
        }
    }
    bool group_alive = !rec.manifest.shared_uid_request.empty() &&
                       shared_group_has_other_member(world, rec.manifest.shared_uid_request,
                                                     package, -1);
    if (!rec.manifest.shared_uid_request.empty() && !group_alive) {
        world.shared_uid_app_id.erase(rec.manifest.shared_uid_request);
        world.shared_uid_key.erase(rec.manifest.shared_uid_request);
    }
    world.parties.erase(pid);
    world.packages.erase(package);
}

namespace {

void remove_user_state(DeviceWorld& world, int user_id) {
    auto uit = world.users.find(user_id);
    if (uit == world.users.end()) throw SimError(Err::UnknownUser, std::to_string(user_id));
    if (user_id == 0) {
        // The owner user cannot be removed; wiping it is the factory-reset
        // path through the platform party.
        throw SimError(Err::BadWorld, "user 0 is removed only by factory reset");
    }
    std::string pid = user_party_id(user_id);

    std::vector<std::string> gone;
    for (auto& [name, rec] : world.packages) {
        if (!rec.users.count(user_id)) continue;
        std::string key_of_pkg = world.uid_key(name);
        remove_install_dirs(world, name, user_id, rec.app_id);
        sweep_grants_for_package(world, name, key_of_pkg, user_id);
        rec.users.erase(user_id);
        if (rec.users.empty()) gone.push_back(name);
    }
    for (const auto& name : gone) uninstall_app(world, name);

    // Objects the user still controls (shared storage tree, media).
    std::vector<std::string> doomed;
    for (const auto& [path, obj] : world.objects) {
        if (obj.controller == pid || Aid::from_uid(obj.owner_uid).user_id == user_id) {
            doomed.push_back(path);
        }
    }
    for (const auto& p : doomed) world.remove_object(p);

    for (auto kit = world.keystore.begin(); kit != world.keystore.end();) {
        if (kit->second.user == user_id) {
            kit = world.keystore.erase(kit);
        } else {
            ++kit;
        }
    }
    world.bump_generation(pid);
    remove_scopes_touching(world, pid);
    world.consent.erase_party(pid);
    world.parties.erase(pid);
    world.users.erase(user_id);
}

}  // namespace

void reset_party(DeviceWorld& world, const std::string& party_id) {
    const Party& p = world.party(party_id);
    switch (p.cls) {
        case PartyClass::Platform: {
            // Factory reset: rebuild from the verified-boot-covered seed. The
            // FRP record and OS version ride along inside the boot chain.
            world = DeviceWorld::bootstrap(world.seed());
            return;
        }
        case PartyClass::Developer: {
            std::string package = party_id.substr(std::string("app:").size());
            uninstall_app(world, package);
            return;
        }
        case PartyClass::User: {
            int user_id = std::stoi(party_id.substr(std::string("user:").size()));
            if (world.org && world.org->profile_user == user_id) {
                reset_party(world, world.org->party_id);
                return;
            }
            remove_user_state(world, user_id);
            return;
        }
        case PartyClass::Organization: {
            OrgPolicy policy = *world.org;
            if (policy.profile_user >= 0 && world.users.count(policy.profile_user)) {
                remove_user_state(world, policy.profile_user);
            }
            world.bump_generation(party_id);
            remove_scopes_touching(world, party_id);
            world.consent.erase_party(party_id);
            world.parties.erase(party_id);
            world.org.reset();
            return;
        }
    }
}

Party& register_app(DeviceWorld& world, const std::string& developer_key, const Manifest& manifest,
                    int user, const SigningLineage& lineage) {
    if (manifest.package_name.empty()) {
        throw SimError(Err::BadWorld, "package name must not be empty");
    }
    if (world.packages.count(manifest.package_name)) {
        throw SimError(Err::DuplicatePackageName, manifest.package_name);
    }
    if (!world.users.count(user)) throw SimError(Err::UnknownUser, std::to_string(user));

    Aid aid = assign_uid(world, user, manifest.package_name, manifest.shared_uid_request,
                         developer_key);

    PackageRecord rec;
    rec.manifest = manifest;
    rec.key_id = developer_key;
    rec.lineage = lineage;
    rec.app_id = aid.app_id;
    rec.users.insert(user);
    world.packages[manifest.package_name] = rec;

    Party dev;
    dev.id = app_party_id(manifest.package_name);
    dev.cls = PartyClass::Developer;
    world.parties[dev.id] = dev;

    for (const auto& decl : manifest.declared_permissions) {
        if (world.perm_registry.count(decl.name)) continue;  // first definer wins
        PermissionDef def = decl;
        def.declarer = manifest.package_name;
        def.declarer_key = developer_key;
        world.perm_registry[decl.name] = def;
    }

    create_install_dirs(world, manifest.package_name, user);
    install_grant(world, manifest.package_name, user);
    return world.parties[dev.id];
}

void install_for_user(DeviceWorld& world, const std::string& package, int user) {
    auto it = world.packages.find(package);
    if (it == world.packages.end()) throw SimError(Err::UnknownPackage, package);
    if (!world.users.count(user)) throw SimError(Err::UnknownUser, std::to_string(user));
    if (it->second.users.count(user)) throw SimError(Err::DuplicatePackageName, package);
    it->second.users.insert(user);
    create_install_dirs(world, package, user);
    install_grant(world, package, user);
}

}  // namespace secsim
