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

#include "secsim/permissions.hpp"

#include <sstream>

namespace secsim {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

const PermissionDef& lookup(const DeviceWorld& world, const std::string& perm) {
    auto it = world.perm_registry.find(perm);
    if (it == world.perm_registry.end()) throw SimError(Err::UnknownPermission, perm);
    return it->second;
}

const PackageRecord& installed_record(const DeviceWorld& world, const std::string& package,
                                      int user) {
    auto it = world.packages.find(package);
    if (it == world.packages.end()) throw SimError(Err::UnknownPackage, package);
    if (!it->second.users.count(user)) {
        throw SimError(Err::UnknownPackage, package + " not installed for user " +
                                                std::to_string(user));
    }
    return it->second;
}

std::string grant_key(const DeviceWorld& world, int user, const std::string& package,
                      const std::string& perm) {
    return std::to_string(user) + "|" + world.uid_key(package) + "|" + perm;
}

std::string session_key(const DeviceWorld& world, int user, const std::string& package,
                        const std::string& target) {
    return std::to_string(user) + "|" + world.uid_key(package) + "|" + target;
}

std::string class_target(const PermissionDef& def) {
    return (def.level == ProtLevel::Dangerous && !def.group.empty()) ? def.group : def.name;
}

// Install-time classes are granted through the table and mirrored as an
// allow-always consent entry under the user; both must agree for the check to
// pass, keeping the enforcement mechanism and the consent record aligned.
void grant_install_time(DeviceWorld& world, int user, const std::string& package,
                        const PermissionDef& def) {
    world.install_grants[grant_key(world, user, package, def.name)] = true;
    world.consent.put(user_party_id(user),
                      permission_action_class(world, package, def.name),
                      ConsentValue::AllowAlways);
}

void revoke_install_time(DeviceWorld& world, int user, const std::string& package,
                         const PermissionDef& def) {
    world.install_grants[grant_key(world, user, package, def.name)] = false;
    world.consent.erase(user_party_id(user), permission_action_class(world, package, def.name));
}

bool signature_matches(const PackageRecord& rec, const PermissionDef& def) {
    if (rec.key_id == def.declarer_key) return true;
    // The privileged flag opens a signature permission to allowlisted
    // system-image apps.
    return def.flags.count("privileged") > 0 && rec.manifest.system_app &&
           rec.manifest.priv_allowlisted;
}

}  // namespace

std::map<std::string, PermissionDef> parse_permission_registry(const std::string& text) {
    std::map<std::string, PermissionDef> reg;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        line_no++;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto tokens = split(line, ' ');
        if (tokens.empty()) continue;
        std::string where = "registry line " + std::to_string(line_no);
        if (tokens.size() < 3 || tokens[0] != "perm") {
            throw SimError(Err::BadWorld, where + ": expected 'perm <name> <level> ...'");
        }
        PermissionDef def;
        def.name = tokens[1];
        auto level = prot_level_from_name(tokens[2]);
        if (!level) throw SimError(Err::BadWorld, where + ": unknown level " + tokens[2]);
        def.level = *level;
        for (size_t i = 3; i < tokens.size(); ++i) {
            if (tokens[i].rfind("flags=", 0) == 0) {
                for (const auto& f : split(tokens[i].substr(6), ',')) def.flags.insert(f);
            } else if (tokens[i].rfind("group=", 0) == 0) {
                def.group = tokens[i].substr(6);
            } else {
                throw SimError(Err::BadWorld, where + ": unknown field " + tokens[i]);
            }
        }
        if (reg.count(def.name)) throw SimError(Err::BadWorld, where + ": duplicate " + def.name);
        reg[def.name] = def;
    }
    return reg;
}

std::string serialize_permission_registry(const std::map<std::string, PermissionDef>& registry) {
    std::ostringstream out;
    for (const auto& [name, def] : registry) {
        out << "perm " << name << " " << prot_level_name(def.level);
        if (!def.flags.empty()) {
            out << " flags=";
            bool first = true;
            for (const auto& f : def.flags) {
                if (!first) out << ",";
                out << f;
                first = false;
            }
        }
        if (!def.group.empty()) out << " group=" << def.group;
        out << "\n";
    }
    return out.str();
}

std::string permission_action_class(const DeviceWorld& world, const std::string& package,
                                    const std::string& perm) {
    const PermissionDef& def = lookup(world, perm);
    return "perm:" + world.uid_key(package) + ":" + class_target(def);
}

std::map<std::string, PermStatus> install_grant(DeviceWorld& world, const std::string& package,
                                                int user) {
    const PackageRecord& rec = installed_record(world, package, user);
    std::map<std::string, PermStatus> result;
    for (const auto& perm : rec.manifest.requested_permissions) {
        auto it = world.perm_registry.find(perm);
        // Requests for permissions nobody declares are inert.
        if (it == world.perm_registry.end()) continue;
        const PermissionDef& def = it->second;
        switch (def.level) {
            case ProtLevel::Normal:
                grant_install_time(world, user, package, def);
                result[perm] = PermStatus::Granted;
                break;
            case ProtLevel::Signature:
                if (signature_matches(rec, def)) {
                    grant_install_time(world, user, package, def);
                    result[perm] = PermStatus::Granted;
                } else {
                    result[perm] = PermStatus::Denied;
                }
                break;
            case ProtLevel::Privileged:
                if (rec.manifest.system_app && rec.manifest.priv_allowlisted) {
                    grant_install_time(world, user, package, def);
                    result[perm] = PermStatus::Granted;
                } else {
                    result[perm] = PermStatus::Denied;
                }
                break;
            case ProtLevel::Dangerous:
                result[perm] = PermStatus::Ask;
                break;
            case ProtLevel::Special:
                world.install_grants[grant_key(world, user, package, def.name)] = false;
                result[perm] = PermStatus::Denied;
                break;
        }
    }
    return result;
}

PermStatus request_runtime(DeviceWorld& world, const std::string& package, int user,
                           const std::string& perm, RuntimeResponse response) {
    const PermissionDef& def = lookup(world, perm);
    installed_record(world, package, user);
    if (def.level != ProtLevel::Dangerous) {
        throw SimError(Err::NotRequestable, perm + " is " + prot_level_name(def.level));
    }
    // Runtime prompts surface only over a visible app; background requests
    // are rejected outright so users always see who is asking.
    if (!world.is_foreground(package)) {
        throw SimError(Err::BackgroundRequest, package + " is not in the foreground");
    }
    std::string cls = permission_action_class(world, package, perm);
    std::string uparty = user_party_id(user);
    world.prompt_count++;
    switch (response) {
        case RuntimeResponse::Allow:
            world.consent.put(uparty, cls, ConsentValue::AllowAlways);
            break;
        case RuntimeResponse::AllowForeground:
            world.consent.put(uparty, cls, ConsentValue::AllowInForeground);
            break;
        case RuntimeResponse::AllowOneTime:
            world.consent.put(uparty, cls, ConsentValue::AllowOnce);
            world.onetime_sessions.insert(session_key(world, user, package, class_target(def)));
            break;
        case RuntimeResponse::Deny:
            world.consent.put(uparty, cls, ConsentValue::DenyOnce);
            break;
        case RuntimeResponse::DenyAlways:
            world.consent.put(uparty, cls, ConsentValue::DenyAlways);
            break;
    }
    return permission_status(world, user, package, perm);
}

bool check_permission(DeviceWorld& world, uint32_t uid, const std::string& perm,
                      const PermContext& ctx, bool spend) {
    auto def_it = world.perm_registry.find(perm);
    if (def_it == world.perm_registry.end()) return false;
    const PermissionDef& def = def_it->second;
    if (uid == kRootUid || uid == kSystemUid) return true;

    Aid aid = Aid::from_uid(uid);
    auto pkgs = world.packages_for_uid(uid);
    if (pkgs.empty()) return false;
    for (const auto& p : pkgs) {
        if (world.packages.at(p).manifest.isolated) return false;
    }
    const std::string& package = pkgs.front();
    int user = aid.user_id;
    std::string uparty = user_party_id(user);

    if (def.level != ProtLevel::Dangerous) {
        auto git = world.install_grants.find(grant_key(world, user, package, def.name));
        if (git == world.install_grants.end() || !git->second) return false;
        auto entry = world.consent.peek(uparty, permission_action_class(world, package, perm));
        return entry.has_value() && *entry == ConsentValue::AllowAlways;
    }

    std::string cls = permission_action_class(world, package, perm);
    auto entry = world.consent.peek(uparty, cls);
    if (!entry) return false;
    switch (*entry) {
        case ConsentValue::AllowAlways:
            return true;
        case ConsentValue::AllowInForeground:
            return ctx.foreground;
        case ConsentValue::AllowOnce: {
            if (world.onetime_sessions.count(session_key(world, user, package, class_target(def)))) {
                return true;
            }
            // Session over: the first check after expiry retires the grant.
            if (spend) world.consent.erase(uparty, cls);
            return false;
        }
        case ConsentValue::DenyOnce:
            // Left in place: a later request may prompt again, but checks
            // between now and then stay denied.
            return false;
        case ConsentValue::DenyAlways:
            return false;
    }
    return false;
}

PermStatus permission_status(const DeviceWorld& world, int user, const std::string& package,
                             const std::string& perm) {
    const PermissionDef& def = lookup(world, perm);
    installed_record(world, package, user);
    std::string uparty = user_party_id(user);
    if (def.level != ProtLevel::Dangerous) {
        auto git = world.install_grants.find(grant_key(world, user, package, def.name));
        bool table = git != world.install_grants.end() && git->second;
        auto entry = world.consent.peek(uparty, permission_action_class(world, package, perm));
        bool aligned = entry.has_value() && *entry == ConsentValue::AllowAlways;
        return table && aligned ? PermStatus::Granted : PermStatus::Denied;
    }
    auto entry = world.consent.peek(uparty, permission_action_class(world, package, perm));
    if (!entry) return PermStatus::Ask;
    switch (*entry) {
        case ConsentValue::AllowAlways:
            return PermStatus::Granted;
        case ConsentValue::AllowInForeground:
            return PermStatus::ForegroundOnly;
        case ConsentValue::AllowOnce:
            return world.onetime_sessions.count(
                       session_key(world, user, package, class_target(def)))
                       ? PermStatus::OneTime
                       : PermStatus::Ask;
        case ConsentValue::DenyOnce:
            // A plain deny rejects this request but leaves the app free to
            // prompt again later; only deny-always pins the denied state.
            return PermStatus::Ask;
        case ConsentValue::DenyAlways:
            return PermStatus::Denied;
    }
    return PermStatus::Ask;
}

PermStatus revoke_permission(DeviceWorld& world, int user, const std::string& package,
                             const std::string& perm) {
    const PermissionDef& def = lookup(world, perm);
    installed_record(world, package, user);
    switch (def.level) {
        case ProtLevel::Dangerous: {
            world.consent.erase(user_party_id(user),
                                permission_action_class(world, package, perm));
            world.onetime_sessions.erase(session_key(world, user, package, class_target(def)));
            return PermStatus::Ask;
        }
        case ProtLevel::Special:
            revoke_install_time(world, user, package, def);
            return PermStatus::Denied;
        case ProtLevel::Normal:
        case ProtLevel::Signature:
        case ProtLevel::Privileged:
            throw SimError(Err::NotUserRevocable, perm);
    }
    return PermStatus::Denied;
}

PermStatus settings_toggle(DeviceWorld& world, const std::string& package, int user,
                           const std::string& perm, bool enable) {
    const PermissionDef& def = lookup(world, perm);
    installed_record(world, package, user);
    if (def.level != ProtLevel::Special) {
        throw SimError(Err::NotRequestable, perm + " has no settings toggle");
    }
    world.prompt_count++;
    if (enable) {
        grant_install_time(world, user, package, def);
        return PermStatus::Granted;
    }
    revoke_install_time(world, user, package, def);
    return PermStatus::Denied;
}

void end_foreground_sessions(DeviceWorld& world, const std::string& package, int user) {
    if (!world.packages.count(package)) return;
    std::string prefix = std::to_string(user) + "|" + world.uid_key(package) + "|";
    for (auto it = world.onetime_sessions.begin(); it != world.onetime_sessions.end();) {
        if (it->rfind(prefix, 0) == 0) {
            it = world.onetime_sessions.erase(it);
        } else {
            ++it;
        }
    }
}

void end_all_onetime_sessions(DeviceWorld& world) { world.onetime_sessions.clear(); }

}  // namespace secsim
