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

#include <map>
#include <string>

#include "secsim/world.hpp"

namespace secsim {

// Permission classes and their grant flows. Every grant is backed by a
// consent entry under the consenting party, so clearing consent revokes the
// mechanism and vice versa.

// Registry text: one permission per line,
//   perm <name> <level> [flags=<f1,f2,...>] [group=<group>]
// with level in {normal, dangerous, signature, privileged, special}.
// '#' starts a comment; blank lines are skipped.
std::map<std::string, PermissionDef> parse_permission_registry(const std::string& text);
std::string serialize_permission_registry(const std::map<std::string, PermissionDef>& registry);

// Consent action class covering a permission for a package. Dangerous
// permissions sharing a group share one class (one user decision covers the
// group); packages in a validated shared-UID group share the uid key and so
// share grants.
std::string permission_action_class(const DeviceWorld& world, const std::string& package,
                                    const std::string& perm);

// Install-time processing of the package's requested permissions for one
// user: normal auto-granted; signature granted iff the requester's key equals
// the declarer's key (or the requester is an allowlisted priv-app and the
// declaration carries the privileged flag); privileged granted iff system
// image and allowlisted; dangerous and special left ungranted.
std::map<std::string, PermStatus> install_grant(DeviceWorld& world, const std::string& package,
                                                int user);

enum class RuntimeResponse {
    Allow,
    AllowForeground,
    AllowOneTime,
    Deny,
    DenyAlways,
};

// Runtime request flow for dangerous permissions. Requires the requesting app
// to be in the foreground; the user's response is cached per permission
// group. deny leaves the next request promptable, deny-always suppresses
// future prompts. Returns the resulting status.
PermStatus request_runtime(DeviceWorld& world, const std::string& package, int user,
                           const std::string& perm, RuntimeResponse response);

struct PermContext {
    bool foreground = false;
};

// Point-of-use check for the app uid. One-time grants whose session has ended
// are spent by the first check after expiry (status returns to ask); pass
// spend=false for a pure query.
bool check_permission(DeviceWorld& world, uint32_t uid, const std::string& perm,
                      const PermContext& ctx, bool spend = true);

// Current status without side effects.
PermStatus permission_status(const DeviceWorld& world, int user, const std::string& package,
                             const std::string& perm);

// User-initiated revocation: dangerous returns to ask, special to denied;
// normal/signature/privileged are not user revocable.
PermStatus revoke_permission(DeviceWorld& world, int user, const std::string& package,
                             const std::string& perm);

// Special access toggle (settings UI path); rejects non-special permissions.
PermStatus settings_toggle(DeviceWorld& world, const std::string& package, int user,
                           const std::string& perm, bool enable);

// One-time sessions end when the app leaves the foreground or the device
// reboots.
void end_foreground_sessions(DeviceWorld& world, const std::string& package, int user);
void end_all_onetime_sessions(DeviceWorld& world);

}  // namespace secsim
