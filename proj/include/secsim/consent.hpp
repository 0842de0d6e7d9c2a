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

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "secsim/world.hpp"

namespace secsim {

// Multi-party consent calculus: an action executes only if every involved
// party consents; any one party vetoes.

struct PartyResolution {
    std::string party;
    Resolution resolution = Resolution::Ask;
};

struct ConsentDecision {
    bool allow = false;
    std::vector<PartyResolution> resolutions;
    std::string vetoing_party;  // first denying party, empty when allowed
};

// Interactive responder: consulted for parties with no cached entry. Returns
// the party's fresh response, which is cached before resolution. Without a
// responder, a missing entry is a hard deny (MissingConsent).
using ConsentResponder =
    std::function<std::optional<ConsentValue>(const std::string& party, const std::string& action_class)>;

// Builds an action and validates the party-set shape: exactly one User, one
// Platform, at most one Organization, one or more Developers.
Action make_action(const DeviceWorld& world, const std::string& id, const std::string& action_class,
                   const std::vector<std::string>& parties,
                   const std::vector<ScopeRequest>& requested_scope = {});

// Resolves one party's cached response. One-shot values (allow-once,
// deny-once) are consumed: the first resolution yields the value, later ones
// Ask. allow-in-foreground is evaluated against the interaction's current
// foreground state at each resolution, never frozen at grant time.
Resolution resolve_cached(const Party& party, const Action& action, ConsentStore& store,
                          bool foreground);

// True iff any Developer party of the action currently holds the
// ui-foreground or foreground-service attribute.
bool interaction_foreground(const DeviceWorld& world, const Action& action);

// Rule 1: allow iff every party resolves allow. All parties are resolved (no
// short-circuit) so one-shot consumption does not depend on iteration order.
// Organization parties with no cached entry fall back to the installed device
// policy instead of Ask.
ConsentDecision evaluate_consent(const Action& action, ConsentStore& store, DeviceWorld& world,
                                 const ConsentResponder* responder = nullptr);

// Grants access to the subset of the granter's state named in the action's
// requested scope. Precondition: evaluate_consent allowed the action.
// The scope is registered in the world and pinned to the granter's current
// generation; resetting the granter invalidates it.
AccessScope grant_scope(DeviceWorld& world, const Action& action, const std::string& granting_party,
                        const std::string& grantee_party);

// True iff the scope is still live (granter generation unchanged) and covers
// (path, mode).
bool scope_allows(const DeviceWorld& world, const AccessScope& scope, const std::string& path,
                  char mode);

// Rule 4 / safe reset. Developer reset uninstalls the app; User reset removes
// the account; Platform reset is a factory reset (writable data wiped,
// verified-boot-covered partitions and the FRP record retained, OS version
// not downgraded); Organization reset removes the work profile and policy.
void reset_party(DeviceWorld& world, const std::string& party_id);

// Rule 5: registers a package as its own security principal with state
// disjoint from every user's, records the signing key for shared-UID and
// update checks, assigns the UID, creates the private directories, and
// applies install-time permission grants.
Party& register_app(DeviceWorld& world, const std::string& developer_key, const Manifest& manifest,
                    int user = 0, const SigningLineage& lineage = {});

// Installs an already-registered package for an additional user (same app id,
// different uid).
void install_for_user(DeviceWorld& world, const std::string& package, int user);

void uninstall_app(DeviceWorld& world, const std::string& package);

}  // namespace secsim
