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

#include <string>
#include <vector>

#include "secsim/world.hpp"

namespace secsim {

// App sandbox: per-app UIDs, the DAC/MAC/permission access gates, package
// visibility, and work profiles.

// Allocates the per-user uid for a package. A shared-UID request joins the
// group only if the signing key matches the group's key; the group name maps
// to one app id shared by all members.
Aid assign_uid(DeviceWorld& world, int user, const std::string& package,
               const std::string& shared_uid_group, const std::string& signing_key);

struct AccessDecision {
    bool allow = false;
    // First failing mechanism: "storage", "DAC", "MAC", "permission"; empty
    // when allowed.
    std::string mechanism;
    std::string detail;
};

// Access is mediated by all gates in order: CE storage availability, DAC
// (uid/mode bits plus live scope grants), MAC (allow-triples, default deny;
// root bypasses DAC but not MAC), and the Android permission layer for
// shared and external storage. mode is 'r', 'w' or 'x'.
AccessDecision check_access(DeviceWorld& world, uint32_t subject_uid, const std::string& path,
                            char mode, bool spend = true);

// Packages visible to the caller: everything for callers holding the
// query-all flag or targeting a pre-enforcement SDK, otherwise only the
// caller's own packages, its declared queries, and platform packages.
// Work-profile callers never see personal-profile packages and vice versa.
std::vector<std::string> query_packages(const DeviceWorld& world, uint32_t caller_uid);

// Creates the work profile as a separate user whose admin is the given
// device-policy package, installs that package into the profile, and
// registers the Organization party with its policy.
int create_work_profile(DeviceWorld& world, const std::string& dpc_package, bool device_owner,
                        const std::set<std::string>& denied_action_classes);

// MAC label of a subject uid / of an object, used by the MAC gate.
std::string subject_label(const DeviceWorld& world, uint32_t uid);
std::string object_label(const FsObject& obj);

}  // namespace secsim
