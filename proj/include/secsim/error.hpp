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

#include <stdexcept>
#include <string>

namespace secsim {

enum class Err {
    UnknownParty,
    MissingConsent,
    DuplicatePackageName,
    UnknownPermission,
    NotRequestable,
    BackgroundRequest,
    NotUserRevocable,
    RangeExhausted,
    SharedUidKeyMismatch,
    ProfileExists,
    IndexOutOfRange,
    MalformedLineage,
    KeystoreUnavailable,
    NotEnrolled,
    TierLockout,
    UnknownKey,
    BadSignature,
    UnknownPackage,
    UnknownUser,
    UnknownObject,
    UpdateRejected,
    BadWorld,
};

inline const char* err_name(Err e) {
    switch (e) {
        case Err::UnknownParty: return "UnknownParty";
        case Err::MissingConsent: return "MissingConsent";
        case Err::DuplicatePackageName: return "DuplicatePackageName";
        case Err::UnknownPermission: return "UnknownPermission";
        case Err::NotRequestable: return "NotRequestable";
        case Err::BackgroundRequest: return "BackgroundRequest";
        case Err::NotUserRevocable: return "NotUserRevocable";
        case Err::RangeExhausted: return "RangeExhausted";
        case Err::SharedUidKeyMismatch: return "SharedUidKeyMismatch";
        case Err::ProfileExists: return "ProfileExists";
        case Err::IndexOutOfRange: return "IndexOutOfRange";
        case Err::MalformedLineage: return "MalformedLineage";
        case Err::KeystoreUnavailable: return "KeystoreUnavailable";
        case Err::NotEnrolled: return "NotEnrolled";
        case Err::TierLockout: return "TierLockout";
        case Err::UnknownKey: return "UnknownKey";
        case Err::BadSignature: return "BadSignature";
        case Err::UnknownPackage: return "UnknownPackage";
        case Err::UnknownUser: return "UnknownUser";
        case Err::UnknownObject: return "UnknownObject";
        case Err::UpdateRejected: return "UpdateRejected";
        case Err::BadWorld: return "BadWorld";
    }
    return "Unknown";
}

// Domain error. The scenario runner catches these per event and records
// them in the trace instead of aborting the run.
class SimError : public std::runtime_error {
  public:
    SimError(Err code, const std::string& what)
        : std::runtime_error(std::string(err_name(code)) + ": " + what),
          code_(code),
          detail_(what) {}

    Err code() const { return code_; }

    // The message without the error-name prefix that what() carries.
    const std::string& detail() const { return detail_; }

  private:
    Err code_;
    std::string detail_;
};

}  // namespace secsim
