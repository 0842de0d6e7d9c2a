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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "secsim/world.hpp"

namespace secsim {

// Verified boot: signature chain from the ROM key through the bootloader to
// the top-level metadata, per-partition hash trees, rollback protection, the
// boot state machine, update signature lineage, and key attestation.

using Keyring = std::map<std::string, SigningKey>;

// Metadata wire format (documented byte for byte in docs/format.md): the
// signature covers everything before it.
std::vector<uint8_t> vbmeta_signing_body(const VbMeta& meta);
std::vector<uint8_t> serialize_vbmeta(const VbMeta& meta);
VbMeta parse_vbmeta(const std::vector<uint8_t>& bytes);

void sign_vbmeta(VbMeta& meta, const SigningKey& key);
bool verify_vbmeta_signature(const VbMeta& meta, const SigningKey& key);

void sign_image(SignedImage& image, const SigningKey& key);
bool verify_image(const SignedImage& image, const SigningKey& key);

// Full boot verification: bootloader signatures, top metadata signed by the
// embedded root of trust (manufacturer key, or the user-installed root on a
// relocked device), rollback indexes, every hash descriptor (all blocks
// re-verified against the signed root), chained partition metadata
// recursively, and coverage of every present partition. Commits rollback
// indexes only after a verified (green or yellow) boot. Records and returns
// the resulting boot state.
BootState verify_boot_chain(BootChain& chain, const Keyring& keyring);

enum class RollbackCheck { Ok, Rejected };

// An image whose rollback index is below the stored minimum is rejected;
// equal or higher is accepted.
RollbackCheck check_rollback(const RollbackStore& store, const std::string& slot,
                             uint64_t index);
void commit_rollback(RollbackStore& store, const std::string& slot, uint64_t index);

// Unlocking wipes userdata (the factory-reset path) and re-enables flashing;
// relocking wipes again so a previously planted image cannot read the prior
// user's data.
void unlock_bootloader(DeviceWorld& world);
void relock_bootloader(DeviceWorld& world, const std::optional<SigningKey>& user_root);

// Signing lineage for key rotation: keys[i] certifies keys[i+1]; an update is
// acceptable iff signed by the installed key or by a successor reachable from
// it through valid certification links.
SigningLineage make_lineage(const Keyring& keyring, const std::vector<std::string>& key_ids);

enum class UpdateDecision { Allow, Deny };
UpdateDecision verify_apk_update(const Keyring& keyring, const std::string& installed_key,
                                 const std::string& candidate_key,
                                 const SigningLineage& candidate_lineage);

// System update: new partition images and metadata under the same root of
// trust, with the given version and rollback index.
void apply_ota(DeviceWorld& world, const std::string& version, uint64_t rollback_index);

// Fills a chain with the standard two-partition layout (system covered by the
// top metadata, vendor behind a chain descriptor), freshly built trees and
// signed metadata. Used when seeding devices and when applying updates.
struct BootPayloadOptions {
    std::string version = "11";
    uint64_t rollback_index = 1;
    uint32_t block_size = 64;
    std::string top_signer;  // key id signing the top metadata
};
void populate_boot_payload(BootChain& chain, const Keyring& keyring,
                           const BootPayloadOptions& opts);

AttestationRecord attest(const DeviceWorld& world, const std::string& challenge);
bool verify_attestation(const AttestationRecord& record, const Keyring& keyring);

// Digest of the serialized top-level metadata, as embedded in attestations.
Digest top_vbmeta_digest(const BootChain& chain);

// Factory-reset protection record survives resets but is readable through the
// platform only.
std::string read_frp(const DeviceWorld& world, const std::string& party_id);

// Deterministic partition image content for a given name and version.
std::vector<uint8_t> make_partition_image(const std::string& name, const std::string& version,
                                          uint32_t block_size, uint32_t num_blocks);

}  // namespace secsim
