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

#include "secsim/boot.hpp"

#include <algorithm>
#include <cstring>

#include "secsim/canonical.hpp"
#include "secsim/error.hpp"
#include "secsim/hash_tree.hpp"

namespace secsim {

namespace {

constexpr char kVbMetaMagic[4] = {'S', 'V', 'B', '1'};
constexpr uint16_t kVbMetaVersion = 1;

void put_u16(std::vector<uint8_t>& out, uint16_t v) {
    out.push_back(static_cast<uint8_t>(v & 0xff));
    out.push_back(static_cast<uint8_t>(v >> 8));
}

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xff));
}

void put_u64(std::vector<uint8_t>& out, uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xff));
}

void put_lp16(std::vector<uint8_t>& out, const std::string& s) {
    if (s.size() > 0xffff) throw SimError(Err::BadWorld, "string too long");
    put_u16(out, static_cast<uint16_t>(s.size()));
    out.insert(out.end(), s.begin(), s.end());
}

struct Reader {
    const std::vector<uint8_t>& in;
    size_t off = 0;

    void need(size_t n) const {
        if (off + n > in.size()) throw SimError(Err::BadWorld, "truncated metadata");
    }
    uint16_t u16() {
        need(2);
        uint16_t v = static_cast<uint16_t>(in[off] | (in[off + 1] << 8));
        off += 2;
        return v;
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(in[off + i]) << (8 * i);
        off += 4;
        return v;
    }
    uint64_t u64() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(in[off + i]) << (8 * i);
        off += 8;
        return v;
    }
    std::string lp16() {
        uint16_t n = u16();
        need(n);
        std::string s(in.begin() + off, in.begin() + off + n);
        off += n;
        return s;
    }
    Digest digest() {
        need(32);
        Digest d;
        std::copy(in.begin() + off, in.begin() + off + 32, d.begin());
        off += 32;
        return d;
    }
    std::vector<uint8_t> blob16() {
        uint16_t n = u16();
        need(n);
        std::vector<uint8_t> b(in.begin() + off, in.begin() + off + n);
        off += n;
        return b;
    }
};

const SigningKey* find_key(const Keyring& keyring, const std::string& id) {
    auto it = keyring.find(id);
    return it == keyring.end() ? nullptr : &it->second;
}

std::vector<uint8_t> lineage_link_message(const std::string& parent, const std::string& child) {
    std::string msg = "rotate|" + parent + "|" + child;
    return std::vector<uint8_t>(msg.begin(), msg.end());
}

std::vector<uint8_t> attestation_body(const AttestationRecord& r) {
    CanonicalWriter w;
    w.line("attestation-record");
    w.kv("device-locked", r.device_locked ? "true" : "false");
    w.kv("boot-state", boot_color_name(r.boot_state));
    w.kv("vbmeta-digest", to_hex(r.vbmeta_digest));
    w.kv("challenge", r.challenge);
    w.kv("key", r.key_id);
    const std::string& s = w.str();
    return std::vector<uint8_t>(s.begin(), s.end());
}

}  // namespace

std::vector<uint8_t> vbmeta_signing_body(const VbMeta& meta) {
    std::vector<uint8_t> out;
    out.insert(out.end(), kVbMetaMagic, kVbMetaMagic + 4);
    put_u16(out, kVbMetaVersion);
    put_lp16(out, meta.signed_by);
    put_u64(out, meta.rollback_index);
    put_u16(out, static_cast<uint16_t>(meta.hash_descs.size()));
    for (const auto& d : meta.hash_descs) {
        put_lp16(out, d.partition);
        put_u32(out, d.block_size);
        put_u32(out, d.num_blocks);
        out.insert(out.end(), d.root.begin(), d.root.end());
    }
    put_u16(out, static_cast<uint16_t>(meta.chain_descs.size()));
    for (const auto& c : meta.chain_descs) {
        put_lp16(out, c.partition);
        put_lp16(out, c.expected_key);
    }
    return out;
}

std::vector<uint8_t> serialize_vbmeta(const VbMeta& meta) {
    std::vector<uint8_t> out = vbmeta_signing_body(meta);
    if (meta.signature.size() > 0xffff) throw SimError(Err::BadWorld, "oversized signature");
    put_u16(out, static_cast<uint16_t>(meta.signature.size()));
    out.insert(out.end(), meta.signature.begin(), meta.signature.end());
    return out;
}

VbMeta parse_vbmeta(const std::vector<uint8_t>& bytes) {
    Reader r{bytes};
    r.need(4);
    if (std::memcmp(bytes.data(), kVbMetaMagic, 4) != 0) {
        throw SimError(Err::BadWorld, "bad metadata magic");
    }
    r.off = 4;
    if (r.u16() != kVbMetaVersion) throw SimError(Err::BadWorld, "unsupported metadata version");
    VbMeta meta;
    meta.signed_by = r.lp16();
    meta.rollback_index = r.u64();
    uint16_t n_hash = r.u16();
    for (uint16_t i = 0; i < n_hash; ++i) {
        HashDescriptor d;
        d.partition = r.lp16();
        d.block_size = r.u32();
        d.num_blocks = r.u32();
        d.root = r.digest();
        meta.hash_descs.push_back(std::move(d));
    }
    uint16_t n_chain = r.u16();
    for (uint16_t i = 0; i < n_chain; ++i) {
        ChainDescriptor c;
        c.partition = r.lp16();
        c.expected_key = r.lp16();
        meta.chain_descs.push_back(std::move(c));
    }
    meta.signature = r.blob16();
    if (r.off != bytes.size()) throw SimError(Err::BadWorld, "trailing bytes after metadata");
    return meta;
}

void sign_vbmeta(VbMeta& meta, const SigningKey& key) {
    meta.signed_by = key.id;
    meta.signature = toy_sign(key.secret, vbmeta_signing_body(meta));
}

bool verify_vbmeta_signature(const VbMeta& meta, const SigningKey& key) {
    return meta.signed_by == key.id &&
           toy_verify(key.secret, vbmeta_signing_body(meta), meta.signature);
}

void sign_image(SignedImage& image, const SigningKey& key) {
    image.signed_by = key.id;
    image.signature = toy_sign(key.secret, image.content);
}

bool verify_image(const SignedImage& image, const SigningKey& key) {
    return image.signed_by == key.id && toy_verify(key.secret, image.content, image.signature);
}

RollbackCheck check_rollback(const RollbackStore& store, const std::string& slot, uint64_t index) {
    auto it = store.slots.find(slot);
    if (it == store.slots.end()) return RollbackCheck::Ok;
    return index >= it->second ? RollbackCheck::Ok : RollbackCheck::Rejected;
}

void commit_rollback(RollbackStore& store, const std::string& slot, uint64_t index) {
    uint64_t& cur = store.slots[slot];
    cur = std::max(cur, index);
}

namespace {

// Recursive verification of one metadata scope: rollback, hash descriptors,
// chained metadata. Appends failure reasons; records covered partitions and
// rollback commits to apply after a verified boot.
void walk_vbmeta(const BootChain& chain, const Keyring& keyring, const std::string& scope,
                 const VbMeta& meta, std::vector<std::string>& reasons,
                 std::set<std::string>& covered, std::map<std::string, uint64_t>& commits,
                 int depth) {
    if (depth > 4) {
        reasons.push_back("chain-too-deep:" + scope);
        return;
    }
    if (check_rollback(chain.rollback, scope, meta.rollback_index) == RollbackCheck::Rejected) {
        reasons.push_back("rollback:" + scope);
    }
    commits[scope] = meta.rollback_index;

    for (const auto& d : meta.hash_descs) {
        auto pit = chain.partitions.find(d.partition);
        if (pit == chain.partitions.end()) {
            reasons.push_back("missing-partition:" + d.partition);
            continue;
        }
        covered.insert(d.partition);
        auto tit = chain.trees.find(d.partition);
        if (tit == chain.trees.end()) {
            reasons.push_back("missing-tree:" + d.partition);
            continue;
        }
        const auto& data = pit->second;
        const auto& tree = tit->second;
        uint64_t blocks_needed =
            (static_cast<uint64_t>(data.size()) + d.block_size - 1) / d.block_size;
        if (!tree_shape_ok(tree, d.block_size, d.num_blocks) || blocks_needed != d.num_blocks) {
            reasons.push_back("dm-verity-corruption:" + d.partition);
            continue;
        }
        for (uint32_t i = 0; i < d.num_blocks; ++i) {
            if (verify_block(data, i, tree, d.root) != BlockCheck::Ok) {
                reasons.push_back("dm-verity-corruption:" + d.partition);
                break;
            }
        }
    }

    for (const auto& c : meta.chain_descs) {
        std::string name = "vbmeta_" + c.partition;
        auto mit = chain.vbmetas.find(name);
        if (mit == chain.vbmetas.end()) {
            reasons.push_back("missing-chained:" + c.partition);
            continue;
        }
        const VbMeta& sub = mit->second;
        const SigningKey* key = find_key(keyring, c.expected_key);
        if (sub.signed_by != c.expected_key || key == nullptr ||
            !verify_vbmeta_signature(sub, *key)) {
            reasons.push_back("chained-signature:" + c.partition);
            continue;
        }
        walk_vbmeta(chain, keyring, name, sub, reasons, covered, commits, depth + 1);
    }
}

}  // namespace

BootState verify_boot_chain(BootChain& chain, const Keyring& keyring) {
    BootState st;
    st.device_locked = chain.device_locked;
    std::vector<std::string> reasons;

    auto sysit = chain.partitions.find("system");
    bool os_found = sysit != chain.partitions.end() && !sysit->second.empty();
    if (!os_found) reasons.push_back("no-valid-os");

    const SigningKey* rom = find_key(keyring, chain.rom_key);
    if (rom == nullptr || !verify_image(chain.bootloader, *rom)) {
        reasons.push_back("bootloader-signature");
    }
    const SigningKey* blkey = find_key(keyring, chain.bootloader_key);
    if (blkey == nullptr || !verify_image(chain.final_bootloader, *blkey)) {
        reasons.push_back("bootloader-signature");
    }

    bool user_signed = false;
    std::set<std::string> covered;
    std::map<std::string, uint64_t> commits;
    auto top = chain.vbmetas.find("vbmeta");
    if (top == chain.vbmetas.end()) {
        reasons.push_back("missing-vbmeta");
    } else {
        const VbMeta& meta = top->second;
        if (chain.device_locked) {
            if (meta.signed_by == chain.manufacturer_root) {
                // green candidate
            } else if (!chain.user_root.empty() && meta.signed_by == chain.user_root) {
                user_signed = true;
            } else {
                reasons.push_back("untrusted-root:" + meta.signed_by);
            }
        }
        const SigningKey* root_key = find_key(keyring, meta.signed_by);
        if (root_key == nullptr || !verify_vbmeta_signature(meta, *root_key)) {
            reasons.push_back("vbmeta-signature");
        }
        walk_vbmeta(chain, keyring, "vbmeta", meta, reasons, covered, commits, 0);
        for (const auto& [name, data] : chain.partitions) {
            (void)data;
            if (!covered.count(name)) reasons.push_back("uncovered-partition:" + name);
        }
    }

    if (!os_found) {
        st.color = BootColor::RED;
    } else if (!chain.device_locked) {
        st.color = BootColor::ORANGE;
    } else if (!reasons.empty()) {
        st.color = BootColor::RED;
    } else {
        st.color = user_signed ? BootColor::YELLOW : BootColor::GREEN;
    }
    st.reasons = std::move(reasons);

    // Rollback counters advance only after the image actually verified;
    // otherwise a corrupt or forged image could burn counters.
    if (st.color == BootColor::GREEN || st.color == BootColor::YELLOW) {
        for (const auto& [slot, index] : commits) commit_rollback(chain.rollback, slot, index);
    }
    chain.last_boot = st;
    return st;
}

SigningLineage make_lineage(const Keyring& keyring, const std::vector<std::string>& key_ids) {
    SigningLineage lin;
    lin.keys = key_ids;
    for (size_t i = 0; i + 1 < key_ids.size(); ++i) {
        const SigningKey* parent = find_key(keyring, key_ids[i]);
        if (parent == nullptr) throw SimError(Err::UnknownKey, "lineage key " + key_ids[i]);
        lin.link_sigs.push_back(
            toy_sign(parent->secret, lineage_link_message(key_ids[i], key_ids[i + 1])));
    }
    return lin;
}

UpdateDecision verify_apk_update(const Keyring& keyring, const std::string& installed_key,
                                 const std::string& candidate_key,
                                 const SigningLineage& candidate_lineage) {
    if (installed_key == candidate_key) return UpdateDecision::Allow;
    if (candidate_lineage.empty()) return UpdateDecision::Deny;
    if (candidate_lineage.link_sigs.size() + 1 != candidate_lineage.keys.size()) {
        throw SimError(Err::MalformedLineage, "link count does not match key count");
    }
    if (candidate_lineage.keys.back() != candidate_key) return UpdateDecision::Deny;
    auto pos = std::find(candidate_lineage.keys.begin(), candidate_lineage.keys.end(),
                         installed_key);
    if (pos == candidate_lineage.keys.end()) return UpdateDecision::Deny;
    for (size_t i = 0; i + 1 < candidate_lineage.keys.size(); ++i) {
        const SigningKey* parent = find_key(keyring, candidate_lineage.keys[i]);
        if (parent == nullptr) {
            throw SimError(Err::MalformedLineage, "unknown lineage key " + candidate_lineage.keys[i]);
        }
        if (!toy_verify(parent->secret,
                        lineage_link_message(candidate_lineage.keys[i],
                                             candidate_lineage.keys[i + 1]),
                        candidate_lineage.link_sigs[i])) {
            return UpdateDecision::Deny;
        }
    }
    return UpdateDecision::Allow;
}

void populate_boot_payload(BootChain& chain, const Keyring& keyring,
                           const BootPayloadOptions& opts) {
    const SigningKey* top = find_key(keyring, opts.top_signer);
    const SigningKey* vendor = find_key(keyring, "vendor-key");
    if (top == nullptr || vendor == nullptr) {
        throw SimError(Err::UnknownKey, "payload signing keys missing");
    }

    chain.partitions.clear();
    chain.trees.clear();
    chain.vbmetas.clear();
    chain.partitions["system"] = make_partition_image("system", opts.version, opts.block_size, 16);
    chain.partitions["vendor"] = make_partition_image("vendor", opts.version, opts.block_size, 8);
    for (const auto& [name, data] : chain.partitions) {
        chain.trees[name] = build_hash_tree(data, opts.block_size);
    }

    VbMeta vendor_meta;
    vendor_meta.rollback_index = opts.rollback_index;
    vendor_meta.hash_descs.push_back(HashDescriptor{
        "vendor", opts.block_size, chain.trees["vendor"].num_blocks, chain.trees["vendor"].root()});
    sign_vbmeta(vendor_meta, *vendor);
    chain.vbmetas["vbmeta_vendor"] = vendor_meta;

    VbMeta top_meta;
    top_meta.rollback_index = opts.rollback_index;
    top_meta.hash_descs.push_back(HashDescriptor{
        "system", opts.block_size, chain.trees["system"].num_blocks, chain.trees["system"].root()});
    top_meta.chain_descs.push_back(ChainDescriptor{"vendor", vendor->id});
    sign_vbmeta(top_meta, *top);
    chain.vbmetas["vbmeta"] = top_meta;

    chain.os_version = opts.version;
}

std::vector<uint8_t> make_partition_image(const std::string& name, const std::string& version,
                                          uint32_t block_size, uint32_t num_blocks) {
    std::vector<uint8_t> data;
    data.reserve(static_cast<size_t>(block_size) * num_blocks);
    for (uint32_t i = 0; i < num_blocks; ++i) {
        Digest seed = sha256(name + "|" + version + "|" + CanonicalWriter::u64(i));
        for (uint32_t b = 0; b < block_size; ++b) data.push_back(seed[b % seed.size()]);
    }
    return data;
}

void apply_ota(DeviceWorld& world, const std::string& version, uint64_t rollback_index) {
    if (check_rollback(world.boot.rollback, "vbmeta", rollback_index) == RollbackCheck::Rejected) {
        throw SimError(Err::UpdateRejected, "rollback index below stored minimum");
    }
    std::string signer = world.boot.manufacturer_root;
    auto top = world.boot.vbmetas.find("vbmeta");
    if (top != world.boot.vbmetas.end() && !top->second.signed_by.empty()) {
        signer = top->second.signed_by;
    }
    uint32_t block_size = 64;
    if (top != world.boot.vbmetas.end() && !top->second.hash_descs.empty()) {
        block_size = top->second.hash_descs[0].block_size;
    }
    BootPayloadOptions opts;
    opts.version = version;
    opts.rollback_index = rollback_index;
    opts.block_size = block_size;
    opts.top_signer = signer;
    populate_boot_payload(world.boot, world.keyring, opts);
}

void unlock_bootloader(DeviceWorld& world) {
    // Unlocking forces a userdata wipe: the world is rebuilt from its
    // verified-boot-covered seed with the lock bit cleared, so no prior user
    // state survives into the unlocked device.
    WorldSeed seed = world.seed();
    seed.boot.device_locked = false;
    world = DeviceWorld::bootstrap(seed);
}

void relock_bootloader(DeviceWorld& world, const std::optional<SigningKey>& user_root) {
    // Relocking wipes as well: data written while unlocked is not trusted
    // into the locked state.
    WorldSeed seed = world.seed();
    seed.boot.device_locked = true;
    if (user_root) {
        seed.boot.user_root = user_root->id;
        seed.keyring[user_root->id] = *user_root;
    }
    world = DeviceWorld::bootstrap(seed);
}

Digest top_vbmeta_digest(const BootChain& chain) {
    auto it = chain.vbmetas.find("vbmeta");
    if (it == chain.vbmetas.end()) return sha256(std::string());
    return sha256(serialize_vbmeta(it->second));
}

AttestationRecord attest(const DeviceWorld& world, const std::string& challenge) {
    if (!world.keystore_initialized) {
        throw SimError(Err::KeystoreUnavailable, "keystore not initialized");
    }
    const SigningKey* key = nullptr;
    for (const auto& [id, k] : world.keyring) {
        (void)id;
        if (k.role == KeyRole::Attestation) {
            key = &k;
            break;
        }
    }
    if (key == nullptr) throw SimError(Err::KeystoreUnavailable, "no attestation key provisioned");

    AttestationRecord rec;
    rec.device_locked = world.boot.device_locked;
    rec.boot_state = world.boot.last_boot.color;
    rec.vbmeta_digest = top_vbmeta_digest(world.boot);
    rec.challenge = challenge;
    rec.key_id = key->id;
    rec.signature = toy_sign(key->secret, attestation_body(rec));
    return rec;
}

bool verify_attestation(const AttestationRecord& record, const Keyring& keyring) {
    const SigningKey* key = find_key(keyring, record.key_id);
    if (key == nullptr || key->role != KeyRole::Attestation) return false;
    return toy_verify(key->secret, attestation_body(record), record.signature);
}

std::string read_frp(const DeviceWorld& world, const std::string& party_id) {
    // The record survives factory reset by design but only the platform may
    // read it; it must not become a cross-reset tracking channel for apps.
    if (party_id != platform_party_id()) {
        throw SimError(Err::MissingConsent, "factory-reset protection record is platform-internal");
    }
    if (!world.boot.frp_enabled) return "";
    return world.boot.frp_record;
}

}  // namespace secsim
