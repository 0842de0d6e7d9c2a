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

#include <deque>
#include <sstream>

#include "secsim/auth.hpp"
#include "secsim/boot.hpp"
#include "secsim/canonical.hpp"
#include "secsim/consent.hpp"
#include "secsim/hash_tree.hpp"
#include "secsim/permissions.hpp"
#include "secsim/sandbox.hpp"
#include "secsim/scenario.hpp"

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

struct Args {
    const std::map<std::string, std::string>& m;

    bool has(const std::string& k) const { return m.count(k) > 0; }
    std::string get(const std::string& k, const std::string& def = "") const {
        auto it = m.find(k);
        return it == m.end() ? def : it->second;
    }
    std::string req(const std::string& k) const {
        auto it = m.find(k);
        if (it == m.end()) throw SimError(Err::BadWorld, "missing argument " + k);
        return it->second;
    }
    int geti(const std::string& k, int def) const {
        auto it = m.find(k);
        return it == m.end() ? def : std::stoi(it->second);
    }
    uint64_t getu(const std::string& k, uint64_t def) const {
        auto it = m.find(k);
        return it == m.end() ? def : std::stoull(it->second);
    }
    bool getb(const std::string& k, bool def = false) const {
        auto it = m.find(k);
        return it == m.end() ? def : it->second == "true";
    }
};

struct Outcome {
    std::string decision;  // allow | deny | ok | error | pass | fail | info
    std::string reason;
};

struct Runner {
    DeviceWorld world;
    std::map<std::string, std::deque<std::string>> pending_responses;
    Trace trace;

    ConsentResponder make_responder() {
        return [this](const std::string& party,
                      const std::string&) -> std::optional<ConsentValue> {
            auto it = pending_responses.find(party);
            if (it == pending_responses.end() || it->second.empty()) return std::nullopt;
            auto v = consent_value_from_name(it->second.front());
            it->second.pop_front();
            return v;
        };
    }

    uint32_t arg_uid(const Args& a) {
        if (a.has("uid")) return static_cast<uint32_t>(a.getu("uid", 0));
        std::string pkg = a.req("pkg");
        auto it = world.packages.find(pkg);
        if (it == world.packages.end()) throw SimError(Err::UnknownPackage, pkg);
        int user = a.geti("user", 0);
        if (!it->second.users.count(user)) {
            throw SimError(Err::UnknownPackage, pkg + " not installed for user " +
                                                    std::to_string(user));
        }
        return Aid{user, it->second.app_id}.uid();
    }

    void ensure_app_key(const std::string& id) {
        if (world.keyring.count(id)) return;
        world.keyring[id] = SigningKey{id, KeyRole::Apk, "secret-" + id};
    }

    SigningLineage lineage_from_args(const Args& a) {
        SigningLineage lin;
        if (!a.has("lineage")) return lin;
        auto ids = split(a.get("lineage"), ',');
        for (const auto& id : ids) ensure_app_key(id);
        lin = make_lineage(world.keyring, ids);
        if (a.has("forge-link")) {
            size_t idx = a.getu("forge-link", 0);
            if (idx < lin.link_sigs.size() && !lin.link_sigs[idx].empty()) {
                lin.link_sigs[idx][0] ^= 0x01;
            }
        }
        return lin;
    }

    Manifest manifest_from_args(const std::string& pkg, const Args& a) {
        Manifest m;
        m.package_name = pkg;
        m.requested_permissions = split(a.get("perms"), ',');
        for (const auto& decl : split(a.get("declares"), ',')) {
            auto parts = split(decl, ':');
            if (parts.size() < 2) throw SimError(Err::BadWorld, "declares needs name:level");
            PermissionDef def;
            def.name = parts[0];
            auto level = prot_level_from_name(parts[1]);
            if (!level) throw SimError(Err::BadWorld, "bad level in declares: " + parts[1]);
            def.level = *level;
            if (parts.size() > 2) def.group = parts[2];
            m.declared_permissions.push_back(def);
        }
        m.target_sdk = a.geti("target-sdk", 30);
        m.shared_uid_request = a.get("shared-uid");
        m.debuggable = a.getb("debuggable");
        m.queries = split(a.get("queries"), ',');
        m.system_app = a.getb("system");
        m.priv_allowlisted = a.getb("priv");
        m.isolated = a.getb("isolated");
        return m;
    }

    Outcome do_install(const Args& a) {
        std::string pkg = a.req("pkg");
        std::string key = a.req("key");
        int user = a.geti("user", 0);
        ensure_app_key(key);
        SigningLineage lineage = lineage_from_args(a);

        auto it = world.packages.find(pkg);
        if (it != world.packages.end()) {
            PackageRecord& rec = it->second;
            if (key == rec.key_id && !rec.users.count(user)) {
                install_for_user(world, pkg, user);
                return {"allow", "installed-for-user"};
            }
            // Update: the new signer must be the installed key or prove
            // rotation from it.
            UpdateDecision d = verify_apk_update(world.keyring, rec.key_id, key, lineage);
            if (d == UpdateDecision::Deny) return {"deny", "update-signature-mismatch"};
            rec.key_id = key;
            rec.lineage = lineage;
            return {"allow", "updated"};
        }
        Manifest m = manifest_from_args(pkg, a);
        register_app(world, key, m, user, lineage);
        uint32_t uid = Aid{user, world.packages.at(pkg).app_id}.uid();
        return {"allow", "uid=" + std::to_string(uid)};
    }

    Outcome do_grant(const Args& a) {
        std::string pkg = a.req("pkg");
        std::string perm = a.req("perm");
        int user = a.geti("user", 0);
        auto dit = world.perm_registry.find(perm);
        if (dit == world.perm_registry.end()) throw SimError(Err::UnknownPermission, perm);
        switch (dit->second.level) {
            case ProtLevel::Dangerous:
                world.consent.put(user_party_id(user),
                                  permission_action_class(world, pkg, perm),
                                  ConsentValue::AllowAlways);
                return {"ok", "granted"};
            case ProtLevel::Special:
                settings_toggle(world, pkg, user, perm, true);
                return {"ok", "granted"};
            default:
                throw SimError(Err::NotRequestable, perm + " cannot be granted by the user");
        }
    }

    Outcome do_request(const Args& a) {
        static const std::map<std::string, RuntimeResponse> responses = {
            {"allow", RuntimeResponse::Allow},
            {"allow-foreground", RuntimeResponse::AllowForeground},
            {"allow-once", RuntimeResponse::AllowOneTime},
            {"deny", RuntimeResponse::Deny},
            {"deny-always", RuntimeResponse::DenyAlways},
        };
        auto rit = responses.find(a.req("response"));
        if (rit == responses.end()) throw SimError(Err::BadWorld, "bad response value");
        PermStatus st =
            request_runtime(world, a.req("pkg"), a.geti("user", 0), a.req("perm"), rit->second);
        return {"ok", std::string("status=") + perm_status_name(st)};
    }

    Outcome do_access(const Args& a, bool spend) {
        uint32_t uid = arg_uid(a);
        std::string mode = a.get("mode", "r");
        AccessDecision d = check_access(world, uid, a.req("path"), mode[0], spend);
        if (d.allow) return {"allow", d.detail};
        return {"deny", d.mechanism + (d.detail.empty() ? "" : ": " + d.detail)};
    }

    Outcome do_share(const Args& a) {
        std::string to = a.req("to");
        std::string path = a.req("path");
        int user = a.geti("user", 0);
        auto oit = world.objects.find(path);
        if (oit == world.objects.end()) throw SimError(Err::UnknownObject, path);
        std::string controller = oit->second.controller;

        std::vector<std::string> parties = {user_party_id(user), platform_party_id()};
        auto add_party = [&](const std::string& id) {
            if (!id.empty() && std::find(parties.begin(), parties.end(), id) == parties.end()) {
                parties.push_back(id);
            }
        };
        add_party(controller);
        if (a.has("from")) add_party(app_party_id(a.get("from")));
        add_party(app_party_id(to));
        if (world.org && world.org->device_owner) add_party(world.org->party_id);

        AccessModes modes;
        std::string mode = a.get("mode", "r");
        modes.read = mode.find('r') != std::string::npos;
        modes.write = mode.find('w') != std::string::npos;
        Action action = make_action(world, "share-" + path, "share:" + path, parties,
                                    {ScopeRequest{path, modes}});
        auto responder = make_responder();
        ConsentDecision dec = evaluate_consent(action, world.consent, world, &responder);
        if (!dec.allow) return {"deny", "vetoed-by=" + dec.vetoing_party};
        AccessScope scope = grant_scope(world, action, controller, app_party_id(to));
        return {"allow", "scope=" + std::to_string(scope.scope_id)};
    }

    Outcome do_evaluate(const Args& a) {
        std::vector<ScopeRequest> reqs;
        for (const auto& entry : split(a.get("scope"), ',')) {
            auto colon = entry.rfind(':');
            if (colon == std::string::npos) throw SimError(Err::BadWorld, "scope needs path:mode");
            ScopeRequest r;
            r.object = entry.substr(0, colon);
            std::string mode = entry.substr(colon + 1);
            r.mode.read = mode.find('r') != std::string::npos;
            r.mode.write = mode.find('w') != std::string::npos;
            reqs.push_back(r);
        }
        Action action = make_action(world, a.get("id", "action"), a.req("class"),
                                    split(a.req("parties"), ','), reqs);
        auto responder = make_responder();
        ConsentDecision dec = evaluate_consent(action, world.consent, world, &responder);
        if (!dec.allow) return {"deny", "vetoed-by=" + dec.vetoing_party};
        if (a.has("grant-from") && a.has("grant-to")) {
            AccessScope scope = grant_scope(world, action, a.get("grant-from"), a.get("grant-to"));
            return {"allow", "scope=" + std::to_string(scope.scope_id)};
        }
        return {"allow", ""};
    }

    Outcome do_enroll(const Args& a) {
        Modality m;
        m.name = a.req("name");
        auto kind = modality_kind_from_name(a.req("kind"));
        if (!kind) throw SimError(Err::BadWorld, "unknown modality kind");
        m.kind = *kind;
        m.factor_secret = a.get("secret");
        m.weaver = a.getb("weaver");
        if (m.kind == ModalityKind::Biometric) {
            if (a.has("sar")) {
                m.bio_class = classify_biometric(std::stod(a.get("sar")),
                                                 a.getb("pipeline-secure", true));
            } else {
                std::string cls = a.get("class", "strong");
                m.bio_class = cls == "strong"      ? BiometricClass::Strong
                              : cls == "weak"      ? BiometricClass::Weak
                                                   : BiometricClass::Convenience;
            }
        }
        enroll_modality(world, a.geti("user", 0), m);
        return {"ok", "enrolled"};
    }

    Outcome do_auth(const Args& a) {
        AuthResult r = authenticate(world, a.geti("user", 0), a.req("modality"),
                                    a.get("sample"), world.clock);
        if (r.success) return {"allow", ""};
        return {"deny", r.reason};
    }

    Outcome do_reboot() {
        BootState st = verify_boot_chain(world.boot, world.keyring);
        on_reboot_auth(world);
        end_all_onetime_sessions(world);
        for (auto& [id, p] : world.parties) {
            (void)id;
            p.state.attributes.erase("ui-foreground");
            p.state.attributes.erase("foreground-service");
        }
        std::string color = boot_color_name(st.color);
        if (st.color == BootColor::RED) {
            std::string why = st.reasons.empty() ? "" : ": " + st.reasons.front();
            return {"deny", color + why};
        }
        return {"ok", color};
    }

    Outcome do_flash(const Args& a) {
        if (world.boot.device_locked && !a.getb("force")) {
            return {"deny", "bootloader-locked"};
        }
        std::string target = a.req("target");
        if (target == "os") {
            BootPayloadOptions opts;
            opts.version = a.get("version", world.boot.os_version);
            opts.rollback_index = a.getu("index", 1);
            uint32_t bs = 64;
            auto top = world.boot.vbmetas.find("vbmeta");
            if (top != world.boot.vbmetas.end() && !top->second.hash_descs.empty()) {
                bs = top->second.hash_descs[0].block_size;
            }
            opts.block_size = static_cast<uint32_t>(a.getu("block-size", bs));
            opts.top_signer = a.get("signer", world.boot.manufacturer_root);
            populate_boot_payload(world.boot, world.keyring, opts);
            return {"ok", "flashed-os"};
        }
        if (target.rfind("tree:", 0) == 0) {
            std::string part = target.substr(5);
            auto it = world.boot.trees.find(part);
            if (it == world.boot.trees.end()) throw SimError(Err::UnknownObject, target);
            size_t level = a.getu("level", 0);
            size_t node = a.getu("node", 0);
            size_t bit = a.getu("bit", 0);
            auto& levels = it->second.levels;
            if (level >= levels.size() || node >= levels[level].size() || bit >= 256) {
                throw SimError(Err::IndexOutOfRange, "tree coordinates");
            }
            levels[level][node][bit / 8] ^= static_cast<uint8_t>(1u << (bit % 8));
            return {"ok", "tampered-tree"};
        }
        if (target.rfind("vbmeta", 0) == 0) {
            auto it = world.boot.vbmetas.find(target);
            if (it == world.boot.vbmetas.end()) throw SimError(Err::UnknownObject, target);
            std::string field = a.get("field", "signature");
            if (field == "rollback") {
                it->second.rollback_index = a.getu("value", 0);  // not re-signed
            } else if (field == "signature") {
                size_t bit = a.getu("bit", 0);
                auto& sig = it->second.signature;
                if (sig.empty()) throw SimError(Err::BadWorld, "no signature to tamper");
                sig[(bit / 8) % sig.size()] ^= static_cast<uint8_t>(1u << (bit % 8));
            } else if (field == "root") {
                if (it->second.hash_descs.empty()) {
                    throw SimError(Err::BadWorld, "no hash descriptor");
                }
                size_t bit = a.getu("bit", 0);
                it->second.hash_descs[0].root[(bit / 8) % 32] ^=
                    static_cast<uint8_t>(1u << (bit % 8));
            } else {
                throw SimError(Err::BadWorld, "unknown vbmeta field " + field);
            }
            return {"ok", "tampered-vbmeta"};
        }
        auto pit = world.boot.partitions.find(target);
        if (pit == world.boot.partitions.end()) throw SimError(Err::UnknownObject, target);
        if (a.has("bit")) {
            size_t bit = a.getu("bit", 0);
            auto& data = pit->second;
            data[(bit / 8) % data.size()] ^= static_cast<uint8_t>(1u << (bit % 8));
            return {"ok", "tampered-partition"};
        }
        throw SimError(Err::BadWorld, "flash needs bit= or target=os");
    }

    Outcome do_trh_update(const Args& a) {
        SignedImage fw;
        std::string content = "trh-firmware|" + a.get("version", "2");
        fw.content.assign(content.begin(), content.end());
        if (!a.getb("unsigned")) {
            for (const auto& [id, k] : world.keyring) {
                (void)id;
                if (k.role == KeyRole::TrhVendor) {
                    sign_image(fw, k);
                    break;
                }
            }
        }
        std::optional<std::pair<int, std::string>> credential;
        if (a.has("credential")) {
            credential = {a.geti("credential-user", 0), a.get("credential")};
        }
        trh_update(world, fw, credential);
        bool wiped = false;
        for (const auto& [id, u] : world.users) {
            (void)id;
            if (!u.ce_secret_present) wiped = true;
        }
        return {"ok", wiped ? "secrets-wiped" : "secrets-preserved"};
    }

    Outcome do_key_entry(const Args& a) {
        KeyEntry k;
        k.id = a.req("id");
        k.backing = a.getb("strongbox") ? KeyBacking::TrhStrongbox : KeyBacking::TeeKeymaster;
        k.auth_bound = a.getb("auth-bound");
        k.requires_user_presence = a.getb("presence");
        k.min_auth_tier = a.get("min-tier") == "primary" ? AuthTier::Primary : AuthTier::Secondary;
        k.user = a.geti("user", 0);
        k.owner_package = a.get("pkg");
        k.secret = a.get("secret", "key-secret-" + k.id);
        k.for_confirmation = a.getb("confirm");
        world.keystore[k.id] = k;
        return {"ok", "stored"};
    }

    Outcome do_set_foreground(const Args& a) {
        std::string pkg = a.req("pkg");
        auto it = world.packages.find(pkg);
        if (it == world.packages.end()) throw SimError(Err::UnknownPackage, pkg);
        Party& p = world.party(app_party_id(pkg));
        bool value = a.getb("value", true);
        std::string attr = a.getb("service") ? "foreground-service" : "ui-foreground";
        p.state.attributes[attr] = value ? "true" : "false";
        if (!value) {
            for (int user : it->second.users) end_foreground_sessions(world, pkg, user);
        }
        return {"ok", attr + "=" + (value ? "true" : "false")};
    }

    Outcome do_attest(const Args& a) {
        AttestationRecord rec = attest(world, a.get("challenge", "c0"));
        bool ok = verify_attestation(rec, world.keyring);
        std::ostringstream out;
        out << "state=" << boot_color_name(rec.boot_state)
            << " locked=" << (rec.device_locked ? "true" : "false")
            << " digest=" << to_hex(rec.vbmeta_digest).substr(0, 16)
            << " verified=" << (ok ? "true" : "false");
        return {"ok", out.str()};
    }

    Outcome do_assert(const Args& a) {
        std::string kind = a.req("kind");
        std::string expect = a.get("expect");
        auto verdict = [&](bool pass, const std::string& got) -> Outcome {
            if (pass) {
                trace.asserts_passed++;
                return {"pass", kind};
            }
            trace.asserts_failed++;
            return {"fail", kind + ": expected " + expect + ", got " + got};
        };
        if (kind == "last") {
            std::string got = trace.records.empty() ? "" : trace.records.back().decision;
            return verdict(got == expect, got);
        }
        if (kind == "access") {
            Outcome o = do_access(a, /*spend=*/false);
            return verdict(o.decision == expect, o.decision + " (" + o.reason + ")");
        }
        if (kind == "perm") {
            PermStatus st =
                permission_status(world, a.geti("user", 0), a.req("pkg"), a.req("perm"));
            return verdict(perm_status_name(st) == expect, perm_status_name(st));
        }
        if (kind == "boot") {
            std::string got = boot_color_name(world.boot.last_boot.color);
            return verdict(got == expect, got);
        }
        if (kind == "visible") {
            auto visible = query_packages(world, arg_uid(Args{a.m}));
            bool present = std::find(visible.begin(), visible.end(), a.req("target")) !=
                           visible.end();
            return verdict((present ? "true" : "false") == expect, present ? "true" : "false");
        }
        if (kind == "frp") {
            std::string got = read_frp(world, platform_party_id());
            return verdict(got == expect, got.empty() ? "(empty)" : got);
        }
        if (kind == "key") {
            std::string got;
            try {
                got = key_gate(world, a.req("key"), a.getb("presence")) == KeyGate::Usable
                          ? "usable"
                          : "locked";
            } catch (const SimError& e) {
                got = err_name(e.code());
            }
            return verdict(got == expect, got);
        }
        if (kind == "ce") {
            bool avail = ce_available(world, a.geti("user", 0));
            return verdict((avail ? "true" : "false") == expect, avail ? "true" : "false");
        }
        if (kind == "consent") {
            auto v = world.consent.peek(a.req("party"), a.req("class"));
            std::string got = v ? consent_value_name(*v) : "none";
            return verdict(got == expect, got);
        }
        if (kind == "installed") {
            auto it = world.packages.find(a.req("pkg"));
            bool inst = it != world.packages.end() && it->second.users.count(a.geti("user", 0));
            return verdict((inst ? "true" : "false") == expect, inst ? "true" : "false");
        }
        if (kind == "digest") {
            std::string got = to_hex(world.digest());
            return verdict(got == expect, got.substr(0, 16));
        }
        if (kind == "prompt-count") {
            std::string got = std::to_string(world.prompt_count);
            return verdict(got == expect, got);
        }
        throw SimError(Err::BadWorld, "unknown assert kind " + kind);
    }

    void apply_init(const ScenarioEvent& ev) {
        Args a{ev.args};
        if (ev.verb == "user") {
            int id = a.geti("id", world.next_user_id);
            if (world.users.count(id)) throw SimError(Err::BadWorld, "user exists");
            UserRecord u;
            u.id = id;
            u.ce_available = true;
            u.auth.screen_locked = false;
            world.users[id] = u;
            Party p;
            p.id = user_party_id(id);
            p.cls = PartyClass::User;
            world.parties[p.id] = p;
            FsObject shared;
            shared.path = "/storage/emulated/" + std::to_string(id);
            shared.owner_uid = kSystemUid;
            shared.mode = 0771;
            shared.location = FsLocation::SharedStorage;
            shared.creator_uid = kSystemUid;
            shared.controller = p.id;
            shared.ce_protected = false;
            world.add_object(shared);
            if (id >= world.next_user_id) world.next_user_id = id + 1;
            return;
        }
        if (ev.verb == "perm") {
            PermissionDef def;
            def.name = a.req("name");
            auto level = prot_level_from_name(a.req("level"));
            if (!level) throw SimError(Err::BadWorld, "bad level");
            def.level = *level;
            def.group = a.get("group");
            for (const auto& f : split(a.get("flags"), ',')) def.flags.insert(f);
            world.perm_registry[def.name] = def;
            return;
        }
        if (ev.verb == "object") {
            FsObject o;
            o.path = a.req("path");
            if (a.has("owner-pkg")) {
                int user = a.geti("user", 0);
                o.owner_uid = Aid{user, world.packages.at(a.get("owner-pkg")).app_id}.uid();
            } else {
                o.owner_uid = static_cast<uint32_t>(a.getu("owner-uid", kSystemUid));
            }
            o.mode = static_cast<uint32_t>(std::stoul(a.get("mode", "600"), nullptr, 8));
            auto loc = fs_location_from_name(a.get("location", "shared-storage"));
            if (!loc) throw SimError(Err::BadWorld, "bad location");
            o.location = *loc;
            o.creator_uid = a.has("creator-pkg")
                                ? Aid{a.geti("user", 0),
                                      world.packages.at(a.get("creator-pkg")).app_id}
                                      .uid()
                                : static_cast<uint32_t>(a.getu("creator-uid", o.owner_uid));
            o.controller = a.get("controller", user_party_id(a.geti("user", 0)));
            o.ce_protected = a.getb("ce");
            if (a.has("label")) o.labels.insert(a.get("label"));
            world.add_object(o);
            return;
        }
        if (ev.verb == "consent") {
            auto v = consent_value_from_name(a.req("value"));
            if (!v) throw SimError(Err::BadWorld, "bad consent value");
            world.consent.put(a.req("party"), a.req("class"), *v);
            return;
        }
        if (ev.verb == "key") {
            SigningKey k;
            k.id = a.req("id");
            std::string role = a.get("role", "apk");
            static const std::map<std::string, KeyRole> roles = {
                {"rom-root", KeyRole::RomRoot},       {"bootloader", KeyRole::Bootloader},
                {"vbmeta-root", KeyRole::VbMetaRoot}, {"user-root", KeyRole::UserRoot},
                {"partition", KeyRole::Partition},    {"apk", KeyRole::Apk},
                {"platform-signing", KeyRole::PlatformSigning},
                {"attestation", KeyRole::Attestation},
                {"trh-vendor", KeyRole::TrhVendor},
            };
            auto rit = roles.find(role);
            if (rit == roles.end()) throw SimError(Err::BadWorld, "bad key role " + role);
            k.role = rit->second;
            k.secret = a.get("secret", "secret-" + k.id);
            world.keyring[k.id] = k;
            return;
        }
        if (ev.verb == "macallow") {
            std::string subject = a.req("subject");
            std::string object = a.req("object");
            for (char m : a.get("mode", "r")) world.mac.allow.insert({subject, object, m});
            return;
        }
        if (ev.verb == "enroll") {
            do_enroll(a);
            return;
        }
        if (ev.verb == "key-entry") {
            do_key_entry(a);
            return;
        }
        if (ev.verb == "kernel-compromise") {
            world.kernel_compromised = true;
            return;
        }
        if (ev.verb == "install") {
            do_install(a);
            return;
        }
        throw SimError(Err::BadWorld, "unhandled init kind " + ev.verb);
    }

    Outcome apply_event(const ScenarioEvent& ev) {
        Args a{ev.args};
        const std::string& v = ev.verb;
        if (v == "install") return do_install(a);
        if (v == "uninstall") {
            uninstall_app(world, a.req("pkg"));
            return {"ok", "uninstalled"};
        }
        if (v == "grant") return do_grant(a);
        if (v == "request") return do_request(a);
        if (v == "revoke") {
            PermStatus st =
                revoke_permission(world, a.geti("user", 0), a.req("pkg"), a.req("perm"));
            return {"ok", std::string("status=") + perm_status_name(st)};
        }
        if (v == "settings-toggle") {
            PermStatus st = settings_toggle(world, a.req("pkg"), a.geti("user", 0),
                                            a.req("perm"), a.getb("enable", true));
            return {"ok", std::string("status=") + perm_status_name(st)};
        }
        if (v == "access") return do_access(a, /*spend=*/true);
        if (v == "share") return do_share(a);
        if (v == "query-packages") {
            auto pkgs = query_packages(world, arg_uid(a));
            std::string joined;
            for (const auto& p : pkgs) joined += (joined.empty() ? "" : ",") + p;
            return {"ok", joined.empty() ? "(none)" : joined};
        }
        if (v == "enroll") return do_enroll(a);
        if (v == "auth") return do_auth(a);
        if (v == "lock") {
            lock_screen(world, a.geti("user", 0));
            return {"ok", "locked"};
        }
        if (v == "reboot") return do_reboot();
        if (v == "flash") return do_flash(a);
        if (v == "unlock-bootloader") {
            if (!a.getb("confirm")) return {"deny", "physical-confirmation-required"};
            unlock_bootloader(world);
            return {"ok", "unlocked-and-wiped"};
        }
        if (v == "relock") {
            std::optional<SigningKey> user_root;
            if (a.has("user-root")) {
                user_root = SigningKey{a.get("user-root"), KeyRole::UserRoot,
                                       a.get("secret", "secret-" + a.get("user-root"))};
            }
            relock_bootloader(world, user_root);
            return {"ok", "relocked-and-wiped"};
        }
        if (v == "factory-reset") {
            reset_party(world, platform_party_id());
            return {"ok", "factory-reset"};
        }
        if (v == "ota") {
            apply_ota(world, a.req("version"), a.getu("index", 1));
            return {"ok", "staged; reboot to apply"};
        }
        if (v == "trh-update") return do_trh_update(a);
        if (v == "create-profile") {
            std::set<std::string> denied;
            for (const auto& d : split(a.get("deny"), ',')) denied.insert(d);
            int profile = create_work_profile(world, a.req("dpc"), a.getb("device-owner"), denied);
            return {"ok", "profile=" + std::to_string(profile)};
        }
        if (v == "set-foreground") return do_set_foreground(a);
        if (v == "confirm") {
            auto c = protected_confirm(world, a.req("pkg"), a.req("message"),
                                       a.getb("button"));
            if (!c) return {"deny", "no-button-press"};
            bool ok = verify_confirmation(world, *c, a.get("message"));
            return {"allow", ok ? "confirmed" : "signature-invalid"};
        }
        if (v == "key-entry") return do_key_entry(a);
        if (v == "key-sign") {
            key_sign(world, a.req("key"), a.get("data", "payload"), a.getb("presence"));
            return {"allow", "signed"};
        }
        if (v == "attest") return do_attest(a);
        if (v == "respond") {
            pending_responses[a.req("party")].push_back(a.req("value"));
            return {"ok", "queued"};
        }
        if (v == "evaluate") return do_evaluate(a);
        if (v == "reset-party") {
            reset_party(world, a.req("party"));
            return {"ok", "reset"};
        }
        if (v == "kernel-compromise") {
            world.kernel_compromised = true;
            return {"ok", "kernel-compromised"};
        }
        if (v == "assert") return do_assert(a);
        throw SimError(Err::BadWorld, "unhandled verb " + v);
    }
};

std::string canonical_args(const std::map<std::string, std::string>& args) {
    std::string out;
    for (const auto& [k, v] : args) {
        if (!out.empty()) out += ';';
        out += k + "=" + v;
    }
    return out;
}

}  // namespace

Trace run_scenario(const Scenario& scenario, uint64_t seed) {
    DefaultBootOptions boot_opts;
    for (const auto& ev : scenario.init) {
        if (ev.verb != "boot") continue;
        Args a{ev.args};
        boot_opts.os_version = a.get("os-version", boot_opts.os_version);
        boot_opts.rollback_index = a.getu("rollback-index", boot_opts.rollback_index);
        boot_opts.block_size = static_cast<uint32_t>(a.getu("block-size", boot_opts.block_size));
        boot_opts.locked = a.getb("locked", true);
        boot_opts.user_root = a.get("user-root");
        boot_opts.frp_enabled = a.has("frp-record");
        boot_opts.frp_record = a.get("frp-record");
    }

    Runner r;
    r.world = DeviceWorld::bootstrap(make_default_seed(boot_opts));
    r.trace.scenario_name = scenario.name;
    for (const auto& tag : scenario.tags) {
        if (!r.trace.tags.empty()) r.trace.tags += ",";
        r.trace.tags += tag;
    }
    r.trace.seed = seed;

    for (const auto& ev : scenario.init) {
        if (ev.verb == "boot") continue;
        r.apply_init(ev);  // init errors abort the run: the world is invalid
    }

    for (const auto& ev : scenario.events) {
        r.world.clock = ev.t;
        Outcome o;
        try {
            o = r.apply_event(ev);
        } catch (const SimError& e) {
            o = {"error", std::string(err_name(e.code())) + ": " + e.detail()};
        }
        TraceRecord rec;
        rec.t = ev.t;
        rec.verb = ev.verb;
        rec.args = canonical_args(ev.args);
        rec.decision = o.decision;
        rec.reason = o.reason;
        rec.digest = to_hex(r.world.digest());
        r.trace.records.push_back(std::move(rec));
    }
    return r.trace;
}

std::string format_trace(const Trace& trace, bool machine) {
    if (machine) {
        CanonicalWriter w;
        w.line("trace-format 1");
        w.kv("scenario", trace.scenario_name);
        w.kv("tags", trace.tags);
        w.kv("seed", trace.seed);
        w.kv("events", static_cast<uint64_t>(trace.records.size()));
        for (size_t i = 0; i < trace.records.size(); ++i) {
            const TraceRecord& r = trace.records[i];
            w.line("e " + CanonicalWriter::u64(i) + " t=" + CanonicalWriter::u64(r.t) +
                   " verb=" + r.verb + " args=" + r.args + " decision=" + r.decision +
                   " reason=" + r.reason + " digest=" + r.digest);
        }
        w.line("asserts passed=" + CanonicalWriter::u64(trace.asserts_passed) +
               " failed=" + CanonicalWriter::u64(trace.asserts_failed));
        return w.str();
    }
    std::ostringstream out;
    out << "scenario: " << trace.scenario_name << "\n";
    if (!trace.tags.empty()) out << "tags: " << trace.tags << "\n";
    for (const TraceRecord& r : trace.records) {
        out << "  t=" << r.t << " " << r.verb;
        if (!r.args.empty()) out << " [" << r.args << "]";
        out << " -> " << r.decision;
        if (!r.reason.empty()) out << " (" << r.reason << ")";
        out << "\n";
    }
    out << "asserts: " << trace.asserts_passed << " passed, " << trace.asserts_failed
        << " failed\n";
    return out.str();
}

int trace_exit_code(const Trace& trace) { return trace.asserts_failed > 0 ? 1 : 0; }

}  // namespace secsim
