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

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "secsim/boot.hpp"
#include "secsim/hash_tree.hpp"
#include "secsim/scenario.hpp"

namespace fs = std::filesystem;
using namespace secsim;

namespace {

std::vector<uint8_t> read_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    return std::vector<uint8_t>(std::istreambuf_iterator<char>(in),
                                std::istreambuf_iterator<char>());
}

void write_bytes(const fs::path& p, const std::vector<uint8_t>& data) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size()));
}

void write_text(const fs::path& p, const std::string& s) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << s;
}

void write_signed_image(const fs::path& dir, const std::string& stem, const SignedImage& img) {
    write_bytes(dir / (stem + ".img"), img.content);
    write_text(dir / (stem + ".sig"), img.signed_by + "\n" + to_hex(img.signature) + "\n");
}

SignedImage read_signed_image(const fs::path& dir, const std::string& stem) {
    SignedImage img;
    img.content = read_bytes(dir / (stem + ".img"));
    std::ifstream sig(dir / (stem + ".sig"));
    if (!sig) throw std::runtime_error("missing " + stem + ".sig");
    std::string hex;
    std::getline(sig, img.signed_by);
    std::getline(sig, hex);
    img.signature = from_hex(hex);
    return img;
}

void write_image_dir(const fs::path& dir, const BootChain& chain, const Keyring& keyring) {
    fs::create_directories(dir);
    std::ostringstream cfg;
    cfg << "locked " << (chain.device_locked ? "true" : "false") << "\n";
    cfg << "os-version " << chain.os_version << "\n";
    cfg << "rom-key " << chain.rom_key << "\n";
    cfg << "bootloader-key " << chain.bootloader_key << "\n";
    cfg << "manufacturer-root " << chain.manufacturer_root << "\n";
    if (!chain.user_root.empty()) cfg << "user-root " << chain.user_root << "\n";
    if (chain.frp_enabled) cfg << "frp " << chain.frp_record << "\n";
    for (const auto& [slot, value] : chain.rollback.slots) {
        cfg << "rollback " << slot << " " << value << "\n";
    }
    for (const auto& [id, key] : keyring) {
        cfg << "key " << id << " " << key_role_name(key.role) << " " << key.secret << "\n";
    }
    write_text(dir / "device.cfg", cfg.str());

    write_signed_image(dir, "bootloader", chain.bootloader);
    write_signed_image(dir, "final-bootloader", chain.final_bootloader);
    for (const auto& [name, data] : chain.partitions) write_bytes(dir / (name + ".part"), data);
    for (const auto& [name, tree] : chain.trees) {
        write_bytes(dir / (name + ".tree"), serialize_hash_tree(tree));
    }
    for (const auto& [name, vb] : chain.vbmetas) {
        write_bytes(dir / (name + ".vb"), serialize_vbmeta(vb));
    }
}

void read_image_dir(const fs::path& dir, BootChain& chain, Keyring& keyring) {
    std::ifstream cfg(dir / "device.cfg");
    if (!cfg) throw std::runtime_error("missing device.cfg in " + dir.string());
    std::string line;
    while (std::getline(cfg, line)) {
        std::istringstream in(line);
        std::string word;
        in >> word;
        if (word == "locked") {
            std::string v;
            in >> v;
            chain.device_locked = v == "true";
        } else if (word == "os-version") {
            in >> chain.os_version;
        } else if (word == "rom-key") {
            in >> chain.rom_key;
        } else if (word == "bootloader-key") {
            in >> chain.bootloader_key;
        } else if (word == "manufacturer-root") {
            in >> chain.manufacturer_root;
        } else if (word == "user-root") {
            in >> chain.user_root;
        } else if (word == "frp") {
            chain.frp_enabled = true;
            in >> chain.frp_record;
        } else if (word == "rollback") {
            std::string slot;
            uint64_t value = 0;
            in >> slot >> value;
            chain.rollback.slots[slot] = value;
        } else if (word == "key") {
            SigningKey k;
            std::string role;
            in >> k.id >> role >> k.secret;
            auto r = key_role_from_name(role);
            if (!r) throw std::runtime_error("bad key role in device.cfg: " + role);
            k.role = *r;
            keyring[k.id] = k;
        } else if (!word.empty()) {
            throw std::runtime_error("unknown device.cfg directive: " + word);
        }
    }
    chain.bootloader = read_signed_image(dir, "bootloader");
    chain.final_bootloader = read_signed_image(dir, "final-bootloader");
    for (const auto& entry : fs::directory_iterator(dir)) {
        const fs::path& p = entry.path();
        std::string stem = p.stem().string();
        if (p.extension() == ".part") {
            chain.partitions[stem] = read_bytes(p);
        } else if (p.extension() == ".tree") {
            chain.trees[stem] = parse_hash_tree(read_bytes(p));
        } else if (p.extension() == ".vb") {
            chain.vbmetas[stem] = parse_vbmeta(read_bytes(p));
        }
    }
}

int cmd_run(const std::string& file, const std::string& format, uint64_t seed) {
    Scenario sc;
    try {
        sc = load_scenario_file(file);
    } catch (const ParseError& e) {
        std::cerr << "parse error at line " << e.line() << ": " << e.what() << "\n";
        return 2;
    }
    Trace trace = run_scenario(sc, seed);
    std::cout << format_trace(trace, format == "machine");
    return trace_exit_code(trace);
}

int cmd_check(const std::string& dir) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() == ".scn") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) {
        std::cerr << "no .scn files in " << dir << "\n";
        return 2;
    }
    std::set<std::string> covered;
    int failures = 0;
    for (const auto& f : files) {
        Scenario sc;
        try {
            sc = load_scenario_file(f.string());
        } catch (const ParseError& e) {
            std::cerr << f.filename().string() << ": parse error at line " << e.line() << ": "
                      << e.what() << "\n";
            return 2;
        }
        if (sc.tags.empty()) {
            std::cout << f.filename().string() << ": FAIL (no threat tags)\n";
            failures++;
            continue;
        }
        Trace trace = run_scenario(sc);
        for (const auto& t : sc.tags) covered.insert(t);
        bool ok = trace.asserts_failed == 0;
        std::cout << f.filename().string() << (ok ? ": PASS (" : ": FAIL (")
                  << trace.asserts_passed << " asserts";
        if (trace.asserts_failed) std::cout << ", " << trace.asserts_failed << " failed";
        std::cout << ")\n";
        if (!ok) failures++;
    }
    std::vector<std::string> missing;
    for (const auto& tag : known_threat_tags()) {
        if (!covered.count(tag)) missing.push_back(tag);
    }
    if (!missing.empty()) {
        std::cout << "uncovered threat tags:";
        for (const auto& t : missing) std::cout << " " << t;
        std::cout << "\n";
        failures++;
    } else {
        std::cout << "threat tag coverage: complete (" << covered.size() << " tags)\n";
    }
    std::cout << (failures ? "CHECK FAILED\n" : "CHECK PASSED\n");
    return failures ? 1 : 0;
}

int boot_state_exit(BootColor color) {
    switch (color) {
        case BootColor::GREEN:
        case BootColor::YELLOW:
            return 0;
        case BootColor::ORANGE:
            return 2;
        case BootColor::RED:
            return 3;
    }
    return 3;
}

int cmd_avb_verify(const std::string& dir) {
    BootChain chain;
    Keyring keyring;
    read_image_dir(dir, chain, keyring);
    BootState st = verify_boot_chain(chain, keyring);
    std::cout << "boot-state " << boot_color_name(st.color) << "\n";
    for (const auto& r : st.reasons) std::cout << "reason " << r << "\n";
    return boot_state_exit(st.color);
}

int cmd_avb_attest(const std::string& dir, const std::string& challenge) {
    WorldSeed seed;
    read_image_dir(dir, seed.boot, seed.keyring);
    seed.platform_perms = default_permission_registry();
    seed.mac = default_mac_policy();
    DeviceWorld world = DeviceWorld::bootstrap(seed);
    AttestationRecord rec = attest(world, challenge);
    std::cout << "boot-state " << boot_color_name(rec.boot_state) << "\n";
    std::cout << "device-locked " << (rec.device_locked ? "true" : "false") << "\n";
    std::cout << "os-version " << world.boot.os_version << "\n";
    std::cout << "vbmeta-digest " << to_hex(rec.vbmeta_digest) << "\n";
    std::cout << "challenge " << rec.challenge << "\n";
    std::cout << "key " << rec.key_id << "\n";
    std::cout << "signature " << to_hex(rec.signature) << "\n";
    std::cout << "verified " << (verify_attestation(rec, world.keyring) ? "true" : "false")
              << "\n";
    return boot_state_exit(rec.boot_state);
}

int cmd_avb_make(const std::string& dir, const std::string& version, uint64_t index,
                 bool unlocked, const std::string& user_root, uint32_t block_size) {
    DefaultBootOptions opts;
    opts.os_version = version;
    opts.rollback_index = index;
    opts.block_size = block_size;
    opts.locked = !unlocked;
    opts.user_root = user_root;
    WorldSeed seed = make_default_seed(opts);
    write_image_dir(dir, seed.boot, seed.keyring);
    std::cout << "wrote image set to " << dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"secsim scenario and verified-boot tool"};
    app.require_subcommand(1);

    std::string run_file;
    std::string run_format = "text";
    uint64_t run_seed = 0;
    auto* run = app.add_subcommand("run", "replay one scenario file");
    run->add_option("file", run_file, "scenario script")->required();
    run->add_option("--format", run_format, "text or machine")
        ->check(CLI::IsMember({"text", "machine"}));
    run->add_option("--seed", run_seed, "trace seed label");

    std::string check_dir;
    auto* check = app.add_subcommand("check", "replay a scenario corpus and check tag coverage");
    check->add_option("dir", check_dir, "directory of .scn files")->required();

    auto* avb = app.add_subcommand("avb", "verified-boot image tools");
    avb->require_subcommand(1);

    std::string verify_dir;
    auto* verify = avb->add_subcommand("verify", "run boot verification over an image set");
    verify->add_option("dir", verify_dir, "image directory")->required();

    std::string attest_dir;
    std::string attest_challenge = "c0";
    auto* attest_cmd = avb->add_subcommand("attest", "boot, then emit a signed boot attestation");
    attest_cmd->add_option("dir", attest_dir, "image directory")->required();
    attest_cmd->add_option("--challenge", attest_challenge, "verifier nonce");

    std::string make_dir;
    std::string make_version = "11";
    uint64_t make_index = 1;
    bool make_unlocked = false;
    std::string make_user_root;
    uint32_t make_block_size = 64;
    auto* make_cmd = avb->add_subcommand("make", "write a fresh signed image set");
    make_cmd->add_option("dir", make_dir, "output directory")->required();
    make_cmd->add_option("--version", make_version, "OS version string");
    make_cmd->add_option("--index", make_index, "rollback index");
    make_cmd->add_flag("--unlocked", make_unlocked, "leave the bootloader unlocked");
    make_cmd->add_option("--user-root", make_user_root, "register a user root key id");
    make_cmd->add_option("--block-size", make_block_size, "partition block size");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(run_file, run_format, run_seed);
        if (*check) return cmd_check(check_dir);
        if (*verify) return cmd_avb_verify(verify_dir);
        if (*attest_cmd) return cmd_avb_attest(attest_dir, attest_challenge);
        if (*make_cmd) {
            return cmd_avb_make(make_dir, make_version, make_index, make_unlocked,
                                make_user_root, make_block_size);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
