#include "manifest.hpp"

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <json.hpp>
#include <openssl/evp.h>

#include <chrono>
#include <fstream>
#include <iterator>
#include <memory>
#include <stdexcept>

namespace tieline::cli {

namespace {

std::string sha1_hex(const std::string& data) {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha1(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
        throw std::runtime_error("SHA-1 digest failed");
    }
    std::string hex;
    for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
    return hex;
}

nlohmann::ordered_json entries_json(const std::vector<ManifestEntry>& entries) {
    auto arr = nlohmann::ordered_json::array();
    for (const ManifestEntry& e : entries) {
        arr.push_back({{"role", e.role}, {"path", e.path.generic_string()}, {"sha1", e.hash}});
    }
    return arr;
}

} // namespace

std::string git_blob_hash(const std::string& content) {
    std::string blob = fmt::format("blob {}", content.size());
    blob.push_back('\0');
    blob += content;
    return sha1_hex(blob);
}

std::string git_blob_hash_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot read " + path.string());
    const std::string content((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    return git_blob_hash(content);
}

std::string utc_now() {
    const auto now = std::chrono::time_point_cast<std::chrono::seconds>(std::chrono::system_clock::now());
    return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::chrono::system_clock::to_time_t(now)));
}

std::string combined_hash(const std::vector<ManifestEntry>& entries) {
    std::string text;
    for (const ManifestEntry& e : entries) text += fmt::format("{} {}\n", e.role, e.hash);
    return git_blob_hash(text);
}

void write_manifest(const std::filesystem::path& file, const RunManifest& m) {
    nlohmann::ordered_json j;
    j["command"] = m.command;
    j["scenario"] = m.scenario.generic_string();
    j["seed"] = m.seed;
    j["output_dir"] = m.output_dir.generic_string();
    j["input_hash"] = m.input_hash;
    j["inputs"] = entries_json(m.inputs);
    j["outputs"] = entries_json(m.outputs);
    j["started_utc"] = m.started_utc;
    j["finished_utc"] = m.finished_utc;
    std::ofstream os(file, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + file.string());
    os << j.dump(2) << '\n';
    if (!os) throw std::runtime_error("cannot write " + file.string());
}

std::string manifest_input_hash(const std::filesystem::path& file, const std::string& role) {
    std::ifstream is(file, std::ios::binary);
    if (!is) throw std::runtime_error("cannot read " + file.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(is);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(file.string() + ": " + e.what());
    }
    for (const auto& e : j.value("inputs", nlohmann::json::array())) {
        if (e.value("role", "") == role) return e.value("sha1", "");
    }
    throw std::runtime_error(fmt::format("{}: no '{}' input recorded", file.string(), role));
}

} // namespace tieline::cli
