#include "eba/error.hpp"
#include "eba/imgcore.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <unordered_set>

namespace eba::img {

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
}

std::string required_string(const nlohmann::json& obj, const char* key, std::size_t index) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_string() || it->get<std::string>().empty()) {
        throw Error(ErrorKind::ParseError,
                    "entry " + std::to_string(index) + ": missing or empty \"" + key + "\"");
    }
    return it->get<std::string>();
}

}  // namespace

DatasetManifest parse_manifest(const std::string& text, const std::filesystem::path& base_dir) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::ParseError, e.what());
    }
    if (!doc.is_object() || !doc.contains("entries") || !doc["entries"].is_array()) {
        throw Error(ErrorKind::ParseError, "manifest must be an object with an \"entries\" array");
    }

    DatasetManifest manifest;
    std::unordered_set<std::string> seen;
    std::size_t index = 0;
    for (const auto& e : doc["entries"]) {
        if (!e.is_object()) throw Error(ErrorKind::ParseError, "entry " + std::to_string(index) + " is not an object");
        ManifestEntry entry;
        entry.id = required_string(e, "id", index);
        entry.input_path = resolve(base_dir, required_string(e, "input", index));
        if (auto gt = e.find("gt"); gt != e.end() && !gt->is_null()) {
            if (!gt->is_string() || gt->get<std::string>().empty()) {
                throw Error(ErrorKind::ParseError, "entry " + entry.id + ": \"gt\" must be a non-empty string");
            }
            entry.gt_path = resolve(base_dir, gt->get<std::string>());
        }
        if (auto ds = e.find("dataset"); ds != e.end() && ds->is_string() && !ds->get<std::string>().empty()) {
            entry.dataset_label = ds->get<std::string>();
        } else {
            entry.dataset_label = "unlabeled";
        }
        if (!seen.insert(entry.id).second) throw Error(ErrorKind::DuplicateId, entry.id);
        manifest.entries.push_back(std::move(entry));
        ++index;
    }
    return manifest;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::FileNotFound, path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_manifest(ss.str(), path.parent_path());
}

}  // namespace eba::img
