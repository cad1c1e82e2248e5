#include "eba/embed.hpp"
#include "eba/error.hpp"

#include <httplib.h>
#include <json.hpp>

#include <fstream>
#include <iterator>

namespace eba::embed {

namespace {

class SlotGuard {
public:
    explicit SlotGuard(std::counting_semaphore<>& sem) : sem_(sem) { sem_.acquire(); }
    ~SlotGuard() { sem_.release(); }
    SlotGuard(const SlotGuard&) = delete;
    SlotGuard& operator=(const SlotGuard&) = delete;

private:
    std::counting_semaphore<>& sem_;
};

std::string content_type_for(const std::filesystem::path& p) {
    auto ext = p.extension().string();
    for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (ext == ".png") return "image/png";
    if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
    return "application/octet-stream";
}

}  // namespace

Embedding parse_embed_response(const std::string& body, std::string* model) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::ProviderUnavailable, std::string("malformed response: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("embedding") || !doc["embedding"].is_array()) {
        throw Error(ErrorKind::ProviderUnavailable, "response lacks an \"embedding\" array");
    }
    std::vector<double> raw;
    raw.reserve(doc["embedding"].size());
    for (const auto& v : doc["embedding"]) {
        if (!v.is_number()) throw Error(ErrorKind::ProviderUnavailable, "non-numeric embedding component");
        raw.push_back(v.get<double>());
    }
    if (doc.contains("dim") && doc["dim"].is_number_integer() &&
        doc["dim"].get<std::size_t>() != raw.size()) {
        throw Error(ErrorKind::DimMismatch, "response dim does not match embedding length");
    }
    if (model && doc.contains("model") && doc["model"].is_string()) *model = doc["model"].get<std::string>();
    return normalized(std::move(raw));
}

RemoteProvider::RemoteProvider(RemoteOptions opts)
    : opts_(std::move(opts)), in_flight_(static_cast<std::ptrdiff_t>(std::max(1U, opts_.max_in_flight))) {}

Embedding RemoteProvider::post(const std::string& route, std::string body, const std::string& content_type) {
    SlotGuard slot(in_flight_);
    httplib::Client cli(opts_.base_url);
    cli.set_connection_timeout(opts_.connect_timeout);
    cli.set_read_timeout(opts_.read_timeout);
    auto res = cli.Post(route, body, content_type);
    if (!res) {
        throw Error(ErrorKind::ProviderUnavailable,
                    opts_.base_url + route + ": " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
        throw Error(ErrorKind::ProviderUnavailable,
                    opts_.base_url + route + ": HTTP " + std::to_string(res->status));
    }
    std::string model;
    Embedding e = parse_embed_response(res->body, &model);
    if (!model.empty()) {
        std::lock_guard<std::mutex> lock(model_mu_);
        model_ = model;
    }
    return e;
}

Embedding RemoteProvider::embed_image(std::string_view, const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::FileNotFound, path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return post("/embed_image", std::move(bytes), content_type_for(path));
}

Embedding RemoteProvider::embed_text(std::string_view text) {
    nlohmann::json req{{"text", std::string(text)}};
    return post("/embed_text", req.dump(), "application/json");
}

std::size_t RemoteProvider::health() {
    SlotGuard slot(in_flight_);
    httplib::Client cli(opts_.base_url);
    cli.set_connection_timeout(opts_.connect_timeout);
    cli.set_read_timeout(opts_.read_timeout);
    auto res = cli.Get("/health");
    if (!res) throw Error(ErrorKind::ProviderUnavailable, opts_.base_url + "/health: " + httplib::to_string(res.error()));
    if (res->status != 200) {
        throw Error(ErrorKind::ProviderUnavailable, opts_.base_url + "/health: HTTP " + std::to_string(res->status));
    }
    try {
        auto doc = nlohmann::json::parse(res->body);
        if (doc.contains("model") && doc["model"].is_string()) {
            std::lock_guard<std::mutex> lock(model_mu_);
            model_ = doc["model"].get<std::string>();
        }
        return doc.at("dim").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ProviderUnavailable, std::string("malformed /health response: ") + e.what());
    }
}

std::string RemoteProvider::model() const {
    std::lock_guard<std::mutex> lock(model_mu_);
    return model_;
}

}  // namespace eba::embed
