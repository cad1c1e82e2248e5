#include "eba/embed.hpp"
#include "eba/error.hpp"
#include "eba/random.hpp"

#include <cmath>
#include <numbers>

namespace eba::embed {


Embedding TestProvider::direction(std::string_view domain, std::string_view key) const {
    std::mt19937_64 gen(rng::keyed(seed_, domain, key));
    std::vector<double> v(dim_);
    for (std::size_t i = 0; i < dim_; i += 2) {
        const double r = std::sqrt(-2.0 * std::log(rng::open_unit(gen)));
        const double t = 2.0 * std::numbers::pi * rng::open_unit(gen);
        v[i] = r * std::cos(t);
        if (i + 1 < dim_) v[i + 1] = r * std::sin(t);
    }
    Embedding e = normalized(std::move(v));
    e.source_norm = 1.0;
    return e;
}

Embedding TestProvider::embed_image(std::string_view id, const std::filesystem::path&) {
    return direction("image", id);
}

Embedding TestProvider::embed_text(std::string_view text) { return direction("text", text); }

std::string TestProvider::name() const { return "test:" + std::to_string(seed_); }

Embedding FileProvider::embed_image(std::string_view id, const std::filesystem::path&) {
    const Embedding* e = store_.find(id);
    if (!e) throw Error(ErrorKind::ProviderUnavailable, "no embedding for id " + std::string(id));
    return *e;
}

Embedding FileProvider::embed_text(std::string_view text) {
    const std::string key = std::string(kTextIdPrefix) + std::string(text);
    const Embedding* e = store_.find(key);
    if (!e) throw Error(ErrorKind::ProviderUnavailable, "no embedding for prompt \"" + std::string(text) + "\"");
    return *e;
}

}  // namespace eba::embed
