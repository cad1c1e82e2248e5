#include "eba/embed.hpp"
#include "eba/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace eba::embed {

Embedding normalized(std::vector<double> raw) {
    double ss = 0.0;
    for (double v : raw) {
        if (!std::isfinite(v)) throw Error(ErrorKind::ParseError, "non-finite embedding component");
        ss += v * v;
    }
    const double norm = std::sqrt(ss);
    if (!(norm > 0.0)) throw Error(ErrorKind::ZeroNormEmbedding, "cannot normalize a zero vector");
    for (double& v : raw) v /= norm;
    return Embedding{std::move(raw), norm};
}

double cosine(const Embedding& a, const Embedding& b) {
    if (a.dim() != b.dim()) {
        throw Error(ErrorKind::DimMismatch, std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
    }
    // Fixed left-to-right accumulation; products commute, so cosine(a,b) and
    // cosine(b,a) are bit-identical.
    double dot = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) dot += a.values[i] * b.values[i];
    return std::clamp(dot, -1.0, 1.0);
}

SimilarityProfile similarity_profile(const Embedding& image, const PromptSet& prompts) {
    SimilarityProfile p;
    for (std::size_t i = 0; i < kConditionCount; ++i) p.scores[i] = cosine(image, prompts.prompt_embeddings[i]);
    return p;
}

double clarity_score(const SimilarityProfile& profile, double scale) {
    const double top = *std::max_element(profile.scores.begin(), profile.scores.end());
    double denom = 0.0;
    std::array<double, kConditionCount> e{};
    for (std::size_t i = 0; i < kConditionCount; ++i) {
        e[i] = std::exp(scale * (profile.scores[i] - top));
        denom += e[i];
    }
    return e[0] / denom;
}

std::array<std::string, kConditionCount> prompt_strings(std::string_view prefix) {
    std::array<std::string, kConditionCount> out;
    for (std::size_t i = 0; i < kConditionCount; ++i) out[i] = std::string(prefix) + std::string(kConditions[i]);
    return out;
}

PromptSet make_prompt_set(EmbeddingProvider& provider, std::string_view prefix) {
    PromptSet set;
    set.prompts = prompt_strings(prefix);
    for (std::size_t i = 0; i < kConditionCount; ++i) set.prompt_embeddings[i] = provider.embed_text(set.prompts[i]);
    const std::size_t d = set.prompt_embeddings[0].dim();
    for (const auto& e : set.prompt_embeddings) {
        if (e.dim() != d) throw Error(ErrorKind::DimMismatch, "prompt embeddings differ in dimension");
    }
    return set;
}

void EmbeddingStore::add(std::string id, Embedding e) {
    if (!items_.empty() && e.dim() != items_.front().dim()) {
        throw Error(ErrorKind::DimMismatch, id + ": dimension " + std::to_string(e.dim()) + ", store has " +
                                                std::to_string(items_.front().dim()));
    }
    if (index_.contains(id)) throw Error(ErrorKind::DuplicateId, id);
    index_.emplace(id, ids_.size());
    ids_.push_back(std::move(id));
    items_.push_back(std::move(e));
}

const Embedding* EmbeddingStore::find(std::string_view id) const {
    auto it = index_.find(std::string(id));
    return it == index_.end() ? nullptr : &items_[it->second];
}

}  // namespace eba::embed
