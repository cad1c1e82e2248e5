#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <semaphore>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace eba::embed {

inline constexpr std::size_t kDefaultDim = 512;

/// Unit-norm embedding. `source_norm` is the L2 norm the raw vector had
/// before normalization (1 for vectors that arrived normalized).
struct Embedding {
    std::vector<double> values;
    double source_norm = 1.0;

    std::size_t dim() const noexcept { return values.size(); }
};

/// Normalizes `raw` to unit length. Throws ZeroNormEmbedding for a zero
/// vector and ParseError for non-finite components.
Embedding normalized(std::vector<double> raw);

/// Dot product of two unit vectors, clamped to [-1,1]. Throws DimMismatch.
double cosine(const Embedding& a, const Embedding& b);

inline constexpr std::size_t kConditionCount = 5;

/// Condition names in fixed order; the clear-water condition is index 0.
inline constexpr std::array<std::string_view, kConditionCount> kConditions{
    "clear water", "murky water", "high turbidity", "deep-sea environment", "artificial lighting"};

/// Column headers for similarity tables, aligned with kConditions.
inline constexpr std::array<std::string_view, kConditionCount> kConditionTitles{
    "Clear Water", "Murky Water", "High Turbidity", "Deep Sea", "Artificial Lighting"};

inline constexpr std::string_view kDefaultPromptPrefix = "a photo of ";

struct PromptSet {
    std::array<std::string, kConditionCount> prompts;
    std::array<Embedding, kConditionCount> prompt_embeddings;
};

struct SimilarityProfile {
    std::array<double, kConditionCount> scores{};
};

/// Cosine similarity of an image embedding against each prompt.
SimilarityProfile similarity_profile(const Embedding& image, const PromptSet& prompts);

inline constexpr double kLogitScale = 100.0;

/// Clear-water probability of softmax(scale * scores).
double clarity_score(const SimilarityProfile& profile, double scale = kLogitScale);

/// Source of embeddings. Implementations must be deterministic per instance
/// and safe to call from several threads.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;

    virtual Embedding embed_image(std::string_view id, const std::filesystem::path& path) = 0;
    virtual Embedding embed_text(std::string_view text) = 0;
    virtual std::string name() const = 0;
};

/// Embeds the five condition prompts through `provider`.
PromptSet make_prompt_set(EmbeddingProvider& provider, std::string_view prefix = kDefaultPromptPrefix);

/// The prompt strings without embedding them.
std::array<std::string, kConditionCount> prompt_strings(std::string_view prefix = kDefaultPromptPrefix);

// ---------------------------------------------------------------------------
// EBAE files

/// Ordered id -> embedding table. Ids are unique; iteration follows insertion.
class EmbeddingStore {
public:
    void add(std::string id, Embedding e);  // throws DuplicateId, DimMismatch
    const Embedding* find(std::string_view id) const;

    std::size_t size() const noexcept { return ids_.size(); }
    bool empty() const noexcept { return ids_.empty(); }
    std::size_t dim() const noexcept { return items_.empty() ? 0 : items_.front().dim(); }
    const std::vector<std::string>& ids() const noexcept { return ids_; }
    const std::vector<Embedding>& items() const noexcept { return items_; }

private:
    std::vector<std::string> ids_;
    std::vector<Embedding> items_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// Records holding prompt (text) embeddings use this id prefix.
inline constexpr std::string_view kTextIdPrefix = "text:";

inline constexpr std::uint32_t kEbaeVersion = 1;

/// Serialized EBAE bytes. Components are stored as float32.
std::vector<std::uint8_t> encode_ebae(const EmbeddingStore& store);

/// Parses EBAE bytes. Vectors whose norm differs from 1 by more than float32
/// rounding are renormalized. Throws BadMagic, TruncatedRecord,
/// ZeroNormEmbedding, DuplicateId.
EmbeddingStore decode_ebae(const std::vector<std::uint8_t>& bytes);

/// Writes atomically (temp file + rename). Throws IoError.
void write_embeddings_file(const EmbeddingStore& store, const std::filesystem::path& path);
EmbeddingStore load_embeddings_file(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Providers

/// Hashes (seed, id or text) into a reproducible direction on the unit
/// sphere of dimension `dim`. Images are keyed by id only.
class TestProvider final : public EmbeddingProvider {
public:
    explicit TestProvider(std::uint64_t seed, std::size_t dim = kDefaultDim) : seed_(seed), dim_(dim) {}

    Embedding embed_image(std::string_view id, const std::filesystem::path& path) override;
    Embedding embed_text(std::string_view text) override;
    std::string name() const override;

private:
    Embedding direction(std::string_view domain, std::string_view key) const;

    std::uint64_t seed_;
    std::size_t dim_;
};

/// Serves embeddings from a loaded EBAE store; prompts are looked up under
/// "text:<prompt>". Missing ids raise ProviderUnavailable.
class FileProvider final : public EmbeddingProvider {
public:
    explicit FileProvider(EmbeddingStore store) : store_(std::move(store)) {}

    Embedding embed_image(std::string_view id, const std::filesystem::path& path) override;
    Embedding embed_text(std::string_view text) override;
    std::string name() const override { return "file"; }

    const EmbeddingStore& store() const noexcept { return store_; }

private:
    EmbeddingStore store_;
};

struct RemoteOptions {
    std::string base_url = "http://127.0.0.1:8477";
    unsigned max_in_flight = 4;
    std::chrono::milliseconds connect_timeout{5000};
    std::chrono::milliseconds read_timeout{60000};
};

/// HTTP client for the embedding sidecar (POST /embed_image, POST
/// /embed_text, GET /health). Any transport or protocol failure raises
/// ProviderUnavailable.
class RemoteProvider final : public EmbeddingProvider {
public:
    explicit RemoteProvider(RemoteOptions opts);

    Embedding embed_image(std::string_view id, const std::filesystem::path& path) override;
    Embedding embed_text(std::string_view text) override;
    std::string name() const override { return "remote:" + opts_.base_url; }

    /// GET /health; returns the reported dimension.
    std::size_t health();

    /// Last model identifier reported by the service.
    std::string model() const;

private:
    Embedding post(const std::string& route, std::string body, const std::string& content_type);

    RemoteOptions opts_;
    std::counting_semaphore<> in_flight_;
    mutable std::mutex model_mu_;
    std::string model_;
};

/// Parses an embedding response body {"dim":D,"embedding":[...],"model":"..."}.
Embedding parse_embed_response(const std::string& body, std::string* model = nullptr);

}  // namespace eba::embed
