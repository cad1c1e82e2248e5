#pragma once

#include "eba/embed.hpp"
#include "eba/imgcore.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace eba::bias {

/// Row-major point set; every row has the same dimension.
using Points = std::vector<std::vector<double>>;

Points points_of(std::span<const embed::Embedding> embeddings);

struct KMeansOptions {
    int k = 8;
    std::uint64_t seed = 42;
    int max_iter = 100;
    double tol = 1e-6;
    unsigned workers = 1;
};

struct ClusterModel {
    int k = 0;
    Points centroids;
    std::uint64_t seed = 0;
    int iterations_run = 0;
    /// Within-cluster SSE after each Lloyd assignment step.
    std::vector<double> sse_history;
};

struct Assignment {
    std::vector<int> labels;
};

struct KMeansResult {
    ClusterModel model;
    Assignment assignment;
};

/// k-means++ seeding followed by Lloyd iterations until the largest centroid
/// shift drops below tol or max_iter is reached. Empty clusters are moved to
/// the point farthest from its centroid. Throws TooFewSamples, DimMismatch.
KMeansResult kmeans(const Points& points, const KMeansOptions& opts);

/// Within-cluster sum of squared distances.
double within_sse(const Points& points, const Points& centroids, const Assignment& assignment);

/// Per-cluster sizes for labels in [0,k).
std::vector<std::size_t> cluster_counts(const Assignment& assignment, int k);

/// Shannon entropy (nats) of the cluster-occupancy histogram. Throws
/// EmptyAssignment.
double dataset_entropy(const Assignment& assignment, int k);

/// H / ln(k_occupied); 0 when a single cluster is occupied.
double normalized_entropy(const Assignment& assignment, int k);

struct Weights {
    std::vector<double> w;
};

/// w_i = N / (k_occ * n_c(i)). Mean weight is 1. Throws EmptyAssignment.
Weights reweight(const Assignment& assignment);

/// sum(w*v) / sum(w). Throws LengthMismatch, EmptyInput.
double weighted_aggregate(std::span<const double> values, const Weights& weights);

struct TsneOptions {
    double perplexity = 30.0;
    int iterations = 1000;
    std::uint64_t seed = 42;
    double learning_rate = 200.0;
    double exaggeration = 12.0;
    int exaggeration_iters = 250;
    double initial_momentum = 0.5;
    double final_momentum = 0.8;
    int momentum_switch_iter = 250;
    double entropy_tol = 1e-5;
    int bandwidth_steps = 50;
    unsigned workers = 1;
};

struct TsneLayout {
    std::vector<std::array<double, 2>> coords;
    double final_kl = 0.0;
    /// KL divergence (against the un-exaggerated affinities) when the
    /// exaggeration phase ends.
    double kl_after_exaggeration = 0.0;
    std::uint64_t seed = 0;
    double perplexity = 0.0;
    int iterations = 0;
};

/// Symmetrized joint affinities P (N x N, row-major) with per-point Gaussian
/// bandwidths matched to the perplexity.
std::vector<double> joint_affinities(const Points& points, const TsneOptions& opts);

/// Exact t-SNE into two dimensions, initialised from the top two principal
/// components scaled to standard deviation 1e-4. Throws TooFewSamples
/// (N < 4) and PerplexityTooLarge (perplexity >= (N-1)/3).
TsneLayout tsne(const Points& points, const TsneOptions& opts);

struct PromptTableRow {
    std::string dataset;
    std::size_t count = 0;
    std::array<double, embed::kConditionCount> means{};
};

/// Per-dataset mean similarity profile in first-appearance order. Throws
/// MissingProfile when a manifest id has no profile.
std::vector<PromptTableRow> prompt_bias_table(const std::map<std::string, embed::SimilarityProfile>& profiles,
                                              const img::DatasetManifest& manifest);

/// Markdown table with a Dataset column and the five condition columns at
/// three decimals.
std::string render_prompt_table(const std::vector<PromptTableRow>& rows);

struct BiasReport {
    int k = 0;
    std::uint64_t seed = 0;
    double entropy_nats = 0.0;
    double normalized_entropy = 0.0;
    std::vector<std::size_t> cluster_counts;
    std::vector<PromptTableRow> prompt_means;
    std::vector<std::string> ids;
    std::vector<int> labels;
    Weights weights;
};

}  // namespace eba::bias
