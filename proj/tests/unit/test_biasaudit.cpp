#include "eba/biasaudit.hpp"
#include "eba/error.hpp"
#include "eba/random.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <numeric>

using namespace eba;
using namespace eba::bias;

namespace {

Points blobs(int per, const std::vector<std::vector<double>>& centres, double sigma, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    Points pts;
    for (const auto& c : centres)
        for (int i = 0; i < per; ++i) {
            std::vector<double> p(c.size());
            for (std::size_t d = 0; d < c.size(); ++d) p[d] = c[d] + sigma * rng::normal(gen);
            pts.push_back(p);
        }
    return pts;
}

ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    return ErrorKind::InconsistentReport;
}

}  // namespace

TEST_CASE("k-means finds the optimal partition of small separated sets") {
    const auto pts = blobs(3, {{0, 0}, {5, 5}, {-5, 6}}, 0.3, 1);
    KMeansOptions o;
    o.k = 3;
    const auto r = kmeans(pts, o);

    // Exhaustive search over every labelling of the 9 points.
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> lab(pts.size(), 0);
    const int total = static_cast<int>(std::pow(3, pts.size()));
    for (int code = 0; code < total; ++code) {
        int c = code;
        for (auto& l : lab) {
            l = c % 3;
            c /= 3;
        }
        Points cent(3, std::vector<double>(2, 0.0));
        std::vector<int> cnt(3, 0);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            ++cnt[lab[i]];
            for (int d = 0; d < 2; ++d) cent[lab[i]][d] += pts[i][d];
        }
        if (std::count(cnt.begin(), cnt.end(), 0) > 0) continue;
        for (int k = 0; k < 3; ++k)
            for (int d = 0; d < 2; ++d) cent[k][d] /= cnt[k];
        best = std::min(best, within_sse(pts, cent, Assignment{lab}));
    }
    CHECK(within_sse(pts, r.model.centroids, r.assignment) == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("k-means is deterministic, worker independent and SSE never rises") {
    const auto pts = blobs(40, {{0, 0, 0}, {1, 1, 0}, {0, 2, 1}, {3, 0, 1}}, 0.6, 2);
    KMeansOptions o;
    o.k = 5;
    o.seed = 11;
    const auto a = kmeans(pts, o);
    o.workers = 6;
    const auto b = kmeans(pts, o);
    CHECK(a.assignment.labels == b.assignment.labels);
    CHECK(a.model.centroids == b.model.centroids);
    for (std::size_t i = 1; i < a.model.sse_history.size(); ++i)
        CHECK(a.model.sse_history[i] <= a.model.sse_history[i - 1] * (1.0 + 1e-12));
    CHECK(cluster_counts(a.assignment, 5).size() == 5);
}

TEST_CASE("k-means errors") {
    KMeansOptions o;
    o.k = 4;
    CHECK(kind_of([&] { kmeans(Points{{0.0}, {1.0}}, o); }) == ErrorKind::TooFewSamples);
    CHECK(kind_of([&] { kmeans(Points{{0.0}, {1.0}, {2.0}, {3.0, 1.0}}, o); }) == ErrorKind::DimMismatch);
}

TEST_CASE("entropy of uniform and single-cluster assignments") {
    Assignment uni;
    for (int i = 0; i < 800; ++i) uni.labels.push_back(i % 8);
    CHECK(std::abs(dataset_entropy(uni, 8) - std::log(8.0)) < 1e-12);
    CHECK(normalized_entropy(uni, 8) == doctest::Approx(1.0).epsilon(1e-12));

    Assignment one{std::vector<int>(50, 3)};
    CHECK(dataset_entropy(one, 8) == 0.0);
    CHECK(normalized_entropy(one, 8) == 0.0);
    CHECK(kind_of([] { dataset_entropy(Assignment{}, 4); }) == ErrorKind::EmptyAssignment);
    CHECK(kind_of([] { reweight(Assignment{}); }) == ErrorKind::EmptyAssignment);
}

TEST_CASE("weights average to one") {
    std::mt19937_64 gen(5);
    for (int t = 0; t < 100; ++t) {
        Assignment a;
        const int n = 1 + static_cast<int>(gen() % 200);
        const int k = 1 + static_cast<int>(gen() % 10);
        for (int i = 0; i < n; ++i) a.labels.push_back(static_cast<int>(gen() % k));
        const auto w = reweight(a);
        const double mean = std::accumulate(w.w.begin(), w.w.end(), 0.0) / n;
        CHECK(std::abs(mean - 1.0) < 1e-12);
        for (double x : w.w) CHECK(x > 0.0);
    }
}

TEST_CASE("weighted mean of cluster-constant values is the mean over clusters") {
    const std::vector<double> value_of{0.3, -1.7, 4.25};
    for (int n = 1; n <= 7; ++n) {
        int total = 1;
        for (int i = 0; i < n; ++i) total *= 3;
        for (int code = 0; code < total; ++code) {
            Assignment a;
            std::vector<double> vals;
            int c = code;
            for (int i = 0; i < n; ++i) {
                a.labels.push_back(c % 3);
                vals.push_back(value_of[c % 3]);
                c /= 3;
            }
            double sum = 0.0;
            int occ = 0;
            for (int k = 0; k < 3; ++k)
                if (std::find(a.labels.begin(), a.labels.end(), k) != a.labels.end()) {
                    sum += value_of[k];
                    ++occ;
                }
            CHECK(weighted_aggregate(vals, reweight(a)) == doctest::Approx(sum / occ).epsilon(1e-12));
        }
    }
    const std::vector<double> two{1.0, 2.0};
    CHECK(kind_of([&] { weighted_aggregate(two, Weights{{1.0}}); }) == ErrorKind::LengthMismatch);
    CHECK(kind_of([] { weighted_aggregate(std::span<const double>{}, Weights{}); }) == ErrorKind::EmptyInput);
}

TEST_CASE("joint affinities are symmetric and sum to one") {
    const auto pts = blobs(6, {{0, 0}, {4, 0}}, 0.5, 3);
    TsneOptions o;
    o.perplexity = 3.0;
    const auto p = joint_affinities(pts, o);
    const std::size_t n = pts.size();
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            CHECK(p[i * n + j] == p[j * n + i]);
            if (i != j) total += p[i * n + j];
        }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("small t-SNE is deterministic and separates blobs") {
    const auto pts = blobs(15, {{0, 0, 0, 0}, {6, 0, 0, 0}}, 0.4, 4);
    TsneOptions o;
    o.perplexity = 4.0;
    const auto a = tsne(pts, o);
    o.workers = 4;
    const auto b = tsne(pts, o);
    CHECK(a.coords == b.coords);
    CHECK(a.final_kl < a.kl_after_exaggeration);
    CHECK(a.final_kl >= 0.0);

    auto centroid = [&](int from) {
        std::array<double, 2> c{0, 0};
        for (int i = from; i < from + 15; ++i) {
            c[0] += a.coords[i][0] / 15;
            c[1] += a.coords[i][1] / 15;
        }
        return c;
    };
    const auto c0 = centroid(0), c1 = centroid(15);
    for (int i = 0; i < 30; ++i) {
        const auto& own = i < 15 ? c0 : c1;
        const auto& other = i < 15 ? c1 : c0;
        const double d_own = std::hypot(a.coords[i][0] - own[0], a.coords[i][1] - own[1]);
        const double d_other = std::hypot(a.coords[i][0] - other[0], a.coords[i][1] - other[1]);
        CHECK(d_own < d_other);
    }
}

TEST_CASE("t-SNE errors") {
    TsneOptions o;
    o.perplexity = 1.0;
    CHECK(kind_of([&] { tsne(Points{{0.0}, {1.0}, {2.0}}, o); }) == ErrorKind::TooFewSamples);
    o.perplexity = 3.0;
    CHECK(kind_of([&] { tsne(Points{{0.0}, {1.0}, {2.0}, {3.0}, {4.0}, {5.0}, {6.0}, {7.0}, {8.0}, {9.0}}, o); }) ==
          ErrorKind::PerplexityTooLarge);
    o.perplexity = 1.0;
    CHECK(kind_of([&] { tsne(Points{{0.0}, {1.0}, {2.0}, {3.0}, {4.0, 1.0}}, o); }) == ErrorKind::DimMismatch);
}

TEST_CASE("prompt bias table groups by dataset") {
    img::DatasetManifest m;
    m.entries = {{"a", "a.png", {}, "UIEB100"}, {"b", "b.png", {}, "LSUI400"}, {"c", "c.png", {}, "UIEB100"}};
    std::map<std::string, embed::SimilarityProfile> prof;
    prof["a"].scores = {0.2, 0.1, 0.0, 0.3, 0.4};
    prof["b"].scores = {0.25, 0.25, 0.25, 0.25, 0.25};
    prof["c"].scores = {0.4, 0.3, 0.2, 0.1, 0.0};
    const auto rows = prompt_bias_table(prof, m);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].dataset == "UIEB100");
    CHECK(rows[0].count == 2);
    CHECK(rows[0].means[0] == doctest::Approx(0.3));
    CHECK(rows[1].dataset == "LSUI400");

    const auto md = render_prompt_table(rows);
    CHECK(md.find("| Dataset | Clear Water | Murky Water | High Turbidity | Deep Sea | Artificial Lighting |") == 0);
    CHECK(md.find("| UIEB100 | 0.300 | 0.200 | 0.100 | 0.200 | 0.200 |") != std::string::npos);

    prof.erase("c");
    CHECK(kind_of([&] { prompt_bias_table(prof, m); }) == ErrorKind::MissingProfile);
}
