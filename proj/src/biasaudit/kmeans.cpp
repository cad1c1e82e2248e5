#include "eba/biasaudit.hpp"
#include "eba/error.hpp"
#include "eba/random.hpp"
#include "eba/parallel.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace eba::bias {

namespace {

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

std::size_t check_dims(const Points& points) {
    const std::size_t d = points.empty() ? 0 : points.front().size();
    for (const auto& p : points) {
        if (p.size() != d) throw Error(ErrorKind::DimMismatch, "points differ in dimension");
    }
    return d;
}

Points seed_plus_plus(const Points& points, int k, std::mt19937_64& gen) {
    const std::size_t n = points.size();
    Points centroids;
    centroids.push_back(points[static_cast<std::size_t>(rng::unit(gen) * static_cast<double>(n))]);
    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) d2[i] = sq_dist(points[i], centroids.back());
    while (static_cast<int>(centroids.size()) < k) {
        double total = 0.0;
        for (double v : d2) total += v;
        std::size_t pick = n - 1;
        if (total > 0.0) {
            const double target = rng::unit(gen) * total;
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                acc += d2[i];
                if (acc > target) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = static_cast<std::size_t>(rng::unit(gen) * static_cast<double>(n));
        }
        centroids.push_back(points[pick]);
        for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], sq_dist(points[i], centroids.back()));
    }
    return centroids;
}

// Nearest centroid per point (ties go to the lower index); returns SSE.
double assign(const Points& points, const Points& centroids, std::vector<int>& labels, std::vector<double>& dist,
              unsigned workers) {
    parallel_for(points.size(), workers, [&](std::size_t i) {
        double best = std::numeric_limits<double>::infinity();
        int arg = 0;
        for (std::size_t c = 0; c < centroids.size(); ++c) {
            const double d = sq_dist(points[i], centroids[c]);
            if (d < best) {
                best = d;
                arg = static_cast<int>(c);
            }
        }
        labels[i] = arg;
        dist[i] = best;
    });
    double sse = 0.0;
    for (double d : dist) sse += d;
    return sse;
}

}  // namespace

Points points_of(std::span<const embed::Embedding> embeddings) {
    Points p;
    p.reserve(embeddings.size());
    for (const auto& e : embeddings) p.push_back(e.values);
    return p;
}

KMeansResult kmeans(const Points& points, const KMeansOptions& opts) {
    if (opts.k < 1) throw Error(ErrorKind::InvalidParams, "k must be >= 1");
    if (points.size() < static_cast<std::size_t>(opts.k)) {
        throw Error(ErrorKind::TooFewSamples,
                    std::to_string(points.size()) + " samples for k=" + std::to_string(opts.k));
    }
    const std::size_t dim = check_dims(points);
    const std::size_t n = points.size();
    const auto k = static_cast<std::size_t>(opts.k);

    std::mt19937_64 gen(opts.seed);
    KMeansResult r;
    r.model.k = opts.k;
    r.model.seed = opts.seed;
    Points centroids = seed_plus_plus(points, opts.k, gen);

    std::vector<int> labels(n, 0);
    std::vector<double> dist(n, 0.0);
    for (int iter = 1; iter <= opts.max_iter; ++iter) {
        r.model.sse_history.push_back(assign(points, centroids, labels, dist, opts.workers));

        Points next(k, std::vector<double>(dim, 0.0));
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            auto& c = next[static_cast<std::size_t>(labels[i])];
            for (std::size_t j = 0; j < dim; ++j) c[j] += points[i][j];
            ++counts[static_cast<std::size_t>(labels[i])];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] > 0) {
                for (double& v : next[c]) v /= static_cast<double>(counts[c]);
                continue;
            }
            std::size_t far = 0;
            for (std::size_t i = 1; i < n; ++i) {
                if (dist[i] > dist[far]) far = i;
            }
            next[c] = points[far];
            dist[far] = -1.0;  // not reused for another empty cluster
        }

        double shift = 0.0;
        for (std::size_t c = 0; c < k; ++c) shift = std::max(shift, std::sqrt(sq_dist(next[c], centroids[c])));
        centroids = std::move(next);
        r.model.iterations_run = iter;
        if (shift < opts.tol) break;
    }
    r.model.sse_history.push_back(assign(points, centroids, labels, dist, opts.workers));
    r.model.centroids = std::move(centroids);
    r.assignment.labels = std::move(labels);
    return r;
}

double within_sse(const Points& points, const Points& centroids, const Assignment& assignment) {
    double s = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        s += sq_dist(points[i], centroids[static_cast<std::size_t>(assignment.labels[i])]);
    }
    return s;
}

}  // namespace eba::bias
