#include "eba/biasaudit.hpp"
#include "eba/error.hpp"
#include "eba/parallel.hpp"
#include "eba/random.hpp"

#include <Eigen/Dense>

#include <cfloat>
#include <cmath>
#include <limits>

namespace eba::bias {

namespace {

constexpr double kFloorP = 1e-12;

std::vector<double> squared_distances(const Points& points, unsigned workers) {
    const std::size_t n = points.size();
    std::vector<double> d(n * n, 0.0);
    parallel_for(n, workers, [&](std::size_t i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            double s = 0.0;
            for (std::size_t k = 0; k < points[i].size(); ++k) {
                const double t = points[i][k] - points[j][k];
                s += t * t;
            }
            d[i * n + j] = s;
        }
    });
    return d;
}

// Conditional P_{j|i} for one row with the bandwidth matched to log(perplexity).
void conditional_row(const double* dist, std::size_t n, std::size_t i, const TsneOptions& opts, double* out) {
    double d_min = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j)
        if (j != i) d_min = std::min(d_min, dist[j]);

    const double target = std::log(opts.perplexity);
    double beta = 1.0;
    double lo = -DBL_MAX;
    double hi = DBL_MAX;
    double sum_p = 0.0;
    for (int step = 0; step < opts.bandwidth_steps; ++step) {
        sum_p = 0.0;
        double weighted = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) {
                out[j] = 0.0;
                continue;
            }
            const double shifted = dist[j] - d_min;
            out[j] = std::exp(-beta * shifted);
            sum_p += out[j];
            weighted += shifted * out[j];
        }
        const double entropy = std::log(sum_p) + beta * weighted / sum_p;
        const double diff = entropy - target;
        if (std::abs(diff) < opts.entropy_tol) break;
        if (diff > 0.0) {
            lo = beta;
            beta = hi == DBL_MAX ? beta * 2.0 : (beta + hi) / 2.0;
        } else {
            hi = beta;
            beta = lo == -DBL_MAX ? beta / 2.0 : (beta + lo) / 2.0;
        }
    }
    for (std::size_t j = 0; j < n; ++j) out[j] /= sum_p;
}

std::vector<std::array<double, 2>> pca_init(const Points& points, std::uint64_t seed) {
    const auto n = static_cast<Eigen::Index>(points.size());
    const auto d = static_cast<Eigen::Index>(points.front().size());
    Eigen::MatrixXd x(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < d; ++j) x(i, j) = points[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    x.rowwise() -= x.colwise().mean();

    Eigen::MatrixXd scores(n, 2);
    scores.setZero();
    if (n <= d) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(x * x.transpose());
        const auto& vals = es.eigenvalues();
        for (int c = 0; c < 2 && c < n; ++c) {
            const Eigen::Index col = n - 1 - c;
            scores.col(c) = es.eigenvectors().col(col) * std::sqrt(std::max(vals(col), 0.0));
        }
    } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(x.transpose() * x);
        for (int c = 0; c < 2 && c < d; ++c) scores.col(c) = x * es.eigenvectors().col(d - 1 - c);
    }

    // Orientation fixed by the sign of the third moment, which does not
    // depend on the order of the points.
    for (int c = 0; c < 2; ++c) {
        if (scores.col(c).array().cube().sum() < 0.0) scores.col(c) *= -1.0;
    }

    std::vector<std::array<double, 2>> y(points.size());
    const double sd = std::sqrt(scores.col(0).squaredNorm() / static_cast<double>(n));
    if (!(sd > 0.0)) {
        std::mt19937_64 gen(rng::substream(seed, 0));
        for (auto& p : y) {
            for (double& v : p) {
                v = 1e-4 * rng::normal(gen);
            }
        }
        return y;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        y[static_cast<std::size_t>(i)] = {scores(i, 0) / sd * 1e-4, scores(i, 1) / sd * 1e-4};
    }
    return y;
}

double kl_divergence(const std::vector<double>& p, const std::vector<std::array<double, 2>>& y, unsigned workers) {
    const std::size_t n = y.size();
    std::vector<double> num(n * n, 0.0);
    std::vector<double> row_sum(n, 0.0);
    parallel_for(n, workers, [&](std::size_t i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const double dx = y[i][0] - y[j][0];
            const double dy = y[i][1] - y[j][1];
            num[i * n + j] = 1.0 / (1.0 + dx * dx + dy * dy);
            s += num[i * n + j];
        }
        row_sum[i] = s;
    });
    double sum_q = 0.0;
    for (double s : row_sum) sum_q += s;
    double kl = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const double pij = p[i * n + j];
            const double qij = std::max(num[i * n + j] / sum_q, kFloorP);
            kl += pij * std::log(pij / qij);
        }
    }
    return std::max(kl, 0.0);
}

}  // namespace

std::vector<double> joint_affinities(const Points& points, const TsneOptions& opts) {
    const std::size_t n = points.size();
    const auto dist = squared_distances(points, opts.workers);
    std::vector<double> cond(n * n, 0.0);
    parallel_for(n, opts.workers, [&](std::size_t i) { conditional_row(&dist[i * n], n, i, opts, &cond[i * n]); });

    std::vector<double> p(n * n, 0.0);
    const double scale = 1.0 / (2.0 * static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            p[i * n + j] = std::max((cond[i * n + j] + cond[j * n + i]) * scale, kFloorP);
        }
    }
    return p;
}

TsneLayout tsne(const Points& points, const TsneOptions& opts) {
    const std::size_t n = points.size();
    if (n < 4) throw Error(ErrorKind::TooFewSamples, "t-SNE needs at least 4 points");
    if (!(opts.perplexity > 0.0) || !(opts.perplexity < (static_cast<double>(n) - 1.0) / 3.0)) {
        throw Error(ErrorKind::PerplexityTooLarge,
                    "perplexity " + std::to_string(opts.perplexity) + " needs to be below (N-1)/3 = " +
                        std::to_string((static_cast<double>(n) - 1.0) / 3.0));
    }
    const std::size_t dim = points.front().size();
    for (const auto& p : points)
        if (p.size() != dim) throw Error(ErrorKind::DimMismatch, "points differ in dimension");

    const std::vector<double> p = joint_affinities(points, opts);
    std::vector<std::array<double, 2>> y = pca_init(points, opts.seed);
    std::vector<std::array<double, 2>> velocity(n, {0.0, 0.0});
    std::vector<std::array<double, 2>> gains(n, {1.0, 1.0});
    std::vector<std::array<double, 2>> grad(n, {0.0, 0.0});
    std::vector<double> num(n * n, 0.0);
    std::vector<double> row_sum(n, 0.0);

    TsneLayout layout;
    layout.seed = opts.seed;
    layout.perplexity = opts.perplexity;
    layout.iterations = opts.iterations;

    for (int iter = 0; iter < opts.iterations; ++iter) {
        const double exaggeration = iter < opts.exaggeration_iters ? opts.exaggeration : 1.0;
        const double momentum = iter < opts.momentum_switch_iter ? opts.initial_momentum : opts.final_momentum;

        parallel_for(n, opts.workers, [&](std::size_t i) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (i == j) {
                    num[i * n + j] = 0.0;
                    continue;
                }
                const double dx = y[i][0] - y[j][0];
                const double dy = y[i][1] - y[j][1];
                num[i * n + j] = 1.0 / (1.0 + dx * dx + dy * dy);
                s += num[i * n + j];
            }
            row_sum[i] = s;
        });
        double sum_q = 0.0;
        for (double s : row_sum) sum_q += s;

        parallel_for(n, opts.workers, [&](std::size_t i) {
            double gx = 0.0;
            double gy = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (i == j) continue;
                const double w = num[i * n + j];
                const double mult = (exaggeration * p[i * n + j] - w / sum_q) * w;
                gx += mult * (y[i][0] - y[j][0]);
                gy += mult * (y[i][1] - y[j][1]);
            }
            grad[i] = {4.0 * gx, 4.0 * gy};
        });

        for (std::size_t i = 0; i < n; ++i) {
            for (int c = 0; c < 2; ++c) {
                const double g = grad[i][static_cast<std::size_t>(c)];
                double& gain = gains[i][static_cast<std::size_t>(c)];
                double& v = velocity[i][static_cast<std::size_t>(c)];
                gain = (g > 0.0) != (v > 0.0) ? gain + 0.2 : gain * 0.8;
                gain = std::max(gain, 0.01);
                v = momentum * v - opts.learning_rate * gain * g;
                y[i][static_cast<std::size_t>(c)] += v;
            }
        }
        double mx = 0.0;
        double my = 0.0;
        for (const auto& pt : y) {
            mx += pt[0];
            my += pt[1];
        }
        mx /= static_cast<double>(n);
        my /= static_cast<double>(n);
        for (auto& pt : y) {
            pt[0] -= mx;
            pt[1] -= my;
        }

        if (iter + 1 == opts.exaggeration_iters) layout.kl_after_exaggeration = kl_divergence(p, y, opts.workers);
    }

    layout.final_kl = kl_divergence(p, y, opts.workers);
    if (opts.iterations < opts.exaggeration_iters) layout.kl_after_exaggeration = layout.final_kl;
    layout.coords = std::move(y);
    return layout;
}

}  // namespace eba::bias
