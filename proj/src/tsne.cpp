#include "topeax/tsne.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <random>
#include <string>

namespace topeax::tsne {

namespace {

constexpr double kLn2 = 0.6931471805599453;

// Box-Muller on top of mt19937 output. std::normal_distribution is
// implementation-defined, which would break the bit-identical-given-seed
// contract across standard libraries.
class GaussianSource {
public:
    explicit GaussianSource(std::uint32_t seed) : rng_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        double u2 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 2.0 * M_PI * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

private:
    double uniform01() {
        // (0, 1), never exactly 0 so the log above stays finite.
        return (static_cast<double>(rng_()) + 0.5) / 4294967296.0;
    }

    std::mt19937 rng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Entropy in bits of the Gaussian affinity row at precision beta, plus the
// unnormalized sum. H = (beta * sum(d*p) + ln(sum)) / ln 2.
struct RowEntropy {
    double entropy;
    double sum;
};

RowEntropy row_entropy(std::span<const double> dist_row, std::size_t self, double beta,
                       std::span<double> out_p) {
    // The self term (distance 0, weight exactly 1) is summed along with the
    // rest and removed afterwards. Skipping it in place would make the
    // accumulation order depend on the row index, and duplicate rows would
    // then calibrate to bit-different conditionals.
    double sum = 0.0;
    double weighted = 0.0;
    for (std::size_t j = 0; j < dist_row.size(); ++j) {
        double p = std::exp(-beta * dist_row[j]);
        out_p[j] = p;
        sum += p;
        weighted += dist_row[j] * p;
    }
    sum -= 1.0;
    out_p[self] = 0.0;
    if (sum <= 0.0) return {0.0, 0.0};
    double h = (beta * weighted / sum + std::log(sum)) / kLn2;
    return {h, sum};
}

}  // namespace

DenseMatrix pairwise_cosine_distance(const DenseMatrix& embeddings) {
    std::size_t n = embeddings.rows();
    std::vector<double> norms(n);
    for (std::size_t i = 0; i < n; ++i) {
        norms[i] = norm(embeddings.row(i));
        if (norms[i] == 0.0)
            throw NumericError("embedding row " + std::to_string(i) +
                               " has zero norm; cosine distance is undefined");
    }
    DenseMatrix d(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double cosine = dot(embeddings.row(i), embeddings.row(j)) / (norms[i] * norms[j]);
            double dist = 1.0 - cosine;
            dist = std::clamp(dist, 0.0, 2.0);
            d(i, j) = dist;
            d(j, i) = dist;
        }
    }
    return d;
}

DenseMatrix calibrate_conditional_distributions(const DenseMatrix& distances,
                                                double perplexity) {
    std::size_t n = distances.rows();
    if (distances.cols() != n) throw InputError("distance matrix must be square");
    if (perplexity <= 0.0) throw InputError("perplexity must be positive");
    if (n >= 2 && perplexity >= static_cast<double>(n))
        throw InputError("perplexity must be smaller than the number of documents");

    const double target = std::log2(perplexity);
    // Tighter than the contract tolerance so the realized perplexity
    // 2^H stays within 1e-4 of the target even for large targets.
    const double tol = 1e-7;
    const int max_bracket = 50;
    const int max_bisect = 200;

    DenseMatrix conditionals(n, n, 0.0);
    std::vector<double> p(n);
    for (std::size_t i = 0; i < n; ++i) {
        double beta = 1.0;
        double beta_lo = -1.0, beta_hi = -1.0;  // unset
        RowEntropy re = row_entropy(distances.row(i), i, beta, p);
        double diff = re.entropy - target;

        int iter = 0;
        while (std::abs(diff) > tol) {
            if (diff > 0.0) {
                // Entropy too high: sharpen the kernel.
                beta_lo = beta;
                beta = (beta_hi < 0.0) ? beta * 2.0 : 0.5 * (beta + beta_hi);
            } else {
                beta_hi = beta;
                beta = (beta_lo < 0.0) ? beta * 0.5 : 0.5 * (beta + beta_lo);
            }
            bool bracketed = beta_lo >= 0.0 && beta_hi >= 0.0;
            ++iter;
            if (!bracketed && iter >= max_bracket)
                throw NumericError("perplexity calibration failed to bracket for row " +
                                   std::to_string(i) +
                                   "; the requested perplexity may be unreachable for this row");
            if (iter >= max_bisect) break;
            re = row_entropy(distances.row(i), i, beta, p);
            diff = re.entropy - target;
        }
        if (re.sum <= 0.0)
            throw NumericError("perplexity calibration degenerated for row " + std::to_string(i));
        for (std::size_t j = 0; j < n; ++j) conditionals(i, j) = p[j] / re.sum;
    }
    return conditionals;
}

DenseMatrix symmetrize_conditionals(const DenseMatrix& conditionals) {
    std::size_t n = conditionals.rows();
    DenseMatrix joint(n, n, 0.0);
    double scale = 1.0 / (2.0 * static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            joint(i, j) = (conditionals(i, j) + conditionals(j, i)) * scale;
    return joint;
}

namespace {

// Student-t kernel weights w_ij = 1/(1+||yi-yj||^2) and their total.
double student_weights(const DenseMatrix& coords, DenseMatrix& w) {
    std::size_t n = coords.rows();
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        w(i, i) = 0.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            double dx = coords(i, 0) - coords(j, 0);
            double dy = coords(i, 1) - coords(j, 1);
            double wij = 1.0 / (1.0 + dx * dx + dy * dy);
            w(i, j) = wij;
            w(j, i) = wij;
            z += 2.0 * wij;
        }
    }
    return z;
}

}  // namespace

double kl_divergence(const DenseMatrix& joint_p, const DenseMatrix& coords) {
    std::size_t n = coords.rows();
    DenseMatrix w(n, n, 0.0);
    double z = student_weights(coords, w);
    double kl = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            double p = joint_p(i, j);
            if (p <= 0.0) continue;
            double q = std::max(w(i, j) / z, kProbabilityFloor);
            kl += p * std::log(std::max(p, kProbabilityFloor) / q);
        }
    }
    return kl;
}

DenseMatrix kl_gradient(const DenseMatrix& joint_p, const DenseMatrix& coords) {
    std::size_t n = coords.rows();
    DenseMatrix w(n, n, 0.0);
    double z = student_weights(coords, w);
    DenseMatrix grad(n, kOutputDims, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double gx = 0.0, gy = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            double wij = w(i, j);
            double coeff = 4.0 * (joint_p(i, j) - wij / z) * wij;
            gx += coeff * (coords(i, 0) - coords(j, 0));
            gy += coeff * (coords(i, 1) - coords(j, 1));
        }
        grad(i, 0) = gx;
        grad(i, 1) = gy;
    }
    return grad;
}

TsneResult tsne_fit(const DenseMatrix& embeddings, const TsneConfig& config) {
    std::size_t n = embeddings.rows();
    if (n < 5) throw InputError("t-SNE needs at least 5 documents, got " + std::to_string(n));
    if (config.perplexity >= static_cast<double>(n))
        throw InputError("perplexity (" + std::to_string(config.perplexity) +
                         ") must be smaller than the number of documents (" +
                         std::to_string(n) + ")");
    if (static_cast<double>(n) < 3.0 * config.perplexity)
        std::cerr << "warning: only " << n << " documents for perplexity "
                  << config.perplexity << "; consider lowering --perplexity\n";

    DenseMatrix distances = pairwise_cosine_distance(embeddings);
    DenseMatrix conditionals = calibrate_conditional_distributions(distances, config.perplexity);
    DenseMatrix joint = symmetrize_conditionals(conditionals);

    double learning_rate = config.learning_rate > 0.0
                               ? config.learning_rate
                               : std::max(static_cast<double>(n) / 12.0, 50.0);

    DenseMatrix coords(n, kOutputDims, 0.0);
    GaussianSource noise(config.random_seed);
    for (double& v : coords.values()) v = 1e-4 * noise.next();

    DenseMatrix velocity(n, kOutputDims, 0.0);
    DenseMatrix w(n, n, 0.0);

    std::size_t exaggeration_end = std::min(kExaggerationIters, config.n_iterations);
    TsneResult result;
    result.kl_trace.reserve(config.n_iterations);

    for (std::size_t it = 0; it < config.n_iterations; ++it) {
        bool exaggerated = it < exaggeration_end;
        double p_scale = exaggerated ? config.early_exaggeration_factor : 1.0;
        double momentum = it < kExaggerationIters ? kInitialMomentum : kFinalMomentum;

        double z = student_weights(coords, w);
        double kl = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double gx = 0.0, gy = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (i == j) continue;
                double p = joint(i, j);
                double wij = w(i, j);
                double q = wij / z;
                double coeff = 4.0 * (p_scale * p - q) * wij;
                gx += coeff * (coords(i, 0) - coords(j, 0));
                gy += coeff * (coords(i, 1) - coords(j, 1));
                if (p > 0.0)
                    kl += p * std::log(std::max(p, kProbabilityFloor) /
                                       std::max(q, kProbabilityFloor));
            }
            velocity(i, 0) = momentum * velocity(i, 0) - learning_rate * gx;
            velocity(i, 1) = momentum * velocity(i, 1) - learning_rate * gy;
        }
        double mean_x = 0.0, mean_y = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            coords(i, 0) += velocity(i, 0);
            coords(i, 1) += velocity(i, 1);
            mean_x += coords(i, 0);
            mean_y += coords(i, 1);
        }
        mean_x /= static_cast<double>(n);
        mean_y /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            coords(i, 0) -= mean_x;
            coords(i, 1) -= mean_y;
        }

        // kl was computed on the coordinates entering this iteration, so the
        // entry at index exaggeration_end is the KL right after the
        // exaggerated phase finished.
        result.kl_trace.push_back(kl);
        if (it == exaggeration_end) result.kl_after_exaggeration = kl;
    }

    if (!coords.all_finite())
        throw NumericError("t-SNE diverged to non-finite coordinates; try a lower learning rate");
    result.kl_final = kl_divergence(joint, coords);
    result.kl_trace.push_back(result.kl_final);
    if (exaggeration_end >= config.n_iterations)
        result.kl_after_exaggeration = result.kl_final;
    result.coordinates = std::move(coords);
    return result;
}

}  // namespace topeax::tsne
