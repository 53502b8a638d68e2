#include "topeax/peax.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace topeax::peax {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;
constexpr double kEmTolerance = 1e-6;
constexpr std::size_t kEmMaxIterations = 200;
constexpr double kRidgeScale = 1e-6;

struct Range {
    double min, max;
};

Range coordinate_range(const DenseMatrix& coords, std::size_t dim) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t d = 0; d < coords.rows(); ++d) {
        lo = std::min(lo, coords(d, dim));
        hi = std::max(hi, coords(d, dim));
    }
    return {lo, hi};
}

double log_gaussian_2d(double dx, double dy, const Cov2& cov) {
    double det = cov.determinant();
    // Covariances are ridge-regularized before use, so det > 0 here.
    double inv_xx = cov.yy / det;
    double inv_yy = cov.xx / det;
    double inv_xy = -cov.xy / det;
    double quad = dx * dx * inv_xx + 2.0 * dx * dy * inv_xy + dy * dy * inv_yy;
    return -std::log(kTwoPi) - 0.5 * std::log(det) - 0.5 * quad;
}

}  // namespace

std::array<double, 2> scott_bandwidth(const DenseMatrix& coords) {
    std::size_t n = coords.rows();
    if (n < 2) throw NumericError("Scott bandwidth needs at least 2 points");
    std::array<double, 2> h{};
    double factor = std::pow(static_cast<double>(n), -1.0 / 6.0);  // d = 2
    for (std::size_t dim = 0; dim < 2; ++dim) {
        double mean = 0.0;
        for (std::size_t d = 0; d < n; ++d) mean += coords(d, dim);
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t d = 0; d < n; ++d) {
            double c = coords(d, dim) - mean;
            ss += c * c;
        }
        double sigma = std::sqrt(ss / static_cast<double>(n - 1));
        if (sigma == 0.0)
            throw NumericError("dimension " + std::to_string(dim) +
                               " of the reduced embedding has zero spread");
        h[dim] = sigma * factor;
    }
    return h;
}

DensityGrid evaluate_kde_grid(const DenseMatrix& coords, const std::array<double, 2>& bandwidth) {
    std::size_t n = coords.rows();
    if (n == 0) throw NumericError("cannot estimate a density from zero points");
    if (bandwidth[0] <= 0.0 || bandwidth[1] <= 0.0)
        throw NumericError("KDE bandwidths must be positive");

    DensityGrid grid;
    grid.bandwidth = bandwidth;
    Range rx = coordinate_range(coords, 0);
    Range ry = coordinate_range(coords, 1);
    double step_x = (rx.max - rx.min) / static_cast<double>(kGridSize - 1);
    double step_y = (ry.max - ry.min) / static_cast<double>(kGridSize - 1);

    grid.x_coords.resize(kGridSize);
    grid.y_coords.resize(kGridSize);
    for (std::size_t i = 0; i < kGridSize; ++i) {
        grid.x_coords[i] = rx.min + static_cast<double>(i) * step_x;
        grid.y_coords[i] = ry.min + static_cast<double>(i) * step_y;
    }
    // Keep the grid span exact at the data range regardless of rounding.
    grid.x_coords.back() = rx.max;
    grid.y_coords.back() = ry.max;

    // Separable kernels: precompute the per-axis factors, then the grid value
    // is a sum of products over points.
    double norm_x = 1.0 / (std::sqrt(kTwoPi) * bandwidth[0]);
    double norm_y = 1.0 / (std::sqrt(kTwoPi) * bandwidth[1]);
    DenseMatrix kx(kGridSize, n, 0.0);
    DenseMatrix ky(kGridSize, n, 0.0);
    for (std::size_t i = 0; i < kGridSize; ++i) {
        for (std::size_t d = 0; d < n; ++d) {
            double ux = (grid.x_coords[i] - coords(d, 0)) / bandwidth[0];
            double uy = (grid.y_coords[i] - coords(d, 1)) / bandwidth[1];
            kx(i, d) = norm_x * std::exp(-0.5 * ux * ux);
            ky(i, d) = norm_y * std::exp(-0.5 * uy * uy);
        }
    }

    grid.density = DenseMatrix(kGridSize, kGridSize, 0.0);
    double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < kGridSize; ++i) {
        for (std::size_t j = 0; j < kGridSize; ++j) {
            double acc = 0.0;
            for (std::size_t d = 0; d < n; ++d) acc += kx(i, d) * ky(j, d);
            grid.density(i, j) = acc * inv_n;
        }
    }
    return grid;
}

PeakSet find_density_peaks(const DensityGrid& grid, int neighbourhood_radius) {
    if (neighbourhood_radius < 1) throw InputError("neighbourhood radius must be >= 1");
    const auto& den = grid.density;
    if (den.rows() != den.cols() || den.rows() != grid.x_coords.size() ||
        den.rows() != grid.y_coords.size())
        throw InputError("density grid shape is inconsistent with its coordinates");
    int g = static_cast<int>(den.rows());

    struct Candidate {
        int ix, iy;
        double density;
    };
    std::vector<Candidate> candidates;
    for (int ix = 0; ix < g; ++ix) {
        for (int iy = 0; iy < g; ++iy) {
            double v = den(ix, iy);
            bool dominated = false;
            bool strictly_above_some = false;
            for (int dx = -neighbourhood_radius; dx <= neighbourhood_radius && !dominated; ++dx) {
                int nx = ix + dx;
                if (nx < 0 || nx >= g) continue;
                for (int dy = -neighbourhood_radius; dy <= neighbourhood_radius; ++dy) {
                    int ny = iy + dy;
                    if (ny < 0 || ny >= g) continue;
                    if (nx == ix && ny == iy) continue;
                    double u = den(nx, ny);
                    if (u > v) {
                        dominated = true;
                        break;
                    }
                    if (u < v) strictly_above_some = true;
                    // Plateau tie: only the first cell in row-major order
                    // survives within a neighbourhood.
                    if (u == v && (nx < ix || (nx == ix && ny < iy))) {
                        dominated = true;
                        break;
                    }
                }
            }
            if (!dominated && strictly_above_some) candidates.push_back({ix, iy, v});
        }
    }
    if (candidates.empty())
        throw NumericError(
            "no density peaks found (the grid is flat); inspect the reduced embedding");

    std::stable_sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
        if (a.density != b.density) return a.density > b.density;
        if (a.ix != b.ix) return a.ix < b.ix;
        return a.iy < b.iy;
    });

    PeakSet peaks;
    peaks.coordinates.reserve(candidates.size());
    peaks.densities.reserve(candidates.size());
    for (const auto& c : candidates) {
        peaks.coordinates.push_back({grid.x_coords[static_cast<std::size_t>(c.ix)],
                                     grid.y_coords[static_cast<std::size_t>(c.iy)]});
        peaks.densities.push_back(c.density);
    }
    return peaks;
}

namespace {

// One E-step: responsibilities via log-sum-exp plus the total log-likelihood
// under the current parameters.
double e_step(const DenseMatrix& coords, const FixedMeanGmm& gmm, DenseMatrix& resp) {
    std::size_t n = coords.rows();
    std::size_t k = gmm.means.size();
    double ll = 0.0;
    std::vector<double> logp(k);
    for (std::size_t d = 0; d < n; ++d) {
        double m = -std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < k; ++c) {
            double lw = gmm.weights[c] > 0.0 ? std::log(gmm.weights[c])
                                             : -std::numeric_limits<double>::infinity();
            logp[c] = lw + log_gaussian_2d(coords(d, 0) - gmm.means[c][0],
                                           coords(d, 1) - gmm.means[c][1],
                                           gmm.covariances[c]);
            m = std::max(m, logp[c]);
        }
        double sum = 0.0;
        for (std::size_t c = 0; c < k; ++c) sum += std::exp(logp[c] - m);
        double log_norm = m + std::log(sum);
        ll += log_norm;
        for (std::size_t c = 0; c < k; ++c) resp(c, d) = std::exp(logp[c] - log_norm);
    }
    return ll;
}

}  // namespace

GmmFit fit_fixed_mean_gmm(const DenseMatrix& coords, const PeakSet& peaks) {
    std::size_t n = coords.rows();
    std::size_t k = peaks.size();
    if (k == 0) throw InputError("fixed-mean GMM needs at least one peak");
    if (k > n)
        throw InputError("more mixture components (" + std::to_string(k) + ") than documents (" +
                         std::to_string(n) + ")");

    Range rx = coordinate_range(coords, 0);
    Range ry = coordinate_range(coords, 1);
    double mean_range = 0.5 * ((rx.max - rx.min) + (ry.max - ry.min));
    double ridge = kRidgeScale * mean_range * mean_range;
    if (ridge <= 0.0) ridge = kRidgeScale;

    auto scott = scott_bandwidth(coords);
    double init_var = 0.5 * (scott[0] * scott[0] + scott[1] * scott[1]);

    GmmFit fit;
    fit.model.means = peaks.coordinates;
    fit.model.covariances.assign(k, Cov2{init_var, 0.0, init_var});
    fit.model.weights.assign(k, 1.0 / static_cast<double>(k));
    fit.responsibilities = DenseMatrix(k, n, 0.0);

    double prev_ll = -std::numeric_limits<double>::infinity();
    for (std::size_t iter = 0; iter < kEmMaxIterations; ++iter) {
        double ll = e_step(coords, fit.model, fit.responsibilities);
        fit.model.log_likelihood_trace.push_back(ll);
        if (iter > 0 && std::abs(ll - prev_ll) < kEmTolerance * std::max(std::abs(ll), 1.0))
            return fit;
        prev_ll = ll;

        // M-step: weights and covariances only; means stay pinned.
        for (std::size_t c = 0; c < k; ++c) {
            double rsum = 0.0;
            for (std::size_t d = 0; d < n; ++d) rsum += fit.responsibilities(c, d);
            fit.model.weights[c] = rsum / static_cast<double>(n);
            if (rsum < 1e-300) continue;  // keep the previous covariance
            double sxx = 0.0, sxy = 0.0, syy = 0.0;
            for (std::size_t d = 0; d < n; ++d) {
                double r = fit.responsibilities(c, d);
                double dx = coords(d, 0) - fit.model.means[c][0];
                double dy = coords(d, 1) - fit.model.means[c][1];
                sxx += r * dx * dx;
                sxy += r * dx * dy;
                syy += r * dy * dy;
            }
            fit.model.covariances[c] =
                Cov2{sxx / rsum + ridge, sxy / rsum, syy / rsum + ridge};
        }
    }
    // Iteration budget exhausted: refresh responsibilities to match the final
    // parameters.
    double ll = e_step(coords, fit.model, fit.responsibilities);
    fit.model.log_likelihood_trace.push_back(ll);
    return fit;
}

LabelVector hard_assign(const DenseMatrix& responsibilities) {
    std::size_t k = responsibilities.rows();
    std::size_t n = responsibilities.cols();
    if (k == 0) throw InputError("empty responsibility matrix");
    LabelVector out;
    out.n_clusters = static_cast<int>(k);
    out.labels.resize(n);
    for (std::size_t d = 0; d < n; ++d) {
        std::size_t best = 0;
        double best_r = responsibilities(0, d);
        for (std::size_t c = 1; c < k; ++c) {
            if (responsibilities(c, d) > best_r) {
                best_r = responsibilities(c, d);
                best = c;
            }
        }
        out.labels[d] = static_cast<int>(best);
    }
    return out;
}

PeaxResult peax_fit(const DenseMatrix& coords, int neighbourhood_radius) {
    if (coords.cols() != 2) throw InputError("Peax expects n x 2 reduced coordinates");
    PeaxResult result;
    result.bandwidth = scott_bandwidth(coords);
    result.grid = evaluate_kde_grid(coords, result.bandwidth);
    result.peaks = find_density_peaks(result.grid, neighbourhood_radius);
    GmmFit fit = fit_fixed_mean_gmm(coords, result.peaks);
    result.gmm = std::move(fit.model);
    result.responsibilities = std::move(fit.responsibilities);
    result.assignment = hard_assign(result.responsibilities);
    return result;
}

}  // namespace topeax::peax
