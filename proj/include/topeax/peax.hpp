#ifndef TOPEAX_PEAX_HPP
#define TOPEAX_PEAX_HPP

#include <array>
#include <cstddef>
#include <vector>

#include "topeax/matrix.hpp"
#include "topeax/text.hpp"

namespace topeax::peax {

inline constexpr std::size_t kGridSize = 100;
inline constexpr int kDefaultNeighbourhoodRadius = 5;

struct DensityGrid {
    std::vector<double> x_coords;  // kGridSize cell centers spanning [min, max]
    std::vector<double> y_coords;
    DenseMatrix density;           // kGridSize x kGridSize, indexed (ix, iy)
    std::array<double, 2> bandwidth{};
};

// Density peaks in embedding coordinates (grid cell centers), ordered by
// decreasing density.
struct PeakSet {
    std::vector<std::array<double, 2>> coordinates;
    std::vector<double> densities;

    std::size_t size() const { return coordinates.size(); }
};

// Symmetric 2x2 covariance.
struct Cov2 {
    double xx = 0.0;
    double xy = 0.0;
    double yy = 0.0;

    double determinant() const { return xx * yy - xy * xy; }
    bool operator==(const Cov2&) const = default;
};

struct FixedMeanGmm {
    std::vector<std::array<double, 2>> means;  // pinned to the peaks, never updated
    std::vector<Cov2> covariances;
    std::vector<double> weights;
    std::vector<double> log_likelihood_trace;
};

struct GmmFit {
    FixedMeanGmm model;
    DenseMatrix responsibilities;  // K x n; every column sums to 1
};

// Per-dimension Scott bandwidths h_i = sigma_i * n^(-1/6) for 2-D data.
std::array<double, 2> scott_bandwidth(const DenseMatrix& coords);

// Average of axis-aligned Gaussian kernels evaluated on a kGridSize^2 grid of
// cell centers spanning the coordinate range.
DensityGrid evaluate_kde_grid(const DenseMatrix& coords, const std::array<double, 2>& bandwidth);

// A cell is a peak when no cell within the Chebyshev radius exceeds it and at
// least one is strictly below it; equal-density plateau cells keep only the
// first cell in row-major order.
PeakSet find_density_peaks(const DensityGrid& grid,
                           int neighbourhood_radius = kDefaultNeighbourhoodRadius);

// EM over covariances and weights only. Means stay bit-identical to the peak
// coordinates across all iterations.
GmmFit fit_fixed_mean_gmm(const DenseMatrix& coords, const PeakSet& peaks);

// Argmax over components per document; ties resolve to the lowest index.
LabelVector hard_assign(const DenseMatrix& responsibilities);

struct PeaxResult {
    std::array<double, 2> bandwidth{};
    DensityGrid grid;
    PeakSet peaks;
    FixedMeanGmm gmm;
    DenseMatrix responsibilities;
    LabelVector assignment;
};

PeaxResult peax_fit(const DenseMatrix& coords,
                    int neighbourhood_radius = kDefaultNeighbourhoodRadius);

}  // namespace topeax::peax

#endif  // TOPEAX_PEAX_HPP
