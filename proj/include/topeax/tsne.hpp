#ifndef TOPEAX_TSNE_HPP
#define TOPEAX_TSNE_HPP

#include <cstdint>
#include <vector>

#include "topeax/matrix.hpp"

namespace topeax::tsne {

struct TsneConfig {
    double perplexity = 50.0;
    std::size_t n_iterations = 1000;
    // Applied to the joint distribution for the first kExaggerationIters
    // iterations.
    double early_exaggeration_factor = 12.0;
    // <= 0 selects the automatic rate max(n/12, 50).
    double learning_rate = 0.0;
    std::uint32_t random_seed = 42;
};

// Output dimensionality is pinned to 2: the clustering stage estimates
// densities on a planar grid.
inline constexpr std::size_t kOutputDims = 2;
inline constexpr std::size_t kExaggerationIters = 250;
inline constexpr double kInitialMomentum = 0.5;
inline constexpr double kFinalMomentum = 0.8;
inline constexpr double kProbabilityFloor = 1e-12;

struct TsneResult {
    DenseMatrix coordinates;        // n x 2
    std::vector<double> kl_trace;   // KL(P||Q) per iteration, unexaggerated P
    double kl_after_exaggeration = 0.0;
    double kl_final = 0.0;
};

// Symmetric n x n cosine distances with an exactly zero diagonal; entries lie
// in [0, 2]. Rows with zero norm are rejected.
DenseMatrix pairwise_cosine_distance(const DenseMatrix& embeddings);

// Per-row precision search so that the Shannon entropy of every conditional
// row equals log2(perplexity). Returns the n x n conditional matrix P(j|i)
// with zero diagonal; every row sums to 1.
DenseMatrix calibrate_conditional_distributions(const DenseMatrix& distances,
                                                double perplexity);

// Joint distribution (Pc + Pc^T) / 2n; sums to 1 over all entries.
DenseMatrix symmetrize_conditionals(const DenseMatrix& conditionals);

// KL(P || Q(Y)) with the Student-t kernel in the embedding space. Exposed
// separately so the gradient can be verified against finite differences.
double kl_divergence(const DenseMatrix& joint_p, const DenseMatrix& coords);
DenseMatrix kl_gradient(const DenseMatrix& joint_p, const DenseMatrix& coords);

TsneResult tsne_fit(const DenseMatrix& embeddings, const TsneConfig& config);

}  // namespace topeax::tsne

#endif  // TOPEAX_TSNE_HPP
