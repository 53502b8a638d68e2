#include <doctest.h>

#include <cmath>

#include "test_util.hpp"
#include "topeax/tsne.hpp"

using namespace topeax;
using namespace topeax::tsne;

namespace {

// Entropy oracle evaluated directly on a produced conditional row, in bits.
double row_entropy_bits(std::span<const double> row) {
    double h = 0.0;
    for (double p : row) {
        if (p > 0.0) h -= p * std::log2(p);
    }
    return h;
}

DenseMatrix finite_difference_gradient(const DenseMatrix& joint, DenseMatrix coords,
                                       double h = 1e-6) {
    DenseMatrix g(coords.rows(), coords.cols());
    for (std::size_t i = 0; i < coords.rows(); ++i) {
        for (std::size_t c = 0; c < coords.cols(); ++c) {
            double saved = coords(i, c);
            coords(i, c) = saved + h;
            double up = kl_divergence(joint, coords);
            coords(i, c) = saved - h;
            double down = kl_divergence(joint, coords);
            coords(i, c) = saved;
            g(i, c) = (up - down) / (2.0 * h);
        }
    }
    return g;
}

}  // namespace

TEST_CASE("pairwise cosine distance hits the canonical cases") {
    DenseMatrix e = DenseMatrix::from_values(4, 2,
                                             {1.0, 0.0,
                                              1.0, 0.0,
                                              0.0, 1.0,
                                              -1.0, 0.0});
    auto d = pairwise_cosine_distance(e);
    CHECK(d(0, 1) == doctest::Approx(0.0));   // identical
    CHECK(d(0, 2) == doctest::Approx(1.0));   // orthogonal
    CHECK(d(0, 3) == doctest::Approx(2.0));   // antiparallel
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(d(i, i) == 0.0);
        for (std::size_t j = 0; j < 4; ++j) {
            CHECK(d(i, j) == d(j, i));
            CHECK(d(i, j) >= 0.0);
            CHECK(d(i, j) <= 2.0);
        }
    }
}

TEST_CASE("pairwise cosine distance names zero-norm rows") {
    DenseMatrix e = DenseMatrix::from_values(3, 2, {1.0, 0.0, 0.0, 0.0, 0.0, 1.0});
    CHECK_THROWS_WITH_AS(static_cast<void>(pairwise_cosine_distance(e)),
                         doctest::Contains("row 1"), NumericError);
}

TEST_CASE("calibration hits the target perplexity on every row") {
    auto embeddings = test_util::random_matrix(50, 8, 1234);
    auto distances = pairwise_cosine_distance(embeddings);
    const double perplexity = 12.0;
    auto conditionals = calibrate_conditional_distributions(distances, perplexity);

    for (std::size_t i = 0; i < 50; ++i) {
        auto row = conditionals.row(i);
        double sum = 0.0;
        for (double p : row) sum += p;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(conditionals(i, i) == 0.0);
        double realized = std::exp2(row_entropy_bits(row));
        CHECK(std::abs(realized - perplexity) < 1e-4);
    }

    auto joint = symmetrize_conditionals(conditionals);
    double total = 0.0;
    for (double p : joint.values()) total += p;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    for (std::size_t i = 0; i < 50; ++i)
        for (std::size_t j = 0; j < 50; ++j) CHECK(joint(i, j) == joint(j, i));
}

TEST_CASE("identical input rows produce identical conditional rows") {
    auto embeddings = test_util::random_matrix(20, 6, 7);
    for (std::size_t c = 0; c < 6; ++c) embeddings(11, c) = embeddings(3, c);
    auto distances = pairwise_cosine_distance(embeddings);
    auto conditionals = calibrate_conditional_distributions(distances, 5.0);
    for (std::size_t j = 0; j < 20; ++j) {
        if (j == 3 || j == 11) continue;
        CHECK(conditionals(3, j) == conditionals(11, j));
    }
}

TEST_CASE("calibration rejects unreachable perplexities") {
    auto embeddings = test_util::random_matrix(10, 4, 3);
    auto distances = pairwise_cosine_distance(embeddings);
    CHECK_THROWS_AS(static_cast<void>(calibrate_conditional_distributions(distances, 10.0)),
                    InputError);
    CHECK_THROWS_AS(static_cast<void>(calibrate_conditional_distributions(distances, -1.0)),
                    InputError);
}

TEST_CASE("analytic KL gradient matches central finite differences") {
    auto embeddings = test_util::random_matrix(10, 4, 42);
    auto joint = symmetrize_conditionals(
        calibrate_conditional_distributions(pairwise_cosine_distance(embeddings), 3.0));
    auto coords = test_util::random_matrix(10, 2, 43);

    auto analytic = kl_gradient(joint, coords);
    auto numeric = finite_difference_gradient(joint, coords);

    double diff = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < analytic.values().size(); ++i) {
        double d = analytic.values()[i] - numeric.values()[i];
        diff += d * d;
        scale += analytic.values()[i] * analytic.values()[i];
    }
    CHECK(std::sqrt(diff) / std::sqrt(scale) < 1e-4);
}

TEST_CASE("gradient is insensitive to contribution summation order") {
    auto embeddings = test_util::random_matrix(15, 4, 77);
    auto joint = symmetrize_conditionals(
        calibrate_conditional_distributions(pairwise_cosine_distance(embeddings), 4.0));
    auto coords = test_util::random_matrix(15, 2, 78);
    auto forward = kl_gradient(joint, coords);

    // Reversed-order oracle.
    std::size_t n = coords.rows();
    DenseMatrix w(n, n, 0.0);
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            double dx = coords(i, 0) - coords(j, 0);
            double dy = coords(i, 1) - coords(j, 1);
            w(i, j) = 1.0 / (1.0 + dx * dx + dy * dy);
            z += w(i, j);
        }
    DenseMatrix reversed(n, 2, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        double gx = 0.0, gy = 0.0;
        for (std::size_t j = n; j-- > 0;) {
            if (i == j) continue;
            double coeff = 4.0 * (joint(i, j) - w(i, j) / z) * w(i, j);
            gx += coeff * (coords(i, 0) - coords(j, 0));
            gy += coeff * (coords(i, 1) - coords(j, 1));
        }
        reversed(i, 0) = gx;
        reversed(i, 1) = gy;
    }
    for (std::size_t i = 0; i < forward.values().size(); ++i)
        CHECK(forward.values()[i] == doctest::Approx(reversed.values()[i]).epsilon(1e-6));
}

TEST_CASE("tsne_fit separates well-separated blobs") {
    DenseMatrix centers(3, 10, 0.0);
    centers(0, 0) = 8.0;
    centers(1, 1) = 8.0;
    centers(2, 2) = 8.0;
    auto blobs = test_util::make_blobs(centers, 100, 1.0, 2024);

    TsneConfig config;
    config.perplexity = 50.0;
    config.random_seed = 11;
    auto result = tsne_fit(blobs.points, config);
    REQUIRE(result.coordinates.rows() == 300);
    REQUIRE(result.coordinates.all_finite());

    // Statistics oracle: blob centroids in the output vs within-blob spread.
    double cx[3] = {0, 0, 0}, cy[3] = {0, 0, 0};
    for (std::size_t d = 0; d < 300; ++d) {
        int lab = blobs.labels[d];
        cx[lab] += result.coordinates(d, 0) / 100.0;
        cy[lab] += result.coordinates(d, 1) / 100.0;
    }
    double intra = 0.0;
    for (std::size_t d = 0; d < 300; ++d) {
        int lab = blobs.labels[d];
        intra += std::hypot(result.coordinates(d, 0) - cx[lab],
                            result.coordinates(d, 1) - cy[lab]) / 300.0;
    }
    double inter = 0.0;
    int pairs = 0;
    for (int a = 0; a < 3; ++a)
        for (int b = a + 1; b < 3; ++b, ++pairs)
            inter += std::hypot(cx[a] - cx[b], cy[a] - cy[b]);
    inter /= pairs;
    CHECK(inter > 5.0 * intra);

    // KL bookkeeping: non-negative everywhere, and optimization after the
    // exaggerated phase does not end worse than it started.
    for (double kl : result.kl_trace) CHECK(kl >= 0.0);
    CHECK(result.kl_final <= result.kl_after_exaggeration + 1e-9);
}

TEST_CASE("tsne_fit is bit-identical for the same seed") {
    auto embeddings = test_util::random_matrix(40, 6, 5);
    TsneConfig config;
    config.perplexity = 8.0;
    config.n_iterations = 120;
    config.random_seed = 99;
    auto a = tsne_fit(embeddings, config);
    auto b = tsne_fit(embeddings, config);
    CHECK(a.coordinates == b.coordinates);

    config.random_seed = 100;
    auto c = tsne_fit(embeddings, config);
    CHECK(a.coordinates != c.coordinates);
}

TEST_CASE("tsne_fit enforces preconditions") {
    auto tiny = test_util::random_matrix(4, 3, 1);
    TsneConfig config;
    CHECK_THROWS_AS(static_cast<void>(tsne_fit(tiny, config)), InputError);

    auto small = test_util::random_matrix(20, 3, 1);
    config.perplexity = 25.0;
    CHECK_THROWS_AS(static_cast<void>(tsne_fit(small, config)), InputError);
}
