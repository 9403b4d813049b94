#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <vector>

#include "sxai/domain.hpp"
#include "sxai/errors.hpp"
#include "sxai/rng.hpp"

using namespace sxai;

namespace {

std::vector<double> random_matrix(std::size_t n, std::size_t d, std::uint64_t seed) {
    CounterRng rng(seed, 0);
    std::vector<double> X(n * d);
    for (auto& v : X) v = rng.normal();
    return X;
}

}  // namespace

TEST_CASE("standardizer") {
    // feature 0: mean 2, sample std 1; feature 1: constant
    std::vector<double> X = {1, 5, 2, 5, 3, 5, 2, 5};
    Standardizer s = fit_standardizer(X, 2);
    CHECK(s.mean[0] == doctest::Approx(2.0));
    CHECK(s.mean[1] == doctest::Approx(5.0));
    CHECK(s.std_dev[1] == 1.0);
    CHECK(s.constant_feature[1]);
    CHECK_FALSE(s.constant_feature[0]);

    auto z = s.transform(std::vector<double>{3.0, 5.0});
    CHECK(z[0] == doctest::Approx((3.0 - 2.0) / s.std_dev[0]).epsilon(1e-12));
    CHECK(z[1] == 0.0);

    // transformed training data has mean 0, std 1 per non-constant feature
    double mean = 0, var = 0;
    std::vector<std::vector<double>> zs;
    for (int i = 0; i < 4; ++i)
        zs.push_back(s.transform(std::vector<double>{X[2 * i], X[2 * i + 1]}));
    for (auto& r : zs) mean += r[0] / 4.0;
    for (auto& r : zs) var += (r[0] - mean) * (r[0] - mean) / 3.0;
    CHECK(mean == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(var == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("jacobi eigendecomposition matches a dense oracle") {
    std::vector<double> A = {4, 1, -2, 1, 2, 0, -2, 0, 3};
    std::vector<double> w, V;
    jacobi_eigh(A, 3, w, V);
    CHECK(w[0] == doctest::Approx(5.732050807568877).epsilon(1e-9));
    CHECK(w[1] == doctest::Approx(2.267949192431123).epsilon(1e-9));
    CHECK(w[2] == doctest::Approx(1.0).epsilon(1e-9));

    // rows of V are unit eigenvectors: A v = lambda v, orthonormal
    for (std::size_t r = 0; r < 3; ++r) {
        double norm = 0;
        for (std::size_t c = 0; c < 3; ++c) norm += V[r * 3 + c] * V[r * 3 + c];
        CHECK(norm == doctest::Approx(1.0).epsilon(1e-10));
        for (std::size_t c = 0; c < 3; ++c) {
            double av = 0;
            for (std::size_t j = 0; j < 3; ++j) av += A[c * 3 + j] * V[r * 3 + j];
            CHECK(av == doctest::Approx(w[r] * V[r * 3 + c]).epsilon(1e-8));
        }
    }
}

TEST_CASE("pca on a perfect line") {
    std::vector<double> X;
    for (int i = -8; i < 8; ++i) {
        X.push_back(i);
        X.push_back(i);
    }
    Standardizer s = fit_standardizer(X, 2);
    std::vector<double> Z;
    for (int i = 0; i < 16; ++i) {
        auto z = s.transform(std::vector<double>{X[2 * i], X[2 * i + 1]});
        Z.insert(Z.end(), z.begin(), z.end());
    }
    PcaModel pca = fit_pca(Z, 16, 2);
    CHECK(pca.d_reduced == 1);
    CHECK(pca.explained_variance_ratio[0] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("pca components stay orthonormal and ratios descend") {
    auto X = random_matrix(300, 5, 21);
    PcaModel pca = fit_pca(X, 300, 5, 0.999, 10);
    for (std::size_t a = 0; a < pca.d_reduced; ++a)
        for (std::size_t b = 0; b < pca.d_reduced; ++b) {
            double dot = 0;
            for (std::size_t j = 0; j < 5; ++j)
                dot += pca.components[a * 5 + j] * pca.components[b * 5 + j];
            CHECK(dot == doctest::Approx(a == b ? 1.0 : 0.0).epsilon(1e-8));
        }
    double sum = 0;
    for (std::size_t a = 0; a + 1 < pca.d_reduced; ++a)
        CHECK(pca.explained_variance_ratio[a] >= pca.explained_variance_ratio[a + 1]);
    for (double r : pca.explained_variance_ratio) sum += r;
    CHECK(sum <= 1.0 + 1e-9);
}

TEST_CASE("hull membership on a triangle") {
    std::vector<double> tri = {0, 0, 1, 0, 0, 1};
    CHECK(hull_membership(tri, 3, 2, std::vector<double>{0.25, 0.25}));
    CHECK_FALSE(hull_membership(tri, 3, 2, std::vector<double>{1.0, 1.0}));
    // boundary and vertex count as inside
    CHECK(hull_membership(tri, 3, 2, std::vector<double>{0.5, 0.5}));
    CHECK(hull_membership(tri, 3, 2, std::vector<double>{0.0, 1.0}));
    CHECK(hull_membership(tri, 3, 2, std::vector<double>{0.5, 0.0}));
}

TEST_CASE("hull membership in higher dimension") {
    auto X = random_matrix(60, 3, 5);
    // centroid is inside; a far point is not
    std::vector<double> centroid(3, 0.0);
    for (std::size_t i = 0; i < 60; ++i)
        for (std::size_t j = 0; j < 3; ++j) centroid[j] += X[i * 3 + j] / 60.0;
    CHECK(hull_membership(X, 60, 3, centroid));
    CHECK_FALSE(hull_membership(X, 60, 3, std::vector<double>{50.0, 50.0, 50.0}));
}

TEST_CASE("knn threshold on tiny sets") {
    std::vector<double> pts = {0, 1, 2};
    CHECK(knn_threshold(pts, 3, 1, 1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(knn_mean_distance(pts, 3, 1, std::vector<double>{5.0}, 1) ==
          doctest::Approx(3.0).epsilon(1e-12));

    std::vector<double> dup = {1, 1, 1, 1};
    CHECK(knn_threshold(dup, 4, 1, 2) == 0.0);
}

TEST_CASE("leverage identities") {
    auto X = random_matrix(50, 3, 33);
    DomainModel m = fit_domain_model(X, 50, 3);
    double total = 0;
    for (std::size_t i = 0; i < 50; ++i) {
        std::vector<double> p(m.projections.begin() + i * m.pca.d_reduced,
                              m.projections.begin() + (i + 1) * m.pca.d_reduced);
        total += m.leverage_of(p);
    }
    CHECK(total == doctest::Approx(static_cast<double>(m.pca.d_reduced) + 1.0).epsilon(1e-6));
    CHECK(m.leverage_thresh == doctest::Approx(3.0 * (m.pca.d_reduced + 1.0) / 50.0));
}

TEST_CASE("verdict levels follow the sub-checks") {
    auto X = random_matrix(200, 4, 77);
    DomainModel m = fit_domain_model(X, 200, 4);

    // training points are inside their own hull
    std::vector<double> q(X.begin(), X.begin() + 4);
    DomainVerdict v = m.check(q);
    CHECK(v.in_hull);
    CHECK(v.level == DomainLevel::In);

    // midpoint of two training points stays inside (convexity)
    for (std::size_t j = 0; j < 4; ++j) q[j] = 0.5 * (X[j] + X[4 + j]);
    CHECK(m.check(q).level == DomainLevel::In);

    // far point is out on every check
    for (auto& vq : q) vq = 100.0;
    DomainVerdict far = m.check(q);
    CHECK_FALSE(far.in_hull);
    CHECK(far.knn_exceeded);
    CHECK(far.leverage_exceeded);
    CHECK(far.level == DomainLevel::Out);

    CHECK_THROWS_WITH_AS(m.check(std::vector<double>{1.0}),
                         doctest::Contains("DimensionMismatch"), Error);
}

TEST_CASE("monotone alarm along a ray") {
    auto X = random_matrix(100, 3, 13);
    DomainModel m = fit_domain_model(X, 100, 3);
    std::vector<double> mean(3, 0.0);
    for (std::size_t i = 0; i < 100; ++i)
        for (std::size_t j = 0; j < 3; ++j) mean[j] += X[i * 3 + j] / 100.0;

    std::vector<double> dir = {1.0, -0.5, 0.7};
    bool seen_out = false;
    for (double t = 0.0; t <= 40.0; t += 0.8) {
        std::vector<double> q(3);
        for (std::size_t j = 0; j < 3; ++j) q[j] = mean[j] + t * dir[j];
        DomainLevel level = m.check(q).level;
        if (seen_out) CHECK(level != DomainLevel::In);
        if (level == DomainLevel::Out) seen_out = true;
    }
    CHECK(seen_out);
}

TEST_CASE("determinism") {
    auto X = random_matrix(80, 4, 3);
    DomainModel a = fit_domain_model(X, 80, 4);
    DomainModel b = fit_domain_model(X, 80, 4);
    CHECK(a.knn_thresh == b.knn_thresh);
    CHECK(a.projections == b.projections);
    std::vector<double> q = {0.3, -1.2, 0.5, 2.0};
    DomainVerdict va = a.check(q), vb = b.check(q);
    CHECK(va.knn_distance == vb.knn_distance);
    CHECK(va.leverage == vb.leverage);
    CHECK(va.level == vb.level);
}

TEST_CASE("save and load round trip") {
    auto X = random_matrix(60, 4, 9);
    DomainModel m = fit_domain_model(X, 60, 4);
    auto path = (std::filesystem::temp_directory_path() / "domain_model.bin").string();
    save_domain_model(path, m);
    DomainModel back = load_domain_model(path);
    CHECK(back.pca.d_reduced == m.pca.d_reduced);
    CHECK(back.knn_thresh == m.knn_thresh);
    CHECK(back.leverage_thresh == m.leverage_thresh);

    CounterRng rng(4, 1);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> q(4);
        for (auto& v : q) v = 3.0 * rng.normal();
        DomainVerdict va = m.check(q), vb = back.check(q);
        CHECK(va.level == vb.level);
        CHECK(va.in_hull == vb.in_hull);
        // model tensors round-trip through f32 storage
        CHECK(va.knn_distance == doctest::Approx(vb.knn_distance).epsilon(1e-5));
    }
}

TEST_CASE("too few training points") {
    std::vector<double> X = {0, 1, 2, 3};
    CHECK_THROWS_AS(fit_domain_model(X, 4, 1), Error);
}
