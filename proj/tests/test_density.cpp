#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "sxai/density.hpp"
#include "sxai/errors.hpp"

using namespace sxai;

TEST_CASE("bin count rule") {
    CHECK(bin_count_rule(8) == 4);       // ceil(2) clamped up
    CHECK(bin_count_rule(1000) == 10);
    CHECK(bin_count_rule(1000000) == 64);
    CHECK(bin_count_rule(4) == 4);
    CHECK(bin_count_rule(64000) == 40);
    CHECK_THROWS_WITH_AS(bin_count_rule(3), doctest::Contains("TooFewSamples"), Error);
}

TEST_CASE("histogram on correlated and anti-correlated data") {
    std::vector<double> x = {0, 1, 2, 3};
    Histogram2D h = fit_histogram_2d(x, x, 2, 2);
    CHECK(h.count(0, 0) == 2);
    CHECK(h.count(0, 1) == 0);
    CHECK(h.count(1, 0) == 0);
    CHECK(h.count(1, 1) == 2);
    CHECK(h.n == 4);

    std::vector<double> y = {3, 2, 1, 0};
    Histogram2D a = fit_histogram_2d(x, y, 2, 2);
    CHECK(a.count(0, 0) == 0);
    CHECK(a.count(0, 1) == 2);
    CHECK(a.count(1, 0) == 2);
    CHECK(a.count(1, 1) == 0);
}

TEST_CASE("rightmost edge is inclusive") {
    std::vector<double> x = {0, 1, 2, 3, 4};
    Histogram2D h = fit_histogram_2d(x, x, 4, 4);
    CHECK(std::accumulate(h.counts.begin(), h.counts.end(), std::uint64_t{0}) == 5);
    CHECK(h.count(3, 3) == 2);  // 3 and the max value 4 both land in the last bin
}

TEST_CASE("degenerate axis collapses to one bin") {
    std::vector<double> x = {5, 5, 5, 5};
    std::vector<double> y = {0, 1, 2, 3};
    Histogram2D h = fit_histogram_2d(x, y, 2, 2);
    CHECK(h.degenerate_x);
    CHECK_FALSE(h.degenerate_y);
    CHECK(h.bx() == 1);
    CHECK(h.x_edges[0] == doctest::Approx(4.5));
    CHECK(h.x_edges[1] == doctest::Approx(5.5));
    CHECK(std::accumulate(h.counts.begin(), h.counts.end(), std::uint64_t{0}) == 4);
}

TEST_CASE("histogram is permutation invariant") {
    std::vector<double> x = {0.3, 1.7, 0.9, 2.8, 1.1, 0.2, 2.2, 1.9};
    std::vector<double> y = {1.0, 0.1, 2.5, 0.7, 1.8, 2.2, 0.4, 1.3};
    Histogram2D a = fit_histogram_2d(x, y, 3, 3);
    std::vector<double> xp = {2.8, 0.3, 1.1, 1.7, 0.2, 0.9, 1.9, 2.2};
    std::vector<double> yp = {0.7, 1.0, 1.8, 0.1, 2.2, 2.5, 1.3, 0.4};
    Histogram2D b = fit_histogram_2d(xp, yp, 3, 3);
    CHECK(a.counts == b.counts);
}

TEST_CASE("silverman bandwidth") {
    std::vector<double> x(1024);
    // alternating +-1 has sample mean 0 and sample variance 1024/1023
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = i % 2 ? 1.0 : -1.0;
    double sigma = std::sqrt(1024.0 / 1023.0);
    CHECK(silverman_bandwidth(x) == doctest::Approx(1.06 * sigma * std::pow(1024.0, -0.2)).epsilon(1e-12));

    std::vector<double> x2(x);
    for (auto& v : x2) v *= 2.0;
    CHECK(silverman_bandwidth(x2) == doctest::Approx(2.0 * silverman_bandwidth(x)).epsilon(1e-12));

    CHECK_THROWS_WITH_AS(silverman_bandwidth(std::vector<double>(16, 3.0)),
                         doctest::Contains("ZeroVariance"), Error);
}

TEST_CASE("kde log density point values") {
    KdeModel m({0.0}, 1, {1.0});
    CHECK(m.log_density(std::vector<double>{0.0}) ==
          doctest::Approx(-0.9189385332046727).epsilon(1e-12));

    KdeModel sym({-1.0, 1.0}, 1, {1.0});
    CHECK(sym.log_density(std::vector<double>{0.7}) ==
          doctest::Approx(sym.log_density(std::vector<double>{-0.7})).epsilon(1e-12));
}

TEST_CASE("kde density integrates to one") {
    KdeModel m({-1.0, 0.2, 2.5}, 1, {0.7});
    double total = 0;
    const int steps = 40000;
    double lo = -10, hi = 10, dx = (hi - lo) / steps;
    for (int i = 0; i <= steps; ++i) {
        double w = (i == 0 || i == steps) ? 0.5 : 1.0;
        total += w * std::exp(m.log_density(std::vector<double>{lo + i * dx}));
    }
    CHECK(total * dx == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("kde survives far queries without underflow to -inf") {
    KdeModel m({0.0, 1.0}, 1, {0.5});
    double ld = m.log_density(std::vector<double>{500.0});
    CHECK(std::isfinite(ld));
    CHECK(ld < -1000.0);
}

TEST_CASE("duplicating the dataset leaves the kde unchanged") {
    std::vector<double> pts = {0.1, 0.9, 2.0};
    KdeModel a(pts, 1, {0.8});
    std::vector<double> twice = {0.1, 0.9, 2.0, 0.1, 0.9, 2.0};
    KdeModel b(twice, 1, {0.8});
    for (double q : {-1.0, 0.5, 1.5, 3.0})
        CHECK(a.log_density(std::vector<double>{q}) ==
              doctest::Approx(b.log_density(std::vector<double>{q})).epsilon(1e-12));
}

TEST_CASE("kde dimension mismatch") {
    KdeModel m({0.0, 1.0}, 1, {1.0});
    CHECK_THROWS_WITH_AS(m.log_density(std::vector<double>{0.0, 0.0}),
                         doctest::Contains("DimensionMismatch"), Error);
}
