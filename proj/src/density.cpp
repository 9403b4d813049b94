#include "sxai/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sxai/errors.hpp"

namespace sxai {

namespace {

constexpr double kLogSqrt2Pi = 0.9189385332046727;  // log(sqrt(2*pi))

void make_edges(std::span<const double> v, std::size_t bins, std::vector<double>& edges,
                bool& degenerate) {
    auto [mn_it, mx_it] = std::minmax_element(v.begin(), v.end());
    double mn = *mn_it, mx = *mx_it;
    degenerate = (mx == mn);
    if (degenerate) bins = 1;
    edges.resize(bins + 1);
    if (degenerate) {
        edges[0] = mn - 0.5;
        edges[1] = mn + 0.5;
        return;
    }
    double width = (mx - mn) / static_cast<double>(bins);
    for (std::size_t i = 0; i <= bins; ++i) edges[i] = mn + width * static_cast<double>(i);
    edges[bins] = mx;  // guard against rounding drift
}

std::size_t bin_index(double v, const std::vector<double>& edges) {
    std::size_t bins = edges.size() - 1;
    if (bins == 1) return 0;
    double mn = edges.front(), mx = edges.back();
    double t = (v - mn) / (mx - mn) * static_cast<double>(bins);
    auto idx = static_cast<std::size_t>(t);
    return std::min(idx, bins - 1);  // right-most edge inclusive
}

}  // namespace

std::size_t bin_count_rule(std::size_t n) {
    if (n < 4) throw Error("TooFewSamples", "bin rule needs n >= 4");
    double b = std::ceil(std::cbrt(static_cast<double>(n)) - 1e-9);
    return static_cast<std::size_t>(std::clamp(b, 4.0, 64.0));
}

Histogram2D fit_histogram_2d(std::span<const double> x, std::span<const double> y,
                             std::size_t bins_x, std::size_t bins_y) {
    if (x.size() != y.size()) throw shape_mismatch("x and y lengths differ");
    if (x.size() < 4) throw Error("TooFewSamples", "histogram needs n >= 4");
    for (double v : x)
        if (!std::isfinite(v)) throw Error("NonFiniteValue", "non-finite x sample");
    for (double v : y)
        if (!std::isfinite(v)) throw Error("NonFiniteValue", "non-finite y sample");

    Histogram2D h;
    h.n = x.size();
    make_edges(x, bins_x, h.x_edges, h.degenerate_x);
    make_edges(y, bins_y, h.y_edges, h.degenerate_y);
    h.counts.assign(h.bx() * h.by(), 0);
    for (std::size_t i = 0; i < x.size(); ++i)
        ++h.counts[bin_index(x[i], h.x_edges) * h.by() + bin_index(y[i], h.y_edges)];
    return h;
}

double silverman_bandwidth(std::span<const double> x) {
    if (x.size() < 2) throw Error("TooFewSamples", "bandwidth needs n >= 2");
    double n = static_cast<double>(x.size());
    double mean = 0;
    for (double v : x) mean += v;
    mean /= n;
    double ss = 0;
    for (double v : x) ss += (v - mean) * (v - mean);
    double sigma = std::sqrt(ss / (n - 1.0));
    if (sigma == 0.0) throw Error("ZeroVariance", "constant sample has no bandwidth");
    return 1.06 * sigma * std::pow(n, -0.2);
}

KdeModel::KdeModel(std::vector<double> points, std::size_t dim, std::vector<double> bandwidths)
    : points_(std::move(points)), dim_(dim), bandwidths_(std::move(bandwidths)) {
    if (dim_ == 0 || points_.size() % dim_ != 0)
        throw shape_mismatch("points length must be a multiple of dim");
    if (bandwidths_.size() != dim_) throw dimension_mismatch("one bandwidth per dimension");
    double log_h = 0;
    for (double h : bandwidths_) {
        if (!(h > 0)) throw Error("BadBandwidth", "bandwidths must be strictly positive");
        log_h += std::log(h);
    }
    log_norm_ = std::log(static_cast<double>(size())) + log_h +
                static_cast<double>(dim_) * kLogSqrt2Pi;
}

KdeModel KdeModel::fit(std::vector<double> points, std::size_t dim) {
    if (dim == 0 || points.size() % dim != 0)
        throw shape_mismatch("points length must be a multiple of dim");
    std::size_t n = points.size() / dim;
    std::vector<double> bw(dim);
    std::vector<double> col(n);
    for (std::size_t d = 0; d < dim; ++d) {
        for (std::size_t i = 0; i < n; ++i) col[i] = points[i * dim + d];
        bw[d] = silverman_bandwidth(col);
    }
    return KdeModel(std::move(points), dim, std::move(bw));
}

double KdeModel::log_density(std::span<const double> query) const {
    if (query.size() != dim_) throw dimension_mismatch("query dimension != model dimension");
    std::size_t n = size();
    // log-sum-exp over per-point exponents, fixed summation order
    double max_e = -std::numeric_limits<double>::infinity();
    std::vector<double> exps(n);
    for (std::size_t i = 0; i < n; ++i) {
        double e = 0;
        for (std::size_t d = 0; d < dim_; ++d) {
            double z = (query[d] - points_[i * dim_ + d]) / bandwidths_[d];
            e -= 0.5 * z * z;
        }
        exps[i] = e;
        max_e = std::max(max_e, e);
    }
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += std::exp(exps[i] - max_e);
    return max_e + std::log(s) - log_norm_;
}

}  // namespace sxai
