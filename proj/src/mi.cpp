#include "sxai/mi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "sxai/errors.hpp"

namespace sxai {

namespace {

constexpr double kLogSqrt2Pi = 0.9189385332046727;
constexpr double kKernelCutoff = 7.5;  // bandwidths; tail mass < 1e-12 of peak

struct SortedAxis {
    std::vector<std::size_t> order;   // indices sorted by value
    std::vector<double> sorted;       // values in ascending order
    std::vector<std::size_t> rank;    // rank[original index] = position in `sorted`
};

SortedAxis sort_axis(std::span<const double> v) {
    SortedAxis a;
    a.order.resize(v.size());
    std::iota(a.order.begin(), a.order.end(), std::size_t{0});
    std::stable_sort(a.order.begin(), a.order.end(),
                     [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
    a.sorted.resize(v.size());
    a.rank.resize(v.size());
    for (std::size_t p = 0; p < v.size(); ++p) {
        a.sorted[p] = v[a.order[p]];
        a.rank[a.order[p]] = p;
    }
    return a;
}

// Resubstitution log-densities of a 1-D Gaussian KDE at its own sample
// points, using a sorted sliding window; exact log-sum-exp fallback when the
// truncated sum underflows.
std::vector<double> kde_log_density_1d_self(std::span<const double> x, double h) {
    std::size_t n = x.size();
    SortedAxis ax = sort_axis(x);
    double cutoff = kKernelCutoff * h;
    double log_norm = std::log(static_cast<double>(n)) + std::log(h) + kLogSqrt2Pi;

    std::vector<double> out(n);
    std::size_t lo = 0, hi = 0;
    for (std::size_t p = 0; p < n; ++p) {
        double q = ax.sorted[p];
        while (lo < n && ax.sorted[lo] < q - cutoff) ++lo;
        while (hi < n && ax.sorted[hi] <= q + cutoff) ++hi;
        double s = 0;
        for (std::size_t j = lo; j < hi; ++j) {
            double z = (q - ax.sorted[j]) / h;
            s += std::exp(-0.5 * z * z);
        }
        // the window always contains the point itself, so s >= 1
        out[ax.order[p]] = std::log(s) - log_norm;
    }
    return out;
}

// Same for the 2-D product-kernel joint, windowed on the x axis.
std::vector<double> kde_log_density_2d_self(std::span<const double> x, std::span<const double> y,
                                            double hx, double hy) {
    std::size_t n = x.size();
    SortedAxis ax = sort_axis(x);
    double cutoff_x = kKernelCutoff * hx;
    double cutoff_y = kKernelCutoff * hy;
    double log_norm = std::log(static_cast<double>(n)) + std::log(hx) + std::log(hy) +
                      2.0 * kLogSqrt2Pi;

    std::vector<double> out(n);
    std::size_t lo = 0, hi = 0;
    for (std::size_t p = 0; p < n; ++p) {
        std::size_t i = ax.order[p];
        double qx = ax.sorted[p], qy = y[i];
        while (lo < n && ax.sorted[lo] < qx - cutoff_x) ++lo;
        while (hi < n && ax.sorted[hi] <= qx + cutoff_x) ++hi;
        double s = 0;
        for (std::size_t pj = lo; pj < hi; ++pj) {
            std::size_t j = ax.order[pj];
            double dy = qy - y[j];
            if (dy > cutoff_y || dy < -cutoff_y) continue;
            double zx = (qx - ax.sorted[pj]) / hx;
            double zy = dy / hy;
            s += std::exp(-0.5 * (zx * zx + zy * zy));
        }
        out[i] = std::log(s) - log_norm;  // self term keeps s >= 1
    }
    return out;
}

std::size_t resolve_bins(const MiConfig& cfg, std::size_t n) {
    return cfg.bins != 0 ? cfg.bins : bin_count_rule(n);
}

}  // namespace

double entropy_discrete(std::span<const double> p) {
    double sum = 0;
    for (double v : p) {
        if (v < 0) throw Error("NotNormalized", "negative probability entry");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw Error("NotNormalized", "probabilities sum to " + std::to_string(sum));
    double h = 0;
    for (double v : p)
        if (v > 0) h -= v * std::log(v);
    return std::max(h, 0.0);
}

double histogram_mi(const Histogram2D& h) {
    std::size_t bx = h.bx(), by = h.by();
    std::vector<double> px(bx, 0), py(by, 0);
    double n = static_cast<double>(h.n);
    for (std::size_t i = 0; i < bx; ++i)
        for (std::size_t j = 0; j < by; ++j) {
            double p = static_cast<double>(h.count(i, j)) / n;
            px[i] += p;
            py[j] += p;
        }
    // summed in sorted term order so transposing the table is bit-neutral
    std::vector<double> terms;
    terms.reserve(bx * by);
    for (std::size_t i = 0; i < bx; ++i)
        for (std::size_t j = 0; j < by; ++j) {
            std::uint64_t c = h.count(i, j);
            if (c == 0) continue;
            double p = static_cast<double>(c) / n;
            terms.push_back(p * std::log(p / (px[i] * py[j])));
        }
    std::sort(terms.begin(), terms.end());
    double mi = 0;
    for (double t : terms) mi += t;
    return std::max(mi, 0.0);  // plug-in MI is a KL divergence; clamp rounding dust
}

double miller_madow_term(std::size_t nonzero_x, std::size_t nonzero_y,
                         std::size_t nonzero_joint, std::uint64_t n) {
    double num = (static_cast<double>(nonzero_x) - 1.0) + (static_cast<double>(nonzero_y) - 1.0) -
                 (static_cast<double>(nonzero_joint) - 1.0);
    return num / (2.0 * static_cast<double>(n));
}

namespace {

MiEstimate finish_hist(const Histogram2D& h, const MiConfig& cfg) {
    MiEstimate e;
    e.estimator = MiEstimator::Hist;
    e.correction = cfg.correction;
    e.bins_x = h.bx();
    e.bins_y = h.by();
    e.n = h.n;
    if (h.degenerate_x || h.degenerate_y) {
        e.degenerate = true;
        return e;
    }
    e.raw_value = histogram_mi(h);
    e.value = e.raw_value;
    if (cfg.correction == MiCorrection::MillerMadow) {
        std::size_t bx = h.bx(), by = h.by();
        std::vector<std::uint64_t> cx(bx, 0), cy(by, 0);
        std::size_t mxy = 0;
        for (std::size_t i = 0; i < bx; ++i)
            for (std::size_t j = 0; j < by; ++j) {
                std::uint64_t c = h.count(i, j);
                cx[i] += c;
                cy[j] += c;
                if (c > 0) ++mxy;
            }
        auto nz = [](const std::vector<std::uint64_t>& v) {
            return static_cast<std::size_t>(std::count_if(v.begin(), v.end(),
                                                          [](std::uint64_t c) { return c > 0; }));
        };
        e.value = std::max(0.0, e.raw_value + miller_madow_term(nz(cx), nz(cy), mxy, h.n));
    }
    e.near_deterministic = e.value > 2.0;
    return e;
}

}  // namespace

MiEstimate mi_histogram(std::span<const double> x, std::span<const double> y,
                        const MiConfig& config) {
    if (x.size() != y.size()) throw shape_mismatch("x and y lengths differ");
    if (x.size() < 4) throw Error("TooFewSamples", "mi_histogram needs n >= 4");
    std::size_t bins = resolve_bins(config, x.size());
    Histogram2D h = fit_histogram_2d(x, y, bins, bins);
    return finish_hist(h, config);
}

MiEstimate mi_kde(std::span<const double> x, std::span<const double> y, const MiConfig& config) {
    if (x.size() != y.size()) throw shape_mismatch("x and y lengths differ");
    if (x.size() < 8) throw Error("TooFewSamples", "mi_kde needs n >= 8");

    MiEstimate e;
    e.estimator = MiEstimator::Kde;
    e.n = x.size();
    double hx, hy;
    try {
        hx = config.bandwidth_x ? *config.bandwidth_x : silverman_bandwidth(x);
        hy = config.bandwidth_y ? *config.bandwidth_y : silverman_bandwidth(y);
    } catch (const Error& err) {
        if (err.code() == "ZeroVariance") {
            e.degenerate = true;
            return e;
        }
        throw;
    }
    e.bandwidth_x = hx;
    e.bandwidth_y = hy;

    std::vector<double> lx = kde_log_density_1d_self(x, hx);
    std::vector<double> ly = kde_log_density_1d_self(y, hy);
    std::vector<double> lxy = kde_log_density_2d_self(x, y, hx, hy);
    double s = 0;
    for (std::size_t i = 0; i < x.size(); ++i) s += lxy[i] - lx[i] - ly[i];
    e.raw_value = s / static_cast<double>(x.size());
    e.value = std::max(e.raw_value, 0.0);
    e.near_deterministic = e.value > 2.0;
    return e;
}

double mi_correlation(double mi) {
    if (mi < 0) throw Error("NegativeMi", "mutual information must be >= 0");
    // 1 - exp(-2 mi) computed via expm1 to keep r accurate near 0
    return std::sqrt(-std::expm1(-2.0 * mi));
}

MiEstimate mi_mixed(std::span<const double> x, std::span<const int> labels,
                    const MiConfig& config) {
    if (x.size() != labels.size()) throw shape_mismatch("x and label lengths differ");
    if (x.size() < 4) throw Error("TooFewSamples", "mi_mixed needs n >= 4");

    std::map<int, std::size_t> class_index;
    for (int c : labels) class_index.emplace(c, class_index.size());
    // map insertion order is by key; rebuild contiguous indices in key order
    std::size_t ci = 0;
    for (auto& [label, idx] : class_index) idx = ci++;

    MiEstimate e;
    e.estimator = config.estimator;
    e.correction = config.correction;
    e.n = x.size();
    if (class_index.size() < 2) {
        e.degenerate = true;  // SingleClass
        return e;
    }

    if (config.estimator == MiEstimator::Hist) {
        std::size_t bins = resolve_bins(config, x.size());
        auto [mn_it, mx_it] = std::minmax_element(x.begin(), x.end());
        if (*mn_it == *mx_it) {
            e.degenerate = true;
            return e;
        }
        std::size_t nc = class_index.size();
        std::vector<std::uint64_t> counts(bins * nc, 0);
        double mn = *mn_it, span = *mx_it - *mn_it;
        for (std::size_t i = 0; i < x.size(); ++i) {
            auto bx = static_cast<std::size_t>((x[i] - mn) / span * static_cast<double>(bins));
            bx = std::min(bx, bins - 1);
            ++counts[bx * nc + class_index.at(labels[i])];
        }
        Histogram2D h;
        h.n = x.size();
        h.x_edges.resize(bins + 1);
        for (std::size_t i = 0; i <= bins; ++i)
            h.x_edges[i] = mn + span * static_cast<double>(i) / static_cast<double>(bins);
        h.y_edges.resize(nc + 1);
        for (std::size_t i = 0; i <= nc; ++i) h.y_edges[i] = static_cast<double>(i) - 0.5;
        h.counts = std::move(counts);
        e = finish_hist(h, config);
        e.estimator = MiEstimator::Hist;
        e.bins_x = bins;
        e.bins_y = nc;
        return e;
    }

    // KDE path: MI = H(x) - sum_c p(c) H(x | c), resubstitution entropies.
    if (x.size() < 8) throw Error("TooFewSamples", "mi_mixed kde path needs n >= 8");
    double h;
    try {
        h = config.bandwidth_x ? *config.bandwidth_x : silverman_bandwidth(x);
    } catch (const Error& err) {
        if (err.code() == "ZeroVariance") {
            e.degenerate = true;
            return e;
        }
        throw;
    }
    e.bandwidth_x = h;
    std::vector<double> lx = kde_log_density_1d_self(x, h);
    double hx_total = 0;
    for (double l : lx) hx_total -= l;
    hx_total /= static_cast<double>(x.size());

    double cond = 0;
    for (const auto& [label, idx] : class_index) {
        std::vector<double> xs;
        for (std::size_t i = 0; i < x.size(); ++i)
            if (labels[i] == label) xs.push_back(x[i]);
        // shared bandwidth keeps tiny or constant classes well-defined
        std::vector<double> lc = kde_log_density_1d_self(xs, h);
        double hc = 0;
        for (double l : lc) hc -= l;
        hc /= static_cast<double>(xs.size());
        cond += (static_cast<double>(xs.size()) / static_cast<double>(x.size())) * hc;
    }
    e.raw_value = hx_total - cond;
    e.value = std::max(e.raw_value, 0.0);
    e.near_deterministic = e.value > 2.0;
    return e;
}

std::string to_string(MiEstimator e) { return e == MiEstimator::Hist ? "hist" : "kde"; }
std::string to_string(MiCorrection c) { return c == MiCorrection::None ? "none" : "miller-madow"; }

}  // namespace sxai
