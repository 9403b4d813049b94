#ifndef SXAI_DENSITY_HPP
#define SXAI_DENSITY_HPP

#include <cstdint>
#include <span>
#include <vector>

namespace sxai {

// Equal-width 2-D histogram over the observed range, right-most edge inclusive.
struct Histogram2D {
    std::vector<double> x_edges;   // size bx+1, strictly ascending
    std::vector<double> y_edges;   // size by+1
    std::vector<std::uint64_t> counts;  // bx * by, row-major (x outer)
    std::uint64_t n = 0;
    bool degenerate_x = false;  // axis had max == min, collapsed to one bin
    bool degenerate_y = false;

    std::size_t bx() const { return x_edges.size() - 1; }
    std::size_t by() const { return y_edges.size() - 1; }
    std::uint64_t count(std::size_t ix, std::size_t iy) const { return counts[ix * by() + iy]; }
};

// bins-per-axis heuristic: clamp(ceil(n^(1/3)), 4, 64)
std::size_t bin_count_rule(std::size_t n);

Histogram2D fit_histogram_2d(std::span<const double> x, std::span<const double> y,
                             std::size_t bins_x, std::size_t bins_y);

// h = 1.06 * sigma * n^(-1/5), sigma the (n-1)-denominator sample std.
double silverman_bandwidth(std::span<const double> x);

// Product-Gaussian Parzen model. Immutable after construction; evaluation is
// log-sum-exp so the log-density stays finite for every finite query.
class KdeModel {
public:
    KdeModel(std::vector<double> points, std::size_t dim, std::vector<double> bandwidths);

    // Silverman bandwidth per dimension.
    static KdeModel fit(std::vector<double> points, std::size_t dim);

    double log_density(std::span<const double> query) const;

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return points_.size() / dim_; }
    const std::vector<double>& bandwidths() const { return bandwidths_; }
    const std::vector<double>& points() const { return points_; }

private:
    std::vector<double> points_;  // n x dim, row-major
    std::size_t dim_;
    std::vector<double> bandwidths_;
    double log_norm_;  // log(n * prod_d h_d * (2pi)^(dim/2))
};

}  // namespace sxai

#endif
