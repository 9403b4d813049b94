#ifndef SXAI_MI_HPP
#define SXAI_MI_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sxai/density.hpp"

namespace sxai {

enum class MiEstimator { Hist, Kde };
enum class MiCorrection { None, MillerMadow };

struct MiConfig {
    MiEstimator estimator = MiEstimator::Hist;
    MiCorrection correction = MiCorrection::None;
    std::size_t bins = 0;  // 0 = auto via bin_count_rule
    std::optional<double> bandwidth_x;
    std::optional<double> bandwidth_y;
};

// A mutual-information value in nats with full estimator provenance.
struct MiEstimate {
    double value = 0;       // nats, clamped at 0
    double raw_value = 0;   // pre-correction / pre-clamp
    MiEstimator estimator = MiEstimator::Hist;
    MiCorrection correction = MiCorrection::None;
    std::size_t bins_x = 0, bins_y = 0;  // hist path
    double bandwidth_x = 0, bandwidth_y = 0;  // kde path
    std::uint64_t n = 0;
    bool degenerate = false;          // constant axis / single class
    bool near_deterministic = false;  // resubstitution blow-up (> 2 nats)
};

// -sum p ln p with 0 ln 0 := 0; input must sum to 1 within 1e-9.
double entropy_discrete(std::span<const double> p);

// Plug-in MI over the nonzero cells of a fitted Histogram2D (in nats).
double histogram_mi(const Histogram2D& h);

// Miller-Madow correction term for a 2-D plug-in MI.
double miller_madow_term(std::size_t nonzero_x, std::size_t nonzero_y,
                         std::size_t nonzero_joint, std::uint64_t n);

MiEstimate mi_histogram(std::span<const double> x, std::span<const double> y,
                        const MiConfig& config = {});

MiEstimate mi_kde(std::span<const double> x, std::span<const double> y,
                  const MiConfig& config = {});

// r = sqrt(1 - exp(-2 mi)), the MI correlation coefficient.
double mi_correlation(double mi);

// MI between a continuous variable and integral class labels.
MiEstimate mi_mixed(std::span<const double> x, std::span<const int> labels,
                    const MiConfig& config = {});

std::string to_string(MiEstimator e);
std::string to_string(MiCorrection c);

}  // namespace sxai

#endif
