#ifndef SXAI_UNCERTAINTY_HPP
#define SXAI_UNCERTAINTY_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace sxai {

// Aggregate of T stochastic forward passes for one example.
struct UncertaintySummary {
    std::vector<double> predictive_mean;   // probability vector (classification)
    double predictive_entropy = 0;         // H(mean), nats
    double expected_entropy = 0;           // mean per-pass entropy, nats
    double epistemic = 0;                  // predictive - expected, clamped at 0
    std::vector<double> class_variance;    // per-class sample variance
    std::size_t passes = 0;
};

// samples: T x C rows, each a probability vector (sum within 1e-6 of 1).
UncertaintySummary aggregate_classification(std::span<const double> samples, std::size_t t,
                                            std::size_t c);

struct RegressionSummary {
    double mean = 0;
    double std_dev = 0;  // unbiased (T-1)
    std::size_t passes = 0;
};

RegressionSummary aggregate_regression(std::span<const double> samples);

enum class UncertaintyLevel { Low, Moderate, High };
std::string to_string(UncertaintyLevel level);

struct UncertaintyThresholds {
    double epistemic_yellow = 0.15;
    double epistemic_red = 0.5;
};

// Boundary inclusive: epistemic == red already flags HIGH.
UncertaintyLevel uncertainty_flag(const UncertaintySummary& summary,
                                  const UncertaintyThresholds& thresholds);

// 90th/99th percentiles (linear interpolation) of epistemic values from a
// held-out calibration split.
UncertaintyThresholds derive_thresholds(std::vector<double> calibration_epistemics);

}  // namespace sxai

#endif
