#include "sxai/uncertainty.hpp"

#include <algorithm>
#include <cmath>

#include "sxai/errors.hpp"

namespace sxai {

UncertaintySummary aggregate_classification(std::span<const double> samples, std::size_t t,
                                            std::size_t c) {
    if (t < 2) throw Error("TooFewSamples", "need at least 2 stochastic passes");
    if (c < 2 || samples.size() != t * c) throw shape_mismatch("samples must be T x C, C >= 2");

    UncertaintySummary s;
    s.passes = t;

    // bitwise-identical passes carry no disagreement; skip the averaging so
    // rounding noise cannot leak into epistemic or variance
    bool all_equal = true;
    for (std::size_t r = 1; r < t && all_equal; ++r)
        for (std::size_t j = 0; j < c; ++j)
            if (samples[r * c + j] != samples[j]) {
                all_equal = false;
                break;
            }

    s.predictive_mean.assign(c, 0.0);
    double expected = 0;
    for (std::size_t r = 0; r < t; ++r) {
        auto row = samples.subspan(r * c, c);
        double sum = 0;
        for (double v : row) {
            if (v < -1e-12) throw Error("RowNotNormalized", "negative probability");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-6)
            throw Error("RowNotNormalized", "row sums to " + std::to_string(sum));
        double h = 0;
        for (std::size_t j = 0; j < c; ++j) {
            double v = std::max(row[j], 0.0);
            s.predictive_mean[j] += v;
            if (v > 0) h -= v * std::log(v);
        }
        expected += h;
    }
    for (double& v : s.predictive_mean) v /= static_cast<double>(t);
    s.expected_entropy = expected / static_cast<double>(t);

    double hp = 0;
    for (double v : s.predictive_mean)
        if (v > 0) hp -= v * std::log(v);
    s.predictive_entropy = hp;

    if (all_equal) {
        s.predictive_mean.assign(samples.begin(), samples.begin() + c);
        s.predictive_entropy = s.expected_entropy;
        s.epistemic = 0.0;
        s.class_variance.assign(c, 0.0);
        return s;
    }

    double epi = s.predictive_entropy - s.expected_entropy;
    if (epi < -1e-9) throw Error("JensenViolation", "predictive entropy below expected entropy");
    s.epistemic = std::max(epi, 0.0);

    s.class_variance.assign(c, 0.0);
    for (std::size_t j = 0; j < c; ++j) {
        double ss = 0;
        for (std::size_t r = 0; r < t; ++r) {
            double dv = samples[r * c + j] - s.predictive_mean[j];
            ss += dv * dv;
        }
        s.class_variance[j] = ss / static_cast<double>(t - 1);
    }
    return s;
}

RegressionSummary aggregate_regression(std::span<const double> samples) {
    if (samples.size() < 2) throw Error("TooFewSamples", "need at least 2 stochastic passes");
    RegressionSummary s;
    s.passes = samples.size();
    double n = static_cast<double>(samples.size());
    for (double v : samples) s.mean += v;
    s.mean /= n;
    double ss = 0;
    for (double v : samples) ss += (v - s.mean) * (v - s.mean);
    s.std_dev = std::sqrt(ss / (n - 1.0));
    return s;
}

std::string to_string(UncertaintyLevel level) {
    switch (level) {
        case UncertaintyLevel::Low: return "LOW";
        case UncertaintyLevel::Moderate: return "MODERATE";
        case UncertaintyLevel::High: return "HIGH";
    }
    return "?";
}

UncertaintyLevel uncertainty_flag(const UncertaintySummary& summary,
                                  const UncertaintyThresholds& thresholds) {
    if (!(thresholds.epistemic_yellow > 0) ||
        !(thresholds.epistemic_red > thresholds.epistemic_yellow))
        throw Error("BadThresholds", "need 0 < yellow < red");
    if (summary.epistemic >= thresholds.epistemic_red) return UncertaintyLevel::High;
    if (summary.epistemic >= thresholds.epistemic_yellow) return UncertaintyLevel::Moderate;
    return UncertaintyLevel::Low;
}

namespace {

double percentile(const std::vector<double>& sorted, double p) {
    double pos = p * static_cast<double>(sorted.size() - 1);
    auto lo = static_cast<std::size_t>(pos);
    double frac = pos - static_cast<double>(lo);
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace

UncertaintyThresholds derive_thresholds(std::vector<double> calibration_epistemics) {
    if (calibration_epistemics.size() < 2)
        throw Error("TooFewSamples", "calibration split too small");
    std::sort(calibration_epistemics.begin(), calibration_epistemics.end());
    UncertaintyThresholds t;
    t.epistemic_yellow = percentile(calibration_epistemics, 0.90);
    t.epistemic_red = percentile(calibration_epistemics, 0.99);
    return t;
}

}  // namespace sxai
