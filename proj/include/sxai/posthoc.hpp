#ifndef SXAI_POSTHOC_HPP
#define SXAI_POSTHOC_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace sxai {

// Multinomial logistic surrogate: predicts the model's diagnosis from its
// explanation attributes alone.
struct SurrogateModel {
    std::size_t num_classes = 0;
    std::size_t num_features = 0;
    std::vector<double> weights;  // C x K
    std::vector<double> bias;     // C
    std::size_t iterations = 0;
    double final_loss = 0;
    double learning_rate = 0;
    double l2_strength = 0;
};

struct SurrogateConfig {
    double learning_rate = 1.0;   // initial step; backtracking halves as needed
    double l2_strength = 1e-4;
    double gradient_tolerance = 1e-6;  // infinity norm
    std::size_t max_iterations = 5000;
};

SurrogateModel train_surrogate(std::span<const double> attributes, std::size_t k,
                               std::span<const int> labels,
                               const SurrogateConfig& config = {});

struct SurrogateMetrics {
    double accuracy = 0;
    std::vector<double> per_class_accuracy;
    double mean_log_loss = 0;
};

SurrogateMetrics evaluate_surrogate(const SurrogateModel& model,
                                    std::span<const double> attributes,
                                    std::span<const int> labels);

std::vector<int> surrogate_predict(const SurrogateModel& model,
                                   std::span<const double> attributes);

struct FidelityResult {
    double gap = 0;  // main accuracy - surrogate accuracy
    std::string tag; // ATTRIBUTES_SUFFICIENT | ADDITIONAL_FEATURES_LIKELY
};

FidelityResult fidelity_gap(double main_accuracy, double surrogate_accuracy,
                            double threshold = 0.02);

// L2-regularized multinomial log-loss and its analytic gradient; exposed for
// the finite-difference check in the test suite.
double surrogate_loss(std::span<const double> params, std::span<const double> attributes,
                      std::size_t k, std::span<const int> labels, std::size_t c,
                      double l2_strength);
std::vector<double> surrogate_gradient(std::span<const double> params,
                                       std::span<const double> attributes, std::size_t k,
                                       std::span<const int> labels, std::size_t c,
                                       double l2_strength);

}  // namespace sxai

#endif
