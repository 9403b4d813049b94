#include "sxai/posthoc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "sxai/errors.hpp"

namespace sxai {

namespace {

// params layout: C rows of (K weights + 1 bias)
std::size_t param_count(std::size_t c, std::size_t k) { return c * (k + 1); }

void softmax_row(std::span<const double> params, std::span<const double> x, std::size_t k,
                 std::size_t c, std::vector<double>& probs) {
    probs.resize(c);
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t cc = 0; cc < c; ++cc) {
        const double* w = params.data() + cc * (k + 1);
        double z = w[k];
        for (std::size_t j = 0; j < k; ++j) z += w[j] * x[j];
        probs[cc] = z;
        mx = std::max(mx, z);
    }
    double sum = 0;
    for (double& p : probs) {
        p = std::exp(p - mx);
        sum += p;
    }
    for (double& p : probs) p /= sum;
}

}  // namespace

double surrogate_loss(std::span<const double> params, std::span<const double> attributes,
                      std::size_t k, std::span<const int> labels, std::size_t c,
                      double l2_strength) {
    std::size_t n = labels.size();
    double loss = 0;
    std::vector<double> probs;
    for (std::size_t i = 0; i < n; ++i) {
        softmax_row(params, attributes.subspan(i * k, k), k, c, probs);
        loss -= std::log(std::max(probs[static_cast<std::size_t>(labels[i])], 1e-300));
    }
    loss /= static_cast<double>(n);
    double reg = 0;
    for (std::size_t cc = 0; cc < c; ++cc) {
        const double* w = params.data() + cc * (k + 1);
        for (std::size_t j = 0; j < k; ++j) reg += w[j] * w[j];  // bias unregularized
    }
    return loss + 0.5 * l2_strength * reg;
}

std::vector<double> surrogate_gradient(std::span<const double> params,
                                       std::span<const double> attributes, std::size_t k,
                                       std::span<const int> labels, std::size_t c,
                                       double l2_strength) {
    std::size_t n = labels.size();
    std::vector<double> grad(param_count(c, k), 0.0);
    std::vector<double> probs;
    for (std::size_t i = 0; i < n; ++i) {
        auto x = attributes.subspan(i * k, k);
        softmax_row(params, x, k, c, probs);
        for (std::size_t cc = 0; cc < c; ++cc) {
            double delta = probs[cc] - (static_cast<std::size_t>(labels[i]) == cc ? 1.0 : 0.0);
            double* g = grad.data() + cc * (k + 1);
            for (std::size_t j = 0; j < k; ++j) g[j] += delta * x[j];
            g[k] += delta;
        }
    }
    for (double& g : grad) g /= static_cast<double>(n);
    for (std::size_t cc = 0; cc < c; ++cc) {
        double* g = grad.data() + cc * (k + 1);
        const double* w = params.data() + cc * (k + 1);
        for (std::size_t j = 0; j < k; ++j) g[j] += l2_strength * w[j];
    }
    return grad;
}

SurrogateModel train_surrogate(std::span<const double> attributes, std::size_t k,
                               std::span<const int> labels, const SurrogateConfig& config) {
    std::size_t n = labels.size();
    if (k == 0 || attributes.size() != n * k) throw shape_mismatch("attributes must be N x K");
    if (n < 10 * k) throw Error("TooFewSamples", "surrogate needs N >= 10 K");
    for (double v : attributes)
        if (!std::isfinite(v)) throw Error("NonFinite", "non-finite attribute value");

    std::set<int> classes(labels.begin(), labels.end());
    if (classes.size() < 2) throw Error("SingleClass", "need at least 2 classes");
    int max_label = *classes.rbegin();
    if (*classes.begin() < 0) throw Error("BadLabel", "negative class label");
    std::size_t c = static_cast<std::size_t>(max_label) + 1;

    // zero init makes training deterministic with no seed involved
    std::vector<double> params(param_count(c, k), 0.0);
    double loss = surrogate_loss(params, attributes, k, labels, c, config.l2_strength);
    std::size_t iter = 0;
    for (; iter < config.max_iterations; ++iter) {
        std::vector<double> grad =
            surrogate_gradient(params, attributes, k, labels, c, config.l2_strength);
        double gnorm = 0;
        for (double g : grad) gnorm = std::max(gnorm, std::abs(g));
        if (gnorm < config.gradient_tolerance) break;

        // backtracking: halve the step until the loss decreases
        double step = config.learning_rate;
        std::vector<double> trial(params.size());
        double trial_loss = loss;
        for (int bt = 0; bt < 60; ++bt) {
            for (std::size_t j = 0; j < params.size(); ++j)
                trial[j] = params[j] - step * grad[j];
            trial_loss = surrogate_loss(trial, attributes, k, labels, c, config.l2_strength);
            if (trial_loss < loss) break;
            step *= 0.5;
        }
        if (!(trial_loss < loss)) break;  // no descent direction progress left
        params.swap(trial);
        loss = trial_loss;
        if (!std::isfinite(loss)) throw Error("NonFinite", "training loss diverged");
    }

    SurrogateModel model;
    model.num_classes = c;
    model.num_features = k;
    model.weights.resize(c * k);
    model.bias.resize(c);
    for (std::size_t cc = 0; cc < c; ++cc) {
        for (std::size_t j = 0; j < k; ++j) model.weights[cc * k + j] = params[cc * (k + 1) + j];
        model.bias[cc] = params[cc * (k + 1) + k];
    }
    model.iterations = iter;
    model.final_loss = loss;
    model.learning_rate = config.learning_rate;
    model.l2_strength = config.l2_strength;
    return model;
}

std::vector<int> surrogate_predict(const SurrogateModel& model,
                                   std::span<const double> attributes) {
    std::size_t k = model.num_features, c = model.num_classes;
    if (attributes.size() % k != 0) throw shape_mismatch("attributes must be N x K");
    std::size_t n = attributes.size() / k;
    std::vector<int> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        int best = 0;
        double best_z = -std::numeric_limits<double>::infinity();
        for (std::size_t cc = 0; cc < c; ++cc) {
            double z = model.bias[cc];
            for (std::size_t j = 0; j < k; ++j) z += model.weights[cc * k + j] * attributes[i * k + j];
            if (z > best_z) {  // ties stay with the lower class index
                best_z = z;
                best = static_cast<int>(cc);
            }
        }
        out[i] = best;
    }
    return out;
}

SurrogateMetrics evaluate_surrogate(const SurrogateModel& model,
                                    std::span<const double> attributes,
                                    std::span<const int> labels) {
    std::size_t k = model.num_features, c = model.num_classes;
    if (attributes.size() != labels.size() * k) throw shape_mismatch("attributes must be N x K");
    std::size_t n = labels.size();

    std::vector<int> pred = surrogate_predict(model, attributes);
    SurrogateMetrics m;
    m.per_class_accuracy.assign(c, 0.0);
    std::vector<std::size_t> class_total(c, 0), class_hit(c, 0);

    std::vector<double> params(c * (k + 1));
    for (std::size_t cc = 0; cc < c; ++cc) {
        for (std::size_t j = 0; j < k; ++j) params[cc * (k + 1) + j] = model.weights[cc * k + j];
        params[cc * (k + 1) + k] = model.bias[cc];
    }

    std::size_t hits = 0;
    double log_loss = 0;
    std::vector<double> probs;
    for (std::size_t i = 0; i < n; ++i) {
        auto y = static_cast<std::size_t>(labels[i]);
        if (y >= c) throw Error("BadLabel", "label outside the trained class set");
        ++class_total[y];
        if (pred[i] == labels[i]) {
            ++hits;
            ++class_hit[y];
        }
        softmax_row(params, attributes.subspan(i * k, k), k, c, probs);
        log_loss -= std::log(std::max(probs[y], 1e-300));
    }
    m.accuracy = static_cast<double>(hits) / static_cast<double>(n);
    m.mean_log_loss = log_loss / static_cast<double>(n);
    for (std::size_t cc = 0; cc < c; ++cc)
        m.per_class_accuracy[cc] = class_total[cc] == 0
                                       ? 0.0
                                       : static_cast<double>(class_hit[cc]) /
                                             static_cast<double>(class_total[cc]);
    return m;
}

FidelityResult fidelity_gap(double main_accuracy, double surrogate_accuracy, double threshold) {
    if (main_accuracy < 0 || main_accuracy > 1 || surrogate_accuracy < 0 || surrogate_accuracy > 1)
        throw Error("OutOfRange", "accuracies must lie in [0, 1]");
    FidelityResult r;
    r.gap = main_accuracy - surrogate_accuracy;
    r.tag = r.gap <= threshold ? "ATTRIBUTES_SUFFICIENT" : "ADDITIONAL_FEATURES_LIKELY";
    return r;
}

}  // namespace sxai
