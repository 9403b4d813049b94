#ifndef SXAI_DEMO_HPP
#define SXAI_DEMO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "sxai/mlp.hpp"

namespace sxai {

// Desk-scale synthetic stand-in for a two-branch diagnosis model: four latent
// factors drive four ordinal-style attributes, but only factors 0 and 1 enter
// the label. The network therefore has two genuinely decision-related
// attributes and two decoys, which gives the relatedness audit a known
// ground truth.
struct SyntheticConfig {
    std::size_t n_train = 2000;
    std::size_t n_test = 500;
    std::size_t latent_dim = 4;
    std::size_t observed_dim = 16;
    std::size_t k = 4;
    std::vector<std::string> attribute_names = {"subtlety", "sphericity", "margin", "lobulation"};
    std::vector<std::size_t> causal_attributes = {0, 1};
    double attribute_noise = 0.1;
    double observation_noise = 0.05;
    double label_noise = 0.1;
    std::uint64_t seed = 42;
};

struct SyntheticDataset {
    SyntheticConfig config;
    std::vector<float> x_train, x_test;      // n x observed_dim
    std::vector<float> a_train, a_test;      // n x k
    std::vector<int> y_train, y_test;        // binary labels
    std::vector<float> mixing;               // observed_dim x latent_dim
};

SyntheticDataset generate_synthetic(const SyntheticConfig& config);

struct DemoTrainConfig {
    std::size_t hidden = 32;
    double learning_rate = 0.05;
    std::size_t epochs = 200;
    std::size_t batch_size = 64;
    double dropout = 0.2;
    double attribute_loss_weight = 1.0;
};

Mlp<float> train_demo_network(const SyntheticDataset& dataset, const DemoTrainConfig& config,
                              std::uint64_t seed);

double network_accuracy(const Mlp<float>& net, const std::vector<float>& x,
                        const std::vector<int>& y);

// Central-difference check of the analytic gradients on an f64 shadow copy,
// dropout disabled. Returns the max relative error over all parameters.
double mlp_gradient_check(const Mlp<double>& net, const std::vector<double>& x,
                          const std::vector<int>& y, const std::vector<double>& attr_targets,
                          double attr_weight, double eps = 1e-4);

// Builds a small random net + batch and runs the check.
double mlp_gradient_check_random(std::uint64_t seed, double eps = 1e-4);

// Writes manifest + tensors for the full pipeline: rows [0, n_train) are the
// training examples, the rest the test queries. MC passes keep dropout live.
void dump_activations(const Mlp<float>& net, const SyntheticDataset& dataset,
                      std::size_t mc_passes, const std::string& out_dir,
                      bool mc_dropout_enabled = true);

// generate + train + dump with the default config
void demo_run(std::uint64_t seed, const std::string& out_dir, std::size_t mc_passes = 30);

}  // namespace sxai

#endif
