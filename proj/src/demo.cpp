#include "sxai/demo.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>

#include "sxai/errors.hpp"
#include "sxai/manifest.hpp"
#include "sxai/rng.hpp"
#include "sxai/tensor.hpp"

namespace fs = std::filesystem;

namespace sxai {

namespace {

// stream ids for the counter RNG; fixed forever (see docs/rng.md)
enum Stream : std::uint64_t {
    kStreamLatentFactors = 0,
    kStreamAttributeNoise = 1,
    kStreamObservationNoise = 2,
    kStreamLabelNoise = 3,
    kStreamMixingMatrix = 4,
    kStreamWeightInit = 10,
    kStreamDropout = 11,
    kStreamShuffle = 12,
    kStreamMcDropout = 20,
};

}  // namespace

SyntheticDataset generate_synthetic(const SyntheticConfig& config) {
    const std::size_t zd = config.latent_dim;
    const std::size_t xd = config.observed_dim;
    const std::size_t k = config.k;
    if (k > zd) throw Error("BadConfig", "attribute count exceeds latent factor count");

    SyntheticDataset ds;
    ds.config = config;

    CounterRng mix_rng(config.seed, kStreamMixingMatrix);
    ds.mixing.resize(xd * zd);
    for (auto& v : ds.mixing) v = static_cast<float>(mix_rng.normal());

    CounterRng z_rng(config.seed, kStreamLatentFactors);
    CounterRng a_rng(config.seed, kStreamAttributeNoise);
    CounterRng x_rng(config.seed, kStreamObservationNoise);
    CounterRng y_rng(config.seed, kStreamLabelNoise);

    auto gen_split = [&](std::size_t n, std::vector<float>& X, std::vector<float>& A,
                         std::vector<int>& Y) {
        X.resize(n * xd);
        A.resize(n * k);
        Y.resize(n);
        std::vector<double> z(zd);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < zd; ++j) z[j] = z_rng.normal();
            for (std::size_t j = 0; j < k; ++j)
                A[i * k + j] = static_cast<float>(z[j] + config.attribute_noise * a_rng.normal());
            for (std::size_t j = 0; j < xd; ++j) {
                double v = 0;
                for (std::size_t l = 0; l < zd; ++l) v += ds.mixing[j * zd + l] * z[l];
                X[i * xd + j] = static_cast<float>(v + config.observation_noise * x_rng.normal());
            }
            double logit = 2.0 * z[0] + 2.0 * z[1] + config.label_noise * y_rng.normal();
            Y[i] = logit > 0 ? 1 : 0;
        }
    };
    gen_split(config.n_train, ds.x_train, ds.a_train, ds.y_train);
    gen_split(config.n_test, ds.x_test, ds.a_test, ds.y_test);
    return ds;
}

Mlp<float> train_demo_network(const SyntheticDataset& dataset, const DemoTrainConfig& config,
                              std::uint64_t seed) {
    const auto& cfg = dataset.config;
    const std::size_t n = cfg.n_train;
    const std::size_t in_dim = cfg.observed_dim;
    const std::size_t hidden = config.hidden;
    const std::size_t k = cfg.k;

    Mlp<float> net = Mlp<float>::sized(in_dim, hidden, 2, k);
    CounterRng init(seed, kStreamWeightInit);
    auto init_layer = [&](std::vector<float>& w, std::size_t fan_in) {
        double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (auto& v : w) v = static_cast<float>(init.normal() * scale);
    };
    init_layer(net.w1, in_dim);
    init_layer(net.w2, hidden);
    init_layer(net.w3, hidden);

    CounterRng drop(seed, kStreamDropout);
    CounterRng shuffle(seed, kStreamShuffle);
    const auto lr = static_cast<float>(config.learning_rate);
    const auto attr_w = static_cast<float>(config.attribute_loss_weight);
    const auto keep = static_cast<float>(1.0 - config.dropout);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<float> mask(hidden);

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        for (std::size_t i = n; i > 1; --i)
            std::swap(order[i - 1], order[shuffle.below(i)]);

        for (std::size_t start = 0; start < n; start += config.batch_size) {
            std::size_t bsz = std::min(config.batch_size, n - start);
            Mlp<float> grads = Mlp<float>::sized(in_dim, hidden, 2, k);
            double loss = 0;
            for (std::size_t b = 0; b < bsz; ++b) {
                std::size_t i = order[start + b];
                for (std::size_t h = 0; h < hidden; ++h)
                    mask[h] = drop.uniform() < config.dropout ? 0.0f : 1.0f / keep;
                std::span<const float> x(dataset.x_train.data() + i * in_dim, in_dim);
                std::span<const float> a(dataset.a_train.data() + i * k, k);
                auto act = net.forward(x, mask);
                loss += net.loss(act, dataset.y_train[i], a, attr_w);
                net.backward(x, act, dataset.y_train[i], a, attr_w, mask, grads);
            }
            if (!std::isfinite(loss)) throw Error("DivergedLoss", "training loss is not finite");
            auto params = net.param_views();
            auto gviews = grads.param_views();
            auto sizes = net.param_sizes();
            auto scale = lr / static_cast<float>(bsz);
            for (std::size_t p = 0; p < params.size(); ++p)
                for (std::size_t j = 0; j < sizes[p]; ++j) params[p][j] -= scale * gviews[p][j];
        }
    }
    return net;
}

double network_accuracy(const Mlp<float>& net, const std::vector<float>& x,
                        const std::vector<int>& y) {
    std::size_t n = y.size();
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) {
        auto act = net.forward(std::span<const float>(x.data() + i * net.in_dim, net.in_dim));
        int pred = act.probs[1] > act.probs[0] ? 1 : 0;
        if (pred == y[i]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(n);
}

namespace {

double batch_loss(const Mlp<double>& net, const std::vector<double>& x,
                  const std::vector<int>& y, const std::vector<double>& attrs,
                  double attr_weight) {
    std::size_t n = y.size();
    double loss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        auto act = net.forward(std::span<const double>(x.data() + i * net.in_dim, net.in_dim));
        loss += net.loss(act, y[i], std::span<const double>(attrs.data() + i * net.k, net.k),
                         attr_weight);
    }
    return loss / static_cast<double>(n);
}

}  // namespace

double mlp_gradient_check(const Mlp<double>& net, const std::vector<double>& x,
                          const std::vector<int>& y, const std::vector<double>& attr_targets,
                          double attr_weight, double eps) {
    std::size_t n = y.size();
    Mlp<double> grads = Mlp<double>::sized(net.in_dim, net.hidden, net.classes, net.k);
    for (std::size_t i = 0; i < n; ++i) {
        std::span<const double> xi(x.data() + i * net.in_dim, net.in_dim);
        std::span<const double> ai(attr_targets.data() + i * net.k, net.k);
        auto act = net.forward(xi);
        net.backward(xi, act, y[i], ai, attr_weight, {}, grads);
    }
    auto gviews = grads.param_views();
    auto sizes = grads.param_sizes();
    for (std::size_t p = 0; p < gviews.size(); ++p)
        for (std::size_t j = 0; j < sizes[p]; ++j) gviews[p][j] /= static_cast<double>(n);

    Mlp<double> probe = net;
    auto pviews = probe.param_views();
    double max_rel = 0;
    for (std::size_t p = 0; p < pviews.size(); ++p) {
        for (std::size_t j = 0; j < sizes[p]; ++j) {
            double orig = pviews[p][j];
            pviews[p][j] = orig + eps;
            double lp = batch_loss(probe, x, y, attr_targets, attr_weight);
            pviews[p][j] = orig - eps;
            double lm = batch_loss(probe, x, y, attr_targets, attr_weight);
            pviews[p][j] = orig;
            double fd = (lp - lm) / (2.0 * eps);
            double denom = std::max({std::abs(fd), std::abs(gviews[p][j]), 1e-8});
            max_rel = std::max(max_rel, std::abs(fd - gviews[p][j]) / denom);
        }
    }
    return max_rel;
}

double mlp_gradient_check_random(std::uint64_t seed, double eps) {
    // tiny net: 4 -> 3 -> {2 classes, 1 attribute}, smooth region probed
    Mlp<double> net = Mlp<double>::sized(4, 3, 2, 1);
    CounterRng rng(seed, kStreamWeightInit);
    auto views = net.param_views();
    auto sizes = net.param_sizes();
    for (std::size_t p = 0; p < views.size(); ++p)
        for (std::size_t j = 0; j < sizes[p]; ++j) views[p][j] = 0.5 * rng.normal();

    std::size_t n = 8;
    std::vector<double> x(n * 4), attrs(n * 1);
    std::vector<int> y(n);
    for (auto& v : x) v = rng.normal();
    for (auto& v : attrs) v = rng.normal();
    for (auto& v : y) v = static_cast<int>(rng.below(2));
    return mlp_gradient_check(net, x, y, attrs, 1.0, eps);
}

void dump_activations(const Mlp<float>& net, const SyntheticDataset& dataset,
                      std::size_t mc_passes, const std::string& out_dir,
                      bool mc_dropout_enabled) {
    const auto& cfg = dataset.config;
    const std::size_t n_train = cfg.n_train, n_test = cfg.n_test;
    const std::size_t n = n_train + n_test;
    const std::size_t in_dim = cfg.observed_dim, hidden = net.hidden, k = cfg.k;
    const std::size_t classes = net.classes;
    if (mc_passes < 2) throw Error("BadConfig", "need at least 2 MC passes");

    fs::create_directories(out_dir);

    std::vector<float> all_x(n * in_dim);
    std::copy(dataset.x_train.begin(), dataset.x_train.end(), all_x.begin());
    std::copy(dataset.x_test.begin(), dataset.x_test.end(),
              all_x.begin() + static_cast<std::ptrdiff_t>(n_train * in_dim));
    std::vector<float> all_labels(n);
    for (std::size_t i = 0; i < n_train; ++i) all_labels[i] = static_cast<float>(dataset.y_train[i]);
    for (std::size_t i = 0; i < n_test; ++i)
        all_labels[n_train + i] = static_cast<float>(dataset.y_test[i]);

    std::vector<float> latents(n * hidden), decision(n * classes), attrs(n * k);
    for (std::size_t i = 0; i < n; ++i) {
        auto act = net.forward(std::span<const float>(all_x.data() + i * in_dim, in_dim));
        std::copy(act.hidden_out.begin(), act.hidden_out.end(), latents.begin() + static_cast<std::ptrdiff_t>(i * hidden));
        std::copy(act.probs.begin(), act.probs.end(), decision.begin() + static_cast<std::ptrdiff_t>(i * classes));
        std::copy(act.attrs.begin(), act.attrs.end(), attrs.begin() + static_cast<std::ptrdiff_t>(i * k));
    }

    const double dropout = 0.2;
    const auto keep = static_cast<float>(1.0 - dropout);
    CounterRng mc_rng(cfg.seed, kStreamMcDropout);
    std::vector<float> mc_dec(mc_passes * n * classes), mc_attr(mc_passes * n * k);
    std::vector<float> mask(hidden, 1.0f);
    for (std::size_t t = 0; t < mc_passes; ++t) {
        for (std::size_t i = 0; i < n; ++i) {
            if (mc_dropout_enabled)
                for (std::size_t h = 0; h < hidden; ++h)
                    mask[h] = mc_rng.uniform() < dropout ? 0.0f : 1.0f / keep;
            auto act = net.forward(std::span<const float>(all_x.data() + i * in_dim, in_dim),
                                   mc_dropout_enabled ? std::span<const float>(mask)
                                                      : std::span<const float>{});
            std::copy(act.probs.begin(), act.probs.end(),
                      mc_dec.begin() + static_cast<std::ptrdiff_t>((t * n + i) * classes));
            std::copy(act.attrs.begin(), act.attrs.end(),
                      mc_attr.begin() + static_cast<std::ptrdiff_t>((t * n + i) * k));
        }
    }

    auto write = [&](const std::string& name, TensorFile t) {
        write_tensor((fs::path(out_dir) / name).string(), t);
    };
    write("train_inputs.sxt", make_tensor({n_train, in_dim}, dataset.x_train));
    write("query_inputs.sxt", make_tensor({n_test, in_dim}, dataset.x_test));
    write("latents.sxt", make_tensor({n, hidden}, std::move(latents)));
    write("decision.sxt", make_tensor({n, classes}, std::move(decision)));
    write("attributes.sxt", make_tensor({n, k}, std::move(attrs)));
    write("labels.sxt", make_tensor({n}, std::move(all_labels)));
    write("mc_decision_samples.sxt", make_tensor({mc_passes, n, classes}, std::move(mc_dec)));
    write("mc_attribute_samples.sxt", make_tensor({mc_passes, n, k}, std::move(mc_attr)));

    Manifest m;
    m.version = 1;
    m.roles["train_inputs"] = {"train_inputs.sxt", {n_train, in_dim}};
    m.roles["query_inputs"] = {"query_inputs.sxt", {n_test, in_dim}};
    m.roles["latents"] = {"latents.sxt", {n, hidden}};
    m.roles["decision"] = {"decision.sxt", {n, classes}};
    m.roles["attributes"] = {"attributes.sxt", {n, k}};
    m.roles["labels"] = {"labels.sxt", {n}};
    m.roles["mc_decision_samples"] = {"mc_decision_samples.sxt", {mc_passes, n, classes}};
    m.roles["mc_attribute_samples"] = {"mc_attribute_samples.sxt", {mc_passes, n, k}};
    m.metadata["seed"] = std::to_string(cfg.seed);
    m.metadata["model"] = "sxai-demo-mlp";
    m.metadata["n_train"] = std::to_string(n_train);
    for (std::size_t j = 0; j < cfg.attribute_names.size(); ++j)
        m.metadata["attribute_" + std::to_string(j)] = cfg.attribute_names[j];
    write_manifest((fs::path(out_dir) / "manifest.json").string(), m);
}

void demo_run(std::uint64_t seed, const std::string& out_dir, std::size_t mc_passes) {
    SyntheticConfig cfg;
    cfg.seed = seed;
    SyntheticDataset ds = generate_synthetic(cfg);
    DemoTrainConfig tcfg;
    Mlp<float> net = train_demo_network(ds, tcfg, seed);
    dump_activations(net, ds, mc_passes, out_dir);
}

}  // namespace sxai
