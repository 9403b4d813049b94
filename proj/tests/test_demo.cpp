#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <vector>

#include "sxai/demo.hpp"
#include "sxai/manifest.hpp"
#include "sxai/rng.hpp"
#include "sxai/uncertainty.hpp"

using namespace sxai;
namespace fs = std::filesystem;

TEST_CASE("counter rng streams are reproducible and independent") {
    CounterRng a(42, 0), b(42, 0), c(42, 1);
    std::vector<std::uint64_t> va, vb, vc;
    for (int i = 0; i < 32; ++i) {
        va.push_back(a.next_u64());
        vb.push_back(b.next_u64());
        vc.push_back(c.next_u64());
    }
    CHECK(va == vb);
    CHECK(va != vc);

    CounterRng u(7, 3);
    for (int i = 0; i < 1000; ++i) {
        double x = u.uniform();
        CHECK(x >= 0.0);
        CHECK(x < 1.0);
        double o = u.uniform_open();
        CHECK(o > 0.0);
        CHECK(o <= 1.0);
        CHECK(u.below(10) < 10);
    }
}

TEST_CASE("rng normals have sane moments") {
    CounterRng rng(1, 2);
    double sum = 0, sq = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        double v = rng.normal();
        sum += v;
        sq += v * v;
    }
    CHECK(sum / n == doctest::Approx(0.0).epsilon(0.03));
    CHECK(sq / n == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("synthetic generation is deterministic and balanced") {
    SyntheticConfig cfg;
    cfg.n_train = 2000;
    cfg.n_test = 100;
    SyntheticDataset a = generate_synthetic(cfg);
    SyntheticDataset b = generate_synthetic(cfg);
    CHECK(a.x_train == b.x_train);
    CHECK(a.a_train == b.a_train);
    CHECK(a.y_train == b.y_train);

    cfg.seed = 43;
    SyntheticDataset c = generate_synthetic(cfg);
    CHECK(a.x_train != c.x_train);

    double pos = 0;
    for (int y : a.y_train) pos += y;
    CHECK(pos / 2000.0 == doctest::Approx(0.5).epsilon(0.06));

    CHECK(a.x_train.size() == 2000 * 16);
    CHECK(a.a_test.size() == 100 * 4);
}

TEST_CASE("causal attributes track the label, decoys do not") {
    SyntheticConfig cfg;
    cfg.n_train = 4000;
    SyntheticDataset d = generate_synthetic(cfg);
    auto corr = [&](std::size_t j) {
        double ma = 0, my = 0;
        for (std::size_t i = 0; i < cfg.n_train; ++i) {
            ma += d.a_train[i * 4 + j];
            my += d.y_train[i];
        }
        ma /= cfg.n_train;
        my /= cfg.n_train;
        double num = 0, va = 0, vy = 0;
        for (std::size_t i = 0; i < cfg.n_train; ++i) {
            double da = d.a_train[i * 4 + j] - ma, dy = d.y_train[i] - my;
            num += da * dy;
            va += da * da;
            vy += dy * dy;
        }
        return num / std::sqrt(va * vy);
    };
    CHECK(std::fabs(corr(0)) > 0.4);
    CHECK(std::fabs(corr(1)) > 0.4);
    CHECK(std::fabs(corr(2)) < 0.1);
    CHECK(std::fabs(corr(3)) < 0.1);
}

TEST_CASE("gradient check on a tiny random net") {
    CHECK(mlp_gradient_check_random(7) < 1e-4);
    CHECK(mlp_gradient_check_random(8) < 1e-4);
}

TEST_CASE("short training run learns the task") {
    SyntheticConfig cfg;
    cfg.n_train = 600;
    cfg.n_test = 200;
    SyntheticDataset d = generate_synthetic(cfg);
    DemoTrainConfig tc;
    tc.epochs = 40;
    Mlp<float> net = train_demo_network(d, tc, cfg.seed);
    CHECK(network_accuracy(net, d.x_test, d.y_test) >= 0.8);
}

TEST_CASE("dump round trips through the loader") {
    SyntheticConfig cfg;
    cfg.n_train = 200;
    cfg.n_test = 50;
    SyntheticDataset d = generate_synthetic(cfg);
    DemoTrainConfig tc;
    tc.epochs = 5;
    Mlp<float> net = train_demo_network(d, tc, cfg.seed);

    auto dir = (fs::temp_directory_path() / "sxai_demo_dump").string();
    dump_activations(net, d, 4, dir);
    ActivationDump dump = load_dump(dir + "/manifest.json");
    CHECK(dump.n == 250);
    CHECK(dump.m == 32);
    CHECK(dump.k == 4);
    CHECK(dump.c == 2);
    CHECK(dump.t == 4);
    REQUIRE(dump.train_rows().has_value());
    CHECK(*dump.train_rows() == 200);
    CHECK(dump.manifest.metadata.at("attribute_0") == "subtlety");
}

TEST_CASE("dumps are bit-identical across runs") {
    SyntheticConfig cfg;
    cfg.n_train = 150;
    cfg.n_test = 30;
    SyntheticDataset d = generate_synthetic(cfg);
    DemoTrainConfig tc;
    tc.epochs = 3;
    Mlp<float> net = train_demo_network(d, tc, cfg.seed);

    auto d1 = (fs::temp_directory_path() / "sxai_demo_rep1").string();
    auto d2 = (fs::temp_directory_path() / "sxai_demo_rep2").string();
    dump_activations(net, d, 3, d1);
    dump_activations(net, d, 3, d2);
    ActivationDump a = load_dump(d1 + "/manifest.json");
    ActivationDump b = load_dump(d2 + "/manifest.json");
    CHECK(a.latents.payload == b.latents.payload);
    CHECK(a.mc_decision_samples->payload == b.mc_decision_samples->payload);
}

TEST_CASE("disabling mc dropout collapses the passes") {
    SyntheticConfig cfg;
    cfg.n_train = 150;
    cfg.n_test = 20;
    SyntheticDataset d = generate_synthetic(cfg);
    DemoTrainConfig tc;
    tc.epochs = 3;
    Mlp<float> net = train_demo_network(d, tc, cfg.seed);

    auto dir = (fs::temp_directory_path() / "sxai_demo_nodrop").string();
    dump_activations(net, d, 5, dir, false);
    ActivationDump dump = load_dump(dir + "/manifest.json");
    const TensorFile& mc = *dump.mc_decision_samples;
    std::vector<double> rows(5 * 2);
    for (std::size_t t = 0; t < 5; ++t)
        for (std::size_t j = 0; j < 2; ++j) rows[t * 2 + j] = mc.at(t, 0, j);
    UncertaintySummary s = aggregate_classification(rows, 5, 2);
    CHECK(s.epistemic == 0.0);
    CHECK(s.class_variance[0] == 0.0);
}

TEST_CASE("zero training leaves the network near chance") {
    SyntheticConfig cfg;
    cfg.n_train = 400;
    cfg.n_test = 400;
    SyntheticDataset d = generate_synthetic(cfg);
    DemoTrainConfig tc;
    tc.epochs = 0;
    Mlp<float> net = train_demo_network(d, tc, cfg.seed);
    double acc = network_accuracy(net, d.x_test, d.y_test);
    CHECK(acc > 0.3);
    CHECK(acc < 0.7);
}
