#include <doctest.h>

#include <cmath>
#include <vector>

#include "sxai/errors.hpp"
#include "sxai/relatedness.hpp"
#include "sxai/rng.hpp"

using namespace sxai;

namespace {

// N=40 balanced binary layer: unit 0 equals the decision, unit 1 independent.
struct TwoUnitFixture {
    std::vector<double> latents;  // N x 2
    std::vector<int> decision;
    std::vector<double> attributes;  // N x 1, copy of unit 0
    std::size_t n = 40;

    TwoUnitFixture() {
        for (std::size_t i = 0; i < n; ++i) {
            int d = static_cast<int>(i % 2);
            int u1 = static_cast<int>((i / 2) % 2);  // balanced, independent of d
            decision.push_back(d);
            latents.push_back(d);
            latents.push_back(u1);
            attributes.push_back(d);
        }
    }
};

}  // namespace

TEST_CASE("unit profiles on exact tables") {
    TwoUnitFixture f;
    auto profiles = unit_profiles(f.latents, 2, f.decision, f.attributes, 1);
    REQUIRE(profiles.size() == 2);
    CHECK(profiles[0].mi_decision == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(profiles[1].mi_decision == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(profiles[0].mi_attribute[0] == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("constant unit is degenerate") {
    TwoUnitFixture f;
    for (std::size_t i = 0; i < f.n; ++i) f.latents[2 * i + 1] = 3.0;
    auto profiles = unit_profiles(f.latents, 2, f.decision, f.attributes, 1);
    CHECK(profiles[1].degenerate);
    CHECK(profiles[1].mi_decision == 0.0);
    CHECK(profiles[1].mi_attribute[0] == 0.0);
}

TEST_CASE("relatedness score is the profile dot product") {
    TwoUnitFixture f;
    auto profiles = unit_profiles(f.latents, 2, f.decision, f.attributes, 1);
    double r = relatedness_score(profiles, 0);
    double expect = profiles[0].mi_decision * profiles[0].mi_attribute[0] +
                    profiles[1].mi_decision * profiles[1].mi_attribute[0];
    CHECK(r == doctest::Approx(expect).epsilon(1e-15));
    CHECK(r == doctest::Approx(std::log(2.0) * std::log(2.0)).epsilon(1e-9));
    CHECK_THROWS_WITH_AS(relatedness_score(profiles, 5), doctest::Contains("IndexOutOfRange"),
                         Error);
}

TEST_CASE("normalized relatedness is a cosine") {
    std::vector<UnitProfile> profiles(2);
    profiles[0].mi_decision = 1.0;
    profiles[1].mi_decision = 1.0;
    profiles[0].mi_attribute = {1.0};
    profiles[1].mi_attribute = {0.0};
    CHECK(normalized_relatedness(profiles, 0) ==
          doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));

    profiles[0].mi_attribute = {2.0};
    profiles[1].mi_attribute = {2.0};
    CHECK(normalized_relatedness(profiles, 0) == doctest::Approx(1.0).epsilon(1e-12));

    profiles[0].mi_decision = 1.0;
    profiles[1].mi_decision = 0.0;
    profiles[0].mi_attribute = {0.0};
    profiles[1].mi_attribute = {1.0};
    CHECK(normalized_relatedness(profiles, 0) == 0.0);

    profiles[0].mi_attribute = {0.0};
    profiles[1].mi_attribute = {0.0};
    CHECK(normalized_relatedness(profiles, 0) == 0.0);  // zero norm convention
}

TEST_CASE("permuting latent units permutes profiles") {
    TwoUnitFixture f;
    std::vector<double> swapped(f.latents.size());
    for (std::size_t i = 0; i < f.n; ++i) {
        swapped[2 * i] = f.latents[2 * i + 1];
        swapped[2 * i + 1] = f.latents[2 * i];
    }
    auto a = unit_profiles(f.latents, 2, f.decision, f.attributes, 1);
    auto b = unit_profiles(swapped, 2, f.decision, f.attributes, 1);
    CHECK(a[0].mi_decision == b[1].mi_decision);
    CHECK(a[1].mi_decision == b[0].mi_decision);
    CHECK(relatedness_score(a, 0) == relatedness_score(b, 0));  // R permutation invariant
}

TEST_CASE("monotonicity in a single attribute MI") {
    std::vector<UnitProfile> profiles(3);
    for (std::size_t i = 0; i < 3; ++i) {
        profiles[i].mi_decision = 0.5;
        profiles[i].mi_attribute = {0.2};
    }
    double base = relatedness_score(profiles, 0);
    profiles[1].mi_attribute[0] = 0.9;
    CHECK(relatedness_score(profiles, 0) > base);
}

TEST_CASE("ranking order and tie-breaking") {
    RelatednessReport rep;
    rep.attributes.resize(3);
    rep.attributes[0] = {0, "a", 0.5, 0.9, {}};
    rep.attributes[1] = {1, "b", 0.5, 0.1, {}};
    rep.attributes[2] = {2, "c", 0.5, 0.5, {}};
    CHECK(rank_attributes(rep) == std::vector<std::size_t>{0, 2, 1});

    // equal normalized: raw R breaks the tie, then the index
    rep.attributes[0] = {0, "a", 0.3, 0.5, {}};
    rep.attributes[1] = {1, "b", 0.7, 0.5, {}};
    rep.attributes[2] = {2, "c", 0.7, 0.5, {}};
    CHECK(rank_attributes(rep) == std::vector<std::size_t>{1, 2, 0});
}

TEST_CASE("full report on a known construction") {
    TwoUnitFixture f;
    RelatednessConfig cfg;
    cfg.attribute_names = {"only"};
    RelatednessReport rep = relatedness_report(f.latents, 2, f.decision, f.attributes, 1, cfg);
    REQUIRE(rep.attributes.size() == 1);
    CHECK(rep.attributes[0].name == "only");
    CHECK(rep.attributes[0].score >= 0.0);
    CHECK(rep.attributes[0].normalized <= 1.0 + 1e-12);
    CHECK(rep.ranking == std::vector<std::size_t>{0});
    REQUIRE(!rep.attributes[0].top_units.empty());
    CHECK(rep.attributes[0].top_units[0].unit == 0);  // the decision-aligned unit dominates
}

TEST_CASE("all-degenerate layer yields zero scores") {
    std::vector<double> latents(40 * 2, 1.0);
    TwoUnitFixture f;
    auto profiles = unit_profiles(latents, 2, f.decision, f.attributes, 1);
    CHECK(relatedness_score(profiles, 0) == 0.0);
    CHECK(normalized_relatedness(profiles, 0) == 0.0);
}
