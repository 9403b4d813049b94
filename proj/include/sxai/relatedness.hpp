#ifndef SXAI_RELATEDNESS_HPP
#define SXAI_RELATEDNESS_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sxai/mi.hpp"

namespace sxai {

// MI of one latent unit against the decision and against every attribute.
struct UnitProfile {
    std::size_t unit = 0;
    double mi_decision = 0;                // MI(L_i, D), nats
    std::vector<double> mi_attribute;      // MI(L_i, A_j), j = 0..K-1
    bool degenerate = false;
};

struct UnitContribution {
    std::size_t unit = 0;
    double product = 0;  // MI(L_i, D) * MI(L_i, A_j)
};

struct AttributeRelatedness {
    std::size_t index = 0;
    std::string name;
    double score = 0;        // R(A_j), nats^2
    double normalized = 0;   // cosine of the two MI vectors, in [0, 1]
    std::vector<UnitContribution> top_units;
};

struct RelatednessConfig {
    MiConfig mi;                 // estimator settings shared by all pairs
    bool use_correlation = false;  // replace MI factors by r^MI factors
    std::size_t top_units = 5;
    std::string data_split = "all";
    std::vector<std::string> attribute_names;  // optional, cosmetic
};

struct RelatednessReport {
    std::vector<AttributeRelatedness> attributes;
    std::vector<std::size_t> ranking;  // attribute indices, best first
    RelatednessConfig config;
    std::size_t n = 0, m = 0, k = 0;
};

// One profile per latent unit: decision MI via mi_mixed, attribute MI via
// mi_histogram (or mi_kde when configured).
std::vector<UnitProfile> unit_profiles(std::span<const double> latents, std::size_t m,
                                       std::span<const int> decision,
                                       std::span<const double> attributes, std::size_t k,
                                       const RelatednessConfig& config = {});

double relatedness_score(const std::vector<UnitProfile>& profiles, std::size_t j,
                         bool use_correlation = false);

double normalized_relatedness(const std::vector<UnitProfile>& profiles, std::size_t j,
                              bool use_correlation = false);

// Indices sorted by normalized score descending; ties by raw R, then index.
std::vector<std::size_t> rank_attributes(const RelatednessReport& report);

RelatednessReport relatedness_report(std::span<const double> latents, std::size_t m,
                                     std::span<const int> decision,
                                     std::span<const double> attributes, std::size_t k,
                                     const RelatednessConfig& config = {});

}  // namespace sxai

#endif
