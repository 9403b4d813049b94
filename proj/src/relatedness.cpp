#include "sxai/relatedness.hpp"

#include <algorithm>
#include <cmath>

#include "sxai/errors.hpp"

namespace sxai {

namespace {

double factor(double mi, bool use_correlation) {
    return use_correlation ? mi_correlation(mi) : mi;
}

}  // namespace

std::vector<UnitProfile> unit_profiles(std::span<const double> latents, std::size_t m,
                                       std::span<const int> decision,
                                       std::span<const double> attributes, std::size_t k,
                                       const RelatednessConfig& config) {
    if (m == 0 || latents.size() % m != 0) throw shape_mismatch("latents must be N x M");
    std::size_t n = latents.size() / m;
    if (decision.size() != n) throw shape_mismatch("decision length != N");
    if (k == 0 || attributes.size() != n * k) throw shape_mismatch("attributes must be N x K");
    if (n < 8) throw Error("TooFewSamples", "unit_profiles needs N >= 8");

    std::vector<UnitProfile> profiles(m);
    std::vector<double> unit(n), attr(n);
    for (std::size_t i = 0; i < m; ++i) {
        UnitProfile& p = profiles[i];
        p.unit = i;
        p.mi_attribute.assign(k, 0.0);
        for (std::size_t r = 0; r < n; ++r) unit[r] = latents[r * m + i];

        MiEstimate dec = mi_mixed(unit, decision, config.mi);
        p.degenerate = dec.degenerate;
        if (p.degenerate) continue;  // constant unit: zeros across the board
        p.mi_decision = dec.value;

        for (std::size_t j = 0; j < k; ++j) {
            for (std::size_t r = 0; r < n; ++r) attr[r] = attributes[r * k + j];
            MiEstimate est = config.mi.estimator == MiEstimator::Kde
                                 ? mi_kde(unit, attr, config.mi)
                                 : mi_histogram(unit, attr, config.mi);
            p.mi_attribute[j] = est.degenerate ? 0.0 : est.value;
        }
    }
    return profiles;
}

double relatedness_score(const std::vector<UnitProfile>& profiles, std::size_t j,
                         bool use_correlation) {
    double r = 0;
    for (const UnitProfile& p : profiles) {
        if (j >= p.mi_attribute.size()) throw Error("IndexOutOfRange", "attribute index");
        r += factor(p.mi_decision, use_correlation) * factor(p.mi_attribute[j], use_correlation);
    }
    return r;
}

double normalized_relatedness(const std::vector<UnitProfile>& profiles, std::size_t j,
                              bool use_correlation) {
    double dot = 0, nd = 0, na = 0;
    for (const UnitProfile& p : profiles) {
        if (j >= p.mi_attribute.size()) throw Error("IndexOutOfRange", "attribute index");
        double fd = factor(p.mi_decision, use_correlation);
        double fa = factor(p.mi_attribute[j], use_correlation);
        dot += fd * fa;
        nd += fd * fd;
        na += fa * fa;
    }
    if (nd == 0 || na == 0) return 0.0;
    return dot / (std::sqrt(nd) * std::sqrt(na));
}

std::vector<std::size_t> rank_attributes(const RelatednessReport& report) {
    std::vector<std::size_t> order(report.attributes.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& ra = report.attributes[a];
        const auto& rb = report.attributes[b];
        if (ra.normalized != rb.normalized) return ra.normalized > rb.normalized;
        if (ra.score != rb.score) return ra.score > rb.score;
        return a < b;
    });
    return order;
}

RelatednessReport relatedness_report(std::span<const double> latents, std::size_t m,
                                     std::span<const int> decision,
                                     std::span<const double> attributes, std::size_t k,
                                     const RelatednessConfig& config) {
    RelatednessReport rep;
    rep.config = config;
    rep.m = m;
    rep.k = k;
    rep.n = latents.size() / std::max<std::size_t>(m, 1);

    std::vector<UnitProfile> profiles =
        unit_profiles(latents, m, decision, attributes, k, config);

    rep.attributes.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
        AttributeRelatedness& a = rep.attributes[j];
        a.index = j;
        a.name = j < config.attribute_names.size() ? config.attribute_names[j]
                                                   : "attribute_" + std::to_string(j);
        a.score = relatedness_score(profiles, j, config.use_correlation);
        a.normalized = normalized_relatedness(profiles, j, config.use_correlation);

        std::vector<UnitContribution> contribs(profiles.size());
        for (std::size_t i = 0; i < profiles.size(); ++i) {
            contribs[i].unit = i;
            contribs[i].product = factor(profiles[i].mi_decision, config.use_correlation) *
                                  factor(profiles[i].mi_attribute[j], config.use_correlation);
        }
        std::sort(contribs.begin(), contribs.end(), [](const auto& l, const auto& r) {
            if (l.product != r.product) return l.product > r.product;
            return l.unit < r.unit;
        });
        contribs.resize(std::min(config.top_units, contribs.size()));
        a.top_units = std::move(contribs);
    }
    rep.ranking = rank_attributes(rep);
    return rep;
}

}  // namespace sxai
