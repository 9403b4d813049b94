#include "sxai/audit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "sxai/errors.hpp"
#include "sxai/jsonio.hpp"
#include "sxai/manifest.hpp"

using nlohmann::json;

namespace sxai {

const char* const kRashomonCaveat =
    "Rashomon caveat: many models with very different internal mechanisms can share the same "
    "input-output behaviour, so the attributes-only surrogate is advisory evidence about feature "
    "use and cannot tell us much about the main model's mechanism.";

std::string to_string(WarningLight light) {
    switch (light) {
        case WarningLight::Green: return "GREEN";
        case WarningLight::Yellow: return "YELLOW";
        case WarningLight::Red: return "RED";
    }
    return "?";
}

int light_exit_code(WarningLight light) {
    switch (light) {
        case WarningLight::Green: return 0;
        case WarningLight::Yellow: return 1;
        case WarningLight::Red: return 2;
    }
    return 3;
}

WarningLight warning_light(const std::vector<DomainLevel>& verdicts, bool domain_present,
                           const std::vector<UncertaintyLevel>& flags, bool uncertainty_present,
                           const std::optional<std::string>& fidelity_tag,
                           double borderline_tolerance, double out_tolerance) {
    if (!domain_present && !uncertainty_present && !fidelity_tag)
        throw Error("NoSignals", "no audit signal available for the warning light");

    std::size_t out = 0, borderline = 0;
    for (DomainLevel v : verdicts) {
        if (v == DomainLevel::Out) ++out;
        if (v == DomainLevel::Borderline) ++borderline;
    }
    double n = verdicts.empty() ? 1.0 : static_cast<double>(verdicts.size());
    double out_frac = static_cast<double>(out) / n;
    double flagged_frac = static_cast<double>(out + borderline) / n;

    bool any_high = std::any_of(flags.begin(), flags.end(),
                                [](UncertaintyLevel f) { return f == UncertaintyLevel::High; });
    // the kNN cutoff is a 95th percentile, so ~5% of in-domain queries trip it
    // by construction; only an excess OUT rate is alarming
    if (out_frac > out_tolerance || any_high) return WarningLight::Red;

    if (!domain_present) return WarningLight::Yellow;  // cap without AD coverage
    bool flags_ok = std::all_of(flags.begin(), flags.end(),
                                [](UncertaintyLevel f) { return f == UncertaintyLevel::Low; });
    bool fidelity_ok = !fidelity_tag || *fidelity_tag == "ATTRIBUTES_SUFFICIENT";
    if (flagged_frac <= borderline_tolerance && flags_ok && fidelity_ok)
        return WarningLight::Green;
    return WarningLight::Yellow;
}

namespace {

std::string fnv1a_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("IoError", "cannot open manifest: " + path);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char c;
    while (in.get(c)) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

json relatedness_section(const ActivationDump& dump, const AuditConfig& cfg) {
    std::vector<double> latents(dump.latents.payload.begin(), dump.latents.payload.end());
    std::vector<double> attrs(dump.attributes.payload.begin(), dump.attributes.payload.end());
    std::vector<int> decision = dump.decision_labels();

    RelatednessConfig rcfg = cfg.relatedness;
    if (rcfg.attribute_names.empty()) {
        for (std::size_t j = 0; j < dump.k; ++j) {
            auto it = dump.manifest.metadata.find("attribute_" + std::to_string(j));
            rcfg.attribute_names.push_back(it != dump.manifest.metadata.end()
                                               ? it->second
                                               : "attribute_" + std::to_string(j));
        }
    }
    RelatednessReport rep =
        relatedness_report(latents, dump.m, decision, attrs, dump.k, rcfg);

    json out;
    out["estimator"] = to_string(rcfg.mi.estimator);
    out["data_split"] = rcfg.data_split;
    out["n"] = rep.n;
    out["latent_units"] = rep.m;
    json attributes = json::array();
    for (const auto& a : rep.attributes) {
        json units = json::array();
        for (const auto& u : a.top_units)
            units.push_back({{"unit", u.unit}, {"mi_product", u.product}});
        attributes.push_back({{"index", a.index},
                              {"name", a.name},
                              {"score", a.score},
                              {"normalized", a.normalized},
                              {"top_units", units}});
    }
    out["attributes"] = attributes;
    out["ranking"] = rep.ranking;
    return out;
}

json domain_section(const ActivationDump& dump, const AuditConfig& cfg,
                    std::vector<DomainLevel>& verdicts_out) {
    if (!dump.train_inputs)
        throw Error("MissingRole", "domain analysis needs the train_inputs role");
    if (!dump.query_inputs)
        throw Error("MissingRole", "domain analysis needs the query_inputs role");

    const TensorFile& tr = *dump.train_inputs;
    const TensorFile& qu = *dump.query_inputs;
    std::size_t d = tr.dims[1];
    std::vector<double> X(tr.payload.begin(), tr.payload.end());
    DomainModel model = fit_domain_model(X, tr.dims[0], d, cfg.domain);

    json queries = json::array();
    std::size_t in_count = 0, borderline_count = 0, out_count = 0;
    std::vector<double> q(d);
    for (std::uint64_t i = 0; i < qu.dims[0]; ++i) {
        for (std::size_t j = 0; j < d; ++j) q[j] = qu.at(i, j);
        DomainVerdict v = model.check(q);
        verdicts_out.push_back(v.level);
        switch (v.level) {
            case DomainLevel::In: ++in_count; break;
            case DomainLevel::Borderline: ++borderline_count; break;
            case DomainLevel::Out: ++out_count; break;
        }
        queries.push_back({{"index", i},
                           {"level", to_string(v.level)},
                           {"in_hull", v.in_hull},
                           {"knn_distance", v.knn_distance},
                           {"knn_exceeded", v.knn_exceeded},
                           {"leverage", v.leverage},
                           {"leverage_exceeded", v.leverage_exceeded}});
    }

    json out;
    out["d_reduced"] = model.pca.d_reduced;
    out["knn_threshold"] = model.knn_thresh;
    out["leverage_threshold"] = model.leverage_thresh;
    out["counts"] = {{"in", in_count}, {"borderline", borderline_count}, {"out", out_count}};
    out["queries"] = queries;
    return out;
}

json uncertainty_section(const ActivationDump& dump, const AuditConfig& cfg,
                         std::vector<UncertaintyLevel>& flags_out) {
    if (!dump.mc_decision_samples)
        throw Error("MissingRole", "uncertainty analysis needs mc_decision_samples");
    const TensorFile& mc = *dump.mc_decision_samples;
    std::size_t t = mc.dims[0], n = mc.dims[1], c = mc.dims[2];

    std::uint64_t first_query = dump.train_rows().value_or(0);
    if (first_query >= n) first_query = 0;

    std::vector<double> row(t * c);
    json per_query = json::array();
    double mean_epistemic = 0, max_epistemic = 0;
    std::size_t flagged_moderate = 0, flagged_high = 0;
    std::size_t n_query = n - first_query;
    for (std::size_t i = first_query; i < n; ++i) {
        for (std::size_t tt = 0; tt < t; ++tt)
            for (std::size_t j = 0; j < c; ++j) row[tt * c + j] = mc.at(tt, i, j);
        UncertaintySummary s = aggregate_classification(row, t, c);
        UncertaintyLevel flag = uncertainty_flag(s, cfg.uncertainty);
        flags_out.push_back(flag);
        mean_epistemic += s.epistemic;
        max_epistemic = std::max(max_epistemic, s.epistemic);
        if (flag == UncertaintyLevel::Moderate) ++flagged_moderate;
        if (flag == UncertaintyLevel::High) ++flagged_high;
        per_query.push_back({{"index", i},
                             {"predictive_entropy", s.predictive_entropy},
                             {"expected_entropy", s.expected_entropy},
                             {"epistemic", s.epistemic},
                             {"flag", to_string(flag)}});
    }
    mean_epistemic /= static_cast<double>(n_query);

    json out;
    out["passes"] = t;
    out["first_query_row"] = first_query;
    out["thresholds"] = {{"epistemic_yellow", cfg.uncertainty.epistemic_yellow},
                         {"epistemic_red", cfg.uncertainty.epistemic_red}};
    out["decision"] = {{"mean_epistemic", mean_epistemic},
                       {"max_epistemic", max_epistemic},
                       {"moderate", flagged_moderate},
                       {"high", flagged_high},
                       {"queries", per_query}};

    if (dump.mc_attribute_samples) {
        const TensorFile& ma = *dump.mc_attribute_samples;
        json attr = json::array();
        std::vector<double> samples(t);
        for (std::size_t j = 0; j < dump.k; ++j) {
            double mean_std = 0;
            for (std::size_t i = first_query; i < n; ++i) {
                for (std::size_t tt = 0; tt < t; ++tt) samples[tt] = ma.at(tt, i, j);
                mean_std += aggregate_regression(samples).std_dev;
            }
            attr.push_back({{"index", j}, {"mean_std", mean_std / static_cast<double>(n_query)}});
        }
        out["attributes"] = attr;
    }
    return out;
}

json posthoc_section(const ActivationDump& dump, const AuditConfig& cfg,
                     std::optional<std::string>& tag_out) {
    if (!dump.labels)
        throw Error("MissingRole", "posthoc fidelity needs the labels role");

    std::vector<int> decision = dump.decision_labels();
    std::vector<int> labels = dump.label_values();
    std::vector<double> attrs(dump.attributes.payload.begin(), dump.attributes.payload.end());

    std::uint64_t split = dump.train_rows().value_or(dump.n);
    if (split > dump.n) split = dump.n;
    bool has_holdout = split < dump.n;

    std::span<const double> attrs_span(attrs);
    std::span<const int> dec_span(decision);
    auto train_attrs = attrs_span.subspan(0, split * dump.k);
    auto train_dec = dec_span.subspan(0, split);

    SurrogateModel model = train_surrogate(train_attrs, dump.k, train_dec, cfg.surrogate);

    auto eval_rows = has_holdout ? std::make_pair(split, dump.n)
                                 : std::make_pair(std::uint64_t{0}, dump.n);
    std::size_t n_eval = eval_rows.second - eval_rows.first;
    std::vector<int> eval_labels(labels.begin() + static_cast<std::ptrdiff_t>(eval_rows.first),
                                 labels.begin() + static_cast<std::ptrdiff_t>(eval_rows.second));
    auto eval_attrs = attrs_span.subspan(eval_rows.first * dump.k, n_eval * dump.k);

    SurrogateMetrics metrics = evaluate_surrogate(model, eval_attrs, eval_labels);

    std::size_t hits = 0;
    for (std::size_t i = 0; i < n_eval; ++i)
        if (decision[eval_rows.first + i] == eval_labels[i]) ++hits;
    double main_accuracy = static_cast<double>(hits) / static_cast<double>(n_eval);

    FidelityResult fid = fidelity_gap(main_accuracy, metrics.accuracy, cfg.fidelity_threshold);
    tag_out = fid.tag;

    json out;
    out["surrogate"] = {{"accuracy", metrics.accuracy},
                        {"mean_log_loss", metrics.mean_log_loss},
                        {"iterations", model.iterations},
                        {"final_loss", model.final_loss}};
    out["main_accuracy"] = main_accuracy;
    out["fidelity_gap"] = fid.gap;
    out["tag"] = fid.tag;
    out["holdout_rows"] = has_holdout;
    return out;
}

}  // namespace

AuditConfig parse_audit_config(const std::string& path) {
    AuditConfig cfg;
    std::ifstream in(path);
    if (!in) throw Error("IoError", "cannot open config: " + path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto eq = line.find('=');
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (eq == std::string::npos)
            throw Error("BadConfig", "expected key = value at line " + std::to_string(line_no));
        auto trim = [](std::string s) {
            auto b = s.find_first_not_of(" \t\r");
            auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));

        if (key == "estimator") {
            if (value == "hist") cfg.relatedness.mi.estimator = MiEstimator::Hist;
            else if (value == "kde") cfg.relatedness.mi.estimator = MiEstimator::Kde;
            else throw Error("BadConfig", "estimator must be hist or kde");
        } else if (key == "bins") {
            cfg.relatedness.mi.bins = value == "auto" ? 0 : std::stoul(value);
        } else if (key == "correction") {
            if (value == "none") cfg.relatedness.mi.correction = MiCorrection::None;
            else if (value == "mm") cfg.relatedness.mi.correction = MiCorrection::MillerMadow;
            else throw Error("BadConfig", "correction must be none or mm");
        } else if (key == "use_correlation") {
            cfg.relatedness.use_correlation = value == "true" || value == "1";
        } else if (key == "variance_target") {
            cfg.domain.variance_target = std::stod(value);
        } else if (key == "max_dims") {
            cfg.domain.max_dims = std::stoul(value);
        } else if (key == "knn_k") {
            cfg.domain.knn_k = std::stoul(value);
        } else if (key == "hull_eps") {
            cfg.domain.hull_eps = std::stod(value);
        } else if (key == "epistemic_yellow") {
            cfg.uncertainty.epistemic_yellow = std::stod(value);
        } else if (key == "epistemic_red") {
            cfg.uncertainty.epistemic_red = std::stod(value);
        } else if (key == "fidelity_threshold") {
            cfg.fidelity_threshold = std::stod(value);
        } else if (key == "borderline_tolerance") {
            cfg.borderline_tolerance = std::stod(value);
        } else if (key == "out_tolerance") {
            cfg.out_tolerance = std::stod(value);
        } else {
            throw Error("BadConfig", "unknown config key: " + key);
        }
    }
    return cfg;
}

AuditReport run_audit(const std::string& manifest_path, const AuditConfig& config) {
    AuditReport rep;
    rep.manifest_digest = fnv1a_digest(manifest_path);
    rep.errors = json::object();

    ActivationDump dump = load_dump(manifest_path);  // unreadable manifest is fatal

    try {
        rep.relatedness = relatedness_section(dump, config);
    } catch (const std::exception& e) {
        rep.relatedness = json::object();
        rep.errors["relatedness"] = e.what();
    }

    try {
        rep.domain = domain_section(dump, config, rep.verdicts);
        rep.domain_present = true;
    } catch (const std::exception& e) {
        rep.domain = json::object();
        rep.errors["domain"] = e.what();
        rep.notes.push_back("Applicability-domain section skipped; the warning light is capped at YELLOW.");
    }

    if (dump.mc_decision_samples) {
        try {
            rep.uncertainty = uncertainty_section(dump, config, rep.decision_flags);
            rep.uncertainty_present = true;
        } catch (const std::exception& e) {
            rep.uncertainty = json::object();
            rep.errors["uncertainty"] = e.what();
        }
    } else {
        rep.uncertainty = json::object();
        rep.notes.push_back("Uncertainty section skipped: no MC dropout samples in the dump.");
    }

    if (dump.labels) {
        try {
            rep.posthoc = posthoc_section(dump, config, rep.fidelity_tag);
        } catch (const std::exception& e) {
            rep.posthoc = json::object();
            rep.errors["posthoc"] = e.what();
        }
    } else {
        rep.posthoc = json::object();
        rep.notes.push_back("Post-hoc fidelity skipped: no labels in the dump.");
    }

    rep.notes.push_back(kRashomonCaveat);
    rep.light = warning_light(rep.verdicts, rep.domain_present, rep.decision_flags,
                              rep.uncertainty_present, rep.fidelity_tag,
                              config.borderline_tolerance, config.out_tolerance);
    return rep;
}

std::string report_to_canonical_json(const AuditReport& report) {
    json doc;
    doc["version"] = report.version;
    doc["manifest_digest"] = report.manifest_digest;
    doc["warning_light"] = to_string(report.light);
    doc["relatedness"] = report.relatedness;
    doc["domain"] = report.domain;
    doc["uncertainty"] = report.uncertainty;
    doc["posthoc"] = report.posthoc;
    doc["notes"] = report.notes;
    doc["errors"] = report.errors;
    return canonical_json(doc);
}

std::string report_to_markdown(const AuditReport& report) {
    std::ostringstream md;
    md << "# Self-explaining AI audit\n\n";
    md << "**Warning light: " << to_string(report.light) << "**\n\n";

    if (!report.domain.empty()) {
        const auto& c = report.domain["counts"];
        md << "## Applicability domain\n\n"
           << "- queries inside the hull: " << c["in"] << "\n"
           << "- borderline: " << c["borderline"] << "\n"
           << "- outside (alert): " << c["out"] << "\n\n";
    }
    if (!report.relatedness.empty()) {
        md << "## Explanation relatedness\n\n";
        for (const auto& a : report.relatedness["attributes"])
            md << "- " << a["name"].get<std::string>() << ": R = " << a["score"].get<double>()
               << " (normalized " << a["normalized"].get<double>() << ")\n";
        md << "\n";
    }
    if (!report.uncertainty.empty()) {
        md << "## Uncertainty\n\n"
           << "- mean decision epistemic: "
           << report.uncertainty["decision"]["mean_epistemic"].get<double>() << " nats\n"
           << "- high flags: " << report.uncertainty["decision"]["high"] << "\n\n";
    }
    if (!report.posthoc.empty()) {
        md << "## Post-hoc surrogate\n\n"
           << "- fidelity gap: " << report.posthoc["fidelity_gap"].get<double>() << " ("
           << report.posthoc["tag"].get<std::string>() << ")\n\n";
    }
    if (!report.errors.empty()) {
        md << "## Section errors\n\n";
        for (auto it = report.errors.begin(); it != report.errors.end(); ++it)
            md << "- " << it.key() << ": " << it.value().get<std::string>() << "\n";
        md << "\n";
    }
    md << "## Notes\n\n";
    for (const auto& n : report.notes) md << "- " << n << "\n";
    return md.str();
}

void render_report(const AuditReport& report, const std::string& json_path,
                   const std::string& md_path) {
    std::ofstream out(json_path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("IoError", "cannot write report: " + json_path);
    out << report_to_canonical_json(report);
    if (!md_path.empty()) {
        std::ofstream md(md_path, std::ios::binary | std::ios::trunc);
        if (!md) throw Error("IoError", "cannot write report: " + md_path);
        md << report_to_markdown(report);
    }
}

}  // namespace sxai
