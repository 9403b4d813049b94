#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "sxai/audit.hpp"
#include "sxai/demo.hpp"
#include "sxai/domain.hpp"
#include "sxai/errors.hpp"
#include "sxai/jsonio.hpp"
#include "sxai/manifest.hpp"
#include "sxai/mi.hpp"
#include "sxai/posthoc.hpp"
#include "sxai/relatedness.hpp"
#include "sxai/tensor.hpp"
#include "sxai/uncertainty.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RoleColumn {
    std::string role;
    std::uint64_t column = 0;
};

RoleColumn parse_role_column(const std::string& spec) {
    RoleColumn rc;
    auto colon = spec.find(':');
    rc.role = spec.substr(0, colon);
    if (colon != std::string::npos) rc.column = std::stoull(spec.substr(colon + 1));
    return rc;
}

std::vector<double> load_column(const sxai::Manifest& m, const RoleColumn& rc) {
    auto it = m.roles.find(rc.role);
    if (it == m.roles.end()) throw sxai::Error("MissingRole", "manifest has no role " + rc.role);
    fs::path p(it->second.path);
    if (!p.is_absolute()) p = fs::path(m.base_dir) / p;
    sxai::TensorFile t = sxai::read_tensor(p.string());
    return t.column(rc.column);
}

json mi_to_json(const sxai::MiEstimate& e) {
    json out;
    out["value"] = e.value;
    out["raw_value"] = e.raw_value;
    out["estimator"] = sxai::to_string(e.estimator);
    out["correction"] = sxai::to_string(e.correction);
    out["n"] = e.n;
    out["degenerate"] = e.degenerate;
    out["near_deterministic"] = e.near_deterministic;
    if (e.estimator == sxai::MiEstimator::Hist) {
        out["bins_x"] = e.bins_x;
        out["bins_y"] = e.bins_y;
    } else {
        out["bandwidth_x"] = e.bandwidth_x;
        out["bandwidth_y"] = e.bandwidth_y;
    }
    out["mi_correlation"] = sxai::mi_correlation(e.value);
    return out;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw sxai::Error("IoError", "cannot write: " + path);
    out << text;
}

sxai::MiConfig make_mi_config(const std::string& estimator, const std::string& bins,
                              const std::string& correction) {
    sxai::MiConfig cfg;
    if (estimator == "hist") cfg.estimator = sxai::MiEstimator::Hist;
    else if (estimator == "kde") cfg.estimator = sxai::MiEstimator::Kde;
    else throw sxai::Error("BadConfig", "estimator must be hist or kde");
    cfg.bins = bins == "auto" ? 0 : std::stoul(bins);
    if (correction == "none") cfg.correction = sxai::MiCorrection::None;
    else if (correction == "mm") cfg.correction = sxai::MiCorrection::MillerMadow;
    else throw sxai::Error("BadConfig", "correction must be none or mm");
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sxai - audit toolkit for self-explaining models"};
    app.require_subcommand(1);

    // ---- convert
    auto* convert = app.add_subcommand("convert", "format converters");
    convert->require_subcommand(1);
    auto* csv2t = convert->add_subcommand("csv-to-tensor", "CSV (header row) to binary tensor");
    std::string csv_in, csv_out;
    csv2t->add_option("--in", csv_in, "input CSV")->required();
    csv2t->add_option("--out", csv_out, "output tensor file")->required();

    // ---- mi
    auto* mi_cmd = app.add_subcommand("mi", "mutual information between two columns");
    std::string mi_manifest, mi_x, mi_y, mi_estimator = "hist", mi_bins = "auto",
                mi_correction = "none";
    mi_cmd->add_option("--manifest", mi_manifest)->required();
    mi_cmd->add_option("--x", mi_x, "role or role:column")->required();
    mi_cmd->add_option("--y", mi_y, "role or role:column")->required();
    mi_cmd->add_option("--estimator", mi_estimator, "hist|kde");
    mi_cmd->add_option("--bins", mi_bins, "auto or a bin count");
    mi_cmd->add_option("--correction", mi_correction, "none|mm");

    // ---- relatedness
    auto* rel_cmd = app.add_subcommand("relatedness", "per-attribute relatedness scores");
    std::string rel_manifest, rel_estimator = "hist", rel_out;
    bool rel_use_corr = false;
    rel_cmd->add_option("--manifest", rel_manifest)->required();
    rel_cmd->add_option("--estimator", rel_estimator, "hist|kde");
    rel_cmd->add_option("--out", rel_out, "output JSON path")->required();
    rel_cmd->add_flag("--use-correlation", rel_use_corr,
                      "use r^MI factors instead of raw MI");

    // ---- ad
    auto* ad = app.add_subcommand("ad", "applicability domain");
    ad->require_subcommand(1);
    auto* ad_fit = ad->add_subcommand("fit", "fit the domain model on training inputs");
    std::string adf_manifest, adf_out, adf_role = "train_inputs";
    double adf_variance = 0.95;
    std::size_t adf_maxdims = 10, adf_k = 5;
    ad_fit->add_option("--manifest", adf_manifest)->required();
    ad_fit->add_option("--out", adf_out, "model file (JSON sidecar written next to it)")->required();
    ad_fit->add_option("--role", adf_role, "manifest role holding the training matrix");
    ad_fit->add_option("--variance-target", adf_variance);
    ad_fit->add_option("--max-dims", adf_maxdims);
    ad_fit->add_option("--knn-k", adf_k);

    auto* ad_check = ad->add_subcommand("check", "verdicts for query points");
    std::string adc_model, adc_manifest, adc_role = "query_inputs", adc_out;
    ad_check->add_option("--model", adc_model)->required();
    ad_check->add_option("--manifest", adc_manifest)->required();
    ad_check->add_option("--queries", adc_role, "manifest role holding the query matrix");
    ad_check->add_option("--out", adc_out, "output JSON path")->required();

    // ---- uncertainty
    auto* unc_cmd = app.add_subcommand("uncertainty", "MC-dropout aggregation");
    std::string unc_manifest, unc_head = "decision", unc_out;
    unc_cmd->add_option("--manifest", unc_manifest)->required();
    unc_cmd->add_option("--head", unc_head, "decision or attribute:<j>");
    unc_cmd->add_option("--out", unc_out, "output JSON path")->required();

    // ---- posthoc
    auto* ph_cmd = app.add_subcommand("posthoc", "attributes-only surrogate fidelity");
    std::string ph_manifest, ph_out;
    ph_cmd->add_option("--manifest", ph_manifest)->required();
    ph_cmd->add_option("--out", ph_out, "output JSON path")->required();

    // ---- demo
    auto* demo = app.add_subcommand("demo", "synthetic end-to-end pipeline");
    demo->require_subcommand(1);
    auto* demo_run_cmd = demo->add_subcommand("run", "generate + train + dump");
    std::uint64_t demo_seed = 42;
    std::string demo_out;
    std::size_t demo_passes = 30;
    demo_run_cmd->add_option("--seed", demo_seed);
    demo_run_cmd->add_option("--out", demo_out, "output directory")->required();
    demo_run_cmd->add_option("--mc-passes", demo_passes);
    auto* demo_gradcheck = demo->add_subcommand("gradcheck", "finite-difference gradient check");

    // ---- audit
    auto* audit_cmd = app.add_subcommand("audit", "full audit with warning light");
    std::string au_manifest, au_out, au_md, au_config;
    audit_cmd->add_option("--manifest", au_manifest)->required();
    audit_cmd->add_option("--out", au_out, "report JSON path")->required();
    audit_cmd->add_option("--md", au_md, "markdown summary path");
    audit_cmd->add_option("--config", au_config, "key = value config file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (csv2t->parsed()) {
            sxai::write_tensor(csv_out, sxai::csv_to_tensor(csv_in));
        } else if (mi_cmd->parsed()) {
            sxai::Manifest m = sxai::read_manifest(mi_manifest);
            auto x = load_column(m, parse_role_column(mi_x));
            auto y = load_column(m, parse_role_column(mi_y));
            sxai::MiConfig cfg = make_mi_config(mi_estimator, mi_bins, mi_correction);
            sxai::MiEstimate e = cfg.estimator == sxai::MiEstimator::Kde
                                     ? sxai::mi_kde(x, y, cfg)
                                     : sxai::mi_histogram(x, y, cfg);
            std::cout << sxai::canonical_json(mi_to_json(e));
        } else if (rel_cmd->parsed()) {
            sxai::AuditConfig cfg;
            cfg.relatedness.mi = make_mi_config(rel_estimator, "auto", "none");
            cfg.relatedness.use_correlation = rel_use_corr;
            sxai::AuditReport rep = sxai::run_audit(rel_manifest, cfg);
            if (rep.errors.contains("relatedness"))
                throw sxai::Error("AuditError", rep.errors["relatedness"].get<std::string>());
            write_text(rel_out, sxai::canonical_json(rep.relatedness));
        } else if (ad_fit->parsed()) {
            sxai::Manifest m = sxai::read_manifest(adf_manifest);
            auto it = m.roles.find(adf_role);
            if (it == m.roles.end())
                throw sxai::Error("MissingRole", "manifest has no role " + adf_role);
            fs::path p(it->second.path);
            if (!p.is_absolute()) p = fs::path(m.base_dir) / p;
            sxai::TensorFile t = sxai::read_tensor(p.string());
            if (t.ndim() != 2) throw sxai::shape_mismatch("training role must be 2-D");
            std::vector<double> X(t.payload.begin(), t.payload.end());
            sxai::DomainConfig dcfg;
            dcfg.variance_target = adf_variance;
            dcfg.max_dims = adf_maxdims;
            dcfg.knn_k = adf_k;
            sxai::DomainModel model =
                sxai::fit_domain_model(X, t.dims[0], t.dims[1], dcfg);
            sxai::save_domain_model(adf_out, model);
        } else if (ad_check->parsed()) {
            sxai::DomainModel model = sxai::load_domain_model(adc_model);
            sxai::Manifest m = sxai::read_manifest(adc_manifest);
            auto it = m.roles.find(adc_role);
            if (it == m.roles.end())
                throw sxai::Error("MissingRole", "manifest has no role " + adc_role);
            fs::path p(it->second.path);
            if (!p.is_absolute()) p = fs::path(m.base_dir) / p;
            sxai::TensorFile q = sxai::read_tensor(p.string());
            if (q.ndim() != 2) throw sxai::shape_mismatch("query role must be 2-D");
            json verdicts = json::array();
            std::vector<double> row(q.dims[1]);
            for (std::uint64_t i = 0; i < q.dims[0]; ++i) {
                for (std::uint64_t j = 0; j < q.dims[1]; ++j) row[j] = q.at(i, j);
                sxai::DomainVerdict v = model.check(row);
                verdicts.push_back({{"index", i},
                                    {"level", sxai::to_string(v.level)},
                                    {"in_hull", v.in_hull},
                                    {"knn_distance", v.knn_distance},
                                    {"knn_exceeded", v.knn_exceeded},
                                    {"leverage", v.leverage},
                                    {"leverage_exceeded", v.leverage_exceeded}});
            }
            write_text(adc_out, sxai::canonical_json({{"verdicts", verdicts}}));
        } else if (unc_cmd->parsed()) {
            sxai::ActivationDump dump = sxai::load_dump(unc_manifest);
            json out;
            if (unc_head == "decision") {
                if (!dump.mc_decision_samples)
                    throw sxai::Error("MissingRole", "dump has no mc_decision_samples");
                const auto& mc = *dump.mc_decision_samples;
                std::size_t t = mc.dims[0], n = mc.dims[1], c = mc.dims[2];
                json rows = json::array();
                std::vector<double> row(t * c);
                for (std::size_t i = 0; i < n; ++i) {
                    for (std::size_t tt = 0; tt < t; ++tt)
                        for (std::size_t j = 0; j < c; ++j) row[tt * c + j] = mc.at(tt, i, j);
                    sxai::UncertaintySummary s = sxai::aggregate_classification(row, t, c);
                    rows.push_back({{"index", i},
                                    {"predictive_mean", s.predictive_mean},
                                    {"predictive_entropy", s.predictive_entropy},
                                    {"expected_entropy", s.expected_entropy},
                                    {"epistemic", s.epistemic}});
                }
                out = {{"head", "decision"}, {"passes", t}, {"rows", rows}};
            } else if (unc_head.rfind("attribute:", 0) == 0) {
                if (!dump.mc_attribute_samples)
                    throw sxai::Error("MissingRole", "dump has no mc_attribute_samples");
                std::size_t j = std::stoul(unc_head.substr(10));
                if (j >= dump.k) throw sxai::Error("IndexOutOfRange", "attribute index");
                const auto& mc = *dump.mc_attribute_samples;
                std::size_t t = mc.dims[0], n = mc.dims[1];
                json rows = json::array();
                std::vector<double> samples(t);
                for (std::size_t i = 0; i < n; ++i) {
                    for (std::size_t tt = 0; tt < t; ++tt) samples[tt] = mc.at(tt, i, j);
                    sxai::RegressionSummary s = sxai::aggregate_regression(samples);
                    rows.push_back({{"index", i}, {"mean", s.mean}, {"std", s.std_dev}});
                }
                out = {{"head", unc_head}, {"passes", t}, {"rows", rows}};
            } else {
                throw sxai::Error("BadConfig", "--head must be decision or attribute:<j>");
            }
            write_text(unc_out, sxai::canonical_json(out));
        } else if (ph_cmd->parsed()) {
            sxai::AuditConfig cfg;
            sxai::AuditReport rep = sxai::run_audit(ph_manifest, cfg);
            if (rep.errors.contains("posthoc"))
                throw sxai::Error("AuditError", rep.errors["posthoc"].get<std::string>());
            if (rep.posthoc.empty())
                throw sxai::Error("MissingRole", "posthoc needs the labels role");
            write_text(ph_out, sxai::canonical_json(rep.posthoc));
        } else if (demo_run_cmd->parsed()) {
            sxai::demo_run(demo_seed, demo_out, demo_passes);
            std::cout << "dump written to " << demo_out << "\n";
        } else if (demo_gradcheck->parsed()) {
            double err = sxai::mlp_gradient_check_random(7);
            std::cout << "max relative gradient error: " << err << "\n";
            if (err >= 1e-4) {
                std::cerr << "gradient check FAILED\n";
                return 1;
            }
        } else if (audit_cmd->parsed()) {
            sxai::AuditConfig cfg;
            if (!au_config.empty()) cfg = sxai::parse_audit_config(au_config);
            sxai::AuditReport rep = sxai::run_audit(au_manifest, cfg);
            sxai::render_report(rep, au_out, au_md);
            std::cout << "warning light: " << sxai::to_string(rep.light) << "\n";
            return sxai::light_exit_code(rep.light);
        }
    } catch (const sxai::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return audit_cmd->parsed() ? 3 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return audit_cmd->parsed() ? 3 : 1;
    }
    return 0;
}
