#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <vector>

#include "sxai/audit.hpp"
#include "sxai/demo.hpp"
#include "sxai/errors.hpp"
#include "sxai/jsonio.hpp"
#include "sxai/manifest.hpp"

using namespace sxai;
namespace fs = std::filesystem;

namespace {

std::vector<DomainLevel> verdicts(std::size_t in, std::size_t border, std::size_t out) {
    std::vector<DomainLevel> v;
    v.insert(v.end(), in, DomainLevel::In);
    v.insert(v.end(), border, DomainLevel::Borderline);
    v.insert(v.end(), out, DomainLevel::Out);
    return v;
}

const std::vector<UncertaintyLevel> kAllLow(10, UncertaintyLevel::Low);

std::string small_demo_dump(const std::string& name) {
    SyntheticConfig cfg;
    cfg.n_train = 300;
    cfg.n_test = 60;
    SyntheticDataset d = generate_synthetic(cfg);
    DemoTrainConfig tc;
    tc.epochs = 30;
    Mlp<float> net = train_demo_network(d, tc, cfg.seed);
    auto dir = (fs::temp_directory_path() / name).string();
    dump_activations(net, d, 6, dir);
    return dir;
}

}  // namespace

TEST_CASE("warning light policy") {
    std::string ok = "ATTRIBUTES_SUFFICIENT";
    std::string bad = "ADDITIONAL_FEATURES_LIKELY";

    CHECK(warning_light(verdicts(500, 0, 0), true, kAllLow, true, ok) == WarningLight::Green);
    // a small borderline share keeps GREEN, a large one demotes to YELLOW
    CHECK(warning_light(verdicts(480, 20, 0), true, kAllLow, true, ok) == WarningLight::Green);
    CHECK(warning_light(verdicts(400, 100, 0), true, kAllLow, true, ok) == WarningLight::Yellow);
    // OUT fraction beyond the kNN false-alarm rate goes RED
    CHECK(warning_light(verdicts(400, 0, 100), true, kAllLow, true, ok) == WarningLight::Red);
    CHECK(warning_light(verdicts(0, 0, 10), true, kAllLow, true, ok) == WarningLight::Red);
    // a HIGH uncertainty flag is RED regardless of the domain
    std::vector<UncertaintyLevel> high(kAllLow);
    high[3] = UncertaintyLevel::High;
    CHECK(warning_light(verdicts(500, 0, 0), true, high, true, ok) == WarningLight::Red);
    // MODERATE flags demote GREEN to YELLOW
    std::vector<UncertaintyLevel> mod(kAllLow);
    mod[0] = UncertaintyLevel::Moderate;
    CHECK(warning_light(verdicts(500, 0, 0), true, mod, true, ok) == WarningLight::Yellow);
    // fidelity failure demotes GREEN to YELLOW, never RED
    CHECK(warning_light(verdicts(500, 0, 0), true, kAllLow, true, bad) == WarningLight::Yellow);
    // missing domain section caps at YELLOW
    CHECK(warning_light({}, false, kAllLow, true, ok) == WarningLight::Yellow);
    CHECK_THROWS_WITH_AS(warning_light({}, false, {}, false, std::nullopt),
                         doctest::Contains("NoSignals"), Error);
}

TEST_CASE("light monotonicity: adding an OUT verdict never improves the light") {
    std::string ok = "ATTRIBUTES_SUFFICIENT";
    auto rank = [](WarningLight l) { return light_exit_code(l); };
    for (std::size_t in : {20, 100}) {
        for (std::size_t border : {0, 5, 20}) {
            for (std::size_t out : {0, 1, 10}) {
                auto base = verdicts(in, border, out);
                WarningLight before = warning_light(base, true, kAllLow, true, ok);
                base.push_back(DomainLevel::Out);
                WarningLight after = warning_light(base, true, kAllLow, true, ok);
                CHECK(rank(after) >= rank(before));
            }
        }
    }
}

TEST_CASE("exit codes") {
    CHECK(light_exit_code(WarningLight::Green) == 0);
    CHECK(light_exit_code(WarningLight::Yellow) == 1);
    CHECK(light_exit_code(WarningLight::Red) == 2);
}

TEST_CASE("canonical json rendering") {
    nlohmann::json doc;
    doc["b"] = 1;
    doc["a"] = -0.0;
    doc["c"] = {{"y", 0.1234567891}, {"x", true}};
    doc["d"] = nlohmann::json::array({1.5, "s"});
    std::string out = canonical_json(doc);
    CHECK(out == "{\"a\":0,\"b\":1,\"c\":{\"x\":true,\"y\":0.123457},\"d\":[1.5,\"s\"]}\n");
    CHECK(canonical_json(doc) == out);  // stable

    nlohmann::json inf;
    inf["v"] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(canonical_json(inf), Error);
}

TEST_CASE("config parsing") {
    auto path = (fs::temp_directory_path() / "audit_cfg.txt").string();
    {
        std::ofstream out(path);
        out << "# comment line\n"
            << "estimator = kde\n"
            << "bins = 16\n"
            << "epistemic_yellow = 0.2\n"
            << "epistemic_red = 0.6\n"
            << "fidelity_threshold = 0.05\n"
            << "out_tolerance = 0.01  # trailing comment\n";
    }
    AuditConfig cfg = parse_audit_config(path);
    CHECK(cfg.relatedness.mi.estimator == MiEstimator::Kde);
    CHECK(cfg.relatedness.mi.bins == 16);
    CHECK(cfg.uncertainty.epistemic_yellow == 0.2);
    CHECK(cfg.uncertainty.epistemic_red == 0.6);
    CHECK(cfg.fidelity_threshold == 0.05);
    CHECK(cfg.out_tolerance == 0.01);

    {
        std::ofstream out(path);
        out << "nonsense_key = 1\n";
    }
    CHECK_THROWS_WITH_AS(parse_audit_config(path), doctest::Contains("BadConfig"), Error);
}

TEST_CASE("audit runs end to end on a small dump") {
    auto dir = small_demo_dump("sxai_audit_small");
    AuditReport rep = run_audit(dir + "/manifest.json");
    CHECK(rep.errors.empty());
    CHECK(rep.domain_present);
    CHECK(rep.uncertainty_present);
    CHECK(rep.fidelity_tag.has_value());
    CHECK(rep.verdicts.size() == 60);

    std::string json = report_to_canonical_json(rep);
    CHECK(json.back() == '\n');
    CHECK(json.find("\"warning_light\"") != std::string::npos);

    // identical dump, identical bytes
    AuditReport again = run_audit(dir + "/manifest.json");
    CHECK(report_to_canonical_json(again) == json);

    std::string md = report_to_markdown(rep);
    CHECK(md.find("Warning light:") != std::string::npos);
    CHECK(md.find(kRashomonCaveat) != std::string::npos);
}

TEST_CASE("sections fail independently") {
    auto dir = small_demo_dump("sxai_audit_sections");
    AuditReport full = run_audit(dir + "/manifest.json");

    // drop the mc samples: only the uncertainty section may change
    Manifest m = read_manifest(dir + "/manifest.json");
    m.roles.erase("mc_decision_samples");
    m.roles.erase("mc_attribute_samples");
    write_manifest(dir + "/manifest.json", m);
    AuditReport reduced = run_audit(dir + "/manifest.json");
    CHECK(reduced.relatedness == full.relatedness);
    CHECK(reduced.domain == full.domain);
    CHECK(reduced.posthoc == full.posthoc);
    CHECK(reduced.uncertainty.empty());
    CHECK_FALSE(reduced.uncertainty_present);

    // drop train_inputs too: the light is capped at YELLOW at best
    m.roles.erase("train_inputs");
    write_manifest(dir + "/manifest.json", m);
    AuditReport nodomain = run_audit(dir + "/manifest.json");
    CHECK_FALSE(nodomain.domain_present);
    CHECK(nodomain.light != WarningLight::Green);
    CHECK(nodomain.errors.contains("domain"));
    CHECK(nodomain.relatedness == full.relatedness);
}

TEST_CASE("report validates against the shipped schema") {
    auto dir = small_demo_dump("sxai_audit_schema");
    AuditReport rep = run_audit(dir + "/manifest.json");
    nlohmann::json doc = nlohmann::json::parse(report_to_canonical_json(rep));
    // structural checks mirroring schema/audit_report.schema.json
    for (const char* key : {"version", "manifest_digest", "warning_light", "relatedness",
                            "domain", "uncertainty", "posthoc", "notes", "errors"})
        CHECK(doc.contains(key));
    CHECK(doc["version"].is_number_integer());
    CHECK(doc["manifest_digest"].is_string());
    CHECK(doc["manifest_digest"].get<std::string>().size() == 16);
    std::string light = doc["warning_light"];
    CHECK((light == "GREEN" || light == "YELLOW" || light == "RED"));
}
