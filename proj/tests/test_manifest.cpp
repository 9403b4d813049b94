#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "sxai/errors.hpp"
#include "sxai/manifest.hpp"

using namespace sxai;
namespace fs = std::filesystem;

namespace {

// Minimal consistent dump: N=8, M=2, K=1, decision as N x 2 probabilities.
struct TinyDump {
    fs::path dir;

    explicit TinyDump(const std::string& name) {
        dir = fs::temp_directory_path() / name;
        fs::create_directories(dir);
        std::vector<float> lat, dec, att, lab;
        for (int i = 0; i < 8; ++i) {
            float b = static_cast<float>(i % 2);
            lat.push_back(b);
            lat.push_back(static_cast<float>(i) * 0.25f);
            dec.push_back(1.0f - b);
            dec.push_back(b);
            att.push_back(b + 0.1f * static_cast<float>(i));
            lab.push_back(b);
        }
        write_tensor((dir / "latents.sxt").string(), make_tensor({8, 2}, lat));
        write_tensor((dir / "decision.sxt").string(), make_tensor({8, 2}, dec));
        write_tensor((dir / "attributes.sxt").string(), make_tensor({8, 1}, att));
        write_tensor((dir / "labels.sxt").string(), make_tensor({8}, lab));

        Manifest m;
        m.roles["latents"] = {"latents.sxt", {8, 2}};
        m.roles["decision"] = {"decision.sxt", {8, 2}};
        m.roles["attributes"] = {"attributes.sxt", {8, 1}};
        m.roles["labels"] = {"labels.sxt", {8}};
        m.metadata["seed"] = "1";
        write_manifest((dir / "manifest.json").string(), m);
    }

    std::string manifest() const { return (dir / "manifest.json").string(); }
};

}  // namespace

TEST_CASE("load_dump basic shapes") {
    TinyDump d("sxai_dump_basic");
    ActivationDump dump = load_dump(d.manifest());
    CHECK(dump.n == 8);
    CHECK(dump.m == 2);
    CHECK(dump.k == 1);
    CHECK(dump.c == 2);
    CHECK(dump.t == 0);
    CHECK_FALSE(dump.train_rows().has_value());

    auto dec = dump.decision_labels();
    REQUIRE(dec.size() == 8);
    CHECK(dec[0] == 0);
    CHECK(dec[1] == 1);
    auto lab = dump.label_values();
    CHECK(lab == dec);
}

TEST_CASE("argmax ties go to the lower class") {
    TinyDump d("sxai_dump_tie");
    write_tensor((d.dir / "decision.sxt").string(),
                 make_tensor({8, 2}, std::vector<float>(16, 0.5f)));
    ActivationDump dump = load_dump(d.manifest());
    for (int v : dump.decision_labels()) CHECK(v == 0);
}

TEST_CASE("missing required role") {
    TinyDump d("sxai_dump_missing");
    Manifest m = read_manifest(d.manifest());
    m.roles.erase("decision");
    write_manifest(d.manifest(), m);
    CHECK_THROWS_WITH_AS(load_dump(d.manifest()), doctest::Contains("MissingRole"), Error);
}

TEST_CASE("shape cross-checks") {
    TinyDump d("sxai_dump_shape");
    // labels length no longer matches N
    write_tensor((d.dir / "labels.sxt").string(),
                 make_tensor({7}, std::vector<float>(7, 0.0f)));
    CHECK_THROWS_WITH_AS(load_dump(d.manifest()), doctest::Contains("ShapeMismatch"), Error);
}

TEST_CASE("expected shape in the manifest is enforced") {
    TinyDump d("sxai_dump_expected");
    Manifest m = read_manifest(d.manifest());
    m.roles["latents"].expected_shape = {8, 3};
    write_manifest(d.manifest(), m);
    CHECK_THROWS_WITH_AS(load_dump(d.manifest()), doctest::Contains("ShapeMismatch"), Error);
}

TEST_CASE("labels must be integral") {
    TinyDump d("sxai_dump_integral");
    write_tensor((d.dir / "labels.sxt").string(),
                 make_tensor({8}, std::vector<float>(8, 0.25f)));
    CHECK_THROWS_WITH_AS(load_dump(d.manifest()), doctest::Contains("NonIntegralLabel"), Error);
}

TEST_CASE("unknown role name rejected") {
    TinyDump d("sxai_dump_role");
    std::ifstream in(d.manifest());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();
    auto pos = text.find("\"latents\"");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 9, "\"latentz\"");
    std::ofstream(d.manifest()) << text;
    CHECK_THROWS_AS(load_dump(d.manifest()), Error);
}

TEST_CASE("load_dump is pure") {
    TinyDump d("sxai_dump_pure");
    ActivationDump a = load_dump(d.manifest());
    ActivationDump b = load_dump(d.manifest());
    CHECK(a.latents.payload == b.latents.payload);
    CHECK(a.decision.payload == b.decision.payload);
    CHECK(a.attributes.payload == b.attributes.payload);
}
