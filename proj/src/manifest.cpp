#include "sxai/manifest.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "sxai/errors.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace sxai {

namespace {

std::string resolve(const Manifest& m, const RoleEntry& e) {
    fs::path p(e.path);
    if (p.is_absolute()) return p.string();
    return (fs::path(m.base_dir) / p).string();
}

void check_expected(const std::string& role, const RoleEntry& entry, const TensorFile& t) {
    if (entry.expected_shape.empty()) return;
    if (entry.expected_shape != t.dims)
        throw shape_mismatch("role '" + role + "': manifest expects a different shape than file");
}

}  // namespace

Manifest read_manifest(const std::string& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw Error("IoError", "cannot open manifest: " + manifest_path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw Error("BadManifest", std::string("manifest is not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("roles"))
        throw Error("BadManifest", "manifest must be an object with a 'roles' key");

    Manifest m;
    m.version = doc.value("version", 1);
    m.base_dir = fs::path(manifest_path).parent_path().string();
    if (m.base_dir.empty()) m.base_dir = ".";

    const auto& known = known_roles();
    for (auto& [role, entry] : doc["roles"].items()) {
        if (std::find(known.begin(), known.end(), role) == known.end())
            throw Error("BadManifest", "unknown role name: " + role);
        RoleEntry re;
        if (entry.is_string()) {
            re.path = entry.get<std::string>();
        } else if (entry.is_object()) {
            re.path = entry.at("path").get<std::string>();
            if (entry.contains("shape"))
                re.expected_shape = entry["shape"].get<std::vector<std::uint64_t>>();
        } else {
            throw Error("BadManifest", "role entry must be a path or an object: " + role);
        }
        m.roles[role] = std::move(re);
    }
    if (doc.contains("metadata")) {
        for (auto& [k, v] : doc["metadata"].items())
            m.metadata[k] = v.is_string() ? v.get<std::string>() : v.dump();
    }
    return m;
}

void write_manifest(const std::string& manifest_path, const Manifest& manifest) {
    json doc;
    doc["version"] = manifest.version;
    doc["roles"] = json::object();
    for (const auto& [role, entry] : manifest.roles) {
        if (entry.expected_shape.empty()) {
            doc["roles"][role] = entry.path;
        } else {
            doc["roles"][role] = {{"path", entry.path}, {"shape", entry.expected_shape}};
        }
    }
    doc["metadata"] = manifest.metadata;
    std::ofstream out(manifest_path, std::ios::trunc);
    if (!out) throw Error("IoError", "cannot write manifest: " + manifest_path);
    out << doc.dump(2) << "\n";
}

std::vector<int> ActivationDump::decision_labels() const {
    std::vector<int> out(n);
    if (decision.ndim() == 1) {
        for (std::uint64_t i = 0; i < n; ++i) out[i] = static_cast<int>(decision.at(i));
    } else {
        for (std::uint64_t i = 0; i < n; ++i) {
            int best = 0;
            for (std::uint64_t j = 1; j < c; ++j)
                if (decision.at(i, j) > decision.at(i, static_cast<std::uint64_t>(best))) best = static_cast<int>(j);
            out[i] = best;
        }
    }
    return out;
}

std::vector<int> ActivationDump::label_values() const {
    if (!labels) throw Error("MissingRole", "dump has no labels role");
    std::vector<int> out(n);
    for (std::uint64_t i = 0; i < n; ++i) out[i] = static_cast<int>(labels->at(i));
    return out;
}

std::optional<std::uint64_t> ActivationDump::train_rows() const {
    auto it = manifest.metadata.find("n_train");
    if (it == manifest.metadata.end()) return std::nullopt;
    try {
        return static_cast<std::uint64_t>(std::stoull(it->second));
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

ActivationDump load_dump(const std::string& manifest_path) {
    Manifest m = read_manifest(manifest_path);

    for (const char* required : {"latents", "decision", "attributes"})
        if (!m.roles.count(required))
            throw Error("MissingRole", std::string("manifest lacks required role '") + required + "'");

    auto load = [&](const std::string& role) {
        const RoleEntry& e = m.roles.at(role);
        TensorFile t = read_tensor(resolve(m, e));
        check_expected(role, e, t);
        return t;
    };

    ActivationDump d;
    d.latents = load("latents");
    d.decision = load("decision");
    d.attributes = load("attributes");
    d.manifest = m;

    if (d.latents.ndim() != 2) throw shape_mismatch("latents must be N x M");
    d.n = d.latents.dims[0];
    d.m = d.latents.dims[1];

    if (d.decision.ndim() == 1) {
        if (d.decision.dims[0] != d.n) throw shape_mismatch("decision length != N");
        for (float v : d.decision.payload)
            if (v != std::floor(v) || v < 0)
                throw Error("NonIntegralLabel", "class-index decision must hold nonnegative integers");
        d.c = 0;
    } else if (d.decision.ndim() == 2) {
        if (d.decision.dims[0] != d.n) throw shape_mismatch("decision rows != N");
        d.c = d.decision.dims[1];
    } else {
        throw shape_mismatch("decision must be N or N x C");
    }

    if (d.attributes.ndim() != 2 || d.attributes.dims[0] != d.n)
        throw shape_mismatch("attributes must be N x K");
    d.k = d.attributes.dims[1];

    if (m.roles.count("train_inputs")) d.train_inputs = load("train_inputs");
    if (m.roles.count("query_inputs")) d.query_inputs = load("query_inputs");
    if (d.train_inputs && d.train_inputs->ndim() != 2)
        throw shape_mismatch("train_inputs must be n x d");
    if (d.query_inputs && d.query_inputs->ndim() != 2)
        throw shape_mismatch("query_inputs must be n x d");
    if (d.train_inputs && d.query_inputs &&
        d.train_inputs->dims[1] != d.query_inputs->dims[1])
        throw shape_mismatch("train_inputs and query_inputs feature widths differ");

    if (m.roles.count("labels")) {
        d.labels = load("labels");
        if (d.labels->ndim() != 1 || d.labels->dims[0] != d.n)
            throw shape_mismatch("labels must have length N");
        for (float v : d.labels->payload)
            if (v != std::floor(v)) throw Error("NonIntegralLabel", "labels must be integral");
    }

    if (m.roles.count("mc_decision_samples")) {
        d.mc_decision_samples = load("mc_decision_samples");
        const auto& t = *d.mc_decision_samples;
        if (t.ndim() != 3 || t.dims[1] != d.n || (d.c != 0 && t.dims[2] != d.c))
            throw shape_mismatch("mc_decision_samples must be T x N x C");
        d.t = t.dims[0];
    }
    if (m.roles.count("mc_attribute_samples")) {
        d.mc_attribute_samples = load("mc_attribute_samples");
        const auto& t = *d.mc_attribute_samples;
        if (t.ndim() != 3 || t.dims[1] != d.n || t.dims[2] != d.k)
            throw shape_mismatch("mc_attribute_samples must be T x N x K");
        if (d.t != 0 && t.dims[0] != d.t)
            throw shape_mismatch("mc sample pass counts disagree");
        d.t = t.dims[0];
    }
    return d;
}

}  // namespace sxai
