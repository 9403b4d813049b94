#ifndef SXAI_MANIFEST_HPP
#define SXAI_MANIFEST_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sxai/tensor.hpp"

namespace sxai {

// Role names a manifest may reference. `latents`, `decision` and `attributes`
// are mandatory for an ActivationDump; everything else is optional.
inline const std::vector<std::string>& known_roles() {
    static const std::vector<std::string> roles = {
        "train_inputs", "query_inputs",      "latents",
        "decision",     "attributes",        "mc_decision_samples",
        "mc_attribute_samples", "labels"};
    return roles;
}

struct RoleEntry {
    std::string path;                          // relative to the manifest file
    std::vector<std::uint64_t> expected_shape; // empty = unchecked
};

struct Manifest {
    int version = 1;
    std::map<std::string, RoleEntry> roles;
    std::map<std::string, std::string> metadata;  // seed, model id, notes, ...

    std::string base_dir;  // directory of the manifest file, set on load
};

Manifest read_manifest(const std::string& manifest_path);
void write_manifest(const std::string& manifest_path, const Manifest& manifest);

// The audit's sole input: every tensor the analyses consume, shape-checked.
struct ActivationDump {
    Manifest manifest;

    std::optional<TensorFile> train_inputs;        // n_train x d
    std::optional<TensorFile> query_inputs;        // n_query x d
    TensorFile latents;                            // N x M
    TensorFile decision;                           // N (class index) or N x C
    TensorFile attributes;                         // N x K
    std::optional<TensorFile> mc_decision_samples;   // T x N x C
    std::optional<TensorFile> mc_attribute_samples;  // T x N x K
    std::optional<TensorFile> labels;              // N, integral

    std::uint64_t n = 0;  // examples
    std::uint64_t m = 0;  // latent units
    std::uint64_t k = 0;  // attributes
    std::uint64_t c = 0;  // classes (0 when decision is a bare class index)
    std::uint64_t t = 0;  // stochastic passes (0 when absent)

    // Decision as class indices (argmax over probabilities when N x C;
    // ties go to the lower class index).
    std::vector<int> decision_labels() const;
    std::vector<int> label_values() const;  // requires `labels`

    // Rows [0, n_train) are the training split when the producer recorded
    // `n_train` in metadata; otherwise the split is unknown (returns nullopt).
    std::optional<std::uint64_t> train_rows() const;
};

ActivationDump load_dump(const std::string& manifest_path);

}  // namespace sxai

#endif
