#ifndef SXAI_JSONIO_HPP
#define SXAI_JSONIO_HPP

#include <string>

#include <json.hpp>

namespace sxai {

// Canonical rendering: keys sorted, floats printed with 6 significant digits,
// no locale dependence. Identical documents always produce identical bytes.
std::string canonical_json(const nlohmann::json& doc);

// Helper for embedding doubles that should survive canonicalization cleanly.
double round6(double v);

}  // namespace sxai

#endif
