#ifndef SXAI_AUDIT_HPP
#define SXAI_AUDIT_HPP

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sxai/domain.hpp"
#include "sxai/posthoc.hpp"
#include "sxai/relatedness.hpp"
#include "sxai/uncertainty.hpp"

namespace sxai {

enum class WarningLight { Green, Yellow, Red };
std::string to_string(WarningLight light);
int light_exit_code(WarningLight light);

struct AuditConfig {
    RelatednessConfig relatedness;
    DomainConfig domain;
    UncertaintyThresholds uncertainty;
    double fidelity_threshold = 0.02;
    // GREEN tolerates a small share of flagged verdicts; RED needs the OUT
    // fraction to exceed the kNN threshold's own false-alarm rate.
    double borderline_tolerance = 0.1;
    double out_tolerance = 0.05;
    SurrogateConfig surrogate;
};

// Parses a key = value file (one pair per line, '#' comments) onto defaults.
AuditConfig parse_audit_config(const std::string& path);

struct AuditReport {
    int version = 1;
    std::string manifest_digest;
    WarningLight light = WarningLight::Yellow;

    nlohmann::json relatedness;   // section payloads; {} when skipped
    nlohmann::json domain;
    nlohmann::json uncertainty;
    nlohmann::json posthoc;
    std::vector<std::string> notes;
    nlohmann::json errors;        // section name -> message

    // raw signals the light was computed from
    std::vector<DomainLevel> verdicts;
    bool domain_present = false;
    std::vector<UncertaintyLevel> decision_flags;
    bool uncertainty_present = false;
    std::optional<std::string> fidelity_tag;
};

// Missing signals pass vacuously, except a missing domain section caps the
// light at YELLOW. Throws NoSignals when nothing at all is present.
WarningLight warning_light(const std::vector<DomainLevel>& verdicts, bool domain_present,
                           const std::vector<UncertaintyLevel>& flags, bool uncertainty_present,
                           const std::optional<std::string>& fidelity_tag,
                           double borderline_tolerance = 0.1, double out_tolerance = 0.05);

AuditReport run_audit(const std::string& manifest_path, const AuditConfig& config = {});

std::string report_to_canonical_json(const AuditReport& report);
std::string report_to_markdown(const AuditReport& report);
void render_report(const AuditReport& report, const std::string& json_path,
                   const std::string& md_path = "");

// Fixed caveat line every report carries.
extern const char* const kRashomonCaveat;

}  // namespace sxai

#endif
