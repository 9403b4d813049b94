#include "sxai/jsonio.hpp"

#include <cmath>
#include <cstdio>

#include "sxai/errors.hpp"

namespace sxai {

namespace {

void render(const nlohmann::json& v, std::string& out) {
    using value_t = nlohmann::json::value_t;
    switch (v.type()) {
        case value_t::object: {
            out += '{';
            bool first = true;
            for (auto it = v.begin(); it != v.end(); ++it) {  // std::map: sorted keys
                if (!first) out += ',';
                first = false;
                out += nlohmann::json(it.key()).dump();
                out += ':';
                render(it.value(), out);
            }
            out += '}';
            break;
        }
        case value_t::array: {
            out += '[';
            bool first = true;
            for (const auto& e : v) {
                if (!first) out += ',';
                first = false;
                render(e, out);
            }
            out += ']';
            break;
        }
        case value_t::number_float: {
            double d = v.get<double>();
            if (!std::isfinite(d)) throw Error("NonFiniteValue", "non-finite value in report");
            if (d == 0.0) d = 0.0;  // normalize -0
            char buf[40];
            std::snprintf(buf, sizeof(buf), "%.6g", d);
            out += buf;
            break;
        }
        default:
            out += v.dump();
            break;
    }
}

}  // namespace

std::string canonical_json(const nlohmann::json& doc) {
    std::string out;
    render(doc, out);
    out += '\n';
    return out;
}

double round6(double v) {
    if (v == 0.0) return 0.0;
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return std::strtod(buf, nullptr);
}

}  // namespace sxai
