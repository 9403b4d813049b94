#ifndef SXAI_ERRORS_HPP
#define SXAI_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace sxai {

// All toolkit failures carry a stable machine-readable code next to the
// human-readable message, so CLI and report code can branch on `code()`.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

inline Error bad_magic(const std::string& path) {
    return Error("BadMagic", "not a tensor file: " + path);
}
inline Error shape_mismatch(const std::string& what) {
    return Error("ShapeMismatch", what);
}
inline Error dimension_mismatch(const std::string& what) {
    return Error("DimensionMismatch", what);
}

}  // namespace sxai

#endif
