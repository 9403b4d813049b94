#ifndef SXAI_TENSOR_HPP
#define SXAI_TENSOR_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace sxai {

// On-disk tensor interchange format ("SXT"): little-endian, f32 only.
//
// Layout:
//   bytes 0..3   magic 53 58 41 49 ("SXAI")
//   bytes 4..5   format version, u16 LE (currently 1)
//   byte  6      dtype code (0 = f32)
//   byte  7      ndim (1..4)
//   next 8*ndim  dims, u64 LE each
//   rest         payload, f32 LE, row-major
struct TensorFile {
    std::vector<std::uint64_t> dims;
    std::vector<float> payload;

    std::size_t ndim() const { return dims.size(); }
    std::uint64_t size() const;

    // Row-major accessors for the common 1-D/2-D/3-D cases.
    float at(std::uint64_t i) const { return payload[i]; }
    float at(std::uint64_t i, std::uint64_t j) const { return payload[i * dims[1] + j]; }
    float at(std::uint64_t i, std::uint64_t j, std::uint64_t k) const {
        return payload[(i * dims[1] + j) * dims[2] + k];
    }

    std::uint64_t rows() const { return dims.empty() ? 0 : dims[0]; }
    std::uint64_t cols() const { return dims.size() < 2 ? 1 : dims[1]; }

    // j-th column of a 2-D tensor (or the whole payload when 1-D), as doubles.
    std::vector<double> column(std::uint64_t j) const;
};

inline constexpr std::uint16_t kTensorFormatVersion = 1;
inline constexpr unsigned char kTensorMagic[4] = {0x53, 0x58, 0x41, 0x49};

TensorFile make_tensor(std::vector<std::uint64_t> dims, std::vector<float> payload);

void write_tensor(const std::string& path, const TensorFile& tensor);
TensorFile read_tensor(const std::string& path, bool allow_nonfinite = false);

// Stream variants used by the bundle serializer in the domain module.
void write_tensor_stream(std::ostream& out, const TensorFile& tensor);
TensorFile read_tensor_stream(std::istream& in, bool allow_nonfinite = false);

// CSV convenience converter (header row, comma separated, all-numeric body).
// Produces an n_rows x n_cols 2-D tensor; never consumed directly by analysis.
TensorFile csv_to_tensor(const std::string& csv_path, std::vector<std::string>* header_out = nullptr);

}  // namespace sxai

#endif
