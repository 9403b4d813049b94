#include "sxai/tensor.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "sxai/errors.hpp"

namespace sxai {

namespace {

void put_u16(std::ostream& out, std::uint16_t v) {
    unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>(v >> 8)};
    out.write(reinterpret_cast<const char*>(b), 2);
}

void put_u64(std::ostream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint16_t get_u16(std::istream& in) {
    unsigned char b[2];
    in.read(reinterpret_cast<char*>(b), 2);
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

std::uint64_t get_u64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

}  // namespace

std::uint64_t TensorFile::size() const {
    std::uint64_t n = 1;
    for (auto d : dims) n *= d;
    return dims.empty() ? 0 : n;
}

std::vector<double> TensorFile::column(std::uint64_t j) const {
    std::vector<double> out;
    if (dims.size() == 1) {
        if (j != 0) throw Error("IndexOutOfRange", "1-D tensor has a single column");
        out.assign(payload.begin(), payload.end());
        return out;
    }
    if (dims.size() != 2 || j >= dims[1])
        throw Error("IndexOutOfRange", "column index out of range");
    out.reserve(dims[0]);
    for (std::uint64_t i = 0; i < dims[0]; ++i) out.push_back(at(i, j));
    return out;
}

TensorFile make_tensor(std::vector<std::uint64_t> dims, std::vector<float> payload) {
    TensorFile t{std::move(dims), std::move(payload)};
    if (t.dims.empty() || t.dims.size() > 4)
        throw Error("BadShape", "ndim must be 1..4");
    for (auto d : t.dims)
        if (d == 0) throw Error("BadShape", "zero-length dimension");
    if (t.size() != t.payload.size())
        throw shape_mismatch("payload length does not match dims product");
    return t;
}

void write_tensor_stream(std::ostream& out, const TensorFile& tensor) {
    if (tensor.dims.empty() || tensor.dims.size() > 4)
        throw Error("BadShape", "ndim must be 1..4");
    std::uint64_t n = 1;
    for (auto d : tensor.dims) {
        if (d == 0) throw Error("BadShape", "zero-length dimension");
        if (n > std::numeric_limits<std::uint64_t>::max() / d)
            throw Error("DimensionOverflow", "dims product overflows u64");
        n *= d;
    }
    if (n != tensor.payload.size())
        throw shape_mismatch("payload length does not match dims product");

    out.write(reinterpret_cast<const char*>(kTensorMagic), 4);
    put_u16(out, kTensorFormatVersion);
    out.put(static_cast<char>(0));  // dtype f32
    out.put(static_cast<char>(tensor.dims.size()));
    for (auto d : tensor.dims) put_u64(out, d);
    for (float v : tensor.payload) {
        static_assert(sizeof(float) == 4);
        if (!std::isfinite(v)) throw Error("NonFiniteValue", "refusing to write non-finite value");
        std::uint32_t bits;
        std::memcpy(&bits, &v, 4);
        unsigned char b[4];
        for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
        out.write(reinterpret_cast<const char*>(b), 4);
    }
    if (!out) throw Error("IoError", "tensor write failed");
}

void write_tensor(const std::string& path, const TensorFile& tensor) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("IoError", "cannot open for writing: " + path);
    write_tensor_stream(out, tensor);
}

TensorFile read_tensor_stream(std::istream& in, bool allow_nonfinite) {
    unsigned char magic[4];
    in.read(reinterpret_cast<char*>(magic), 4);
    if (!in || std::memcmp(magic, kTensorMagic, 4) != 0)
        throw Error("BadMagic", "missing SXAI magic bytes");
    std::uint16_t version = get_u16(in);
    if (version != kTensorFormatVersion)
        throw Error("UnsupportedVersion", "tensor format version " + std::to_string(version));
    int dtype = in.get();
    if (dtype != 0) throw Error("UnsupportedDtype", "dtype code " + std::to_string(dtype));
    int ndim = in.get();
    if (!in || ndim < 1 || ndim > 4)
        throw Error("BadShape", "ndim out of range: " + std::to_string(ndim));

    TensorFile t;
    std::uint64_t n = 1;
    for (int i = 0; i < ndim; ++i) {
        std::uint64_t d = get_u64(in);
        if (!in) throw Error("TruncatedPayload", "truncated header");
        if (d == 0) throw Error("BadShape", "zero-length dimension");
        if (n > std::numeric_limits<std::uint64_t>::max() / d)
            throw Error("DimensionOverflow", "dims product overflows u64");
        n *= d;
        t.dims.push_back(d);
    }
    t.payload.resize(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        unsigned char b[4];
        in.read(reinterpret_cast<char*>(b), 4);
        if (!in) throw Error("TruncatedPayload", "payload shorter than dims imply");
        std::uint32_t bits = 0;
        for (int k = 0; k < 4; ++k) bits |= static_cast<std::uint32_t>(b[k]) << (8 * k);
        float v;
        std::memcpy(&v, &bits, 4);
        if (!allow_nonfinite && !std::isfinite(v))
            throw Error("NonFiniteValue", "non-finite value at flat index " + std::to_string(i));
        t.payload[i] = v;
    }
    return t;
}

TensorFile read_tensor(const std::string& path, bool allow_nonfinite) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("IoError", "cannot open: " + path);
    return read_tensor_stream(in, allow_nonfinite);
}

TensorFile csv_to_tensor(const std::string& csv_path, std::vector<std::string>* header_out) {
    std::ifstream in(csv_path);
    if (!in) throw Error("IoError", "cannot open: " + csv_path);
    std::string line;
    if (!std::getline(in, line)) throw Error("BadCsv", "empty file: " + csv_path);
    if (!line.empty() && line.back() == '\r') line.pop_back();

    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) header.push_back(cell);
    }
    if (header.empty()) throw Error("BadCsv", "empty header row");
    if (header_out) *header_out = header;

    std::vector<float> values;
    std::uint64_t rows = 0;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::size_t cols = 0;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t pos = 0;
                float v = std::stof(cell, &pos);
                if (pos != cell.size()) throw std::invalid_argument(cell);
                values.push_back(v);
            } catch (const std::exception&) {
                throw Error("BadCsv", "non-numeric cell '" + cell + "' at line " +
                                          std::to_string(line_no));
            }
            ++cols;
        }
        if (cols != header.size())
            throw Error("BadCsv", "row width " + std::to_string(cols) + " != header width " +
                                      std::to_string(header.size()) + " at line " +
                                      std::to_string(line_no));
        ++rows;
    }
    if (rows == 0) throw Error("BadCsv", "no data rows");
    return make_tensor({rows, header.size()}, std::move(values));
}

}  // namespace sxai
