#include "voxdim/npy.hpp"

#include "voxdim/error.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <regex>
#include <string>
#include <vector>

namespace voxdim {

static_assert(std::endian::native == std::endian::little, "NPY I/O assumes a little-endian host");

namespace {

constexpr char kMagic[] = "\x93NUMPY";
constexpr std::size_t kMagicLen = 6;

std::string header_value(const std::string& header, const std::string& key, const std::string& name) {
    const std::regex pattern("['\"]" + key + "['\"]\\s*:\\s*(\\([^)]*\\)|'[^']*'|\"[^\"]*\"|True|False)");
    std::smatch m;
    if (!std::regex_search(header, m, pattern)) fail(Errc::parse_error, name + ": header lacks '" + key + "'");
    return m[1].str();
}

std::vector<std::size_t> parse_shape(const std::string& text, const std::string& name) {
    std::vector<std::size_t> dims;
    const std::regex number("\\d+");
    for (auto it = std::sregex_iterator(text.begin(), text.end(), number); it != std::sregex_iterator(); ++it) {
        dims.push_back(static_cast<std::size_t>(std::stoull(it->str())));
    }
    if (text.front() != '(') fail(Errc::parse_error, name + ": malformed shape " + text);
    return dims;
}

}  // namespace

RowMatrix read_npy_matrix(const std::filesystem::path& path) {
    const std::string name = path.string();
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::io_error, "cannot open " + name);
    const std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    if (bytes.size() < 10 || std::memcmp(bytes.data(), kMagic, kMagicLen) != 0) {
        fail(Errc::parse_error, name + ": not an NPY file");
    }
    const auto major = static_cast<unsigned char>(bytes[6]);
    std::size_t header_len = 0, header_start = 0;
    if (major == 1) {
        std::uint16_t len;
        std::memcpy(&len, bytes.data() + 8, 2);
        header_len = len;
        header_start = 10;
    } else if (major == 2 || major == 3) {
        if (bytes.size() < 12) fail(Errc::truncated, name + ": truncated header");
        std::uint32_t len;
        std::memcpy(&len, bytes.data() + 8, 4);
        header_len = len;
        header_start = 12;
    } else {
        fail(Errc::parse_error, name + ": unsupported NPY version " + std::to_string(major));
    }
    if (header_start + header_len > bytes.size()) fail(Errc::truncated, name + ": truncated header");
    const std::string header(bytes.data() + header_start, header_len);

    const std::string descr = header_value(header, "descr", name);
    const bool fortran = header_value(header, "fortran_order", name) == "True";
    const auto shape = parse_shape(header_value(header, "shape", name), name);
    if (shape.size() != 2) {
        fail(Errc::rank_error, name + ": expected a 2-D array, got rank " + std::to_string(shape.size()));
    }

    std::size_t width = 0;
    if (descr == "'<f4'" || descr == "\"<f4\"") width = 4;
    else if (descr == "'<f8'" || descr == "\"<f8\"") width = 8;
    else fail(Errc::parse_error, name + ": unsupported dtype " + descr);

    const std::size_t rows = shape[0], cols = shape[1];
    const std::size_t data_start = header_start + header_len;
    const std::size_t count = rows * cols;
    if (bytes.size() - data_start < count * width) {
        fail(Errc::truncated, name + ": data section holds " + std::to_string(bytes.size() - data_start) +
                                  " bytes, expected " + std::to_string(count * width));
    }

    RowMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    const char* data = bytes.data() + data_start;
    for (std::size_t i = 0; i < count; ++i) {
        double v;
        if (width == 4) {
            float f;
            std::memcpy(&f, data + 4 * i, 4);
            v = f;
        } else {
            std::memcpy(&v, data + 8 * i, 8);
        }
        if (!std::isfinite(v)) fail(Errc::non_finite, name + ": non-finite value at flat index " + std::to_string(i));
        const std::size_t r = fortran ? i % rows : i / cols;
        const std::size_t c = fortran ? i / rows : i % cols;
        m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
    }
    return m;
}

void write_npy_matrix(const std::filesystem::path& path, const RowMatrix& matrix) {
    std::string header = "{'descr': '<f4', 'fortran_order': False, 'shape': (" + std::to_string(matrix.rows()) +
                         ", " + std::to_string(matrix.cols()) + "), }";
    const std::size_t unpadded = kMagicLen + 4 + header.size() + 1;
    header.append((64 - unpadded % 64) % 64, ' ');
    header.push_back('\n');

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(Errc::io_error, "cannot write " + path.string());
    out.write(kMagic, kMagicLen);
    out.put(1);
    out.put(0);
    const auto len = static_cast<std::uint16_t>(header.size());
    out.write(reinterpret_cast<const char*>(&len), 2);
    out.write(header.data(), static_cast<std::streamsize>(header.size()));

    std::vector<float> data(static_cast<std::size_t>(matrix.size()));
    std::size_t k = 0;
    for (Eigen::Index r = 0; r < matrix.rows(); ++r) {
        for (Eigen::Index c = 0; c < matrix.cols(); ++c) data[k++] = static_cast<float>(matrix(r, c));
    }
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size() * sizeof(float)));
    if (!out) fail(Errc::io_error, "failed writing " + path.string());
}

}  // namespace voxdim
