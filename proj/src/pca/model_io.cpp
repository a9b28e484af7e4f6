#include "voxdim/error.hpp"
#include "voxdim/pca.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

static_assert(std::endian::native == std::endian::little, "model files are little-endian");

namespace voxdim {

namespace {

constexpr char kMagic[8] = {'V', 'O', 'X', 'D', 'I', 'M', 'P', 'C'};
constexpr std::size_t kHeaderSize = 8 + 4 + 4 + 3 * 8;

std::uint64_t fnv1a(const char* data, std::size_t size) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < size; ++i) {
        h ^= static_cast<unsigned char>(data[i]);
        h *= 0x100000001b3ULL;
    }
    return h;
}

template <typename T>
void put(std::string& out, const T& value) {
    out.append(reinterpret_cast<const char*>(&value), sizeof(T));
}

void put_doubles(std::string& out, const double* data, Eigen::Index count) {
    out.append(reinterpret_cast<const char*>(data), static_cast<std::size_t>(count) * sizeof(double));
}

class Reader {
public:
    Reader(const std::string& bytes, std::size_t end) : bytes_(bytes), end_(end) {}

    template <typename T>
    T get() {
        T value;
        std::memcpy(&value, take(sizeof(T)), sizeof(T));
        return value;
    }

    void get_doubles(double* dst, Eigen::Index count) {
        const auto n = static_cast<std::size_t>(count) * sizeof(double);
        std::memcpy(dst, take(n), n);
    }

private:
    const char* take(std::size_t n) {
        if (end_ - pos_ < n) fail(Errc::corrupt, "model file is truncated");
        const char* p = bytes_.data() + pos_;
        pos_ += n;
        return p;
    }

    const std::string& bytes_;
    std::size_t end_;
    std::size_t pos_ = 0;
};

}  // namespace

void save_model(const PcaModel& model, const std::filesystem::path& path) {
    const auto d = model.dim();
    const auto k = model.components();
    if (model.mean.size() != d || model.stddevs.size() != k || model.explained_variance_ratio.size() != k) {
        fail(Errc::invalid_argument, "inconsistent model field sizes");
    }
    std::string out(kMagic, sizeof(kMagic));
    put(out, kModelFormatVersion);
    put(out, std::uint32_t{0});
    put(out, static_cast<std::uint64_t>(d));
    put(out, static_cast<std::uint64_t>(k));
    put(out, model.n_train);
    put_doubles(out, model.mean.data(), d);
    put_doubles(out, model.directions.data(), k * d);
    put_doubles(out, model.stddevs.data(), k);
    put_doubles(out, model.explained_variance_ratio.data(), k);
    put(out, fnv1a(out.data(), out.size()));

    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) fail(Errc::io_error, "cannot open '" + path.string() + "' for writing");
    file.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!file) fail(Errc::io_error, "failed writing '" + path.string() + "'");
}

PcaModel load_model(const std::filesystem::path& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) fail(Errc::io_error, "cannot open model file '" + path.string() + "'");
    const std::string bytes{std::istreambuf_iterator<char>(file), std::istreambuf_iterator<char>()};
    const std::string where = "model file '" + path.string() + "'";

    if (bytes.size() < sizeof(kMagic) + 4 || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
        fail(Errc::corrupt, where + " is not a voxdim PCA model");
    }
    std::uint32_t version;
    std::memcpy(&version, bytes.data() + sizeof(kMagic), 4);
    if (version != kModelFormatVersion) {
        fail(Errc::version_mismatch, where + " has format version " + std::to_string(version) +
                                         ", this reader supports version " +
                                         std::to_string(kModelFormatVersion));
    }
    if (bytes.size() < kHeaderSize + 8) fail(Errc::corrupt, where + " is truncated");

    const std::size_t body = bytes.size() - 8;
    std::uint64_t stored;
    std::memcpy(&stored, bytes.data() + body, 8);

    Reader in(bytes, body);
    in.get<std::uint64_t>();  // magic
    in.get<std::uint32_t>();  // version
    in.get<std::uint32_t>();  // reserved
    const auto d = in.get<std::uint64_t>();
    const auto k = in.get<std::uint64_t>();
    const auto n = in.get<std::uint64_t>();
    // Guard the size arithmetic before trusting the header.
    const std::uint64_t limit = body / sizeof(double);
    if (d == 0 || k == 0 || k > d || d > limit || k > limit / d ||
        body != kHeaderSize + (d + k * d + 2 * k) * sizeof(double)) {
        fail(Errc::corrupt, where + " is truncated or has inconsistent sizes");
    }
    if (stored != fnv1a(bytes.data(), body)) fail(Errc::corrupt, where + " failed its checksum");

    PcaModel model;
    model.n_train = n;
    const auto di = static_cast<Eigen::Index>(d);
    const auto ki = static_cast<Eigen::Index>(k);
    model.mean.resize(di);
    model.directions.resize(ki, di);
    model.stddevs.resize(ki);
    model.explained_variance_ratio.resize(ki);
    in.get_doubles(model.mean.data(), di);
    in.get_doubles(model.directions.data(), ki * di);
    in.get_doubles(model.stddevs.data(), ki);
    in.get_doubles(model.explained_variance_ratio.data(), ki);
    return model;
}

}  // namespace voxdim
