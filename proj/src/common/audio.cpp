#include "voxdim/audio.hpp"

#include "voxdim/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

namespace voxdim {

static_assert(std::endian::native == std::endian::little, "WAV I/O assumes a little-endian host");

AudioBuffer::AudioBuffer(std::vector<double> samples, int sample_rate)
    : samples_(std::move(samples)), sample_rate_(sample_rate) {
    if (samples_.empty()) fail(Errc::invalid_argument, "audio buffer is empty");
    if (sample_rate_ < 8000) {
        fail(Errc::invalid_argument, "sample rate " + std::to_string(sample_rate_) + " Hz is below 8000 Hz");
    }
    for (double s : samples_) {
        if (!std::isfinite(s)) fail(Errc::non_finite, "audio contains non-finite samples");
    }
}

namespace {

template <typename T>
T load(const std::vector<char>& bytes, std::size_t offset) {
    T value;
    std::memcpy(&value, bytes.data() + offset, sizeof(T));
    return value;
}

template <typename T>
void store(std::ofstream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

}  // namespace

AudioBuffer read_wav(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::io_error, "cannot open " + path.string());
    const std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const std::string name = path.string();

    if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
        std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
        fail(Errc::parse_error, name + ": not a RIFF/WAVE file");
    }

    std::uint16_t format = 0, channels = 0, bits = 0;
    std::uint32_t rate = 0;
    bool have_fmt = false;
    std::size_t data_offset = 0, data_size = 0;
    bool have_data = false;

    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const std::string id(bytes.data() + pos, 4);
        const auto size = load<std::uint32_t>(bytes, pos + 4);
        const std::size_t body = pos + 8;
        if (id == "fmt ") {
            if (size < 16 || body + 16 > bytes.size()) fail(Errc::truncated, name + ": truncated fmt chunk");
            format = load<std::uint16_t>(bytes, body);
            channels = load<std::uint16_t>(bytes, body + 2);
            rate = load<std::uint32_t>(bytes, body + 4);
            bits = load<std::uint16_t>(bytes, body + 14);
            if (format == kFormatExtensible && size >= 26 && body + 26 <= bytes.size()) {
                format = load<std::uint16_t>(bytes, body + 24);
            }
            have_fmt = true;
        } else if (id == "data") {
            data_offset = body;
            data_size = std::min<std::size_t>(size, bytes.size() - body);
            have_data = true;
            break;
        }
        pos = body + size + (size & 1u);
    }
    if (!have_fmt) fail(Errc::parse_error, name + ": missing fmt chunk");
    if (!have_data) fail(Errc::parse_error, name + ": missing data chunk");
    if (channels != 1) {
        fail(Errc::invalid_argument, name + ": expected mono audio, got " + std::to_string(channels) + " channels");
    }

    std::vector<double> samples;
    if (format == kFormatPcm && bits == 16) {
        samples.resize(data_size / 2);
        for (std::size_t i = 0; i < samples.size(); ++i) {
            samples[i] = load<std::int16_t>(bytes, data_offset + 2 * i) / 32768.0;
        }
    } else if (format == kFormatFloat && bits == 32) {
        samples.resize(data_size / 4);
        for (std::size_t i = 0; i < samples.size(); ++i) {
            samples[i] = load<float>(bytes, data_offset + 4 * i);
        }
    } else {
        fail(Errc::parse_error, name + ": unsupported encoding (format " + std::to_string(format) + ", " +
                                    std::to_string(bits) + " bits)");
    }
    if (samples.empty()) fail(Errc::invalid_argument, name + ": no samples");
    return AudioBuffer(std::move(samples), static_cast<int>(rate));
}

void write_wav(const std::filesystem::path& path, const AudioBuffer& audio, WavEncoding encoding) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(Errc::io_error, "cannot write " + path.string());

    const bool pcm = encoding == WavEncoding::pcm16;
    const std::uint16_t bits = pcm ? 16 : 32;
    const std::uint32_t bytes_per_sample = bits / 8;
    const auto data_size = static_cast<std::uint32_t>(audio.size() * bytes_per_sample);
    const auto rate = static_cast<std::uint32_t>(audio.sample_rate());

    out.write("RIFF", 4);
    store<std::uint32_t>(out, 36 + data_size);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    store<std::uint32_t>(out, 16);
    store<std::uint16_t>(out, pcm ? kFormatPcm : kFormatFloat);
    store<std::uint16_t>(out, 1);
    store<std::uint32_t>(out, rate);
    store<std::uint32_t>(out, rate * bytes_per_sample);
    store<std::uint16_t>(out, static_cast<std::uint16_t>(bytes_per_sample));
    store<std::uint16_t>(out, bits);
    out.write("data", 4);
    store<std::uint32_t>(out, data_size);
    for (double s : audio.samples()) {
        if (pcm) {
            const double scaled = std::clamp(std::round(s * 32768.0), -32768.0, 32767.0);
            store<std::int16_t>(out, static_cast<std::int16_t>(scaled));
        } else {
            store<float>(out, static_cast<float>(s));
        }
    }
    if (!out) fail(Errc::io_error, "failed writing " + path.string());
}

}  // namespace voxdim
