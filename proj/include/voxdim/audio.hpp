#pragma once

#include <filesystem>
#include <span>
#include <vector>

namespace voxdim {

/// Mono waveform with amplitudes relative to full scale 1.0.
class AudioBuffer {
public:
    /// Validates the invariants: non-empty, sample_rate >= 8000, finite samples.
    AudioBuffer(std::vector<double> samples, int sample_rate);

    std::span<const double> samples() const noexcept { return samples_; }
    int sample_rate() const noexcept { return sample_rate_; }
    std::size_t size() const noexcept { return samples_.size(); }
    double duration() const noexcept {
        return static_cast<double>(samples_.size()) / sample_rate_;
    }

private:
    std::vector<double> samples_;
    int sample_rate_;
};

enum class WavEncoding { pcm16, float32 };

/// Reads a mono RIFF/WAVE file (PCM 16-bit or IEEE float 32-bit).
/// Multi-channel files are rejected.
AudioBuffer read_wav(const std::filesystem::path& path);

void write_wav(const std::filesystem::path& path, const AudioBuffer& audio,
               WavEncoding encoding = WavEncoding::pcm16);

}  // namespace voxdim
