#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace voxdim {

/// Failure categories surfaced by the library. Callers branch on these
/// rather than on message text.
enum class Errc {
    invalid_argument,
    too_short,            // audio shorter than one analysis frame
    no_voiced_frames,     // pitch analysis found no periodic frame
    insufficient_periodicity,
    extraction_failed,    // every analysis frame was rejected
    silent_audio,
    no_speech_phones,
    io_error,
    parse_error,
    rank_error,           // array container with the wrong number of dimensions
    non_finite,
    truncated,
    version_mismatch,
    corrupt,
    validation_error,
    insufficient_data,
    rank_deficient,
    dimension_mismatch,
    out_of_range,
    degenerate_target,
    single_class,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace voxdim
