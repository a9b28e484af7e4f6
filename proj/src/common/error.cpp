#include "voxdim/error.hpp"

namespace voxdim {

std::string_view to_string(Errc code) noexcept {
    switch (code) {
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::too_short: return "too_short";
    case Errc::no_voiced_frames: return "no_voiced_frames";
    case Errc::insufficient_periodicity: return "insufficient_periodicity";
    case Errc::extraction_failed: return "extraction_failed";
    case Errc::silent_audio: return "silent_audio";
    case Errc::no_speech_phones: return "no_speech_phones";
    case Errc::io_error: return "io_error";
    case Errc::parse_error: return "parse_error";
    case Errc::rank_error: return "rank_error";
    case Errc::non_finite: return "non_finite";
    case Errc::truncated: return "truncated";
    case Errc::version_mismatch: return "version_mismatch";
    case Errc::corrupt: return "corrupt";
    case Errc::validation_error: return "validation_error";
    case Errc::insufficient_data: return "insufficient_data";
    case Errc::rank_deficient: return "rank_deficient";
    case Errc::dimension_mismatch: return "dimension_mismatch";
    case Errc::out_of_range: return "out_of_range";
    case Errc::degenerate_target: return "degenerate_target";
    case Errc::single_class: return "single_class";
    }
    return "unknown";
}

}  // namespace voxdim
