#pragma once

#include "voxdim/alignment.hpp"
#include "voxdim/audio.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace voxdim {

enum class Gender { female, male };

std::string_view to_string(Gender g) noexcept;
/// Accepts exactly "female" or "male".
std::optional<Gender> parse_gender(std::string_view token) noexcept;

/// The twelve per-utterance speaker characteristics, in output column order.
enum class Characteristic {
    f0_mean,
    f1_mean,
    f2_mean,
    f3_mean,
    intensity_mean,
    jitter_local,
    shimmer_local,
    speaking_rate,
    hnr,
    spectral_rolloff,
    zcr,
    gender,
};

inline constexpr std::size_t kCharacteristicCount = 12;
inline constexpr std::array<Characteristic, kCharacteristicCount> kAllCharacteristics = {
    Characteristic::f0_mean,       Characteristic::f1_mean,          Characteristic::f2_mean,
    Characteristic::f3_mean,       Characteristic::intensity_mean,   Characteristic::jitter_local,
    Characteristic::shimmer_local, Characteristic::speaking_rate,    Characteristic::hnr,
    Characteristic::spectral_rolloff, Characteristic::zcr,           Characteristic::gender,
};

std::string_view to_string(Characteristic c) noexcept;
std::optional<Characteristic> parse_characteristic(std::string_view name) noexcept;

struct CharacteristicVector {
    double f0_mean = 0.0;
    double f1_mean = 0.0;
    double f2_mean = 0.0;
    double f3_mean = 0.0;
    double intensity_mean = 0.0;
    double jitter_local = 0.0;
    double shimmer_local = 0.0;
    std::optional<double> speaking_rate;
    double hnr = 0.0;
    double spectral_rolloff = 0.0;
    double zcr = 0.0;
    Gender gender = Gender::female;

    /// Numeric value of a characteristic; gender maps female -> 0, male -> 1.
    /// Absent speaking rate yields nullopt.
    std::optional<double> value(Characteristic c) const;

    friend bool operator==(const CharacteristicVector&, const CharacteristicVector&) = default;
};

/// Runs every measurement with default settings. Sub-measurement failures are
/// rethrown with the utterance id and the failing measurement named, keeping
/// the original error code.
CharacteristicVector extract_characteristics(const AudioBuffer& audio, const PhoneAlignment* alignment,
                                             Gender gender, std::string_view utterance_id = {});

struct CharacteristicRow {
    std::string utterance_id;
    CharacteristicVector values;
};

/// Header: utterance_id followed by the twelve characteristic names.
std::vector<std::string> characteristic_csv_header();
void write_characteristics_csv(const std::filesystem::path& path, const std::vector<CharacteristicRow>& rows);
std::vector<CharacteristicRow> read_characteristics_csv(const std::filesystem::path& path);

}  // namespace voxdim
