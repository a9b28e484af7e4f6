#include "voxdim/characteristics.hpp"

#include "voxdim/csv.hpp"
#include "voxdim/error.hpp"
#include "voxdim/formants.hpp"
#include "voxdim/pitch.hpp"
#include "voxdim/spectral.hpp"
#include "voxdim/voice_quality.hpp"

#include <fstream>
#include <utility>

namespace voxdim {

std::string_view to_string(Gender g) noexcept { return g == Gender::female ? "female" : "male"; }

std::optional<Gender> parse_gender(std::string_view token) noexcept {
    if (token == "female") return Gender::female;
    if (token == "male") return Gender::male;
    return std::nullopt;
}

std::string_view to_string(Characteristic c) noexcept {
    switch (c) {
    case Characteristic::f0_mean: return "f0_mean";
    case Characteristic::f1_mean: return "f1_mean";
    case Characteristic::f2_mean: return "f2_mean";
    case Characteristic::f3_mean: return "f3_mean";
    case Characteristic::intensity_mean: return "intensity_mean";
    case Characteristic::jitter_local: return "jitter_local";
    case Characteristic::shimmer_local: return "shimmer_local";
    case Characteristic::speaking_rate: return "speaking_rate";
    case Characteristic::hnr: return "hnr";
    case Characteristic::spectral_rolloff: return "spectral_rolloff";
    case Characteristic::zcr: return "zcr";
    case Characteristic::gender: return "gender";
    }
    return "unknown";
}

std::optional<Characteristic> parse_characteristic(std::string_view name) noexcept {
    for (auto c : kAllCharacteristics) {
        if (to_string(c) == name) return c;
    }
    return std::nullopt;
}

std::optional<double> CharacteristicVector::value(Characteristic c) const {
    switch (c) {
    case Characteristic::f0_mean: return f0_mean;
    case Characteristic::f1_mean: return f1_mean;
    case Characteristic::f2_mean: return f2_mean;
    case Characteristic::f3_mean: return f3_mean;
    case Characteristic::intensity_mean: return intensity_mean;
    case Characteristic::jitter_local: return jitter_local;
    case Characteristic::shimmer_local: return shimmer_local;
    case Characteristic::speaking_rate: return speaking_rate;
    case Characteristic::hnr: return hnr;
    case Characteristic::spectral_rolloff: return spectral_rolloff;
    case Characteristic::zcr: return zcr;
    case Characteristic::gender: return gender == Gender::female ? 0.0 : 1.0;
    }
    return std::nullopt;
}

namespace {

template <typename F>
auto measure(std::string_view utterance_id, std::string_view what, F&& f) -> decltype(f()) {
    try {
        return std::forward<F>(f)();
    } catch (const Error& e) {
        std::string prefix = utterance_id.empty() ? std::string() : std::string(utterance_id) + ": ";
        throw Error(e.code(), prefix + std::string(what) + ": " + e.what());
    }
}

}  // namespace

CharacteristicVector extract_characteristics(const AudioBuffer& audio, const PhoneAlignment* alignment,
                                             Gender gender, std::string_view utterance_id) {
    CharacteristicVector out;
    out.gender = gender;

    const auto pitch = measure(utterance_id, "pitch", [&] { return compute_pitch_track(audio); });
    out.f0_mean = *pitch.mean_f0();

    FormantSettings formant_settings;
    formant_settings.max_formant = gender == Gender::female ? 5500.0 : 5000.0;
    formant_settings.max_formant = std::min(formant_settings.max_formant, audio.sample_rate() / 2.0);
    const auto formants = measure(utterance_id, "formants", [&] { return compute_formant_track(audio, formant_settings); });
    out.f1_mean = *formants.mean_frequency(0);
    out.f2_mean = *formants.mean_frequency(1);
    out.f3_mean = *formants.mean_frequency(2);

    out.intensity_mean = compute_intensity(audio).db;

    const auto perturbation = measure(utterance_id, "jitter/shimmer", [&] { return compute_jitter_shimmer(audio, pitch); });
    out.jitter_local = perturbation.jitter_local;
    out.shimmer_local = perturbation.shimmer_local;

    out.hnr = measure(utterance_id, "hnr", [&] { return compute_hnr(audio, pitch); });
    out.spectral_rolloff = measure(utterance_id, "spectral rolloff", [&] { return compute_spectral_rolloff(audio); });
    out.zcr = measure(utterance_id, "zcr", [&] { return compute_zcr(audio); });

    if (alignment) {
        out.speaking_rate = measure(utterance_id, "speaking rate", [&] { return compute_speaking_rate(*alignment); });
    }
    return out;
}

std::vector<std::string> characteristic_csv_header() {
    std::vector<std::string> header{"utterance_id"};
    for (auto c : kAllCharacteristics) header.emplace_back(to_string(c));
    return header;
}

void write_characteristics_csv(const std::filesystem::path& path, const std::vector<CharacteristicRow>& rows) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) fail(Errc::io_error, "cannot write " + path.string());
    csv::write_row(out, characteristic_csv_header());
    for (const auto& row : rows) {
        std::vector<std::string> fields{row.utterance_id};
        for (auto c : kAllCharacteristics) {
            if (c == Characteristic::gender) {
                fields.emplace_back(to_string(row.values.gender));
            } else {
                fields.push_back(csv::format_optional(row.values.value(c)));
            }
        }
        csv::write_row(out, fields);
    }
    if (!out) fail(Errc::io_error, "failed writing " + path.string());
}

std::vector<CharacteristicRow> read_characteristics_csv(const std::filesystem::path& path) {
    const auto table = csv::read_file(path, characteristic_csv_header());
    std::vector<CharacteristicRow> rows;
    rows.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& fields = table.rows[r];
        auto where = [&](std::string_view col) {
            return path.string() + ": row " + std::to_string(r + 1) + ", column " + std::string(col);
        };
        CharacteristicRow row;
        row.utterance_id = fields[0];
        auto number = [&](std::size_t i, Characteristic c) -> std::optional<double> {
            if (fields[i].empty()) {
                if (c == Characteristic::speaking_rate) return std::nullopt;
                fail(Errc::parse_error, where(to_string(c)) + " is empty");
            }
            auto v = csv::parse_double(fields[i]);
            if (!v) fail(Errc::parse_error, where(to_string(c)) + " is not a number");
            return v;
        };
        auto& v = row.values;
        v.f0_mean = *number(1, Characteristic::f0_mean);
        v.f1_mean = *number(2, Characteristic::f1_mean);
        v.f2_mean = *number(3, Characteristic::f2_mean);
        v.f3_mean = *number(4, Characteristic::f3_mean);
        v.intensity_mean = *number(5, Characteristic::intensity_mean);
        v.jitter_local = *number(6, Characteristic::jitter_local);
        v.shimmer_local = *number(7, Characteristic::shimmer_local);
        v.speaking_rate = number(8, Characteristic::speaking_rate);
        v.hnr = *number(9, Characteristic::hnr);
        v.spectral_rolloff = *number(10, Characteristic::spectral_rolloff);
        v.zcr = *number(11, Characteristic::zcr);
        const auto g = parse_gender(fields[12]);
        if (!g) fail(Errc::parse_error, where("gender") + ": unknown gender '" + fields[12] + "'");
        v.gender = *g;
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace voxdim
