#pragma once

#include "voxdim/characteristics.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace voxdim {

enum class Split { train, dev, test };

std::string_view to_string(Split s) noexcept;
std::optional<Split> parse_split(std::string_view token) noexcept;

struct ManifestEntry {
    std::string utterance_id;
    std::filesystem::path audio_path;   // empty when not provided
    std::filesystem::path feature_path; // empty when not provided
    std::optional<std::string> alignment_id;
    std::string speaker_id;
    Gender gender = Gender::female;
    Split split = Split::train;
};

/// Per-split curation summary.
struct SplitBalance {
    std::size_t utterances = 0;
    std::size_t speakers = 0;
    std::size_t female_speakers = 0;
    std::size_t male_speakers = 0;
    std::map<std::string, std::size_t> utterances_per_speaker;
};

class DatasetManifest {
public:
    DatasetManifest() = default;
    explicit DatasetManifest(std::vector<ManifestEntry> entries);

    const std::vector<ManifestEntry>& entries() const noexcept { return entries_; }
    bool empty() const noexcept { return entries_.empty(); }
    const ManifestEntry* find(std::string_view utterance_id) const;
    std::vector<ManifestEntry> split(Split s) const;
    std::map<Split, SplitBalance> balance() const;

private:
    std::vector<ManifestEntry> entries_;
    std::map<std::string, std::size_t, std::less<>> index_;
};

inline const std::vector<std::string>& manifest_csv_header() {
    static const std::vector<std::string> header{"utterance_id", "audio_path", "feature_path", "alignment_id",
                                                 "speaker_id",   "gender",     "split"};
    return header;
}

struct ManifestOptions {
    /// Require non-empty audio/feature paths to exist.
    bool check_files = true;
};

/// Loads and validates a manifest CSV. Relative paths are resolved against the
/// manifest's directory. All offending rows are listed in a single
/// validation_error: duplicate ids, unknown gender or split tokens, missing
/// files, and speakers with conflicting genders.
DatasetManifest load_manifest(const std::filesystem::path& path, const ManifestOptions& options = {});

/// Writes paths as given (no relativization).
void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);

}  // namespace voxdim
