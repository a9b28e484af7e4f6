#include "voxdim/manifest.hpp"

#include "voxdim/csv.hpp"
#include "voxdim/error.hpp"

#include <fstream>
#include <set>

namespace voxdim {

std::string_view to_string(Split s) noexcept {
    switch (s) {
    case Split::train: return "train";
    case Split::dev: return "dev";
    case Split::test: return "test";
    }
    return "unknown";
}

std::optional<Split> parse_split(std::string_view token) noexcept {
    if (token == "train") return Split::train;
    if (token == "dev") return Split::dev;
    if (token == "test") return Split::test;
    return std::nullopt;
}

DatasetManifest::DatasetManifest(std::vector<ManifestEntry> entries) : entries_(std::move(entries)) {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (!index_.emplace(entries_[i].utterance_id, i).second) {
            fail(Errc::validation_error, "duplicate utterance_id '" + entries_[i].utterance_id + "'");
        }
    }
}

const ManifestEntry* DatasetManifest::find(std::string_view utterance_id) const {
    auto it = index_.find(utterance_id);
    return it == index_.end() ? nullptr : &entries_[it->second];
}

std::vector<ManifestEntry> DatasetManifest::split(Split s) const {
    std::vector<ManifestEntry> out;
    for (const auto& e : entries_) {
        if (e.split == s) out.push_back(e);
    }
    return out;
}

std::map<Split, SplitBalance> DatasetManifest::balance() const {
    std::map<Split, SplitBalance> out;
    std::map<Split, std::map<std::string, Gender>> speakers;
    for (const auto& e : entries_) {
        auto& b = out[e.split];
        ++b.utterances;
        ++b.utterances_per_speaker[e.speaker_id];
        speakers[e.split].emplace(e.speaker_id, e.gender);
    }
    for (auto& [split, b] : out) {
        b.speakers = speakers[split].size();
        for (const auto& [id, g] : speakers[split]) {
            (g == Gender::female ? b.female_speakers : b.male_speakers)++;
        }
    }
    return out;
}

DatasetManifest load_manifest(const std::filesystem::path& path, const ManifestOptions& options) {
    const auto table = csv::read_file(path, manifest_csv_header());
    const auto base = path.parent_path();
    auto resolve = [&](const std::string& p) -> std::filesystem::path {
        if (p.empty()) return {};
        std::filesystem::path fp(p);
        return fp.is_absolute() ? fp : base / fp;
    };

    std::vector<std::string> problems;
    std::vector<ManifestEntry> entries;
    std::set<std::string> seen;
    std::map<std::string, Gender> speaker_gender;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& f = table.rows[r];
        const std::string where = "row " + std::to_string(r + 1) + " ('" + f[0] + "')";
        ManifestEntry e;
        e.utterance_id = f[0];
        e.audio_path = resolve(f[1]);
        e.feature_path = resolve(f[2]);
        if (!f[3].empty()) e.alignment_id = f[3];
        e.speaker_id = f[4];

        if (e.utterance_id.empty()) problems.push_back(where + ": empty utterance_id");
        if (!seen.insert(e.utterance_id).second) problems.push_back(where + ": duplicate utterance_id");
        if (auto g = parse_gender(f[5])) {
            e.gender = *g;
            auto [it, inserted] = speaker_gender.emplace(e.speaker_id, *g);
            if (!inserted && it->second != *g) {
                problems.push_back(where + ": speaker '" + e.speaker_id + "' has conflicting genders");
            }
        } else {
            problems.push_back(where + ": unknown gender '" + f[5] + "'");
        }
        if (auto s = parse_split(f[6])) {
            e.split = *s;
        } else {
            problems.push_back(where + ": unknown split '" + f[6] + "'");
        }
        if (options.check_files) {
            if (!e.audio_path.empty() && !std::filesystem::exists(e.audio_path)) {
                problems.push_back(where + ": missing audio file " + e.audio_path.string());
            }
            if (!e.feature_path.empty() && !std::filesystem::exists(e.feature_path)) {
                problems.push_back(where + ": missing feature file " + e.feature_path.string());
            }
        }
        entries.push_back(std::move(e));
    }
    if (!problems.empty()) {
        std::string msg = path.string() + ": " + std::to_string(problems.size()) + " invalid row(s)";
        for (const auto& p : problems) msg += "\n  " + p;
        fail(Errc::validation_error, msg);
    }
    return DatasetManifest(std::move(entries));
}

void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) fail(Errc::io_error, "cannot write " + path.string());
    csv::write_row(out, manifest_csv_header());
    for (const auto& e : manifest.entries()) {
        csv::write_row(out, {e.utterance_id, e.audio_path.string(), e.feature_path.string(), e.alignment_id.value_or(""),
                             e.speaker_id, std::string(to_string(e.gender)), std::string(to_string(e.split))});
    }
    if (!out) fail(Errc::io_error, "failed writing " + path.string());
}

}  // namespace voxdim
