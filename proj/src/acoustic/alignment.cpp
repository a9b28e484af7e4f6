#include "voxdim/alignment.hpp"

#include "voxdim/csv.hpp"
#include "voxdim/error.hpp"

#include <cmath>

namespace voxdim {

std::set<std::string> default_silence_labels() { return {"sil", "sp", "spn", ""}; }

PhoneAlignment::PhoneAlignment(std::vector<PhoneInterval> entries, std::set<std::string> silence_labels)
    : entries_(std::move(entries)), silence_labels_(std::move(silence_labels)) {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        const auto& e = entries_[i];
        if (!(std::isfinite(e.start) && std::isfinite(e.end) && e.end > e.start)) {
            fail(Errc::validation_error, "alignment entry " + std::to_string(i) + " ('" + e.phone +
                                             "') must have end > start");
        }
        if (i > 0 && e.start < entries_[i - 1].end - 1e-9) {
            fail(Errc::validation_error, "alignment entry " + std::to_string(i) + " ('" + e.phone +
                                             "') overlaps or precedes its predecessor");
        }
    }
}

double compute_speaking_rate(const PhoneAlignment& alignment) {
    std::size_t count = 0;
    double first = 0.0, last = 0.0;
    for (const auto& e : alignment.entries()) {
        if (alignment.is_silence(e.phone)) continue;
        if (count == 0) first = e.start;
        last = e.end;
        ++count;
    }
    if (count == 0) fail(Errc::no_speech_phones, "alignment has no non-silence phones");
    return static_cast<double>(count) / (last - first);
}

std::map<std::string, PhoneAlignment> read_alignments(const std::filesystem::path& path) {
    const auto table = csv::read_file(path, {"utterance_id", "phone", "start", "end"});
    std::map<std::string, std::vector<PhoneInterval>> grouped;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        const auto start = csv::parse_double(row[2]);
        const auto end = csv::parse_double(row[3]);
        if (!start || !end) {
            fail(Errc::parse_error, path.string() + ": row " + std::to_string(i + 1) + " has a malformed time");
        }
        grouped[row[0]].push_back({row[1], *start, *end});
    }
    std::map<std::string, PhoneAlignment> out;
    for (auto& [id, entries] : grouped) {
        try {
            out.emplace(id, PhoneAlignment(std::move(entries)));
        } catch (const Error& e) {
            fail(e.code(), path.string() + ": utterance '" + id + "': " + e.what());
        }
    }
    return out;
}

}  // namespace voxdim
