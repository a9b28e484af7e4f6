#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace voxdim {

struct PhoneInterval {
    std::string phone;
    double start; // s
    double end;   // s
};

std::set<std::string> default_silence_labels();

class PhoneAlignment {
public:
    /// Validates end > start and time-sorted, non-overlapping entries.
    explicit PhoneAlignment(std::vector<PhoneInterval> entries,
                            std::set<std::string> silence_labels = default_silence_labels());

    const std::vector<PhoneInterval>& entries() const noexcept { return entries_; }
    const std::set<std::string>& silence_labels() const noexcept { return silence_labels_; }
    bool is_silence(const std::string& phone) const { return silence_labels_.contains(phone); }

private:
    std::vector<PhoneInterval> entries_;
    std::set<std::string> silence_labels_;
};

/// Non-silence phones divided by the span from the first non-silence start to
/// the last non-silence end. Errc::no_speech_phones if there are none.
double compute_speaking_rate(const PhoneAlignment& alignment);

/// Reads `utterance_id,phone,start,end` rows, grouped by utterance.
std::map<std::string, PhoneAlignment> read_alignments(const std::filesystem::path& path);

}  // namespace voxdim
