#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "gridrep/ingest/frames.hpp"

namespace gridrep::ingest {

inline const std::array<std::string, 5> kEvents = {"FT", "NE", "SWF", "HR", "NWPTC"};

/// Daily 0/1 flags for the five events.
struct LabelTable {
    std::vector<std::string> dates;  // YYYY-MM-DD
    std::vector<std::array<int, 5>> flags;

    std::size_t size() const { return dates.size(); }
    std::vector<int> column(std::size_t event) const;
    friend bool operator==(const LabelTable&, const LabelTable&) = default;
};

std::size_t event_index(const std::string& name);

LabelTable parse_labels(const std::string& csv, const std::string& source);
LabelTable load_labels(const std::string& path);
std::string labels_csv(const LabelTable& t);
void save_labels(const LabelTable& t, const std::string& path);

struct EventStat {
    std::string event;
    std::size_t count = 0;
    std::optional<double> frequency;  // missing for an empty table
};
std::vector<EventStat> label_stats(const LabelTable& t);

/// Labels reordered to the manifest's frame dates; any frame without a
/// label row is an AlignmentError.
LabelTable align_labels(const LabelTable& t, const std::vector<std::string>& frame_timestamps);

}  // namespace gridrep::ingest
