#include "gridrep/ingest/labels.hpp"

#include <map>
#include <set>

#include "gridrep/core/text.hpp"
#include "gridrep/error.hpp"

namespace gridrep::ingest {

namespace {

void check_date(const std::string& d, const std::string& where) {
    try {
        check_timestamp(d + "T00:00:00Z");
    } catch (const FormatError&) {
        throw FormatError(where + ": date '" + d + "' is not of the form YYYY-MM-DD");
    }
}

}  // namespace

std::vector<int> LabelTable::column(std::size_t event) const {
    if (event >= kEvents.size()) throw InvalidInput("event index out of range");
    std::vector<int> c(flags.size());
    for (std::size_t i = 0; i < flags.size(); ++i) c[i] = flags[i][event];
    return c;
}

std::size_t event_index(const std::string& name) {
    for (std::size_t i = 0; i < kEvents.size(); ++i)
        if (kEvents[i] == name) return i;
    throw InvalidInput("unknown event '" + name + "' (expected FT, NE, SWF, HR or NWPTC)");
}

LabelTable parse_labels(const std::string& csv, const std::string& source) {
    const auto lines = text::split(csv, '\n');
    std::size_t ln = 0;
    while (ln < lines.size() && text::trim(lines[ln]).empty()) ++ln;
    if (ln == lines.size()) throw FormatError(source + ": missing header line");
    if (text::trim(lines[ln]) != "date,FT,NE,SWF,HR,NWPTC") {
        throw FormatError(source + ":" + std::to_string(ln + 1) + ": header must be date,FT,NE,SWF,HR,NWPTC");
    }
    LabelTable t;
    std::set<std::string> seen;
    for (++ln; ln < lines.size(); ++ln) {
        const auto line = text::trim(lines[ln]);
        if (line.empty()) continue;
        const std::string where = source + ":" + std::to_string(ln + 1);
        const auto cells = text::split(line, ',');
        if (cells.size() != 6) throw FormatError(where + ": expected 6 fields, found " + std::to_string(cells.size()));
        const std::string date(text::trim(cells[0]));
        check_date(date, where);
        if (!seen.insert(date).second) throw FormatError(where + ": duplicate date " + date);
        std::array<int, 5> f{};
        for (std::size_t e = 0; e < 5; ++e) {
            const auto cell = text::trim(cells[e + 1]);
            if (cell != "0" && cell != "1") {
                throw FormatError(where + ": " + kEvents[e] + " flag '" + std::string(cell) + "' is not 0 or 1");
            }
            f[e] = cell == "1";
        }
        t.dates.push_back(date);
        t.flags.push_back(f);
    }
    return t;
}

LabelTable load_labels(const std::string& path) { return parse_labels(text::read_file(path), path); }

std::string labels_csv(const LabelTable& t) {
    std::string out = "date,FT,NE,SWF,HR,NWPTC\n";
    for (std::size_t i = 0; i < t.size(); ++i) {
        out += t.dates[i];
        for (int v : t.flags[i]) out += v ? ",1" : ",0";
        out += "\n";
    }
    return out;
}

void save_labels(const LabelTable& t, const std::string& path) { text::write_file(path, labels_csv(t)); }

std::vector<EventStat> label_stats(const LabelTable& t) {
    std::vector<EventStat> stats;
    for (std::size_t e = 0; e < kEvents.size(); ++e) {
        EventStat s;
        s.event = kEvents[e];
        for (const auto& f : t.flags) s.count += static_cast<std::size_t>(f[e]);
        if (t.size() > 0) s.frequency = static_cast<double>(s.count) / static_cast<double>(t.size());
        stats.push_back(s);
    }
    return stats;
}

LabelTable align_labels(const LabelTable& t, const std::vector<std::string>& frame_timestamps) {
    std::map<std::string, std::size_t> row_of;
    for (std::size_t i = 0; i < t.size(); ++i) row_of.emplace(t.dates[i], i);
    LabelTable out;
    for (const auto& ts : frame_timestamps) {
        const std::string date = ts.substr(0, 10);
        auto it = row_of.find(date);
        if (it == row_of.end()) throw AlignmentError("no label row for frame " + ts);
        out.dates.push_back(date);
        out.flags.push_back(t.flags[it->second]);
    }
    return out;
}

}  // namespace gridrep::ingest
