#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gridrep::verify {

/// 2x2 counts: hits a, false alarms b, misses c, correct negatives d.
struct ContingencyTable {
    std::uint64_t a = 0, b = 0, c = 0, d = 0;

    std::uint64_t total() const { return a + b + c + d; }
    ContingencyTable& operator+=(const ContingencyTable& o) {
        a += o.a;
        b += o.b;
        c += o.c;
        d += o.d;
        return *this;
    }
    friend bool operator==(const ContingencyTable&, const ContingencyTable&) = default;
};

/// Missing (nullopt) where the denominator is zero.
struct Scores {
    std::optional<double> pod, far, sr, bias, csi;

    friend bool operator==(const Scores&, const Scores&) = default;
};

/// Binary vectors are 0/1 ints; anything else is rejected.
ContingencyTable tabulate(std::span<const int> pred, std::span<const int> obs);

Scores scores(const ContingencyTable& t);

struct MetricDelta {
    std::optional<double> value;  // high - low
    bool improved = false;
};

/// Improvement means higher pod/sr/csi, lower far, and bias moving toward 1.
struct ScoreDelta {
    MetricDelta pod, far, sr, bias, csi;
};

ScoreDelta delta_scores(const Scores& high, const Scores& low);

struct ScoreRow {
    std::string method;
    std::string event;
    Scores scores;
};

/// method,event,pod,far,sr,bias,csi with NA literals.
std::string scores_csv(const std::vector<ScoreRow>& rows);
void write_scores_csv(const std::vector<ScoreRow>& rows, const std::string& path);

}  // namespace gridrep::verify
