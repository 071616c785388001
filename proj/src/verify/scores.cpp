#include "gridrep/verify/scores.hpp"

#include <cmath>

#include "gridrep/core/text.hpp"
#include "gridrep/error.hpp"

namespace gridrep::verify {

namespace {

std::optional<double> ratio(std::uint64_t num, std::uint64_t den) {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
}

int checked(int v, const char* what, std::size_t i) {
    if (v != 0 && v != 1) throw InvalidInput(std::string(what) + "[" + std::to_string(i) + "] is not 0/1");
    return v;
}

}  // namespace

ContingencyTable tabulate(std::span<const int> pred, std::span<const int> obs) {
    if (pred.size() != obs.size()) {
        throw InvalidInput("tabulate: " + std::to_string(pred.size()) + " predictions vs " + std::to_string(obs.size()) +
                           " observations");
    }
    ContingencyTable t;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const int p = checked(pred[i], "pred", i), o = checked(obs[i], "obs", i);
        if (p && o) ++t.a;
        else if (p) ++t.b;
        else if (o) ++t.c;
        else ++t.d;
    }
    return t;
}

Scores scores(const ContingencyTable& t) {
    Scores s;
    s.pod = ratio(t.a, t.a + t.c);
    s.far = ratio(t.b, t.a + t.b);
    s.sr = ratio(t.a, t.a + t.b);
    s.bias = ratio(t.a + t.b, t.a + t.c);
    s.csi = ratio(t.a, t.a + t.b + t.c);
    return s;
}

ScoreDelta delta_scores(const Scores& high, const Scores& low) {
    auto diff = [](const std::optional<double>& h, const std::optional<double>& l, int direction) {
        MetricDelta m;
        if (h && l) {
            m.value = *h - *l;
            m.improved = direction * *m.value > 0.0;
        }
        return m;
    };
    ScoreDelta d;
    d.pod = diff(high.pod, low.pod, +1);
    d.far = diff(high.far, low.far, -1);
    d.sr = diff(high.sr, low.sr, +1);
    d.csi = diff(high.csi, low.csi, +1);
    d.bias = diff(high.bias, low.bias, +1);
    if (d.bias.value) d.bias.improved = std::abs(*high.bias - 1.0) < std::abs(*low.bias - 1.0);
    return d;
}

std::string scores_csv(const std::vector<ScoreRow>& rows) {
    std::string out = "method,event,pod,far,sr,bias,csi\n";
    for (const auto& r : rows) {
        const Scores& s = r.scores;
        out += r.method + "," + r.event;
        for (const auto* v : {&s.pod, &s.far, &s.sr, &s.bias, &s.csi}) out += "," + text::fixed_or_na(*v, 6);
        out += "\n";
    }
    return out;
}

void write_scores_csv(const std::vector<ScoreRow>& rows, const std::string& path) {
    text::write_file(path, scores_csv(rows));
}

}  // namespace gridrep::verify
