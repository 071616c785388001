#include "gridrep/verify/charts.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "gridrep/core/text.hpp"
#include "gridrep/error.hpp"

namespace gridrep::verify {

namespace {

// Style block: canvas, plot box and palette shared by every chart.
constexpr double kCanvas = 800.0;
constexpr double kLeft = 80.0, kTop = 60.0, kSide = 560.0;
constexpr double kLegendX = 660.0;
const std::vector<std::string> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string n2(double v) { return text::fixed(v, 2); }

class Svg {
public:
    Svg() {
        out_ =
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
            "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"800\" height=\"800\" "
            "viewBox=\"0 0 800 800\">\n"
            "<style type=\"text/css\">text { font-family: sans-serif; font-size: 13px; } "
            ".title { font-size: 18px; } .small { font-size: 11px; }</style>\n"
            "<rect x=\"0\" y=\"0\" width=\"800\" height=\"800\" fill=\"white\"/>\n";
    }

    void line(double x1, double y1, double x2, double y2, const std::string& style) {
        out_ += "<line x1=\"" + n2(x1) + "\" y1=\"" + n2(y1) + "\" x2=\"" + n2(x2) + "\" y2=\"" + n2(y2) + "\" style=\"" +
                style + "\"/>\n";
    }

    void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& style,
                  const std::string& attrs = "") {
        if (pts.empty()) return;
        out_ += "<polyline" + attrs + " fill=\"none\" style=\"" + style + "\" points=\"";
        for (std::size_t i = 0; i < pts.size(); ++i) out_ += (i ? " " : "") + n2(pts[i].first) + "," + n2(pts[i].second);
        out_ += "\"/>\n";
    }

    void text(double x, double y, const std::string& s, const std::string& attrs = "") {
        out_ += "<text x=\"" + n2(x) + "\" y=\"" + n2(y) + "\"" + attrs + ">" + text::xml_escape(s) + "</text>\n";
    }

    void rect(double x, double y, double w, double h, const std::string& style) {
        out_ += "<rect x=\"" + n2(x) + "\" y=\"" + n2(y) + "\" width=\"" + n2(w) + "\" height=\"" + n2(h) +
                "\" style=\"" + style + "\"/>\n";
    }

    void raw(const std::string& s) { out_ += s; }

    std::string finish() { return out_ + "</svg>\n"; }

private:
    std::string out_;
};

std::string attr(const std::string& name, const std::string& value) {
    return " " + name + "=\"" + text::xml_escape(value) + "\"";
}

// Marker shapes indexed by event order: circle, square, triangle, diamond,
// inverted triangle, cross.
std::string marker(std::size_t shape, double x, double y, const std::string& color, double r = 7.0) {
    const std::string fill = " fill=\"" + color + "\" stroke=\"black\" stroke-width=\"1\"";
    auto poly = [&](std::vector<std::pair<double, double>> pts) {
        std::string s = "<polygon points=\"";
        for (std::size_t i = 0; i < pts.size(); ++i) s += (i ? " " : "") + n2(x + pts[i].first) + "," + n2(y + pts[i].second);
        return s + "\"" + fill + "/>";
    };
    switch (shape % 6) {
        case 0: return "<circle cx=\"" + n2(x) + "\" cy=\"" + n2(y) + "\" r=\"" + n2(r) + "\"" + fill + "/>";
        case 1: return "<rect x=\"" + n2(x - r) + "\" y=\"" + n2(y - r) + "\" width=\"" + n2(2 * r) + "\" height=\"" +
                       n2(2 * r) + "\"" + fill + "/>";
        case 2: return poly({{0, -r * 1.2}, {r * 1.1, r * 0.8}, {-r * 1.1, r * 0.8}});
        case 3: return poly({{0, -r * 1.3}, {r, 0}, {0, r * 1.3}, {-r, 0}});
        case 4: return poly({{0, r * 1.2}, {r * 1.1, -r * 0.8}, {-r * 1.1, -r * 0.8}});
        default:
            return "<path d=\"M" + n2(x - r) + "," + n2(y - r) + " L" + n2(x + r) + "," + n2(y + r) + " M" + n2(x - r) +
                   "," + n2(y + r) + " L" + n2(x + r) + "," + n2(y - r) + "\" stroke=\"" + color +
                   "\" stroke-width=\"3\" fill=\"none\"/>";
    }
}

// First-appearance order of names, so styling follows the caller's order.
std::map<std::string, std::size_t> index_by_appearance(const std::vector<std::string>& names,
                                                       std::vector<std::string>* ordered = nullptr) {
    std::map<std::string, std::size_t> idx;
    for (const auto& n : names)
        if (idx.emplace(n, idx.size()).second && ordered) ordered->push_back(n);
    return idx;
}

void title(Svg& svg, const std::string& t) {
    if (!t.empty()) svg.text(kCanvas / 2, 32, t, " text-anchor=\"middle\" class=\"title\"");
}

void unit_axes(Svg& svg, const std::string& xlabel, const std::string& ylabel) {
    svg.rect(kLeft, kTop, kSide, kSide, "fill:none;stroke:black;stroke-width:1.5");
    for (int i = 0; i <= 10; ++i) {
        const double v = i / 10.0;
        const double x = kLeft + v * kSide, y = kTop + (1.0 - v) * kSide;
        svg.line(x, kTop + kSide, x, kTop + kSide + 6, "stroke:black");
        svg.text(x, kTop + kSide + 22, text::fixed(v, 1), " text-anchor=\"middle\"");
        svg.line(kLeft - 6, y, kLeft, y, "stroke:black");
        svg.text(kLeft - 10, y + 4, text::fixed(v, 1), " text-anchor=\"end\"");
    }
    svg.text(kLeft + kSide / 2, kTop + kSide + 50, xlabel, " text-anchor=\"middle\"");
    svg.text(24, kTop + kSide / 2, ylabel,
             " text-anchor=\"middle\" transform=\"rotate(-90 24 " + n2(kTop + kSide / 2) + ")\"");
}

void check_unit(double v, const char* what) {
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidInput(std::string(what) + " must lie in [0, 1]");
}

}  // namespace

std::string performance_diagram_svg(const std::vector<DiagramPoint>& points, const std::string& chart_title) {
    for (const auto& p : points) {
        check_unit(p.sr, "success ratio");
        check_unit(p.pod, "probability of detection");
    }
    auto px = [](double sr) { return kLeft + sr * kSide; };
    auto py = [](double pod) { return kTop + (1.0 - pod) * kSide; };

    Svg svg;
    title(svg, chart_title);

    // CSI contours: csi = 1 / (1/pod + 1/sr - 1), traced from sr = csi to 1.
    for (int level = 1; level <= 9; ++level) {
        const double c = level / 10.0;
        std::vector<std::pair<double, double>> pts;
        for (int i = 0; i <= 100; ++i) {
            const double sr = c + (1.0 - c) * i / 100.0;
            const double pod = 1.0 / (1.0 / c + 1.0 - 1.0 / sr);
            pts.emplace_back(px(sr), py(std::min(1.0, pod)));
        }
        svg.polyline(pts, "stroke:#555555;stroke-width:1", attr("class", "csi-contour") + attr("data-csi", text::fixed(c, 1)));
        const double diag = 2.0 * c / (1.0 + c);
        svg.text(px(diag) + 4, py(diag) - 4, text::fixed(c, 1), " class=\"small\" fill=\"#555555\"");
    }

    // Bias rays pod = bias * sr from the origin to the box edge.
    for (double b : {0.3, 0.5, 0.8, 1.0, 1.3, 2.0, 3.0, 5.0, 10.0}) {
        const double sr_end = b <= 1.0 ? 1.0 : 1.0 / b;
        const double pod_end = b <= 1.0 ? b : 1.0;
        svg.raw("<line class=\"bias-ray\"" + attr("data-bias", text::general(b, 3)) + " x1=\"" + n2(px(0)) + "\" y1=\"" +
                n2(py(0)) + "\" x2=\"" + n2(px(sr_end)) + "\" y2=\"" + n2(py(pod_end)) +
                "\" style=\"stroke:#888888;stroke-width:1;stroke-dasharray:6,4\"/>\n");
        if (b <= 1.0) svg.text(px(sr_end) + 5, py(pod_end) + 4, text::general(b, 3), " class=\"small\" fill=\"#888888\"");
        else svg.text(px(sr_end), py(pod_end) - 6, text::general(b, 3), " class=\"small\" text-anchor=\"middle\" fill=\"#888888\"");
    }

    unit_axes(svg, "Success Ratio (1 - FAR)", "Probability of Detection (POD)");

    std::vector<std::string> events, methods, ev_names, me_names;
    for (const auto& p : points) {
        ev_names.push_back(p.event);
        me_names.push_back(p.method);
    }
    auto ev_idx = index_by_appearance(ev_names, &events);
    auto me_idx = index_by_appearance(me_names, &methods);

    for (const auto& p : points) {
        const std::size_t shape = ev_idx.at(p.event);
        const std::string& color = kPalette[me_idx.at(p.method) % kPalette.size()];
        svg.raw("<g class=\"point\"" + attr("data-method", p.method) + attr("data-event", p.event) +
                attr("data-shape", std::to_string(shape % 6)) + attr("data-color", color) +
                attr("data-sr", text::fixed(p.sr, 4)) + attr("data-pod", text::fixed(p.pod, 4)) + ">" +
                marker(shape, px(p.sr), py(p.pod), color) + "</g>\n");
    }

    double y = kTop + 10;
    svg.text(kLegendX, y, "Events");
    for (std::size_t i = 0; i < events.size(); ++i) {
        y += 26;
        svg.raw(marker(i, kLegendX + 8, y - 4, "#ffffff"));
        svg.text(kLegendX + 24, y, events[i]);
    }
    y += 40;
    svg.text(kLegendX, y, "Methods");
    for (std::size_t i = 0; i < methods.size(); ++i) {
        y += 26;
        svg.rect(kLegendX + 1, y - 11, 14, 14, "fill:" + kPalette[i % kPalette.size()] + ";stroke:black");
        svg.text(kLegendX + 24, y, methods[i]);
    }
    y += 40;
    svg.text(kLegendX, y, "solid: CSI", " class=\"small\"");
    svg.text(kLegendX, y + 16, "dashed: bias", " class=\"small\"");
    return svg.finish();
}

void render_performance_diagram(const std::vector<DiagramPoint>& points, const std::string& path,
                                const std::string& chart_title) {
    text::write_file(path, performance_diagram_svg(points, chart_title));
}

std::string sweep_chart_svg(const std::vector<std::size_t>& dims, const std::vector<SweepSeries>& series,
                            const std::string& chart_title) {
    if (dims.empty()) throw InvalidInput("sweep chart needs at least one latent size");
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (dims[i] == 0) throw InvalidInput("latent sizes must be positive");
        if (i > 0 && dims[i] <= dims[i - 1]) throw InvalidInput("latent sizes must be strictly increasing");
    }
    for (const auto& s : series) {
        if (s.csi.size() != dims.size() || s.pod.size() != dims.size() || s.far.size() != dims.size()) {
            throw InvalidInput("sweep series '" + s.method + "' length does not match " + std::to_string(dims.size()) +
                               " latent sizes");
        }
        for (const auto* m : {&s.csi, &s.pod, &s.far})
            for (const auto& v : *m)
                if (v) check_unit(*v, "sweep score");
    }

    const double lo = std::log2(static_cast<double>(dims.front()));
    const double hi = std::log2(static_cast<double>(dims.back()));
    auto px = [&](std::size_t d) {
        if (hi == lo) return kLeft + kSide / 2;
        return kLeft + 20 + (std::log2(static_cast<double>(d)) - lo) / (hi - lo) * (kSide - 40);
    };
    auto py = [](double v) { return kTop + (1.0 - v) * kSide; };

    Svg svg;
    title(svg, chart_title);
    svg.rect(kLeft, kTop, kSide, kSide, "fill:none;stroke:black;stroke-width:1.5");
    for (int i = 0; i <= 10; ++i) {
        const double v = i / 10.0;
        svg.line(kLeft - 6, py(v), kLeft, py(v), "stroke:black");
        svg.text(kLeft - 10, py(v) + 4, text::fixed(v, 1), " text-anchor=\"end\"");
    }
    // x ticks at every power of two inside the range.
    for (int e = static_cast<int>(std::ceil(lo - 1e-9)); e <= static_cast<int>(std::floor(hi + 1e-9)); ++e) {
        const std::size_t d = std::size_t{1} << e;
        const double x = px(d);
        svg.raw("<line class=\"x-tick\"" + attr("data-dim", std::to_string(d)) + " x1=\"" + n2(x) + "\" y1=\"" +
                n2(kTop + kSide) + "\" x2=\"" + n2(x) + "\" y2=\"" + n2(kTop + kSide + 6) + "\" style=\"stroke:black\"/>\n");
        svg.text(x, kTop + kSide + 22, std::to_string(d), " text-anchor=\"middle\"");
    }
    svg.text(kLeft + kSide / 2, kTop + kSide + 50, "Latent size (log2 scale)", " text-anchor=\"middle\"");
    svg.text(24, kTop + kSide / 2, "Score", " text-anchor=\"middle\" transform=\"rotate(-90 24 " + n2(kTop + kSide / 2) + ")\"");

    struct Metric {
        const char* name;
        std::vector<std::optional<double>> SweepSeries::*values;
        const char* dash;
    };
    const Metric metrics[] = {{"csi", &SweepSeries::csi, "stroke-dasharray:10,4,2,4"},
                              {"pod", &SweepSeries::pod, ""},
                              {"far", &SweepSeries::far, "stroke-dasharray:6,4"}};

    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const std::string& color = kPalette[si % kPalette.size()];
        for (const auto& m : metrics) {
            const auto& vals = s.*(m.values);
            const std::string style = "stroke:" + color + ";stroke-width:2;" + m.dash;
            const std::string tags = attr("class", "series") + attr("data-method", s.method) + attr("data-metric", m.name);
            std::vector<std::pair<double, double>> run;
            for (std::size_t i = 0; i <= dims.size(); ++i) {
                if (i < dims.size() && vals[i]) {
                    run.emplace_back(px(dims[i]), py(*vals[i]));
                    continue;
                }
                if (run.size() == 1) svg.raw("<circle" + tags + " cx=\"" + n2(run[0].first) + "\" cy=\"" + n2(run[0].second) +
                                             "\" r=\"4\" fill=\"" + color + "\"/>\n");
                else svg.polyline(run, style, tags);
                run.clear();
            }
        }
    }

    double y = kTop + 10;
    svg.text(kLegendX, y, "Methods");
    for (std::size_t i = 0; i < series.size(); ++i) {
        y += 24;
        svg.line(kLegendX, y - 4, kLegendX + 30, y - 4, "stroke:" + kPalette[i % kPalette.size()] + ";stroke-width:3");
        svg.text(kLegendX + 38, y, series[i].method);
    }
    y += 40;
    svg.text(kLegendX, y, "Metrics");
    for (const auto& m : metrics) {
        y += 24;
        svg.line(kLegendX, y - 4, kLegendX + 30, y - 4, std::string("stroke:black;stroke-width:2;") + m.dash);
        std::string label = m.name;
        std::transform(label.begin(), label.end(), label.begin(), ::toupper);
        svg.text(kLegendX + 38, y, label);
    }
    return svg.finish();
}

void render_sweep_chart(const std::vector<std::size_t>& dims, const std::vector<SweepSeries>& series,
                        const std::string& path, const std::string& chart_title) {
    text::write_file(path, sweep_chart_svg(dims, series, chart_title));
}

std::string delta_chart_svg(const std::vector<DeltaRow>& rows, const std::string& chart_title) {
    std::vector<std::string> events, methods, ev_names, me_names;
    for (const auto& r : rows) {
        ev_names.push_back(r.event);
        me_names.push_back(r.method);
    }
    auto ev_idx = index_by_appearance(ev_names, &events);
    auto me_idx = index_by_appearance(me_names, &methods);

    struct Panel {
        const char* name;
        MetricDelta ScoreDelta::*metric;
    };
    const Panel panels[] = {{"POD", &ScoreDelta::pod}, {"FAR", &ScoreDelta::far}, {"CSI", &ScoreDelta::csi},
                            {"bias", &ScoreDelta::bias}};
    constexpr double kPanelH = 140.0, kPanelGap = 40.0;

    Svg svg;
    title(svg, chart_title);
    const double group_w = events.empty() ? kSide : kSide / static_cast<double>(events.size());
    const double bar_w = group_w / static_cast<double>(methods.size() + 1);

    for (std::size_t pi = 0; pi < 4; ++pi) {
        const Panel& panel = panels[pi];
        const double top = kTop + pi * (kPanelH + kPanelGap);
        double range = 0.05;
        for (const auto& r : rows) {
            const auto& v = (r.delta.*(panel.metric)).value;
            if (v) range = std::max(range, std::abs(*v) * 1.15);
        }
        const double zero = top + kPanelH / 2;
        auto py = [&](double v) { return zero - v / range * (kPanelH / 2); };

        svg.rect(kLeft, top, kSide, kPanelH, "fill:none;stroke:black;stroke-width:1");
        svg.line(kLeft, zero, kLeft + kSide, zero, "stroke:black;stroke-width:1");
        svg.text(kLeft + 6, top + 16, std::string("Change in ") + panel.name, " class=\"small\"");
        for (double v : {-range, range}) svg.text(kLeft - 8, py(v) + 4, text::fixed(v, 2), " class=\"small\" text-anchor=\"end\"");
        svg.text(kLeft - 8, zero + 4, "0", " class=\"small\" text-anchor=\"end\"");

        for (const auto& r : rows) {
            const MetricDelta& m = r.delta.*(panel.metric);
            const double x = kLeft + ev_idx.at(r.event) * group_w + bar_w * (me_idx.at(r.method) + 0.5);
            const std::string& color = kPalette[me_idx.at(r.method) % kPalette.size()];
            const std::string tags = attr("class", "delta") + attr("data-metric", panel.name) + attr("data-method", r.method) +
                                     attr("data-event", r.event) + attr("data-improved", m.improved ? "1" : "0");
            if (!m.value) {
                svg.raw("<text" + tags + " x=\"" + n2(x + bar_w / 2) + "\" y=\"" + n2(zero - 4) +
                        "\" class=\"small\" text-anchor=\"middle\">NA</text>\n");
                continue;
            }
            const double y1 = py(std::max(*m.value, 0.0)), y2 = py(std::min(*m.value, 0.0));
            svg.raw("<rect" + tags + attr("data-value", text::fixed(*m.value, 4)) + " x=\"" + n2(x) + "\" y=\"" + n2(y1) +
                    "\" width=\"" + n2(bar_w) + "\" height=\"" + n2(y2 - y1) + "\" style=\"fill:" + color +
                    ";stroke:black;stroke-width:0.5\"/>\n");
            if (m.improved) {
                const double ty = *m.value >= 0.0 ? y1 - 3 : y2 + 12;
                svg.text(x + bar_w / 2, ty, "+", " class=\"small\" text-anchor=\"middle\"");
            }
        }
        for (std::size_t e = 0; e < events.size(); ++e)
            svg.text(kLeft + (e + 0.5) * group_w, top + kPanelH + 16, events[e], " class=\"small\" text-anchor=\"middle\"");
    }

    double y = kTop + 10;
    svg.text(kLegendX, y, "Methods");
    for (std::size_t i = 0; i < methods.size(); ++i) {
        y += 24;
        svg.rect(kLegendX + 1, y - 11, 14, 14, "fill:" + kPalette[i % kPalette.size()] + ";stroke:black");
        svg.text(kLegendX + 24, y, methods[i]);
    }
    y += 30;
    svg.text(kLegendX, y, "+ marks an improvement", " class=\"small\"");
    return svg.finish();
}

void render_delta_chart(const std::vector<DeltaRow>& rows, const std::string& path, const std::string& chart_title) {
    text::write_file(path, delta_chart_svg(rows, chart_title));
}

}  // namespace gridrep::verify
