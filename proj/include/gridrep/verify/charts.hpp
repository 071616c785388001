#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gridrep/verify/scores.hpp"

namespace gridrep::verify {

// Every chart is drawn on a fixed 800x800 canvas with numbers printed at two
// decimals, so identical inputs give identical bytes.

struct DiagramPoint {
    double sr = 0.0;
    double pod = 0.0;
    std::string event;   // picks the marker shape
    std::string method;  // picks the colour
};

/// Roebber performance diagram: SR on x, POD on y, solid CSI contours at
/// 0.1..0.9, dashed bias rays, one marker per point and a legend.
std::string performance_diagram_svg(const std::vector<DiagramPoint>& points, const std::string& title = "");
void render_performance_diagram(const std::vector<DiagramPoint>& points, const std::string& path,
                                const std::string& title = "");

struct SweepSeries {
    std::string method;
    std::vector<std::optional<double>> csi, pod, far;
};

/// Scores against latent size on a log2 axis. CSI dash-dot, POD solid,
/// FAR dashed; colour per method. Missing values break the line.
std::string sweep_chart_svg(const std::vector<std::size_t>& dims, const std::vector<SweepSeries>& series,
                            const std::string& title = "");
void render_sweep_chart(const std::vector<std::size_t>& dims, const std::vector<SweepSeries>& series,
                        const std::string& path, const std::string& title = "");

struct DeltaRow {
    std::string method;
    std::string event;
    ScoreDelta delta;
};

/// Grouped bars of high-minus-low changes, one panel per metric
/// (POD, FAR, CSI, bias). Improvements carry a '+' mark.
std::string delta_chart_svg(const std::vector<DeltaRow>& rows, const std::string& title = "");
void render_delta_chart(const std::vector<DeltaRow>& rows, const std::string& path, const std::string& title = "");

}  // namespace gridrep::verify
