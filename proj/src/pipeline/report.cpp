#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "gridrep/core/binary_io.hpp"
#include "gridrep/core/text.hpp"
#include "gridrep/error.hpp"
#include "gridrep/ingest/labels.hpp"
#include "gridrep/pipeline/experiments.hpp"

namespace gridrep::pipeline {

namespace fs = std::filesystem;

namespace {

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir);
}

std::string join(const std::string& dir, const std::string& leaf) { return (fs::path(dir) / leaf).string(); }

std::string put(const std::string& dir, const std::string& leaf, const std::string& contents,
                std::vector<std::string>& written) {
    const std::string path = join(dir, leaf);
    text::write_file(path, contents);
    written.push_back(path);
    return path;
}

std::string na6(const std::optional<double>& v) { return text::fixed_or_na(v, 6); }

std::string file_stamp(const std::string& ts) { return ts.substr(0, 13); }

std::uint8_t to_gray(double v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace

std::string report_scores_csv(const RunReport& report) {
    std::string out = "method,latent_dim,event,a,b,c,d,pod,far,sr,bias,csi,degenerate_folds,separated_folds\n";
    for (const auto& e : report.entries) {
        const auto& t = e.table;
        const auto& s = e.scores;
        out += e.method + "," + std::to_string(e.latent_dim) + "," + e.event + "," + std::to_string(t.a) + "," +
               std::to_string(t.b) + "," + std::to_string(t.c) + "," + std::to_string(t.d) + "," + na6(s.pod) + "," +
               na6(s.far) + "," + na6(s.sr) + "," + na6(s.bias) + "," + na6(s.csi) + "," +
               std::to_string(e.degenerate_folds()) + "," + std::to_string(e.separated_folds()) + "\n";
    }
    return out;
}

std::string report_folds_csv(const RunReport& report) {
    std::string out = "method,latent_dim,event,fold,train_size,test_size,degenerate,converged,separated,a,b,c,d,note\n";
    for (const auto& e : report.entries) {
        for (const auto& f : e.folds) {
            out += e.method + "," + std::to_string(e.latent_dim) + "," + e.event + "," + std::to_string(f.fold) + "," +
                   std::to_string(f.train_size) + "," + std::to_string(f.test_size) + "," +
                   (f.degenerate ? "1" : "0") + "," + (f.converged ? "1" : "0") + "," + (f.separated ? "1" : "0") +
                   "," + std::to_string(f.table.a) + "," + std::to_string(f.table.b) + "," +
                   std::to_string(f.table.c) + "," + std::to_string(f.table.d) + "," + f.note + "\n";
        }
    }
    return out;
}

std::string report_timings_csv(const RunReport& report) {
    std::string out = "method,latent_dim,learn_seconds,storage_bytes\n";
    for (const auto& t : report.timings) {
        out += t.method + "," + std::to_string(t.latent_dim) + "," + text::fixed(t.learn_seconds, 3) + "," +
               std::to_string(t.storage_bytes) + "\n";
    }
    return out;
}

std::vector<verify::DiagramPoint> diagram_points(const RunReport& report, std::size_t dim) {
    std::vector<verify::DiagramPoint> points;
    for (const auto& e : report.entries) {
        if (e.method != "imported" && e.latent_dim != dim) continue;
        if (!e.scores.sr || !e.scores.pod) continue;
        points.push_back({*e.scores.sr, *e.scores.pod, e.event, e.method});
    }
    return points;
}

std::string delta_csv(const std::vector<verify::DeltaRow>& rows) {
    std::string out = "method,event,metric,delta,improved\n";
    for (const auto& r : rows) {
        const std::pair<const char*, const verify::MetricDelta*> metrics[] = {
            {"pod", &r.delta.pod}, {"far", &r.delta.far}, {"sr", &r.delta.sr},
            {"bias", &r.delta.bias}, {"csi", &r.delta.csi}};
        for (const auto& [name, m] : metrics)
            out += r.method + "," + r.event + "," + name + "," + na6(m->value) + "," + (m->improved ? "1" : "0") + "\n";
    }
    return out;
}

std::vector<std::string> emit_report(const RunReport& report, const std::string& out_dir) {
    ensure_dir(out_dir);
    std::vector<std::string> written;
    put(out_dir, "scores.csv", report_scores_csv(report), written);
    put(out_dir, "folds.csv", report_folds_csv(report), written);
    put(out_dir, "timings.csv", report_timings_csv(report), written);
    put(out_dir, "config.json", config_json(report.config), written);
    put(out_dir, "version.txt", report.version + "\n", written);
    const auto& cfg = report.config;
    if (report.experiment == "exp3") {
        std::vector<std::size_t> dims = cfg.latent_dims;
        std::sort(dims.begin(), dims.end());
        for (const auto& event : ingest::kEvents) {
            std::vector<verify::SweepSeries> series;
            for (const auto& method : cfg.methods) {
                verify::SweepSeries s{method, {}, {}, {}};
                for (std::size_t d : dims) {
                    const auto& e = report.entry(method, d, event);
                    s.csi.push_back(e.scores.csi);
                    s.pod.push_back(e.scores.pod);
                    s.far.push_back(e.scores.far);
                }
                series.push_back(std::move(s));
            }
            put(out_dir, "sweep_" + event + ".svg", verify::sweep_chart_svg(dims, series, event + ": scores by latent size"),
                written);
        }
        std::string rmse = "latent_dim,rmse\n";
        for (const auto& [d, r] : report.pca_rmse) rmse += std::to_string(d) + "," + text::fixed(r, 9) + "\n";
        put(out_dir, "pca_rmse.csv", rmse, written);
    } else {
        const std::size_t dim = cfg.latent_dims.front();
        put(out_dir, "performance_diagram.svg",
            verify::performance_diagram_svg(diagram_points(report, dim),
                                            std::to_string(cfg.resolution) + "x" + std::to_string(cfg.resolution) +
                                                ", d=" + std::to_string(dim)),
            written);
    }
    return written;
}

std::vector<std::string> emit_comparison(const ResolutionComparison& cmp, const std::string& out_dir) {
    ensure_dir(out_dir);
    auto written = emit_report(cmp.low, join(out_dir, "res" + std::to_string(cmp.low.config.resolution)));
    auto high = emit_report(cmp.high, join(out_dir, "res" + std::to_string(cmp.high.config.resolution)));
    written.insert(written.end(), high.begin(), high.end());
    put(out_dir, "delta.csv", delta_csv(cmp.deltas), written);
    put(out_dir, "delta.svg",
        verify::delta_chart_svg(cmp.deltas, std::to_string(cmp.high.config.resolution) + " minus " +
                                                std::to_string(cmp.low.config.resolution)),
        written);
    return written;
}

std::vector<std::string> emit_models(const FittedModels& models, const std::string& out_dir) {
    ensure_dir(out_dir);
    std::vector<std::string> written;
    for (const auto& [d, m] : models.pca) {
        written.push_back(join(out_dir, "pca_d" + std::to_string(d) + ".grpca"));
        pca::save(m, written.back());
    }
    for (const auto& [d, m] : models.cae) {
        written.push_back(join(out_dir, "cae_d" + std::to_string(d) + ".grcae"));
        cae::save(m, written.back());
    }
    return written;
}

std::vector<char> encode_pgm(std::span<const double> values, std::size_t height, std::size_t width) {
    if (values.size() != height * width || height == 0) throw InvalidInput("PGM size does not match the pixel count");
    const std::string header = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
    std::vector<char> out(header.begin(), header.end());
    for (double v : values) out.push_back(static_cast<char>(to_gray(v)));
    return out;
}

std::vector<double> decode_pgm(std::span<const char> bytes, std::size_t& height, std::size_t& width) {
    std::size_t pos = 0;
    auto token = [&]() {
        while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
        std::string t;
        while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) t += bytes[pos++];
        return t;
    };
    if (token() != "P5") throw FormatError("not a binary PGM");
    try {
        width = std::stoul(token());
        height = std::stoul(token());
        if (token() != "255") throw FormatError("PGM maxval must be 255");
    } catch (const std::logic_error&) {
        throw FormatError("bad PGM header");
    }
    ++pos;
    if (bytes.size() - std::min(pos, bytes.size()) != width * height) throw FormatError("PGM payload size mismatch");
    std::vector<double> out;
    for (std::size_t i = 0; i < width * height; ++i)
        out.push_back(static_cast<unsigned char>(bytes[pos + i]) / 255.0);
    return out;
}

namespace {

// Pixel rows as runs of equal grey, drawn in image coordinates.
std::string image_group(std::span<const double> v, std::size_t res, double x, double y, double size,
                        const std::string& cls) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "<g class=\"%s\" transform=\"translate(%.2f,%.2f) scale(%.4f)\">\n", cls.c_str(), x, y,
                  size / static_cast<double>(res));
    std::string out = buf;
    for (std::size_t r = 0; r < res; ++r) {
        std::size_t c = 0;
        while (c < res) {
            const std::uint8_t g = to_gray(v[r * res + c]);
            std::size_t end = c + 1;
            while (end < res && to_gray(v[r * res + end]) == g) ++end;
            std::snprintf(buf, sizeof buf, "<rect x=\"%zu\" y=\"%zu\" width=\"%zu\" height=\"1\" fill=\"#%02x%02x%02x\"/>\n",
                          c, r, end - c, g, g, g);
            out += buf;
            c = end;
        }
    }
    return out + "</g>\n";
}

}  // namespace

std::vector<std::string> emit_reconstructions(const ExperimentData& data, const pca::PcaModel& pca_model,
                                              const cae::CaeModel& cae_model,
                                              const std::vector<std::string>& cases, const std::string& out_dir) {
    const std::size_t res = data.resolution;
    if (pca_model.dim() != res * res) throw InvalidInput("PCA model does not match the data resolution");
    if (cae_model.resolution != res) throw InvalidInput("CAE model does not match the data resolution");
    if (cases.empty()) throw InvalidInput("no reconstruction cases given");
    std::vector<std::size_t> rows;
    for (const auto& ts : cases) {
        auto it = std::find(data.timestamps.begin(), data.timestamps.end(), ts);
        if (it == data.timestamps.end()) throw InvalidInput("unknown case timestamp " + ts);
        rows.push_back(static_cast<std::size_t>(it - data.timestamps.begin()));
    }
    ensure_dir(out_dir);

    const double panel = 192.0, gap = 16.0, top = 40.0, label = 20.0;
    const double width = 3 * panel + 4 * gap;
    const double height = top + static_cast<double>(cases.size()) * (panel + label + gap);
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" viewBox=\"0 0 %.0f %.0f\">\n"
                  "<rect width=\"100%%\" height=\"100%%\" fill=\"#ffffff\"/>\n",
                  width, height, width, height);
    std::string svg = buf;
    const char* titles[] = {"original", "pca", "cae"};
    for (std::size_t k = 0; k < 3; ++k) {
        std::snprintf(buf, sizeof buf,
                      "<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">%s</text>\n",
                      gap + k * (panel + gap) + panel / 2, top - 14, titles[k]);
        svg += buf;
    }

    std::vector<std::string> written;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Matrix original = data.x.row_block(rows[i], 1);
        const Matrix via_pca = pca::inverse_transform(pca_model, pca::transform(pca_model, original));
        const cae::Tensor4 via_cae = cae::reconstruct(
            cae_model, cae::Tensor4(1, 1, res, res, std::vector<double>(original.values().begin(), original.values().end())));
        const std::span<const double> images[] = {original.values(), via_pca.values(), via_cae.values};
        const double y = top + static_cast<double>(i) * (panel + label + gap);
        std::snprintf(buf, sizeof buf,
                      "<text x=\"%.2f\" y=\"%.2f\" font-family=\"sans-serif\" font-size=\"13\">%s</text>\n", gap,
                      y + panel + 15, text::xml_escape(cases[i]).c_str());
        svg += buf;
        for (std::size_t k = 0; k < 3; ++k) {
            const std::string leaf = file_stamp(cases[i]) + "_" + titles[k] + ".pgm";
            binio::write_file(join(out_dir, leaf), encode_pgm(images[k], res, res));
            written.push_back(join(out_dir, leaf));
            svg += image_group(images[k], res, gap + k * (panel + gap), y, panel, titles[k]);
        }
    }
    svg += "</svg>\n";
    text::write_file(join(out_dir, "montage.svg"), svg);
    written.push_back(join(out_dir, "montage.svg"));
    return written;
}

}  // namespace gridrep::pipeline
