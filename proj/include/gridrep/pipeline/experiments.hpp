#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gridrep/cae/model.hpp"
#include "gridrep/classify/cv.hpp"
#include "gridrep/core/matrix.hpp"
#include "gridrep/ingest/labels.hpp"
#include "gridrep/pca.hpp"
#include "gridrep/pipeline/config.hpp"
#include "gridrep/verify/charts.hpp"
#include "gridrep/verify/scores.hpp"

namespace gridrep::pipeline {

using Progress = std::function<void(const std::string&)>;

// Frames flattened to rows of resolution^2 values in [0, 1], with labels
// aligned row for row.
struct ExperimentData {
    std::size_t resolution = 0;
    std::vector<std::string> timestamps;
    Matrix x;
    ingest::LabelTable labels;
};

// Synthetic data when cfg.dataset is empty, otherwise the dataset on disk,
// rescaled if needed and resized to cfg.resolution. Misaligned labels throw
// AlignmentError here, before any learning starts. Without labels the
// label table is left empty (for unsupervised fitting).
ExperimentData load_experiment_data(const ExperimentConfig& cfg, bool with_labels = true);

struct ReportEntry {
    std::string method;
    std::size_t latent_dim = 0;
    std::string event;
    verify::ContingencyTable table;
    verify::Scores scores;
    std::vector<classify::FoldResult> folds;

    std::size_t degenerate_folds() const;
    std::size_t separated_folds() const;
};

struct MethodTiming {
    std::string method;
    std::size_t latent_dim = 0;
    double learn_seconds = 0.0;  // wall clock of the learning step only
    std::size_t storage_bytes = 0;  // serialized model size
};

struct RunReport {
    std::string experiment;
    std::string version = kToolkitVersion;
    ExperimentConfig config;
    std::vector<ReportEntry> entries;  // method-major, then dim, then event
    std::vector<MethodTiming> timings;
    std::vector<std::pair<std::size_t, double>> pca_rmse;  // experiment 3 only

    const ReportEntry& entry(const std::string& method, std::size_t dim, const std::string& event) const;
};

struct FittedModels {
    std::map<std::size_t, pca::PcaModel> pca;
    std::map<std::size_t, cae::CaeModel> cae;
};

struct LearnedFeatures {
    Matrix z;
    MethodTiming timing;
};

LearnedFeatures learn_pca(const ExperimentData& data, std::size_t dim, const ExperimentConfig& cfg,
                          pca::PcaModel* keep = nullptr);
LearnedFeatures learn_cae(const ExperimentData& data, std::size_t dim, const ExperimentConfig& cfg,
                          cae::CaeModel* keep = nullptr, const Progress& progress = {});
LearnedFeatures load_imported(const ExperimentData& data, const ExperimentConfig& cfg);

// Cross-validates every event on one feature matrix. The fold assignment
// depends only on the seed, so every method sees the same folds.
std::vector<ReportEntry> evaluate_features(const std::string& method, const Matrix& z,
                                           const ingest::LabelTable& labels, const ExperimentConfig& cfg);

RunReport run_experiment1(const ExperimentConfig& cfg, FittedModels* models = nullptr, const Progress& progress = {});
RunReport run_experiment1(const ExperimentConfig& cfg, const ExperimentData& data, FittedModels* models = nullptr,
                          const Progress& progress = {});

struct ResolutionComparison {
    RunReport low, high;
    std::vector<verify::DeltaRow> deltas;  // methods x events, high minus low
};

// Both configs must describe the same timestamps; they normally differ only
// in resolution.
ResolutionComparison run_experiment2(const ExperimentConfig& low, const ExperimentConfig& high,
                                     const Progress& progress = {});
std::vector<verify::DeltaRow> compare_reports(const RunReport& low, const RunReport& high);

// Latent-size sweep over powers of two in [4, 2048] for pca and cae.
RunReport run_experiment3(const ExperimentConfig& cfg, const Progress& progress = {});
RunReport run_experiment3(const ExperimentConfig& cfg, const ExperimentData& data, const Progress& progress = {});

// Report files. Everything except timings.csv is byte-identical across runs
// with the same inputs.
std::string report_scores_csv(const RunReport& report);
std::string report_folds_csv(const RunReport& report);
std::string report_timings_csv(const RunReport& report);
std::vector<verify::DiagramPoint> diagram_points(const RunReport& report, std::size_t dim);
std::vector<std::string> emit_report(const RunReport& report, const std::string& out_dir);
std::vector<std::string> emit_comparison(const ResolutionComparison& cmp, const std::string& out_dir);
std::vector<std::string> emit_models(const FittedModels& models, const std::string& out_dir);
std::string delta_csv(const std::vector<verify::DeltaRow>& rows);

// Grayscale images for the given cases: original, PCA and CAE
// reconstructions as binary PGM plus one SVG montage.
std::vector<std::string> emit_reconstructions(const ExperimentData& data, const pca::PcaModel& pca_model,
                                              const cae::CaeModel& cae_model,
                                              const std::vector<std::string>& cases, const std::string& out_dir);

std::vector<char> encode_pgm(std::span<const double> values, std::size_t height, std::size_t width);
// Returns values scaled back to [0, 1].
std::vector<double> decode_pgm(std::span<const char> bytes, std::size_t& height, std::size_t& width);

}  // namespace gridrep::pipeline
