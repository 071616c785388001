#pragma once

#include <string>
#include <vector>

#include "gridrep/core/matrix.hpp"

namespace gridrep::ingest {

inline constexpr const char* kDatasetFormat = "gridrep-dataset/1";

/// Lat/lon extent of a grid in degrees.
struct GridBox {
    double lat_min = 0.0, lat_max = 0.0, lon_min = 0.0, lon_max = 0.0;

    void validate() const;
    friend bool operator==(const GridBox&, const GridBox&) = default;
};

/// One raster. Row 0 is the northmost row.
struct GridFrame {
    std::string timestamp;  // YYYY-MM-DDTHH:MM:SSZ
    GridBox box;
    std::size_t height = 0, width = 0;
    std::vector<float> values;

    float at(std::size_t r, std::size_t c) const { return values[r * width + c]; }
    void validate() const;
    friend bool operator==(const GridFrame&, const GridFrame&) = default;
};

/// Checks the fixed ISO-8601 UTC form; throws FormatError.
void check_timestamp(const std::string& ts);
/// "2013-01-01T00:00:00Z" for day `offset` after 2013-01-01.
std::string daily_timestamp(int offset);

struct FrameEntry {
    std::string timestamp;
    std::string path;  // relative to the manifest directory
    friend bool operator==(const FrameEntry&, const FrameEntry&) = default;
};

/// index.json: format tag, one grid shared by every frame, a flag telling
/// whether values are already in [0, 1], and the ordered frame list.
struct DatasetManifest {
    std::string format = kDatasetFormat;
    GridBox box;
    std::size_t height = 0, width = 0;
    bool scaled = false;
    std::vector<FrameEntry> frames;
    std::string root;  // directory the manifest was loaded from; not serialized

    std::size_t size() const { return frames.size(); }
    std::vector<std::string> timestamps() const;
    void validate() const;
    friend bool operator==(const DatasetManifest& a, const DatasetManifest& b) {
        return a.format == b.format && a.box == b.box && a.height == b.height && a.width == b.width &&
               a.scaled == b.scaled && a.frames == b.frames;
    }
};

std::string manifest_json(const DatasetManifest& m);
DatasetManifest parse_manifest(const std::string& json_text, const std::string& source);
DatasetManifest load_manifest(const std::string& path);
void save_manifest(const DatasetManifest& m, const std::string& path);

/// Raw .f32 payload: row-major float32 little-endian, nothing else.
std::vector<char> encode_frame_payload(const GridFrame& f);
std::vector<float> decode_frame_payload(const std::vector<char>& bytes, std::size_t count, const std::string& what);

GridFrame load_frame(const DatasetManifest& m, std::size_t index);
std::vector<GridFrame> load_frames(const DatasetManifest& m);

/// Writes frames/<date>.f32 files and index.json under dir; returns the manifest.
DatasetManifest write_dataset(const std::string& dir, const std::vector<GridFrame>& frames, bool scaled);

/// Frames flattened to rows of a matrix (n x height*width).
Matrix frames_matrix(const std::vector<GridFrame>& frames);

/// Keeps rows/columns whose cell centres fall inside the closed box.
GridFrame crop_to_box(const GridFrame& f, double lat0, double lat1, double lon0, double lon1);

/// Divides by 255. Not idempotent: apply once to raw data.
GridFrame rescale_unit(const GridFrame& f);

/// Align-corners bilinear: source = out_index * (in - 1) / (out - 1),
/// and 0 when the output dimension is 1.
GridFrame bilinear_resize(const GridFrame& f, std::size_t out_h, std::size_t out_w);

}  // namespace gridrep::ingest
