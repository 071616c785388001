#include "gridrep/ingest/frames.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <json.hpp>

#include "gridrep/core/binary_io.hpp"
#include "gridrep/core/text.hpp"
#include "gridrep/error.hpp"

namespace gridrep::ingest {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

void GridBox::validate() const {
    for (double v : {lat_min, lat_max, lon_min, lon_max})
        if (!std::isfinite(v)) throw InvalidInput("grid bounds must be finite");
    if (!(lat_min < lat_max)) throw InvalidInput("grid needs lat_min < lat_max");
    if (!(lon_min < lon_max)) throw InvalidInput("grid needs lon_min < lon_max");
}

void GridFrame::validate() const {
    check_timestamp(timestamp);
    box.validate();
    if (height == 0 || width == 0) throw InvalidInput("frame " + timestamp + " has an empty grid");
    if (values.size() != height * width) {
        throw InvalidInput("frame " + timestamp + " has " + std::to_string(values.size()) + " values for a " +
                           std::to_string(height) + "x" + std::to_string(width) + " grid");
    }
    for (float v : values)
        if (!std::isfinite(v)) throw InvalidInput("frame " + timestamp + " contains a non-finite value");
}

void check_timestamp(const std::string& ts) {
    static const char* pattern = "dddd-dd-ddTdd:dd:ddZ";
    bool ok = ts.size() == std::strlen(pattern);
    for (std::size_t i = 0; ok && i < ts.size(); ++i) {
        ok = pattern[i] == 'd' ? (ts[i] >= '0' && ts[i] <= '9') : ts[i] == pattern[i];
    }
    if (ok) {
        using namespace std::chrono;
        const year_month_day ymd{year{std::stoi(ts.substr(0, 4))}, month{static_cast<unsigned>(std::stoi(ts.substr(5, 2)))},
                                 day{static_cast<unsigned>(std::stoi(ts.substr(8, 2)))}};
        ok = ymd.ok() && std::stoi(ts.substr(11, 2)) < 24 && std::stoi(ts.substr(14, 2)) < 60 &&
             std::stoi(ts.substr(17, 2)) < 60;
    }
    if (!ok) throw FormatError("timestamp '" + ts + "' is not of the form YYYY-MM-DDTHH:MM:SSZ");
}

std::string daily_timestamp(int offset) {
    using namespace std::chrono;
    const year_month_day ymd{sys_days{year{2013} / January / 1} + days{offset}};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT00:00:00Z", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

std::vector<std::string> DatasetManifest::timestamps() const {
    std::vector<std::string> ts;
    ts.reserve(frames.size());
    for (const auto& f : frames) ts.push_back(f.timestamp);
    return ts;
}

void DatasetManifest::validate() const {
    if (format != kDatasetFormat) throw FormatError("unsupported dataset format '" + format + "'");
    try {
        box.validate();
    } catch (const InvalidInput& e) {
        throw FormatError(std::string("manifest grid: ") + e.what());
    }
    if (height == 0 || width == 0) throw FormatError("manifest grid has zero height or width");
    for (std::size_t i = 0; i < frames.size(); ++i) {
        try {
            check_timestamp(frames[i].timestamp);
        } catch (const FormatError& e) {
            throw FormatError("manifest entry " + std::to_string(i) + ": " + e.what());
        }
        if (frames[i].path.empty()) throw FormatError("manifest entry " + std::to_string(i) + " has no path");
        if (i > 0 && !(frames[i - 1].timestamp < frames[i].timestamp)) {
            throw FormatError("manifest entry " + std::to_string(i) + " (" + frames[i].timestamp +
                              ") is not after the previous timestamp " + frames[i - 1].timestamp);
        }
    }
}

std::string manifest_json(const DatasetManifest& m) {
    json j;
    j["format"] = m.format;
    j["grid"] = {{"lat_min", m.box.lat_min}, {"lat_max", m.box.lat_max}, {"lon_min", m.box.lon_min},
                 {"lon_max", m.box.lon_max}, {"height", m.height},       {"width", m.width}};
    j["scaled"] = m.scaled;
    j["frames"] = json::array();
    for (const auto& f : m.frames) j["frames"].push_back({{"timestamp", f.timestamp}, {"path", f.path}});
    return j.dump(2) + "\n";
}

DatasetManifest parse_manifest(const std::string& json_text, const std::string& source) {
    DatasetManifest m;
    try {
        const json j = json::parse(json_text);
        m.format = j.at("format").get<std::string>();
        if (m.format != kDatasetFormat) {
            throw FormatError(source + ": unsupported dataset format '" + m.format + "', expected " + kDatasetFormat);
        }
        const auto& g = j.at("grid");
        m.box = {g.at("lat_min").get<double>(), g.at("lat_max").get<double>(), g.at("lon_min").get<double>(),
                 g.at("lon_max").get<double>()};
        m.height = g.at("height").get<std::size_t>();
        m.width = g.at("width").get<std::size_t>();
        m.scaled = j.at("scaled").get<bool>();
        for (const auto& f : j.at("frames"))
            m.frames.push_back({f.at("timestamp").get<std::string>(), f.at("path").get<std::string>()});
    } catch (const json::exception& e) {
        throw FormatError(source + ": malformed manifest: " + e.what());
    }
    try {
        m.validate();
    } catch (const FormatError& e) {
        throw FormatError(source + ": " + e.what());
    }
    return m;
}

DatasetManifest load_manifest(const std::string& path) {
    fs::path p(path);
    if (fs::is_directory(p)) p /= "index.json";
    DatasetManifest m = parse_manifest(text::read_file(p.string()), p.string());
    m.root = p.parent_path().string();
    return m;
}

void save_manifest(const DatasetManifest& m, const std::string& path) {
    m.validate();
    text::write_file(path, manifest_json(m));
}

std::vector<char> encode_frame_payload(const GridFrame& f) {
    std::vector<char> bytes(f.values.size() * 4);
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        const auto u = std::bit_cast<std::uint32_t>(f.values[i]);
        for (int b = 0; b < 4; ++b) bytes[i * 4 + b] = static_cast<char>((u >> (8 * b)) & 0xffu);
    }
    return bytes;
}

std::vector<float> decode_frame_payload(const std::vector<char>& bytes, std::size_t count, const std::string& what) {
    if (bytes.size() != count * 4) {
        throw FormatError(what + ": payload has " + std::to_string(bytes.size()) + " bytes, expected " +
                          std::to_string(count * 4));
    }
    std::vector<float> v(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::uint32_t u = 0;
        for (int b = 0; b < 4; ++b) u |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[i * 4 + b])) << (8 * b);
        v[i] = std::bit_cast<float>(u);
        if (!std::isfinite(v[i])) throw FormatError(what + ": value " + std::to_string(i) + " is not finite");
    }
    return v;
}

GridFrame load_frame(const DatasetManifest& m, std::size_t index) {
    if (index >= m.frames.size()) throw InvalidInput("frame index " + std::to_string(index) + " out of range");
    const FrameEntry& e = m.frames[index];
    const std::string path = (fs::path(m.root) / e.path).string();
    GridFrame f;
    f.timestamp = e.timestamp;
    f.box = m.box;
    f.height = m.height;
    f.width = m.width;
    f.values = decode_frame_payload(binio::read_file(path), m.height * m.width, "frame " + e.timestamp + " (" + path + ")");
    return f;
}

std::vector<GridFrame> load_frames(const DatasetManifest& m) {
    std::vector<GridFrame> out;
    out.reserve(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) out.push_back(load_frame(m, i));
    return out;
}

DatasetManifest write_dataset(const std::string& dir, const std::vector<GridFrame>& frames, bool scaled) {
    if (frames.empty()) throw InvalidInput("cannot write an empty dataset");
    DatasetManifest m;
    m.box = frames.front().box;
    m.height = frames.front().height;
    m.width = frames.front().width;
    m.scaled = scaled;
    m.root = dir;
    for (const auto& f : frames) {
        f.validate();
        if (!(f.box == m.box) || f.height != m.height || f.width != m.width) {
            throw InvalidInput("frame " + f.timestamp + " does not share the dataset grid");
        }
        m.frames.push_back({f.timestamp, "frames/" + f.timestamp.substr(0, 13) + ".f32"});
    }
    m.validate();
    std::error_code ec;
    fs::create_directories(fs::path(dir) / "frames", ec);
    if (ec) throw IoError("cannot create " + (fs::path(dir) / "frames").string() + ": " + ec.message());
    for (std::size_t i = 0; i < frames.size(); ++i) {
        binio::write_file((fs::path(dir) / m.frames[i].path).string(), encode_frame_payload(frames[i]));
    }
    save_manifest(m, (fs::path(dir) / "index.json").string());
    return m;
}

Matrix frames_matrix(const std::vector<GridFrame>& frames) {
    if (frames.empty()) return Matrix();
    const std::size_t d = frames.front().values.size();
    Matrix x(frames.size(), d);
    for (std::size_t i = 0; i < frames.size(); ++i) {
        if (frames[i].values.size() != d) throw InvalidInput("frames have different sizes");
        std::copy(frames[i].values.begin(), frames[i].values.end(), x.row(i).begin());
    }
    return x;
}

GridFrame crop_to_box(const GridFrame& f, double lat0, double lat1, double lon0, double lon1) {
    if (lat0 > lat1 || lon0 > lon1) throw InvalidInput("crop box needs lat0 <= lat1 and lon0 <= lon1");
    const double dlat = (f.box.lat_max - f.box.lat_min) / static_cast<double>(f.height);
    const double dlon = (f.box.lon_max - f.box.lon_min) / static_cast<double>(f.width);
    // Small slack so recomputed cell centres on the box edge stay inside.
    const double eps_lat = 1e-9 * dlat, eps_lon = 1e-9 * dlon;
    std::vector<std::size_t> rows, cols;
    for (std::size_t r = 0; r < f.height; ++r) {
        const double c = f.box.lat_max - (static_cast<double>(r) + 0.5) * dlat;
        if (c >= lat0 - eps_lat && c <= lat1 + eps_lat) rows.push_back(r);
    }
    for (std::size_t k = 0; k < f.width; ++k) {
        const double c = f.box.lon_min + (static_cast<double>(k) + 0.5) * dlon;
        if (c >= lon0 - eps_lon && c <= lon1 + eps_lon) cols.push_back(k);
    }
    if (rows.empty() || cols.empty()) {
        throw InvalidInput("crop box [" + text::general(lat0, 6) + "," + text::general(lat1, 6) + "]x[" +
                           text::general(lon0, 6) + "," + text::general(lon1, 6) + "] contains no cell centre of frame " +
                           f.timestamp);
    }
    GridFrame out;
    out.timestamp = f.timestamp;
    out.height = rows.size();
    out.width = cols.size();
    out.box.lat_max = f.box.lat_max - static_cast<double>(rows.front()) * dlat;
    out.box.lat_min = f.box.lat_max - static_cast<double>(rows.back() + 1) * dlat;
    out.box.lon_min = f.box.lon_min + static_cast<double>(cols.front()) * dlon;
    out.box.lon_max = f.box.lon_min + static_cast<double>(cols.back() + 1) * dlon;
    if (rows.size() == f.height) out.box.lat_min = f.box.lat_min, out.box.lat_max = f.box.lat_max;
    if (cols.size() == f.width) out.box.lon_min = f.box.lon_min, out.box.lon_max = f.box.lon_max;
    out.values.reserve(out.height * out.width);
    for (std::size_t r : rows)
        for (std::size_t k : cols) out.values.push_back(f.at(r, k));
    return out;
}

GridFrame rescale_unit(const GridFrame& f) {
    GridFrame out = f;
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        const float v = f.values[i];
        if (!(v >= 0.0f && v <= 255.0f)) {
            throw RangeError("frame " + f.timestamp + ": value " + text::general(v, 9) + " at row " +
                             std::to_string(i / f.width) + ", column " + std::to_string(i % f.width) +
                             " is outside [0, 255]");
        }
        out.values[i] = static_cast<float>(static_cast<double>(v) / 255.0);
    }
    return out;
}

GridFrame bilinear_resize(const GridFrame& f, std::size_t out_h, std::size_t out_w) {
    if (out_h < 1 || out_w < 1) throw InvalidInput("resize target must be at least 1x1");
    if (f.height == 0 || f.width == 0 || f.values.size() != f.height * f.width) throw InvalidInput("cannot resize an empty frame");
    if (out_h == f.height && out_w == f.width) return f;
    auto coords = [](std::size_t in, std::size_t out) {
        std::vector<std::pair<std::size_t, double>> c(out);
        for (std::size_t o = 0; o < out; ++o) {
            const double s = out == 1 ? 0.0 : static_cast<double>(o) * static_cast<double>(in - 1) / static_cast<double>(out - 1);
            std::size_t i0 = static_cast<std::size_t>(std::floor(s));
            if (i0 >= in - 1) i0 = in > 1 ? in - 2 : 0;
            double t = in > 1 ? s - static_cast<double>(i0) : 0.0;
            if (o + 1 == out && out > 1) t = in > 1 ? 1.0 : 0.0;  // last sample is exactly the last source cell
            c[o] = {i0, t};
        }
        return c;
    };
    const auto rc = coords(f.height, out_h), cc = coords(f.width, out_w);
    GridFrame out;
    out.timestamp = f.timestamp;
    out.box = f.box;
    out.height = out_h;
    out.width = out_w;
    out.values.resize(out_h * out_w);
    for (std::size_t r = 0; r < out_h; ++r) {
        const auto [r0, tr] = rc[r];
        const std::size_t r1 = std::min(r0 + 1, f.height - 1);
        for (std::size_t c = 0; c < out_w; ++c) {
            const auto [c0, tc] = cc[c];
            const std::size_t c1 = std::min(c0 + 1, f.width - 1);
            double v;
            if (tr == 0.0 && tc == 0.0) v = f.at(r0, c0);
            else {
                const double top = (1.0 - tc) * f.at(r0, c0) + tc * f.at(r0, c1);
                const double bot = (1.0 - tc) * f.at(r1, c0) + tc * f.at(r1, c1);
                v = (1.0 - tr) * top + tr * bot;
            }
            out.values[r * out_w + c] = static_cast<float>(v);
        }
    }
    return out;
}

}  // namespace gridrep::ingest
