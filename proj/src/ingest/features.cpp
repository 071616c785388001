#include "gridrep/ingest/features.hpp"

#include <cmath>
#include <cstdlib>

#include "gridrep/core/binary_io.hpp"
#include "gridrep/core/text.hpp"
#include "gridrep/error.hpp"

namespace gridrep::ingest {

namespace {

constexpr std::string_view kMagic = "GRFEA1";

}  // namespace

void FeatureSet::validate() const {
    if (x.cols() == 0) throw InvalidInput("feature set '" + method + "' has zero width");
    if (!timestamps.empty() && timestamps.size() != x.rows()) {
        throw AlignmentError("feature set '" + method + "' has " + std::to_string(x.rows()) + " rows for " +
                             std::to_string(timestamps.size()) + " timestamps");
    }
}

std::vector<char> serialize_features(const FeatureSet& f) {
    f.validate();
    binio::Writer w;
    w.magic(kMagic);
    w.u64(f.x.rows());
    w.u64(f.x.cols());
    w.text(f.method);
    w.f64s(f.x.values());
    return w.bytes();
}

FeatureSet deserialize_features(std::span<const char> bytes) {
    binio::Reader r(bytes, "feature file");
    r.expect_magic(kMagic);
    const std::uint64_t n = r.u64(), d = r.u64();
    FeatureSet f;
    f.method = r.text();
    if (d == 0) throw FormatError("feature file: width is zero");
    if (n != 0 && d > r.remaining() / 8 / n) throw FormatError("feature file: header (n, d) exceeds the payload");
    auto v = r.f64s(n * d);
    r.expect_end();
    try {
        f.x = Matrix(n, d, std::move(v));
    } catch (const InvalidInput& e) {
        throw FormatError(std::string("feature file: ") + e.what());
    }
    return f;
}

std::string features_csv(const FeatureSet& f) {
    f.validate();
    std::string out = "timestamp";
    for (std::size_t j = 0; j < f.x.cols(); ++j) out += ",f" + std::to_string(j);
    out += "\n";
    for (std::size_t i = 0; i < f.x.rows(); ++i) {
        out += f.timestamps.empty() ? std::to_string(i) : f.timestamps[i];
        for (double v : f.x.row(i)) out += "," + text::general(v, 17);
        out += "\n";
    }
    return out;
}

FeatureSet parse_features_csv(const std::string& csv, const std::string& method, const std::string& source) {
    const auto lines = text::split(csv, '\n');
    if (lines.empty() || text::trim(lines[0]).empty()) throw FormatError(source + ": missing header");
    const auto header = text::split(text::trim(lines[0]), ',');
    if (header.size() < 2 || header[0] != "timestamp") throw FormatError(source + ":1: header must start with timestamp");
    const std::size_t d = header.size() - 1;
    FeatureSet f;
    f.method = method;
    std::vector<double> values;
    for (std::size_t ln = 1; ln < lines.size(); ++ln) {
        const auto line = text::trim(lines[ln]);
        if (line.empty()) continue;
        const auto cells = text::split(line, ',');
        const std::string where = source + ":" + std::to_string(ln + 1);
        if (cells.size() != d + 1) throw FormatError(where + ": expected " + std::to_string(d + 1) + " fields");
        f.timestamps.push_back(std::string(text::trim(cells[0])));
        for (std::size_t j = 1; j <= d; ++j) {
            const std::string cell(text::trim(cells[j]));
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (cell.empty() || end != cell.c_str() + cell.size() || !std::isfinite(v)) {
                throw FormatError(where + ": field " + std::to_string(j + 1) + " '" + cell + "' is not a finite number");
            }
            values.push_back(v);
        }
    }
    f.x = Matrix(f.timestamps.size(), d, std::move(values));
    return f;
}

void export_features(const FeatureSet& f, const std::string& path) { binio::write_file(path, serialize_features(f)); }

void export_features_csv(const FeatureSet& f, const std::string& path) { text::write_file(path, features_csv(f)); }

FeatureSet import_features(const std::string& path, const std::string& method,
                           const std::vector<std::string>& timestamps) {
    const auto bytes = binio::read_file(path);
    const bool binary = bytes.size() >= kMagic.size() && std::string_view(bytes.data(), kMagic.size()) == kMagic;
    FeatureSet f;
    if (binary) {
        f = deserialize_features(bytes);
    } else {
        f = parse_features_csv(std::string(bytes.begin(), bytes.end()), method, path);
        for (std::size_t i = 0; i < f.timestamps.size() && i < timestamps.size(); ++i) {
            if (f.timestamps[i] != timestamps[i]) {
                throw AlignmentError(path + ": row " + std::to_string(i + 1) + " is " + f.timestamps[i] +
                                     " but the dataset has " + timestamps[i]);
            }
        }
    }
    if (!method.empty()) f.method = method;
    if (f.x.rows() != timestamps.size()) {
        throw AlignmentError(path + ": " + std::to_string(f.x.rows()) + " feature rows for " +
                             std::to_string(timestamps.size()) + " frames");
    }
    f.timestamps = timestamps;
    f.validate();
    return f;
}

}  // namespace gridrep::ingest
