#pragma once

#include <span>
#include <string>
#include <vector>

#include "gridrep/core/matrix.hpp"

namespace gridrep::ingest {

/// Feature vectors for a set of frames, one row per timestamp.
struct FeatureSet {
    std::string method;
    Matrix x;
    std::vector<std::string> timestamps;

    void validate() const;
    friend bool operator==(const FeatureSet&, const FeatureSet&) = default;
};

/// GRFEA1: magic, u64 n, u64 d, length-prefixed method tag, f64 payload.
/// Timestamps are not stored; they come from the dataset on import.
std::vector<char> serialize_features(const FeatureSet& f);
FeatureSet deserialize_features(std::span<const char> bytes);

/// CSV mirror: timestamp,f0,...,f{d-1} with round-trip precision.
std::string features_csv(const FeatureSet& f);
FeatureSet parse_features_csv(const std::string& csv, const std::string& method, const std::string& source);

void export_features(const FeatureSet& f, const std::string& path);
void export_features_csv(const FeatureSet& f, const std::string& path);

/// Reads binary or CSV (detected by magic) and aligns the rows to the given
/// timestamps. A non-empty method tag overrides the stored one.
FeatureSet import_features(const std::string& path, const std::string& method,
                           const std::vector<std::string>& timestamps);

}  // namespace gridrep::ingest
