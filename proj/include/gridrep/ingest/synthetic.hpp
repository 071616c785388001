#pragma once

#include <cstdint>
#include <vector>

#include "gridrep/ingest/frames.hpp"
#include "gridrep/ingest/labels.hpp"

namespace gridrep::ingest {

/// Target event frequencies of the generator, in kEvents order.
inline constexpr std::array<double, 5> kSyntheticFrequencies = {244.0 / 1461, 471.0 / 1461, 406.0 / 1461,
                                                                  520.0 / 1461, 702.0 / 1461};

struct SyntheticData {
    std::vector<GridFrame> frames;
    LabelTable labels;
};

/// Daily 00Z frames on a 0-60N, 100-160E box with values in [0, 1]. Each
/// event leaves its own structure: a bright vortex (NWPTC), a frontal band
/// (FT), brightness ramps (NE, SWF) and scattered convective cells (HR).
/// Exactly round(frequency * n_days) days carry each event. The scene is
/// defined on continuous coordinates, so two resolutions with the same seed
/// show the same weather.
SyntheticData generate_synthetic(std::size_t n_days, std::size_t resolution, std::uint64_t seed);

}  // namespace gridrep::ingest
