#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "calibkit/binning.hpp"
#include "calibkit/errors.hpp"
#include "calibkit/estimator.hpp"
#include "calibkit/resample.hpp"
#include "calibkit/simplex.hpp"

namespace calibkit {

/// One-dimensional deviation reliability diagram: per nonempty bin the
/// average prediction (marker x-position), the deviation r_hat - g_hat on
/// the tracked component, and optional consistency bands; plus the
/// prediction histogram over all bins and an optional analytic deviation
/// curve.
struct Diagram1D {
    struct Mark {
        int bin = 0;
        double lo_edge = 0.0;
        double hi_edge = 0.0;
        double g_hat = 0.0;     // tracked component
        double deviation = 0.0; // r_hat - g_hat on the tracked component
        long count = 0;
        std::optional<std::pair<double, double>> band;
    };

    std::vector<Mark> marks;   // nonempty bins, ascending bin index
    std::vector<long> histogram;  // all bins
    std::vector<std::pair<double, double>> analytic_deviation;  // (t, dev) samples
    long n = 0;
};

struct BandRequest {
    double lo_q = 0.05;
    double hi_q = 0.95;
    int replicates = 1000;
    std::uint64_t seed = 42;
    int threads = 1;
};

inline Diagram1D build_diagram_1d(
    const LabeledDataset& data, const Partition& partition,
    const std::optional<BandRequest>& bands = std::nullopt,
    std::vector<std::pair<double, double>> analytic_deviation = {}) {
    data.check();
    if (data.num_classes() != 2 || partition.dimension() != 2) {
        throw DimensionMismatch("build_diagram_1d: binary induced data and 1-D bins only");
    }
    const std::vector<BinSummary> summaries = bin_statistics(data, partition);

    std::vector<std::optional<std::pair<double, double>>> band_values;
    if (bands) {
        band_values = consistency_bands(data, partition, bands->lo_q, bands->hi_q,
                                        bands->replicates, bands->seed, bands->threads);
    }

    Diagram1D diagram;
    diagram.n = static_cast<long>(data.size());
    diagram.histogram.reserve(summaries.size());
    diagram.analytic_deviation = std::move(analytic_deviation);
    for (const BinSummary& s : summaries) {
        diagram.histogram.push_back(s.count);
        if (s.count == 0) {
            continue;
        }
        Diagram1D::Mark mark;
        mark.bin = s.bin_index;
        const auto [lo, hi] = partition.interval_1d(s.bin_index);
        mark.lo_edge = lo;
        mark.hi_edge = hi;
        mark.g_hat = s.g_hat->tracked();
        mark.deviation = s.r_hat->tracked() - s.g_hat->tracked();
        mark.count = s.count;
        if (bands && band_values[static_cast<std::size_t>(s.bin_index)]) {
            mark.band = band_values[static_cast<std::size_t>(s.bin_index)];
        }
        diagram.marks.push_back(mark);
    }
    return diagram;
}

/// Reliability diagram on the 3-class simplex: one arrow per nonempty bin
/// from the average prediction to the histogram-regression value, with the
/// bin occupancy for color-coding.
struct DiagramSimplex {
    struct Arrow {
        int bin = 0;
        std::array<double, 3> tail{};  // g_hat, barycentric
        std::array<double, 3> head{};  // r_hat, barycentric
        double p_hat = 0.0;
        long count = 0;
    };

    std::vector<Arrow> arrows;               // nonempty bins, ascending bin index
    int subdivision = 1;
    std::array<std::string, 3> labels{"0", "1", "2"};
    std::vector<std::array<std::array<double, 3>, 3>> cells;  // all bins
    std::vector<double> p_hats;                               // all bins
    long n = 0;
};

inline DiagramSimplex build_diagram_simplex(
    const LabeledDataset& data, const Partition& partition,
    std::array<std::string, 3> labels = {"0", "1", "2"}) {
    data.check();
    if (data.num_classes() != 3) {
        throw DimensionMismatch("build_diagram_simplex: 3-class induced data required");
    }
    if (partition.scheme() != Partition::Scheme::SimplexGrid) {
        throw DimensionMismatch("build_diagram_simplex: simplex grid partition required");
    }
    const std::vector<BinSummary> summaries = bin_statistics(data, partition);

    DiagramSimplex diagram;
    diagram.n = static_cast<long>(data.size());
    diagram.subdivision = partition.param();
    diagram.labels = std::move(labels);
    diagram.cells.reserve(summaries.size());
    diagram.p_hats.reserve(summaries.size());
    for (const BinSummary& s : summaries) {
        diagram.cells.push_back(partition.grid_cell_vertices(s.bin_index));
        diagram.p_hats.push_back(s.p_hat);
        if (s.count == 0) {
            continue;
        }
        DiagramSimplex::Arrow arrow;
        arrow.bin = s.bin_index;
        for (std::size_t c = 0; c < 3; ++c) {
            arrow.tail[c] = (*s.g_hat)[c];
            arrow.head[c] = (*s.r_hat)[c];
        }
        arrow.p_hat = s.p_hat;
        arrow.count = s.count;
        diagram.arrows.push_back(arrow);
    }
    return diagram;
}

}  // namespace calibkit
