#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "calibkit/binning.hpp"
#include "calibkit/errors.hpp"
#include "calibkit/quadrature.hpp"
#include "calibkit/simplex.hpp"

namespace calibkit {

/// Per-bin histogram-regression statistics. g_hat/r_hat are absent exactly
/// when the bin holds no rows.
struct BinSummary {
    int bin_index = 0;
    long count = 0;
    double p_hat = 0.0;
    std::optional<SimplexVector> g_hat;
    std::optional<SimplexVector> r_hat;
};

namespace detail {

// Compensated accumulator; repeated bin averages must not drift.
struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;
    void add(double v) {
        const double y = v - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

}  // namespace detail

inline std::vector<BinSummary> bin_statistics(const LabeledDataset& data,
                                              const Partition& partition) {
    data.check();
    const std::size_t m = data.num_classes();
    if (static_cast<int>(m) != partition.dimension()) {
        throw DimensionMismatch("bin_statistics: data dimension " + std::to_string(m) +
                                " vs partition dimension " +
                                std::to_string(partition.dimension()));
    }
    const std::size_t bins = static_cast<std::size_t>(partition.bin_count());
    std::vector<long> counts(bins, 0);
    std::vector<long> label_counts(bins * m, 0);
    std::vector<detail::KahanSum> comp_sums(bins * m);

    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto b = static_cast<std::size_t>(partition.assign(data.predictions[i]));
        ++counts[b];
        ++label_counts[b * m + static_cast<std::size_t>(data.labels[i])];
        for (std::size_t c = 0; c < m; ++c) {
            comp_sums[b * m + c].add(data.predictions[i][c]);
        }
    }

    const double n = static_cast<double>(data.size());
    std::vector<BinSummary> out(bins);
    for (std::size_t b = 0; b < bins; ++b) {
        BinSummary& s = out[b];
        s.bin_index = static_cast<int>(b);
        s.count = counts[b];
        s.p_hat = counts[b] / n;
        if (counts[b] > 0) {
            std::vector<double> g(m);
            std::vector<double> r(m);
            for (std::size_t c = 0; c < m; ++c) {
                g[c] = comp_sums[b * m + c].sum / static_cast<double>(counts[b]);
                r[c] = static_cast<double>(label_counts[b * m + c]) /
                       static_cast<double>(counts[b]);
            }
            s.g_hat = SimplexVector::unchecked(std::move(g));
            s.r_hat = SimplexVector::unchecked(std::move(r));
        }
    }
    return out;
}

/// The binned plug-in estimate of expected miscalibration plus the per-bin
/// worst case, with the full bin list for diagrams.
struct MiscalibrationReport {
    double eta_hat = 0.0;
    double max_hat = 0.0;
    Distance distance = Distance::TotalVariation;
    std::string lens_spec = "canonical";
    Partition partition;
    std::vector<BinSummary> bins;
};

inline MiscalibrationReport expected_miscalibration(const LabeledDataset& data,
                                                    const Partition& partition,
                                                    Distance dist) {
    MiscalibrationReport report;
    report.distance = dist;
    report.partition = partition;
    report.bins = bin_statistics(data, partition);
    for (const BinSummary& bin : report.bins) {
        if (bin.count == 0) {
            continue;  // p_hat = 0 contribution; no distance against an empty bin
        }
        const double d = distance(dist, *bin.r_hat, *bin.g_hat);
        report.eta_hat += bin.p_hat * d;
        report.max_hat = std::max(report.max_hat, d);
    }
    return report;
}

/// Population analogue of the binned estimate for a binary problem given in
/// closed form: `curve(t)` is the calibration function value (tracked
/// component) at tracked prediction t, `weight(t)` the density of the
/// tracked prediction. Returns sum_i p_i * d(r_i, g_i) with the per-bin
/// moments computed by adaptive quadrature — the almost-sure limit of the
/// empirical estimate under the fixed partition.
inline double analytic_binned_miscalibration(const std::function<double(double)>& curve,
                                             const std::function<double(double)>& weight,
                                             const Partition& partition, Distance dist,
                                             double abs_tol = 1e-8) {
    if (partition.dimension() != 2) {
        throw UnsupportedDimension("analytic_binned_miscalibration: needs a 1-D partition");
    }
    const int bins = partition.bin_count();
    const double bin_tol = abs_tol / static_cast<double>(bins);
    double total = 0.0;
    for (int b = 0; b < bins; ++b) {
        const auto [lo, hi] = partition.interval_1d(b);
        const double mass = integrate(weight, lo, hi, bin_tol);
        if (mass < 1e-13) {
            continue;  // empty bin in the population sense
        }
        const double mean_pred =
            integrate([&](double t) { return t * weight(t); }, lo, hi, bin_tol) / mass;
        const double mean_cal =
            integrate([&](double t) { return curve(t) * weight(t); }, lo, hi, bin_tol) / mass;
        const double g[2] = {1.0 - mean_pred, mean_pred};
        const double r[2] = {1.0 - mean_cal, mean_cal};
        total += mass * distance(dist, std::span<const double>(r, 2),
                                 std::span<const double>(g, 2));
    }
    return total;
}

}  // namespace calibkit
