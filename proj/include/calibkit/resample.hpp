#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "calibkit/binning.hpp"
#include "calibkit/errors.hpp"
#include "calibkit/estimator.hpp"
#include "calibkit/lens.hpp"
#include "calibkit/parallel.hpp"
#include "calibkit/rng.hpp"
#include "calibkit/simplex.hpp"

namespace calibkit {

namespace detail {

// Row-major copy of a dataset; the resampling loops stay allocation-free.
struct FlatData {
    std::size_t n = 0;
    std::size_t m = 0;
    std::vector<double> comps;
    std::vector<int> labels;

    static FlatData from(const LabeledDataset& data) {
        FlatData flat;
        flat.n = data.size();
        flat.m = data.num_classes();
        flat.comps.resize(flat.n * flat.m);
        flat.labels = data.labels;
        for (std::size_t i = 0; i < flat.n; ++i) {
            for (std::size_t c = 0; c < flat.m; ++c) {
                flat.comps[i * flat.m + c] = data.predictions[i][c];
            }
        }
        return flat;
    }

    std::span<const double> row(std::size_t i) const {
        return std::span<const double>(comps.data() + i * m, m);
    }
};

inline int sample_categorical(std::span<const double> probs, double u) {
    double acc = 0.0;
    for (std::size_t c = 0; c + 1 < probs.size(); ++c) {
        acc += probs[c];
        if (u < acc) {
            return static_cast<int>(c);
        }
    }
    return static_cast<int>(probs.size()) - 1;
}

// Scratch for one replicate's binned statistic.
struct EtaScratch {
    std::vector<long> counts;
    std::vector<long> label_counts;
    std::vector<double> comp_sums;
    std::vector<double> g_hat;
    std::vector<double> r_hat;

    void reset(std::size_t bins, std::size_t m) {
        counts.assign(bins, 0);
        label_counts.assign(bins * m, 0);
        comp_sums.assign(bins * m, 0.0);
        g_hat.resize(m);
        r_hat.resize(m);
    }
};

inline double eta_from_rows(const FlatData& base, std::span<const std::uint64_t> indices,
                            std::span<const int> labels, const Partition& partition,
                            Distance dist, EtaScratch& scratch) {
    const std::size_t m = base.m;
    scratch.reset(static_cast<std::size_t>(partition.bin_count()), m);
    for (std::size_t i = 0; i < indices.size(); ++i) {
        const std::span<const double> row = base.row(indices[i]);
        const auto b = static_cast<std::size_t>(partition.assign(row));
        ++scratch.counts[b];
        ++scratch.label_counts[b * m + static_cast<std::size_t>(labels[i])];
        for (std::size_t c = 0; c < m; ++c) {
            scratch.comp_sums[b * m + c] += row[c];
        }
    }
    const double n = static_cast<double>(indices.size());
    double eta = 0.0;
    for (std::size_t b = 0; b < scratch.counts.size(); ++b) {
        const long count = scratch.counts[b];
        if (count == 0) {
            continue;
        }
        for (std::size_t c = 0; c < m; ++c) {
            scratch.g_hat[c] = scratch.comp_sums[b * m + c] / static_cast<double>(count);
            scratch.r_hat[c] = static_cast<double>(scratch.label_counts[b * m + c]) /
                               static_cast<double>(count);
        }
        eta += (static_cast<double>(count) / n) *
               distance(dist, std::span<const double>(scratch.r_hat),
                        std::span<const double>(scratch.g_hat));
    }
    return eta;
}

/// Linear-interpolation empirical quantile (R type 7) of a sorted sample.
inline double quantile_type7(std::span<const double> sorted, double q) {
    if (sorted.empty()) {
        throw EmptyInput("quantile of empty sample");
    }
    if (sorted.size() == 1) {
        return sorted[0];
    }
    const double h = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace detail

/// Synthetic dataset for the calibrated null: predictions drawn with
/// replacement, labels then drawn from each drawn prediction itself.
inline LabeledDataset consistency_resample(std::span<const SimplexVector> predictions,
                                           CounterRng& rng) {
    if (predictions.empty()) {
        throw EmptyInput("consistency_resample: no predictions");
    }
    const std::size_t n = predictions.size();
    std::vector<std::uint64_t> indices(n);
    for (std::size_t i = 0; i < n; ++i) {
        indices[i] = rng.next_index(n);
    }
    LabeledDataset out;
    out.predictions.reserve(n);
    out.labels.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const SimplexVector& pred = predictions[indices[i]];
        out.predictions.push_back(pred);
        out.labels.push_back(detail::sample_categorical(
            std::span<const double>(pred.components()), rng.next_double()));
    }
    return out;
}

/// Plain bootstrap: (prediction, label) pairs drawn with replacement intact.
inline LabeledDataset bootstrap_resample(const LabeledDataset& data, CounterRng& rng) {
    if (data.size() == 0) {
        throw EmptyInput("bootstrap_resample: empty dataset");
    }
    const std::size_t n = data.size();
    LabeledDataset out;
    out.predictions.reserve(n);
    out.labels.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = rng.next_index(n);
        out.predictions.push_back(data.predictions[j]);
        out.labels.push_back(data.labels[j]);
    }
    return out;
}

enum class ResampleMode { Consistency, FullBootstrap };
enum class PartitionPolicy { RebuildPerReplicate, Frozen };

/// Configuration of a resampling run: the statistic is the binned expected
/// miscalibration under (lens, bins, distance). Data-dependent partitions
/// are part of the statistic and rebuilt per replicate unless frozen.
struct ResamplePlan {
    int replicates = 1000;
    std::uint64_t seed = 42;
    ResampleMode mode = ResampleMode::Consistency;
    std::optional<Lens> lens;  // nullopt = canonical
    BinningSpec bins{BinningSpec::Kind::Equal, 10};
    PartitionPolicy policy = PartitionPolicy::RebuildPerReplicate;
    Distance distance = Distance::TotalVariation;
    int threads = 1;
};

struct TestResult {
    double observed = 0.0;
    std::vector<double> null_samples;  // ascending
    double p_value = 1.0;
};

inline double p_value_add_one(double observed, std::span<const double> null_samples) {
    long at_least = 0;
    for (double v : null_samples) {
        if (v >= observed) {
            ++at_least;
        }
    }
    return static_cast<double>(1 + at_least) /
           static_cast<double>(null_samples.size() + 1);
}

namespace detail {

/// Replicate statistics under the plan; replicate j draws from stream j of
/// the plan seed, so the output is independent of thread count.
inline std::vector<double> replicate_statistics(const LabeledDataset& induced,
                                                const Partition& base_partition,
                                                const ResamplePlan& plan) {
    const FlatData flat = FlatData::from(induced);
    const bool rebuild = plan.bins.data_dependent() &&
                         plan.policy == PartitionPolicy::RebuildPerReplicate;
    std::vector<double> stats(static_cast<std::size_t>(plan.replicates), 0.0);

    parallel_for(plan.replicates, plan.threads, [&](long j) {
        CounterRng rng(plan.seed, static_cast<std::uint64_t>(j));
        const std::size_t n = flat.n;
        std::vector<std::uint64_t> indices(n);
        for (std::size_t i = 0; i < n; ++i) {
            indices[i] = rng.next_index(n);
        }
        std::vector<int> labels(n);
        if (plan.mode == ResampleMode::Consistency) {
            for (std::size_t i = 0; i < n; ++i) {
                labels[i] = sample_categorical(flat.row(indices[i]), rng.next_double());
            }
        } else {
            for (std::size_t i = 0; i < n; ++i) {
                labels[i] = flat.labels[indices[i]];
            }
        }
        EtaScratch scratch;
        if (rebuild) {
            std::vector<SimplexVector> preds;
            preds.reserve(n);
            for (std::size_t i = 0; i < n; ++i) {
                preds.push_back(induced.predictions[indices[i]]);
            }
            const Partition replicate_partition = plan.bins.build(preds);
            stats[static_cast<std::size_t>(j)] = eta_from_rows(
                flat, indices, labels, replicate_partition, plan.distance, scratch);
        } else {
            stats[static_cast<std::size_t>(j)] =
                eta_from_rows(flat, indices, labels, base_partition, plan.distance, scratch);
        }
    });
    return stats;
}

}  // namespace detail

/// Replicate distribution of the plan's statistic: consistency resampling
/// simulates the calibrated null, full bootstrap the estimator's own
/// sampling variability. Returned in replicate order (stream j of the seed).
inline std::vector<double> statistic_distribution(const LabeledDataset& data,
                                                  const ResamplePlan& plan) {
    if (plan.replicates < 1) {
        throw DomainError("statistic_distribution: replicates must be >= 1");
    }
    data.check();
    const Lens lens = plan.lens ? *plan.lens
                                : Lens::canonical(static_cast<int>(data.num_classes()));
    const LabeledDataset induced = lens.apply(data);
    const Partition base_partition = plan.bins.build(induced.predictions);
    return detail::replicate_statistics(induced, base_partition, plan);
}

/// Null test of perfect calibration: observed eta against its consistency
/// distribution, p = (1 + #{null >= observed}) / (B + 1).
inline TestResult pvalue_test(const LabeledDataset& data, const ResamplePlan& plan) {
    if (plan.mode != ResampleMode::Consistency) {
        throw DomainError("pvalue_test: plan mode must be Consistency");
    }
    if (plan.replicates < 1) {
        throw DomainError("pvalue_test: replicates must be >= 1");
    }
    data.check();
    const Lens lens = plan.lens ? *plan.lens
                                : Lens::canonical(static_cast<int>(data.num_classes()));
    const LabeledDataset induced = lens.apply(data);
    const Partition base_partition = plan.bins.build(induced.predictions);

    TestResult result;
    result.observed =
        expected_miscalibration(induced, base_partition, plan.distance).eta_hat;
    result.null_samples = detail::replicate_statistics(induced, base_partition, plan);
    result.p_value = p_value_add_one(result.observed, result.null_samples);
    std::sort(result.null_samples.begin(), result.null_samples.end());
    return result;
}

/// Per-bin (lo_q, hi_q) quantiles of the tracked-component deviation
/// r_hat - g_hat over B consistency resamples. Bins that a replicate leaves
/// empty contribute no sample for that replicate; bins empty in every
/// replicate yield nullopt.
inline std::vector<std::optional<std::pair<double, double>>> consistency_bands(
    const LabeledDataset& data, const Partition& partition, double lo_q, double hi_q,
    int replicates, std::uint64_t seed, int threads = 1) {
    data.check();
    if (data.num_classes() != 2 || partition.dimension() != 2) {
        throw UnsupportedDimension("consistency_bands: binary (1-D) diagrams only");
    }
    if (!(0.0 <= lo_q && lo_q < hi_q && hi_q <= 1.0)) {
        throw DomainError("consistency_bands: need 0 <= lo_q < hi_q <= 1");
    }
    if (replicates < 1) {
        throw DomainError("consistency_bands: replicates must be >= 1");
    }
    const detail::FlatData flat = detail::FlatData::from(data);
    const auto bins = static_cast<std::size_t>(partition.bin_count());
    const auto B = static_cast<std::size_t>(replicates);

    // deviation[j * bins + b]; NaN marks a bin empty in replicate j.
    std::vector<double> deviation(B * bins,
                                  std::numeric_limits<double>::quiet_NaN());

    detail::parallel_for(replicates, threads, [&](long j) {
        CounterRng rng(seed, static_cast<std::uint64_t>(j));
        const std::size_t n = flat.n;
        std::vector<std::uint64_t> indices(n);
        for (std::size_t i = 0; i < n; ++i) {
            indices[i] = rng.next_index(n);
        }
        std::vector<long> counts(bins, 0);
        std::vector<long> positives(bins, 0);
        std::vector<double> tracked_sums(bins, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const std::span<const double> row = flat.row(indices[i]);
            const double u = rng.next_double();
            const int label = detail::sample_categorical(row, u);
            const auto b = static_cast<std::size_t>(partition.assign(row));
            ++counts[b];
            positives[b] += label == 1 ? 1 : 0;
            tracked_sums[b] += row[1];
        }
        for (std::size_t b = 0; b < bins; ++b) {
            if (counts[b] > 0) {
                const double r = static_cast<double>(positives[b]) /
                                 static_cast<double>(counts[b]);
                const double g = tracked_sums[b] / static_cast<double>(counts[b]);
                deviation[static_cast<std::size_t>(j) * bins + b] = r - g;
            }
        }
    });

    std::vector<std::optional<std::pair<double, double>>> bands(bins);
    std::vector<double> samples;
    samples.reserve(B);
    for (std::size_t b = 0; b < bins; ++b) {
        samples.clear();
        for (std::size_t j = 0; j < B; ++j) {
            const double v = deviation[j * bins + b];
            if (!std::isnan(v)) {
                samples.push_back(v);
            }
        }
        if (samples.empty()) {
            continue;
        }
        std::sort(samples.begin(), samples.end());
        bands[b] = std::make_pair(detail::quantile_type7(samples, lo_q),
                                  detail::quantile_type7(samples, hi_q));
    }
    return bands;
}

}  // namespace calibkit
