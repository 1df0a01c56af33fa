#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "calibkit/errors.hpp"

namespace calibkit {

/// A probability vector on the simplex. Construction goes through
/// validated() (tolerant input, renormalized) or unchecked() for values
/// that are simplex points by construction.
class SimplexVector {
public:
    static constexpr double kDefaultTolerance = 1e-6;

    static SimplexVector validated(std::span<const double> raw,
                                   double tolerance = kDefaultTolerance) {
        if (raw.empty()) {
            throw RejectedVector("validate_simplex: empty vector");
        }
        double sum = 0.0;
        for (double v : raw) {
            if (!std::isfinite(v)) {
                throw RejectedVector("validate_simplex: non-finite component");
            }
            if (v < -tolerance) {
                throw RejectedVector("validate_simplex: component " + std::to_string(v) +
                                     " below -tolerance");
            }
            if (v > 1.0 + tolerance) {
                throw RejectedVector("validate_simplex: component " + std::to_string(v) +
                                     " above 1+tolerance");
            }
            sum += v;
        }
        if (std::abs(sum - 1.0) > tolerance) {
            throw RejectedVector("validate_simplex: components sum to " + std::to_string(sum));
        }
        std::vector<double> comps(raw.begin(), raw.end());
        double clamped_sum = 0.0;
        for (double& v : comps) {
            if (v < 0.0) v = 0.0;
            clamped_sum += v;
        }
        // Skip the division when the sum is already within a few machine
        // epsilons of 1; renormalized output then revalidates to itself.
        const double renorm_threshold =
            4.0 * static_cast<double>(comps.size()) * std::numeric_limits<double>::epsilon();
        if (std::abs(clamped_sum - 1.0) > renorm_threshold) {
            for (double& v : comps) {
                v /= clamped_sum;
            }
        }
        return SimplexVector(std::move(comps));
    }

    static SimplexVector validated(std::initializer_list<double> raw,
                                   double tolerance = kDefaultTolerance) {
        return validated(std::span<const double>(raw.begin(), raw.size()), tolerance);
    }

    // No validation; caller guarantees the components form a simplex point.
    static SimplexVector unchecked(std::vector<double> comps) {
        return SimplexVector(std::move(comps));
    }

    std::size_t size() const { return comps_.size(); }
    double operator[](std::size_t i) const { return comps_[i]; }
    const std::vector<double>& components() const { return comps_; }

    /// Last component: the binning key for binary/induced problems.
    double tracked() const { return comps_.back(); }

    bool operator==(const SimplexVector&) const = default;

private:
    explicit SimplexVector(std::vector<double> comps) : comps_(std::move(comps)) {}
    std::vector<double> comps_;
};

/// Aligned (prediction, class index) pairs; all predictions share one dimension.
struct LabeledDataset {
    std::vector<SimplexVector> predictions;
    std::vector<int> labels;

    std::size_t size() const { return predictions.size(); }
    std::size_t num_classes() const {
        return predictions.empty() ? 0 : predictions.front().size();
    }

    void check() const {
        if (predictions.empty()) {
            throw EmptyDataset("dataset has no rows");
        }
        if (predictions.size() != labels.size()) {
            throw DimensionMismatch("predictions/labels length mismatch");
        }
        const std::size_t m = predictions.front().size();
        for (std::size_t i = 0; i < predictions.size(); ++i) {
            if (predictions[i].size() != m) {
                throw InconsistentWidth("row " + std::to_string(i) +
                                        ": prediction width differs");
            }
            if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= m) {
                throw LabelOutOfRange("row " + std::to_string(i) + ": label " +
                                      std::to_string(labels[i]) + " outside [0," +
                                      std::to_string(m) + ")");
            }
        }
    }
};

enum class Distance { TotalVariation, SquaredEuclidean };

inline const char* distance_name(Distance d) {
    return d == Distance::TotalVariation ? "tv" : "se";
}

inline Distance parse_distance(const std::string& s) {
    if (s == "tv") return Distance::TotalVariation;
    if (s == "se") return Distance::SquaredEuclidean;
    throw ParseError("unknown distance '" + s + "' (expected tv|se)");
}

inline double distance(Distance kind, std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) {
        throw DimensionMismatch("distance: dimensions " + std::to_string(p.size()) +
                                " vs " + std::to_string(q.size()));
    }
    double acc = 0.0;
    if (kind == Distance::TotalVariation) {
        for (std::size_t k = 0; k < p.size(); ++k) {
            acc += std::abs(p[k] - q[k]);
        }
        return 0.5 * acc;
    }
    for (std::size_t k = 0; k < p.size(); ++k) {
        const double diff = p[k] - q[k];
        acc += diff * diff;
    }
    return acc;
}

inline double distance(Distance kind, const SimplexVector& p, const SimplexVector& q) {
    return distance(kind, std::span<const double>(p.components()),
                    std::span<const double>(q.components()));
}

}  // namespace calibkit
