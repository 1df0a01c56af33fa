#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <string>

#include "calibkit/errors.hpp"

namespace calibkit {

namespace detail {

// Gauss-Kronrod 7-15 nodes and weights on [-1, 1].
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};

inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct GkEstimate {
    double integral;
    double error;
};

template <typename F>
GkEstimate gauss_kronrod_15(const F& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double f_center = f(center);
    double kronrod = kKronrodWeights[7] * f_center;
    double gauss = kGaussWeights[3] * f_center;
    for (int i = 0; i < 7; ++i) {
        const double offset = half * kKronrodNodes[static_cast<std::size_t>(i)];
        const double sum = f(center - offset) + f(center + offset);
        kronrod += kKronrodWeights[static_cast<std::size_t>(i)] * sum;
        if (i % 2 == 1) {
            gauss += kGaussWeights[static_cast<std::size_t>(i / 2)] * sum;
        }
    }
    kronrod *= half;
    gauss *= half;
    const double diff = std::abs(kronrod - gauss);
    // Standard QUADPACK-style error sharpening.
    const double scale = std::abs(kronrod) > 0 ? std::pow(200.0 * diff / std::abs(kronrod), 1.5)
                                               : 0.0;
    const double error = scale < 1.0 ? diff * scale : diff;
    return {kronrod, error};
}

template <typename F>
double integrate_adaptive(const F& f, double a, double b, double abs_tol, int depth) {
    const GkEstimate whole = gauss_kronrod_15(f, a, b);
    if (whole.error <= abs_tol || b - a < 1e-14) {
        if (whole.error > abs_tol && depth <= 0) {
            throw QuadratureFailure("adaptive quadrature: tolerance " +
                                    std::to_string(abs_tol) + " unreachable on [" +
                                    std::to_string(a) + "," + std::to_string(b) + "]");
        }
        return whole.integral;
    }
    if (depth <= 0) {
        throw QuadratureFailure("adaptive quadrature: refinement limit reached on [" +
                                std::to_string(a) + "," + std::to_string(b) + "]");
    }
    const double mid = 0.5 * (a + b);
    return integrate_adaptive(f, a, mid, 0.5 * abs_tol, depth - 1) +
           integrate_adaptive(f, mid, b, 0.5 * abs_tol, depth - 1);
}

}  // namespace detail

/// Adaptive Gauss-Kronrod integration of f over [a, b] to absolute
/// tolerance abs_tol. Throws QuadratureFailure when the tolerance cannot be
/// reached within the refinement limit.
template <typename F>
double integrate(const F& f, double a, double b, double abs_tol = 1e-8) {
    if (!(a <= b)) {
        throw DomainError("integrate: inverted interval");
    }
    if (a == b) {
        return 0.0;
    }
    return detail::integrate_adaptive(f, a, b, abs_tol, 48);
}

}  // namespace calibkit
