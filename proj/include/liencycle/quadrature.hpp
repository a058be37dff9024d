#pragma once

#include <array>
#include <cmath>

namespace liencycle {

namespace detail {
// 8-point Gauss–Legendre nodes/weights on [-1, 1].
inline constexpr std::array<double, 8> kGlNodes = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
    0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
inline constexpr std::array<double, 8> kGlWeights = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
    0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};
}  // namespace detail

/// 8-point Gauss–Legendre rule on [a, b].
template <typename Fn>
double gauss_legendre(double a, double b, Fn&& fn) {
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    double s = 0.0;
    for (std::size_t i = 0; i < detail::kGlNodes.size(); ++i)
        s += detail::kGlWeights[i] * fn(mid + half * detail::kGlNodes[i]);
    return s * half;
}

/// Gauss–Legendre after t = a + (b - a) s^3 (or mirrored), which removes an
/// integrable |t - a|^{-1/2..-2/3} singularity at the chosen endpoint.
template <typename Fn>
double gauss_legendre_endpoint(double a, double b, bool singular_at_a, Fn&& fn) {
    const double len = b - a;
    return gauss_legendre(0.0, 1.0, [&](double s) {
        const double w = 3.0 * s * s * len;
        const double t = singular_at_a ? a + len * s * s * s : b - len * s * s * s;
        return w * fn(t);
    });
}

/// Composite Gauss–Legendre with `panels` equal panels.
template <typename Fn>
double gauss_legendre_composite(double a, double b, int panels, Fn&& fn) {
    double s = 0.0;
    const double w = (b - a) / panels;
    for (int i = 0; i < panels; ++i) s += gauss_legendre(a + i * w, a + (i + 1) * w, fn);
    return s;
}

}  // namespace liencycle
