#pragma once

#include <cmath>
#include <numbers>

namespace gsub::normal {

inline constexpr double kInvSqrt2Pi = 0.3989422804014326779399460599343818684758586311649;

[[nodiscard]] inline double pdf(double x) noexcept { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

/// Phi(x). Uses erfc so the lower tail keeps full relative accuracy.
[[nodiscard]] inline double cdf(double x) noexcept {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

/// 1 - Phi(x) without cancellation.
[[nodiscard]] inline double sf(double x) noexcept { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

/// Phi^{-1}(p) for p in (0,1); Wichura's AS241 (relative error ~1e-16).
[[nodiscard]] double quantile(double p);

/// Phi^{-1}(1 - q), accurate for tiny q.
[[nodiscard]] inline double upper_quantile(double q) { return -quantile(q); }

}  // namespace gsub::normal
