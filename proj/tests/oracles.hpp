#pragma once

// Test-only reference computations. None of these call into the library's
// stepping or integration code.

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <limits>

namespace oracle {

/// Distance in units in the last place between two finite doubles.
inline std::uint64_t ulp_distance(double a, double b)
{
    if (a == b) return 0;
    auto ordered = [](double x) {
        const auto i = std::bit_cast<std::int64_t>(x);
        return i < 0 ? std::numeric_limits<std::int64_t>::min() - i : i;
    };
    const std::int64_t ia = ordered(a);
    const std::int64_t ib = ordered(b);
    return ia > ib ? static_cast<std::uint64_t>(ia) - static_cast<std::uint64_t>(ib)
                   : static_cast<std::uint64_t>(ib) - static_cast<std::uint64_t>(ia);
}

struct Increments {
    long double dt;
    long double dy;
    long double dw;
};

/// One step written exactly as the closed forms read, in extended precision:
/// dt = (2y + alpha)/c * (1 - w/c)^-1, dy = alpha + w dt,
/// dw = c alpha (1 - w/c) / (y + alpha/2).
inline Increments step_ld(long double y, long double w, long double c, long double gamma)
{
    const long double alpha = gamma / (c * c);
    const long double dt = (2 * y + alpha) / c / (1 - w / c);
    return {dt, alpha + w * dt, c * alpha * (1 - w / c) / (y + alpha / 2)};
}

/// Composite Simpson rule with `panels` (even) subintervals.
inline double simpson(const std::function<double(double)>& f, double a, double b, long panels)
{
    const double h = (b - a) / static_cast<double>(panels);
    long double sum = f(a) + f(b);
    for (long i = 1; i < panels; ++i)
        sum += (i % 2 ? 4.0L : 2.0L) * f(a + h * static_cast<double>(i));
    return static_cast<double>(sum * h / 3.0L);
}

} // namespace oracle
