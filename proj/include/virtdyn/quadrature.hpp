#pragma once

#include <array>
#include <cmath>
#include <algorithm>
#include <string>
#include <vector>

#include "virtdyn/error.hpp"

namespace virtdyn::quad {

struct Result {
    double value = 0.0;
    double abs_error = 0.0;
    int evaluations = 0;
    int intervals = 0;
};

struct Segment {
    double a;
    double b;
    double value;
    double error;

    bool operator<(const Segment& other) const { return error < other.error; }
};

namespace detail {

// 15-point Kronrod abscissae; every other one (odd index) is a 7-point Gauss node.
inline constexpr std::array<double, 8> xgk{
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> wgk{
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> wg{
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
double checked(const F& f, double x)
{
    const double fx = f(x);
    if (!std::isfinite(fx))
        fail(ErrorCode::SingularIntegrand, "integrand is not finite at x = " + std::to_string(x));
    return fx;
}

} // namespace detail

/// One Gauss-Kronrod 7/15 panel on [a, b]; error estimate is |K15 - G7|.
template <class F>
Segment gk15(const F& f, double a, double b)
{
    using namespace detail;
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = checked(f, center);
    double kronrod = wgk[7] * fc;
    double gauss = wg[3] * fc;
    for (int j = 0; j < 7; ++j) {
        const double dx = half * xgk[j];
        const double pair = checked(f, center - dx) + checked(f, center + dx);
        kronrod += wgk[j] * pair;
        if (j % 2 == 1) gauss += wg[j / 2] * pair;
    }
    return {a, b, kronrod * half, std::abs((kronrod - gauss) * half)};
}

/// Globally adaptive bisection: always splits the panel with the largest
/// error until the summed error estimate meets max(abs_tol, rel_tol * |I|).
template <class F>
Result integrate(const F& f, double a, double b, double abs_tol, double rel_tol,
                 int max_intervals = 4000)
{
    if (a == b) return {};
    if (!(std::isfinite(a) && std::isfinite(b)))
        fail(ErrorCode::InvalidArgument, "integration limits must be finite");

    std::vector<Segment> heap{gk15(f, a, b)};
    double total = heap.front().value;
    double error = heap.front().error;
    int evaluations = 15;

    while (error > std::max(abs_tol, rel_tol * std::abs(total))) {
        if (static_cast<int>(heap.size()) >= max_intervals)
            fail(ErrorCode::ToleranceUnachievable,
                 "quadrature did not converge within " + std::to_string(max_intervals) + " panels");
        std::pop_heap(heap.begin(), heap.end());
        const Segment worst = heap.back();
        heap.pop_back();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b))
            fail(ErrorCode::ToleranceUnachievable, "quadrature panel width underflow");
        heap.push_back(gk15(f, worst.a, mid));
        std::push_heap(heap.begin(), heap.end());
        heap.push_back(gk15(f, mid, worst.b));
        std::push_heap(heap.begin(), heap.end());
        evaluations += 30;

        // Re-sum instead of updating incrementally so roundoff does not drift.
        total = 0.0;
        error = 0.0;
        for (const Segment& seg : heap) {
            total += seg.value;
            error += seg.error;
        }
    }
    return {total, error, evaluations, static_cast<int>(heap.size())};
}

} // namespace virtdyn::quad
