#pragma once

#include <cmath>
#include <span>

namespace virtdyn {

/// Error-free transformation: s + e == a + b exactly, s = fl(a + b).
struct TwoSum {
    double sum;
    double err;
};

constexpr TwoSum two_sum(double a, double b) noexcept
{
    const double s = a + b;
    const double bb = s - a;
    const double e = (a - (s - bb)) + (b - bb);
    return {s, e};
}

/// Requires |a| >= |b| (or a == 0).
constexpr TwoSum fast_two_sum(double a, double b) noexcept
{
    const double s = a + b;
    return {s, b - (s - a)};
}

/// Unevaluated sum hi + lo with |lo| <= ulp(hi)/2. Enough arithmetic to
/// evaluate the step formulas to about 32 significant digits.
struct DoubleDouble {
    double hi = 0.0;
    double lo = 0.0;

    constexpr DoubleDouble() noexcept = default;
    constexpr DoubleDouble(double x) noexcept : hi(x) {}
    constexpr DoubleDouble(double h, double l) noexcept : hi(h), lo(l) {}
};

inline TwoSum two_prod(double a, double b) noexcept
{
    const double p = a * b;
    return {p, std::fma(a, b, -p)};
}

inline DoubleDouble operator+(DoubleDouble a, DoubleDouble b) noexcept
{
    const TwoSum s = two_sum(a.hi, b.hi);
    const TwoSum t = two_sum(a.lo, b.lo);
    TwoSum r = fast_two_sum(s.sum, s.err + t.sum);
    r = fast_two_sum(r.sum, r.err + t.err);
    return {r.sum, r.err};
}

inline DoubleDouble operator-(DoubleDouble a) noexcept { return {-a.hi, -a.lo}; }
inline DoubleDouble operator-(DoubleDouble a, DoubleDouble b) noexcept { return a + (-b); }

inline DoubleDouble operator*(DoubleDouble a, DoubleDouble b) noexcept
{
    const TwoSum p = two_prod(a.hi, b.hi);
    const TwoSum r = fast_two_sum(p.sum, p.err + (a.hi * b.lo + a.lo * b.hi));
    return {r.sum, r.err};
}

inline DoubleDouble operator/(DoubleDouble a, DoubleDouble b) noexcept
{
    const double q1 = a.hi / b.hi;
    DoubleDouble r = a - b * q1;
    const double q2 = r.hi / b.hi;
    r = r - b * q2;
    const double q3 = r.hi / b.hi;
    const TwoSum q = fast_two_sum(q1, q2);
    return DoubleDouble(q.sum, q.err) + q3;
}

/// Running sum kept as an unevaluated pair (value, carry).
///
/// `value` is always the correctly rounded leading part, so it can be handed
/// to code that only understands plain doubles; `carry` holds what did not
/// fit. Adding to a fresh accumulator reproduces plain `a + b` bit-for-bit.
class CompensatedSum {
public:
    constexpr CompensatedSum() noexcept = default;
    constexpr explicit CompensatedSum(double value, double carry = 0.0) noexcept
        : value_(value), carry_(carry) {}

    constexpr CompensatedSum& operator+=(double x) noexcept
    {
        const TwoSum s = two_sum(value_, x);
        const TwoSum r = two_sum(s.sum, s.err + carry_);
        value_ = r.sum;
        carry_ = r.err;
        return *this;
    }

    /// Adds both parts of an extended-precision term.
    constexpr CompensatedSum& operator+=(DoubleDouble x) noexcept
    {
        const TwoSum s = two_sum(value_, x.hi);
        const TwoSum r = two_sum(s.sum, s.err + (x.lo + carry_));
        value_ = r.sum;
        carry_ = r.err;
        return *this;
    }

    constexpr double value() const noexcept { return value_; }
    constexpr double carry() const noexcept { return carry_; }

private:
    double value_ = 0.0;
    double carry_ = 0.0;
};

inline double compensated_total(std::span<const double> xs) noexcept
{
    CompensatedSum acc;
    for (double x : xs) acc += x;
    return acc.value();
}

} // namespace virtdyn
