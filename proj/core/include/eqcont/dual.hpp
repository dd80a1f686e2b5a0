#pragma once

// Forward-mode dual numbers. Dual<T> carries one tangent direction; nesting
// Dual<Dual<double>> gives second partials.

#include <cmath>
#include <complex>
#include <type_traits>

namespace eqcont {

template <class T>
struct Dual {
    T v{};
    T d{};

    Dual() = default;
    Dual(const T& value) : v(value), d{} {}  // NOLINT: implicit lift of constants
    Dual(const T& value, const T& tangent) : v(value), d(tangent) {}

    template <class S, class = std::enable_if_t<std::is_arithmetic_v<S> && !std::is_same_v<S, T>>>
    Dual(S value) : v(T(value)), d{} {}  // NOLINT

    Dual& operator+=(const Dual& o) { v += o.v; d += o.d; return *this; }
    Dual& operator-=(const Dual& o) { v -= o.v; d -= o.d; return *this; }
    Dual& operator*=(const Dual& o) { d = d * o.v + v * o.d; v *= o.v; return *this; }
    Dual& operator/=(const Dual& o) { *this = *this / o; return *this; }
};

template <class T> struct is_dual : std::false_type {};
template <class T> struct is_dual<Dual<T>> : std::true_type {};

template <class T> Dual<T> operator+(const Dual<T>& a, const Dual<T>& b) { return {a.v + b.v, a.d + b.d}; }
template <class T> Dual<T> operator-(const Dual<T>& a, const Dual<T>& b) { return {a.v - b.v, a.d - b.d}; }
template <class T> Dual<T> operator-(const Dual<T>& a) { return {-a.v, -a.d}; }
template <class T> Dual<T> operator*(const Dual<T>& a, const Dual<T>& b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
template <class T> Dual<T> operator/(const Dual<T>& a, const Dual<T>& b)
{
    T inv = T(1) / b.v;
    return {a.v * inv, (a.d * b.v - a.v * b.d) * inv * inv};
}

// Mixed operations with plain scalars.
template <class T, class S, class = std::enable_if_t<std::is_arithmetic_v<S>>>
Dual<T> operator+(const Dual<T>& a, S b) { return {a.v + T(b), a.d}; }
template <class T, class S, class = std::enable_if_t<std::is_arithmetic_v<S>>>
Dual<T> operator+(S b, const Dual<T>& a) { return {a.v + T(b), a.d}; }
template <class T, class S, class = std::enable_if_t<std::is_arithmetic_v<S>>>
Dual<T> operator-(const Dual<T>& a, S b) { return {a.v - T(b), a.d}; }
template <class T, class S, class = std::enable_if_t<std::is_arithmetic_v<S>>>
Dual<T> operator-(S b, const Dual<T>& a) { return {T(b) - a.v, -a.d}; }
template <class T, class S, class = std::enable_if_t<std::is_arithmetic_v<S>>>
Dual<T> operator*(const Dual<T>& a, S b) { return {a.v * T(b), a.d * T(b)}; }
template <class T, class S, class = std::enable_if_t<std::is_arithmetic_v<S>>>
Dual<T> operator*(S b, const Dual<T>& a) { return {a.v * T(b), a.d * T(b)}; }
template <class T, class S, class = std::enable_if_t<std::is_arithmetic_v<S>>>
Dual<T> operator/(const Dual<T>& a, S b) { return {a.v / T(b), a.d / T(b)}; }
template <class T, class S, class = std::enable_if_t<std::is_arithmetic_v<S>>>
Dual<T> operator/(S b, const Dual<T>& a) { return Dual<T>(T(b)) / a; }

template <class T> bool operator<(const Dual<T>& a, const Dual<T>& b) { return a.v < b.v; }
template <class T> bool operator>(const Dual<T>& a, const Dual<T>& b) { return a.v > b.v; }

template <class T>
Dual<T> exp(const Dual<T>& a)
{
    using std::exp;
    T e = exp(a.v);
    return {e, a.d * e};
}

template <class T>
Dual<T> log(const Dual<T>& a)
{
    using std::log;
    return {log(a.v), a.d / a.v};
}

template <class T>
Dual<T> sqrt(const Dual<T>& a)
{
    using std::sqrt;
    T s = sqrt(a.v);
    return {s, a.d / (T(2) * s)};
}

template <class T>
Dual<T> pow(const Dual<T>& a, double k)
{
    using std::pow;
    if (k == 0.0) return Dual<T>(T(1));
    T pm1 = pow(a.v, k - 1.0);
    return {pm1 * a.v, a.d * T(k) * pm1};
}

template <class T>
Dual<T> pow(const Dual<T>& a, int k)
{
    if (k == 0) return Dual<T>(T(1));
    Dual<T> base = k > 0 ? a : Dual<T>(T(1)) / a;
    unsigned n = static_cast<unsigned>(k > 0 ? k : -k);
    Dual<T> r(T(1));
    while (n) {
        if (n & 1u) r = r * base;
        base = base * base;
        n >>= 1u;
    }
    return r;
}

template <class T>
Dual<T> abs(const Dual<T>& a)
{
    return a.v < T(0) ? -a : a;
}

// Value extraction through any nesting depth.
inline double value_of(double x) { return x; }
inline std::complex<double> value_of(const std::complex<double>& x) { return x; }
template <class T> auto value_of(const Dual<T>& x) { return value_of(x.v); }

// Signed real power sign(x)|x|^k; smooth away from 0 for k > 1.
inline double spow(double x, double k)
{
    return x < 0 ? -std::pow(-x, k) : std::pow(x, k);
}
template <class T>
Dual<T> spow(const Dual<T>& a, double k)
{
    return value_of(a) < 0 ? -pow(-a, k) : pow(a, k);
}

}  // namespace eqcont
