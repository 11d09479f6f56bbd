#pragma once

#include <cstdint>
#include <limits>

#include "qtorsion/arith.hpp"
#include "qtorsion/errors.hpp"

namespace qtorsion::detail {

inline i128 floor_mod(i128 a, i128 m) {
    i128 r = a % m;
    return r < 0 ? r + m : r;
}

inline i128 floor_div(i128 a, i128 b) {
    i128 q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

inline std::int64_t narrow64(i128 v) {
    if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min())
        throw RangeError("value exceeds 64-bit range");
    return std::int64_t(v);
}

inline i128 mul_checked(i128 a, i128 b) {
    i128 r;
    if (__builtin_mul_overflow(a, b, &r)) throw RangeError("128-bit overflow");
    return r;
}

inline i128 add_checked(i128 a, i128 b) {
    i128 r;
    if (__builtin_add_overflow(a, b, &r)) throw RangeError("128-bit overflow");
    return r;
}

// g = gcd(a, b) >= 0 with x*a + y*b = g.
inline i128 xgcd(i128 a, i128 b, i128& x, i128& y) {
    i128 old_r = a, r = b, old_s = 1, s = 0, old_t = 0, t = 1;
    while (r != 0) {
        const i128 q = old_r / r;
        i128 tmp = old_r - q * r;
        old_r = r;
        r = tmp;
        tmp = old_s - q * s;
        old_s = s;
        s = tmp;
        tmp = old_t - q * t;
        old_t = t;
        t = tmp;
    }
    if (old_r < 0) {
        old_r = -old_r;
        old_s = -old_s;
        old_t = -old_t;
    }
    x = old_s;
    y = old_t;
    return old_r;
}

inline i128 gcd128(i128 a, i128 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
        i128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

} // namespace qtorsion::detail
