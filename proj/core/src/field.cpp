#include "qtorsion/field.hpp"

#include <cmath>

#include "qtorsion/errors.hpp"
#include "detail/int128.hpp"

namespace qtorsion::field {

using arith::Discriminant;
using detail::floor_mod;
using detail::gcd128;
using detail::mul_checked;
using detail::add_checked;
using detail::xgcd;

namespace {

constexpr long double ln2 = 0.693147180559945309417232121458176568L;

int residue_of(const Discriminant& D) { return D.residue(); }

Integer iabs(const Integer& v) { return v < 0 ? Integer(-v) : v; }

// log(|p| + |q|*sqrtD), p and q not both zero.
long double log_abs_sum(const Integer& p, const Integer& q, long double sqrtD) {
    const Integer ap = iabs(p), aq = iabs(q);
    long msb = 0;
    if (ap != 0) msb = std::max<long>(msb, long(boost::multiprecision::msb(ap)));
    if (aq != 0) msb = std::max<long>(msb, long(boost::multiprecision::msb(aq)));
    const long shift = msb > 62 ? msb - 62 : 0;
    const long double lp = (ap >> shift).convert_to<long double>();
    const long double lq = (aq >> shift).convert_to<long double>();
    return std::log(lp + lq * sqrtD) + shift * ln2;
}

i128 to_i128(const Integer& v) {
    static const Integer lim = (Integer(1) << 126);
    if (v >= lim || v <= -lim) throw RangeError("integer exceeds the 128-bit ideal range");
    const bool neg = v < 0;
    Integer m = neg ? Integer(-v) : v;
    const std::uint64_t lo = static_cast<std::uint64_t>(m & Integer(0xFFFFFFFFFFFFFFFFull));
    const std::uint64_t hi = static_cast<std::uint64_t>(m >> 64);
    i128 r = (i128(hi) << 64) | i128(lo);
    return neg ? -r : r;
}

Integer from_i128(i128 v) {
    const bool neg = v < 0;
    u128 m = neg ? u128(-(v + 1)) + 1 : u128(v);
    Integer r = Integer(std::uint64_t(m >> 64));
    r <<= 64;
    r += Integer(std::uint64_t(m));
    return neg ? Integer(-r) : r;
}

} // namespace

long double log_abs(const Integer& n) {
    if (n == 0) throw DomainError("log of zero");
    return log_abs_sum(n, Integer(0), 0.0L);
}

int sign_quadratic(const Integer& p, const Integer& q, std::int64_t D) {
    const int sp = p.sign(), sq = q.sign();
    if (sq == 0) return sp;
    if (sp == 0 || sp == sq) return sq;
    const Integer lhs = p * p;
    const Integer rhs = q * q * D;
    if (lhs == rhs) return 0;
    return lhs > rhs ? sp : sq;
}

// ---------------------------------------------------------------- FieldElement

FieldElement::FieldElement(const Discriminant& D) : D_(D), x_(0), y_(0), z_(1) {}

FieldElement::FieldElement(const Discriminant& D, Integer x, Integer y, Integer z)
    : D_(D), x_(std::move(x)), y_(std::move(y)), z_(std::move(z)) {
    if (z_ == 0) throw DomainError("zero denominator");
    normalize();
}

void FieldElement::normalize() {
    if (z_ < 0) {
        x_ = -x_;
        y_ = -y_;
        z_ = -z_;
    }
    Integer g = boost::multiprecision::gcd(boost::multiprecision::gcd(iabs(x_), iabs(y_)), z_);
    if (g > 1) {
        x_ /= g;
        y_ /= g;
        z_ /= g;
    }
    if (x_ == 0 && y_ == 0) z_ = 1;
}

void FieldElement::check_same(const FieldElement& o) const {
    if (!(D_ == o.D_)) throw ValidationError("field elements from different fields");
}

FieldElement FieldElement::from_rational(const Discriminant& D, const Rational& q) {
    return FieldElement(D, boost::multiprecision::numerator(q), Integer(0), boost::multiprecision::denominator(q));
}

FieldElement FieldElement::from_omega(const Discriminant& D, const Rational& u, const Rational& v) {
    const Integer L = boost::multiprecision::lcm(boost::multiprecision::denominator(u), boost::multiprecision::denominator(v));
    const Integer U = boost::multiprecision::numerator(u) * (L / boost::multiprecision::denominator(u));
    const Integer V = boost::multiprecision::numerator(v) * (L / boost::multiprecision::denominator(v));
    return FieldElement(D, 2 * U + V * residue_of(D), V, 2 * L);
}

FieldElement FieldElement::omega(const Discriminant& D) {
    return FieldElement(D, Integer(residue_of(D)), Integer(1), Integer(2));
}

Rational FieldElement::omega_u() const { return Rational(x_ - residue_of(D_) * y_, z_); }
Rational FieldElement::omega_v() const { return Rational(2 * y_, z_); }

bool FieldElement::is_integral() const {
    return (2 * y_) % z_ == 0 && (x_ - residue_of(D_) * y_) % z_ == 0;
}

Integer FieldElement::denominator() const {
    const Rational u = omega_u(), v = omega_v();
    return boost::multiprecision::lcm(boost::multiprecision::denominator(u),
                                      boost::multiprecision::denominator(v));
}

Rational FieldElement::norm() const { return Rational(x_ * x_ - Integer(D_.value()) * y_ * y_, z_ * z_); }
Rational FieldElement::trace() const { return Rational(2 * x_, z_); }

FieldElement FieldElement::conjugate() const { return FieldElement(D_, x_, -y_, z_); }

FieldElement FieldElement::inverse() const {
    if (is_zero()) throw DomainError("inverse of zero");
    const Integer n = x_ * x_ - Integer(D_.value()) * y_ * y_;
    return FieldElement(D_, x_ * z_, -y_ * z_, n);
}

FieldElement FieldElement::pow(long long k) const {
    FieldElement base = k < 0 ? inverse() : *this;
    unsigned long long e = k < 0 ? (unsigned long long)(-(k + 1)) + 1 : (unsigned long long)k;
    FieldElement result(D_, 1, 0, 1);
    while (e > 0) {
        if (e & 1) result = result * base;
        e >>= 1;
        if (e) base = base * base;
    }
    return result;
}

FieldElement FieldElement::operator-() const { return FieldElement(D_, -x_, -y_, z_); }

FieldElement operator+(const FieldElement& a, const FieldElement& b) {
    a.check_same(b);
    return FieldElement(a.D_, a.x_ * b.z_ + b.x_ * a.z_, a.y_ * b.z_ + b.y_ * a.z_, a.z_ * b.z_);
}

FieldElement operator-(const FieldElement& a, const FieldElement& b) { return a + (-b); }

FieldElement operator*(const FieldElement& a, const FieldElement& b) {
    a.check_same(b);
    const Integer D = a.D_.value();
    return FieldElement(a.D_, a.x_ * b.x_ + D * a.y_ * b.y_, a.x_ * b.y_ + a.y_ * b.x_, a.z_ * b.z_);
}

FieldElement operator/(const FieldElement& a, const FieldElement& b) { return a * b.inverse(); }

bool operator<(const FieldElement& a, const FieldElement& b) {
    if (a.D_.value() != b.D_.value()) return a.D_.value() < b.D_.value();
    if (a.z_ != b.z_) return a.z_ < b.z_;
    if (a.x_ != b.x_) return a.x_ < b.x_;
    return a.y_ < b.y_;
}

long double FieldElement::log_abs_embedding(int i) const {
    if (is_zero()) throw DomainError("log embedding of zero");
    const std::int64_t D = D_.value();
    if (D < 0) {
        const Integer n = x_ * x_ - Integer(D) * y_ * y_;
        return 0.5L * log_abs(n) - log_abs(z_);
    }
    if (i != 0 && i != 1) throw DomainError("embedding index out of range");
    const long double sq = std::sqrt(static_cast<long double>(D));
    const Integer q = i == 0 ? y_ : Integer(-y_);
    long double num;
    if (x_.sign() * q.sign() >= 0) {
        num = log_abs_sum(x_, q, sq);
    } else {
        const Integer n = x_ * x_ - Integer(D) * y_ * y_;
        num = log_abs(n) - log_abs_sum(x_, q, sq);
    }
    return num - log_abs(z_);
}

int FieldElement::sign_embedding(int i) const {
    if (D_.value() < 0) throw DomainError("sign of a complex embedding");
    return sign_quadratic(x_, i == 0 ? y_ : Integer(-y_), D_.value());
}

long double FieldElement::embedding(int i) const {
    if (is_zero()) return 0;
    if (D_.value() < 0) throw DomainError("complex embedding has no real value");
    return sign_embedding(i) * std::exp(log_abs_embedding(i));
}

std::string FieldElement::to_string() const {
    std::string s = "(" + x_.str();
    if (y_ >= 0)
        s += " + " + y_.str();
    else
        s += " - " + Integer(-y_).str();
    s += "*sqrt(" + std::to_string(D_.value()) + "))";
    if (z_ != 1) s += "/" + z_.str();
    return s;
}

// ----------------------------------------------------------------------- Ideal

namespace {

i128 norm_const(const Discriminant& D) { return (i128(D.value()) - D.residue()) / 4; }

} // namespace

Ideal Ideal::unit(const Discriminant& D) { return Ideal(D, 1, 0, 1); }

Ideal Ideal::rational(const Discriminant& D, i128 n) {
    if (n < 0) n = -n;
    if (n == 0) throw DomainError("zero ideal");
    return Ideal(D, n, 0, n);
}

Ideal Ideal::from_form(const Discriminant& D, std::int64_t a, std::int64_t b) {
    const i128 A = a < 0 ? -i128(a) : i128(a);
    if (A == 0) throw ValidationError("ideal with zero norm");
    const int r = D.residue();
    if (((i128(b) - r) & 1) != 0) throw ValidationError("b must have the parity of D");
    if ((i128(b) * b - D.value()) % (4 * A) != 0)
        throw ValidationError("4a must divide b^2 - D");
    return Ideal(D, A, floor_mod((i128(b) - r) / 2, A), 1);
}

Ideal Ideal::principal(const FieldElement& alpha) {
    if (alpha.is_zero()) throw DomainError("zero ideal");
    if (!alpha.is_integral()) throw DomainError("principal ideal of a non-integral element");
    const Discriminant& D = alpha.discriminant();
    const i128 u = to_i128(numerator(alpha.omega_u()));
    const i128 v = to_i128(numerator(alpha.omega_v()));
    const i128 n = norm_const(D);
    const int r = D.residue();
    return from_generators(D, {{u, v}, {mul_checked(v, n), add_checked(u, mul_checked(v, r))}});
}

Ideal Ideal::from_generators(const Discriminant& D, const std::vector<std::pair<i128, i128>>& gens) {
    i128 a = 0, ct = 0, cd = 0;
    for (auto [u, v] : gens) {
        if (v == 0) {
            a = gcd128(a, u);
        } else if (cd == 0) {
            ct = v < 0 ? -u : u;
            cd = v < 0 ? -v : v;
        } else {
            i128 x, y;
            const i128 g = xgcd(cd, v, x, y);
            const i128 left = mul_checked(v / g, ct) - mul_checked(cd / g, u);
            const i128 nt = add_checked(mul_checked(x, ct), mul_checked(y, u));
            a = gcd128(a, left);
            ct = nt;
            cd = g;
        }
        if (a != 0) ct = floor_mod(ct, a);
    }
    if (a == 0 || cd == 0) throw ValidationError("generators do not span a full-rank module");
    return Ideal(D, a, floor_mod(ct, a), cd);
}

forms::QuadForm Ideal::form() const {
    const i128 A = a_ / d_;
    const i128 tp = t_ / d_;
    const int r = D_.residue();
    i128 B = floor_mod(2 * tp + r, 2 * A);
    if (B > A) B -= 2 * A;
    const i128 C = (B * B - D_.value()) / (4 * A);
    return {detail::narrow64(A), detail::narrow64(B), detail::narrow64(C)};
}

Ideal Ideal::operator*(const Ideal& o) const {
    if (!(D_ == o.D_)) throw ValidationError("ideals from different fields");
    const i128 n = norm_const(D_);
    const int r = D_.residue();
    const i128 dd = mul_checked(d_, o.d_);
    std::vector<std::pair<i128, i128>> gens{
        {mul_checked(a_, o.a_), 0},
        {mul_checked(a_, o.t_), mul_checked(a_, o.d_)},
        {mul_checked(o.a_, t_), mul_checked(o.a_, d_)},
        {add_checked(mul_checked(t_, o.t_), mul_checked(dd, n)),
         add_checked(add_checked(mul_checked(t_, o.d_), mul_checked(o.t_, d_)), mul_checked(dd, r))}};
    return from_generators(D_, gens);
}

Ideal Ideal::operator+(const Ideal& o) const {
    if (!(D_ == o.D_)) throw ValidationError("ideals from different fields");
    return from_generators(D_, {{a_, 0}, {t_, d_}, {o.a_, 0}, {o.t_, o.d_}});
}

Ideal Ideal::conjugate() const {
    return from_generators(D_, {{a_, 0}, {t_ + d_ * D_.residue(), -d_}});
}

Ideal Ideal::power(unsigned k) const {
    Ideal result = unit(D_);
    Ideal base = *this;
    while (k > 0) {
        if (k & 1) result = result * base;
        k >>= 1;
        if (k) base = base * base;
    }
    return result;
}

Ideal Ideal::divide(const Ideal& o) const {
    const Ideal p = (*this) * o.conjugate();
    const i128 N = o.norm();
    if (p.a_ % N != 0 || p.t_ % N != 0 || p.d_ % N != 0)
        throw DomainError("ideal division is not exact");
    return Ideal(D_, p.a_ / N, p.t_ / N, p.d_ / N);
}

bool Ideal::contains(i128 u, i128 v) const {
    if (v % d_ != 0) return false;
    const i128 q = v / d_;
    return floor_mod(u - mul_checked(q, t_), a_) == 0;
}

bool Ideal::contains(const FieldElement& alpha) const {
    if (!alpha.is_integral()) return false;
    const Integer u = numerator(alpha.omega_u());
    const Integer v = numerator(alpha.omega_v());
    const Integer A = from_i128(a_), T = from_i128(t_), Dd = from_i128(d_);
    if (v % Dd != 0) return false;
    Integer rem = (u - (v / Dd) * T) % A;
    return rem == 0;
}

bool Ideal::divides(const Ideal& o) const {
    return contains(o.a_, 0) && contains(o.t_, o.d_);
}

std::string Ideal::to_string() const {
    return "[" + qtorsion::to_string(a_) + ", " + qtorsion::to_string(t_) + " + " + qtorsion::to_string(d_) + "w]";
}

PrimeIdeal PrimeIdeal::conjugate() const {
    const std::int64_t P = std::int64_t(p);
    std::int64_t nb = -b;
    const std::int64_t m = 2 * P;
    nb = ((nb % m) + m) % m;
    if (nb > P) nb -= m;
    return {p, nb};
}

std::string to_string(const PrimeIdeal& P) {
    return "P(" + std::to_string(P.p) + "," + std::to_string(P.b) + ")";
}

// ------------------------------------------------------------------- reduction

namespace {

struct LogPair {
    long double l1, l2;
};

// logs of |(-b + sqrt D)/(2a)| at both embeddings, a > 0.
LogPair gamma_logs(std::int64_t D, i128 a, i128 b, long double sq) {
    const long double la = std::log(2.0L * static_cast<long double>(a));
    if (D < 0) {
        const long double n = static_cast<long double>(b * b - D);
        const long double l = 0.5L * std::log(n) - la;
        return {l, l};
    }
    const long double bb = static_cast<long double>(b);
    const long double diff = std::log(std::fabs(static_cast<long double>(i128(D) - b * b)));
    const long double l1 = (b <= 0 ? std::log(-bb + sq) : diff - std::log(bb + sq)) - la;
    const long double l2 = (b >= 0 ? std::log(bb + sq) : diff - std::log(-bb + sq)) - la;
    return {l1, l2};
}

} // namespace

std::pair<long double, long double> reduction_step_logs(std::int64_t D, i128 a, i128 b) {
    const LogPair lg = gamma_logs(D, a, b, std::sqrt(std::fabs(static_cast<long double>(D))));
    return {lg.l1, lg.l2};
}

IdealReduction reduce_ideal(const Ideal& I, bool exact) {
    const Discriminant& Dd = I.discriminant();
    const std::int64_t D = Dd.value();
    const forms::FormContext ctx(Dd);
    const long double sq = std::sqrt(std::fabs(static_cast<long double>(D)));
    const forms::QuadForm f = I.form();
    i128 a = f.a, b = f.b, c = f.c;
    const i128 content = I.content();

    IdealReduction out{f, FieldElement(Dd, 1, 0, 1), 0, 0};
    if (content != 1) {
        const long double lc = std::log(static_cast<long double>(content));
        out.log1 = out.log2 = -lc;
        if (exact) out.multiplier = FieldElement(Dd, 1, 0, from_i128(content));
    }

    auto step = [&]() {
        // multiply by (-b + sqrt D)/(2a): [a, (b + sqrt D)/2] -> [|c|, (-b + sqrt D)/2]
        const LogPair lg = gamma_logs(D, a, b, sq);
        out.log1 += lg.l1;
        out.log2 += lg.l2;
        if (exact) out.multiplier = out.multiplier * FieldElement(Dd, from_i128(-b), 1, from_i128(2 * a));
        const i128 na = c < 0 ? -c : c;
        i128 nb = -b;
        if (D < 0) {
            nb = floor_mod(nb, 2 * na);
            if (nb > na) nb -= 2 * na;
        } else {
            const i128 m = 2 * na;
            if (na <= ctx.root) {
                nb = i128(ctx.root) - floor_mod(i128(ctx.root) - nb, m);
            } else {
                nb = floor_mod(nb, m);
                if (nb > na) nb -= m;
            }
        }
        a = na;
        b = nb;
        c = (b * b - D) / (4 * a);
    };

    if (D < 0) {
        for (;;) {
            if (a > c) {
                step();
                continue;
            }
            if (a == c && b < 0) {
                step();
                continue;
            }
            break;
        }
    } else {
        const std::int64_t s = ctx.root;
        auto reduced = [&]() { return b > 0 && b <= s && 2 * a > s - b && 2 * a <= s + b; };
        int guard = 0;
        while (!reduced()) {
            step();
            if (++guard > 1000000) throw ConvergenceError("ideal reduction did not terminate", 0, 0);
        }
    }
    out.reduced = {detail::narrow64(a), detail::narrow64(b), detail::narrow64(c)};
    return out;
}

} // namespace qtorsion::field
