#include "qtorsion/primes.hpp"

#include <cmath>
#include <string>

#include "qtorsion/errors.hpp"
#include "qtorsion/forms.hpp"
#include "detail/parallel.hpp"

namespace qtorsion::primes {

const char* to_string(Splitting s) {
    switch (s) {
    case Splitting::split: return "split";
    case Splitting::inert: return "inert";
    case Splitting::ramified: return "ramified";
    }
    return "?";
}

SplittingType splitting_type(const arith::Discriminant& D, std::uint64_t p) {
    if (!arith::is_prime(p)) throw ValidationError(std::to_string(p) + " is not prime");
    SplittingType out;
    out.p = p;
    const int k = arith::kronecker(D.value(), p);
    if (k == -1) {
        out.kind = Splitting::inert;
        out.norm = p * p;
        return out;
    }
    out.kind = k == 1 ? Splitting::split : Splitting::ramified;
    out.norm = p;
    const field::PrimeIdeal P{p, forms::prime_form_b(D.value(), p)};
    out.ideals.push_back(P);
    if (k == 1) out.ideals.push_back(P.conjugate());
    // w - (r - b)/2 = (b + sqrt D)/2 lies in P, so (r - b)/2 is a root mod p
    const std::int64_t r = D.residue();
    const std::int64_t twice = r - P.b;  // even since b = D = r mod 2
    const auto pp = static_cast<std::int64_t>(p);
    out.root = static_cast<std::uint64_t>(((twice / 2) % pp + pp) % pp);
    return out;
}

PrimeTable::PrimeTable(std::uint64_t limit) : limit_(limit), primes_(arith::primes_up_to(limit)) {}

namespace {

std::uint64_t floor_bound(double x) {
    if (!std::isfinite(x) || x < 2) throw ValidationError("x must be a finite real >= 2");
    return static_cast<std::uint64_t>(std::floor(x));
}

} // namespace

PrimeCountRecord prime_counts(const arith::Discriminant& D, double x, const PrimeTable& table) {
    const std::uint64_t X = floor_bound(x);
    if (X > table.limit()) throw ValidationError("prime table too small for x");
    PrimeCountRecord r;
    r.x = x;
    for (std::uint32_t p : table.primes()) {
        if (p > X) break;
        switch (arith::kronecker(D.value(), p)) {
        case 1: r.pi_K_1 += 2; r.pi_K += 2; break;
        case 0: r.pi_K += 1; break;
        default:
            if (std::uint64_t(p) * p <= X) r.pi_K += 1;
        }
    }
    return r;
}

PrimeCountRecord prime_counts(const arith::Discriminant& D, double x) {
    return prime_counts(D, x, PrimeTable(floor_bound(x)));
}

ExceptionalReport detect_exceptional(const std::vector<arith::Discriminant>& family, double x, double c,
                                     unsigned workers) {
    if (!std::isfinite(x) || x < 10) throw ValidationError("x must be a finite real >= 10");
    if (!(c > 0) || !std::isfinite(c)) throw ValidationError("c must be positive");
    const PrimeTable table(floor_bound(x));
    ExceptionalReport rep;
    rep.x = x;
    rep.c = c;
    rep.threshold = c * x / std::log(x);
    rep.pi_K_1.resize(family.size());
    detail::parallel_for(family.size(), workers,
                         [&](std::size_t i) { rep.pi_K_1[i] = prime_counts(family[i], x, table).pi_K_1; });
    for (std::size_t i = 0; i < family.size(); ++i)
        (double(rep.pi_K_1[i]) >= rep.threshold ? rep.passing : rep.exceptional).push_back(family[i].value());
    return rep;
}

} // namespace qtorsion::primes
