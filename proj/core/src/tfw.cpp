#include "qtorsion/tfw.hpp"

#include <cmath>
#include <map>
#include <set>
#include <string>

#include "qtorsion/errors.hpp"
#include "qtorsion/forms.hpp"

namespace qtorsion::tfw {

using heights::FieldContext;
using field::Rational;

std::vector<std::pair<std::pair<std::size_t, std::size_t>, std::size_t>> FMapRecord::fibers() const {
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> m;
    for (const auto& x : assignments) ++m[{x.a, x.cell}];
    return {m.begin(), m.end()};
}

double default_c_tfw(const arith::Discriminant& D, double c_cell) {
    const double places = D.is_real() ? 2.0 : 1.0;
    return std::exp(2.0 * c_cell * places);
}

FMapRecord build_f_map(const FieldContext& K, unsigned ell, double Z, const units::CellPartition& partition,
                       bool require_primes) {
    if (ell < 2) throw ValidationError("ell must be at least 2");
    if (!std::isfinite(Z) || Z < 1) throw ValidationError("Z must be a finite real >= 1");
    const auto& D = K.discriminant();
    if (D.is_real() != (partition.rank == 1))
        throw ValidationError("cell partition rank does not match the unit rank of the field");
    const auto& G = K.group();
    FMapRecord rec;
    rec.D = D.value();
    rec.ell = ell;
    rec.Z = Z;
    rec.partition = partition;
    rec.representatives = G.representatives();
    std::set<std::size_t> image;
    for (std::size_t c = 0; c < G.order(); ++c) image.insert(G.power(c, ell));
    rec.a_order = image.size();

    const auto primes = K.split_primes(static_cast<std::uint64_t>(std::floor(Z)));
    if (primes.empty() && require_primes)
        throw HypothesisError("no degree-one prime of norm <= " + std::to_string(Z) + " in D = " +
                              std::to_string(D.value()));
    const long double R = D.is_real() ? K.regulator() : 0.0L;
    for (const auto& P : primes) {
        Assignment x{P, 0, 1, 1, FieldElement::from_rational(D, 1), 0};
        const auto Pl = P.ideal(D).power(ell);
        x.a = G.class_of(Pl);
        const std::size_t j = G.inverse(x.a);
        x.j = j + 1;
        const auto& b = rec.representatives[j];
        FieldElement g = heights::small_generator(K, field::Ideal::from_form(D, b.a, b.b) * Pl);
        if (D.is_real()) {
            const long double half = (g.log_abs_embedding(0) - g.log_abs_embedding(1)) / 2;
            const auto k = static_cast<long long>(std::floor(half / R));
            if (k != 0) g = g * K.exact_cycle().unit().pow(-k);
            x.coordinate = half - k * R;
            if (x.coordinate < 0) x.coordinate = 0;
            if (x.coordinate >= R) x.coordinate = 0;
            x.cell = units::cell_index(partition, x.coordinate);
        }
        x.generator = g;
        rec.assignments.push_back(std::move(x));
    }
    return rec;
}

FMapRecord build_f_map(const FieldContext& K, unsigned ell, double Z, double c_cell, bool require_primes) {
    const auto P = K.discriminant().is_real() ? units::cell_partition(K.regulator(), c_cell)
                                              : units::cell_partition_point(c_cell);
    return build_f_map(K, ell, Z, P, require_primes);
}

namespace {

Rational scaled_bound(double c_tfw, double Z, unsigned ell) {
    Rational zl = 1;
    const Rational z = heights::exact_bound(Z);
    for (unsigned i = 0; i < ell; ++i) zl *= z;
    return heights::exact_bound(c_tfw) * zl;
}

} // namespace

OffDiagonalReport verify_offdiagonal(const FieldContext& K, const FMapRecord& rec, double c_tfw) {
    if (!(c_tfw > 0) || !std::isfinite(c_tfw)) throw ValidationError("C_tfw must be positive");
    if (rec.D != K.discriminant().value()) throw ValidationError("record belongs to a different field");
    OffDiagonalReport r;
    r.c_tfw = c_tfw;
    const auto fibers = rec.fibers();
    for (const auto& [key, n] : fibers) r.lhs += std::uint64_t(n) * n;
    r.nonempty_fibers = fibers.size();
    r.pi_1 = rec.assignments.size();
    const Rational bound = scaled_bound(c_tfw, rec.Z, rec.ell);
    r.s_ell = heights::count_s_ell(K, rec.ell, bound);
    r.rhs = r.pi_1 + r.s_ell;
    r.holds = r.lhs <= r.rhs;
    r.cauchy_schwarz = Rational(r.pi_1) * r.pi_1 <= Rational(r.nonempty_fibers) * r.lhs;
    r.fiber_bound = r.nonempty_fibers <= rec.a_order * std::max<std::size_t>(1, rec.partition.n);

    std::set<FieldElement> seen;
    const auto& A = rec.assignments;
    for (std::size_t u = 0; u < A.size(); ++u) {
        for (std::size_t v = 0; v < A.size(); ++v) {
            if (u == v || A[u].a != A[v].a || A[u].cell != A[v].cell) continue;
            ++r.pairs;
            const FieldElement beta = A[u].generator / A[v].generator;
            const auto w = heights::s_ell_witness(beta, rec.ell, bound);
            if (!w || !(w->first == A[u].prime) || !(w->second == A[v].prime)) ++r.witness_failures;
            else seen.insert(beta);
        }
    }
    r.distinct_witnesses = seen.size();
    return r;
}

TfwBound evaluate_tfw_bound(const FieldContext& K, unsigned ell, double Z, double eps, double c_tfw,
                            double c_cell) {
    if (eps < 0 || !std::isfinite(eps)) throw ValidationError("eps must be a nonnegative real");
    const auto& D = K.discriminant();
    TfwBound out;
    out.c_tfw = c_tfw > 0 ? c_tfw : default_c_tfw(D, c_cell);
    if (!std::isfinite(Z) || Z < 1) throw ValidationError("Z must be a finite real >= 1");
    out.pi_1 = K.split_primes(static_cast<std::uint64_t>(std::floor(Z))).size();
    if (out.pi_1 == 0)
        throw HypothesisError("pi_K^(1)(Z) = 0 for D = " + std::to_string(D.value()) + ", Z = " + std::to_string(Z));
    out.s_ell = heights::count_s_ell(K, ell, scaled_bound(out.c_tfw, Z, ell));
    const double dpow = std::pow(double(D.absolute()), 0.5 + eps);
    const double p1 = double(out.pi_1);
    out.bound_value = dpow / p1 + dpow * double(out.s_ell) / (p1 * p1);
    out.actual_torsion = classgroup::torsion_count(K.group().structure(), ell);
    out.ratio = double(out.actual_torsion) / out.bound_value;
    return out;
}

} // namespace qtorsion::tfw
