#include "qtorsion/units_lattice.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <istream>
#include <numeric>
#include <sstream>
#include <string>

#include "qtorsion/errors.hpp"
#include "qtorsion/forms.hpp"
#include "detail/int128.hpp"

namespace qtorsion::units {

using arith::Discriminant;
using field::Integer;

RegulatorInfo regulator_and_norm(const Discriminant& D) {
    if (!D.is_real()) throw DomainError("regulator requested for an imaginary quadratic field");
    const auto c = forms::principal_cycle_summary(forms::FormContext(D));
    return {c.regulator, c.unit_norm, c.period};
}

// ------------------------------------------------------------ principal cycle

PrincipalCycle::PrincipalCycle(const Discriminant& D, bool exact) : D_(D), exact_(exact) {
    const forms::FormContext ctx(D);
    const forms::QuadForm start = forms::principal_form(ctx);
    if (D.is_imaginary()) {
        keys_.emplace_back(start.a, start.b);
        index_.push_back({keys_[0], 0});
        logs_.emplace_back(0.0L, 0.0L);
        if (exact_) elements_.emplace_back(D, 1, 0, 1);
        unit_.emplace(D, 1, 0, 1);
        return;
    }
    std::int64_t a = start.a, b = start.b;
    long double l1 = 0, l2 = 0;
    FieldElement gamma(D, 1, 0, 1);
    for (;;) {
        keys_.emplace_back(a, b);
        logs_.emplace_back(l1, l2);
        if (exact_) elements_.push_back(gamma);
        const auto [s1, s2] = field::reduction_step_logs(D.value(), a, b);
        l1 += s1;
        l2 += s2;
        if (exact_) gamma = gamma * FieldElement(D, Integer(-b), Integer(1), Integer(2 * a));
        const forms::QuadForm next = forms::rho(ctx, forms::QuadForm{a, b, (b * b - D.value()) / (4 * a)});
        a = next.a < 0 ? -next.a : next.a;
        b = next.b;
        if (a == start.a && b == start.b) break;
    }
    regulator_ = std::fabs(l1);
    unit_norm_ = (keys_.size() % 2 == 0) ? 1 : -1;
    if (exact_) {
        FieldElement eps = gamma;
        if (l1 < 0) eps = eps.inverse();
        if (eps.sign_embedding(0) < 0) eps = -eps;
        unit_ = eps;
    }
    for (std::size_t k = 0; k < keys_.size(); ++k) index_.push_back({keys_[k], k});
    std::sort(index_.begin(), index_.end());
}

std::optional<std::size_t> PrincipalCycle::position(std::int64_t a, std::int64_t b) const {
    const std::pair key{a, b};
    const auto it = std::lower_bound(index_.begin(), index_.end(), key,
                                     [](const auto& e, const auto& k) { return e.first < k; });
    if (it == index_.end() || it->first != key) return std::nullopt;
    return it->second;
}

const FieldElement& PrincipalCycle::element(std::size_t k) const {
    if (!exact_) throw DomainError("principal cycle was built without exact elements");
    return elements_.at(k);
}

const FieldElement& PrincipalCycle::unit() const {
    if (!unit_) throw DomainError("principal cycle was built without exact elements");
    return *unit_;
}

FundamentalUnit fundamental_unit(const Discriminant& D) {
    if (!D.is_real()) throw DomainError("imaginary quadratic fields have no fundamental unit of infinite order");
    const PrincipalCycle cycle(D, true);
    return {cycle.unit(), cycle.regulator(), cycle.unit_norm()};
}

std::optional<Generator> principal_generator(const PrincipalCycle& cycle, const field::Ideal& I) {
    const field::IdealReduction red = field::reduce_ideal(I, true);
    const auto pos = cycle.position(red.reduced.a, red.reduced.b);
    if (!pos) return std::nullopt;
    const auto [g1, g2] = cycle.logs(*pos);
    return Generator{cycle.element(*pos) / red.multiplier, g1 - red.log1, g2 - red.log2};
}

std::vector<long double> log_embedding(const FieldElement& alpha) {
    if (alpha.is_zero()) throw DomainError("log embedding of zero");
    if (alpha.discriminant().is_imaginary()) return {2 * alpha.log_abs_embedding(0)};
    return {alpha.log_abs_embedding(0), alpha.log_abs_embedding(1)};
}

std::vector<FieldElement> roots_of_unity(const Discriminant& D) {
    std::vector<FieldElement> out;
    if (D.value() == -4) {
        const FieldElement i(D, 0, 1, 2);
        FieldElement z(D, 1, 0, 1);
        for (int k = 0; k < 4; ++k, z = z * i) out.push_back(z);
    } else if (D.value() == -3) {
        const FieldElement zeta(D, 1, 1, 2);
        FieldElement z(D, 1, 0, 1);
        for (int k = 0; k < 6; ++k, z = z * zeta) out.push_back(z);
    } else {
        out.emplace_back(D, 1, 0, 1);
        out.emplace_back(D, -1, 0, 1);
    }
    return out;
}

// ------------------------------------------------------------------ lattices

namespace {

long double to_ld(const Rational& q) { return q.convert_to<long double>(); }

template <class T>
T determinant(std::vector<std::vector<T>> M) {
    const std::size_t n = M.size();
    T det = 1;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = n;
        for (std::size_t r = c; r < n; ++r) {
            if constexpr (std::is_same_v<T, long double>) {
                if (M[r][c] != 0 && (piv == n || std::fabs(M[r][c]) > std::fabs(M[piv][c]))) piv = r;
            } else {
                if (M[r][c] != 0) {
                    piv = r;
                    break;
                }
            }
        }
        if (piv == n) return T(0);
        if (piv != c) {
            std::swap(M[piv], M[c]);
            det = -det;
        }
        det *= M[c][c];
        for (std::size_t r = c + 1; r < n; ++r) {
            const T f = M[r][c] / M[c][c];
            for (std::size_t k = c; k < n; ++k) M[r][k] -= f * M[c][k];
        }
    }
    return det;
}

template <class T>
std::vector<std::vector<T>> gram(const std::vector<std::vector<T>>& rows) {
    const std::size_t m = rows.size();
    std::vector<std::vector<T>> G(m, std::vector<T>(m, T(0)));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            T s = 0;
            for (std::size_t k = 0; k < rows[i].size(); ++k) s += rows[i][k] * rows[j][k];
            G[i][j] = G[j][i] = s;
        }
    return G;
}

Rational parse_rational(const std::string& tok) {
    const auto slash = tok.find('/');
    if (slash == std::string::npos) return Rational(Integer(tok));
    const Integer den(tok.substr(slash + 1));
    if (den == 0) throw ValidationError("zero denominator in lattice entry '" + tok + "'");
    return Rational(Integer(tok.substr(0, slash)), den);
}

} // namespace

Lattice Lattice::exact(std::vector<std::vector<Rational>> rows) {
    if (rows.empty()) throw DomainError("lattice needs at least one basis vector");
    const std::size_t n = rows[0].size();
    for (const auto& r : rows)
        if (r.size() != n || n == 0) throw ValidationError("lattice rows must have equal nonzero length");
    if (rows.size() > n) throw DomainError("lattice rank exceeds the ambient dimension");
    if (determinant(gram(rows)) == 0) throw DomainError("lattice basis vectors are linearly dependent");
    Lattice L;
    for (const auto& r : rows) {
        std::vector<long double> v;
        for (const auto& q : r) v.push_back(to_ld(q));
        L.real_.push_back(std::move(v));
    }
    L.exact_ = std::move(rows);
    return L;
}

Lattice Lattice::real(std::vector<std::vector<long double>> rows) {
    if (rows.empty()) throw DomainError("lattice needs at least one basis vector");
    const std::size_t n = rows[0].size();
    for (const auto& r : rows)
        if (r.size() != n || n == 0) throw ValidationError("lattice rows must have equal nonzero length");
    if (rows.size() > n) throw DomainError("lattice rank exceeds the ambient dimension");
    const auto G = gram(rows);
    long double scale = 1;
    for (std::size_t i = 0; i < G.size(); ++i) scale *= G[i][i];
    const long double det = determinant(G);
    if (!(std::fabs(det) > 1e-24L * scale)) throw DomainError("lattice basis vectors are linearly dependent");
    Lattice L;
    L.real_ = std::move(rows);
    return L;
}

Lattice Lattice::parse(std::istream& in) {
    std::vector<std::vector<std::string>> toks;
    std::string line;
    bool decimal = false;
    while (std::getline(in, line)) {
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        for (char& ch : line)
            if (ch == ',') ch = ' ';
        std::istringstream ls(line);
        std::vector<std::string> row;
        for (std::string t; ls >> t;) {
            if (t.find_first_of(".eE") != std::string::npos) decimal = true;
            row.push_back(t);
        }
        if (!row.empty()) toks.push_back(std::move(row));
    }
    try {
        if (decimal) {
            std::vector<std::vector<long double>> rows;
            for (const auto& r : toks) {
                std::vector<long double> v;
                for (const auto& t : r) {
                    if (t.find('/') != std::string::npos) v.push_back(to_ld(parse_rational(t)));
                    else v.push_back(std::stold(t));
                }
                rows.push_back(std::move(v));
            }
            return real(std::move(rows));
        }
        std::vector<std::vector<Rational>> rows;
        for (const auto& r : toks) {
            std::vector<Rational> v;
            for (const auto& t : r) v.push_back(parse_rational(t));
            rows.push_back(std::move(v));
        }
        return exact(std::move(rows));
    } catch (const std::invalid_argument& e) {
        if (dynamic_cast<const ValidationError*>(&e)) throw;
        throw ValidationError(std::string("malformed lattice entry: ") + e.what());
    } catch (const std::runtime_error& e) {
        if (dynamic_cast<const DomainError*>(&e)) throw;
        throw ValidationError(std::string("malformed lattice entry: ") + e.what());
    }
}

const std::vector<std::vector<Rational>>& Lattice::exact_basis() const {
    if (!exact_) throw DomainError("lattice has no exact basis");
    return *exact_;
}

long double Lattice::norm(std::size_t i) const {
    long double s = 0;
    for (long double x : real_.at(i)) s += x * x;
    return std::sqrt(s);
}

long double Lattice::covolume() const {
    if (exact_) return std::sqrt(to_ld(determinant(gram(*exact_))));
    return std::sqrt(std::fabs(determinant(gram(real_))));
}

// ---------------------------------------------------------- Minkowski basis

namespace {

using IntMat = std::vector<std::vector<std::int64_t>>;

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_add_overflow(a, b, &r)) throw RangeError("lattice transform overflow");
    return r;
}

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_mul_overflow(a, b, &r)) throw RangeError("lattice transform overflow");
    return r;
}

// row_i += q * row_j
void add_row(IntMat& T, std::size_t i, std::size_t j, std::int64_t q) {
    for (std::size_t k = 0; k < T[i].size(); ++k) T[i][k] = checked_add(T[i][k], checked_mul(q, T[j][k]));
}

IntMat identity(std::size_t m) {
    IntMat I(m, std::vector<std::int64_t>(m, 0));
    for (std::size_t i = 0; i < m; ++i) I[i][i] = 1;
    return I;
}

IntMat matmul(const IntMat& A, const IntMat& B) {
    const std::size_t m = A.size(), p = B[0].size(), q = B.size();
    IntMat C(m, std::vector<std::int64_t>(p, 0));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t k = 0; k < q; ++k)
            if (A[i][k] != 0)
                for (std::size_t j = 0; j < p; ++j) C[i][j] = checked_add(C[i][j], checked_mul(A[i][k], B[k][j]));
    return C;
}

// Floating LLL (delta = 0.99) used only to shorten the basis before enumeration.
IntMat lll_transform(const std::vector<std::vector<long double>>& B0) {
    const std::size_t m = B0.size();
    std::vector<std::vector<long double>> B = B0;
    IntMat U = identity(m);
    auto dot = [](const std::vector<long double>& x, const std::vector<long double>& y) {
        long double s = 0;
        for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
        return s;
    };
    std::vector<std::vector<long double>> bs(m), mu(m, std::vector<long double>(m, 0));
    std::vector<long double> bn(m);
    auto gso = [&]() {
        for (std::size_t i = 0; i < m; ++i) {
            bs[i] = B[i];
            for (std::size_t j = 0; j < i; ++j) {
                mu[i][j] = bn[j] > 0 ? dot(B[i], bs[j]) / bn[j] : 0;
                for (std::size_t k = 0; k < bs[i].size(); ++k) bs[i][k] -= mu[i][j] * bs[j][k];
            }
            bn[i] = dot(bs[i], bs[i]);
        }
    };
    gso();
    std::size_t k = 1;
    int guard = 0;
    while (k < m && ++guard < 100000) {
        for (std::size_t jj = k; jj-- > 0;) {
            const long double q = std::round(mu[k][jj]);
            if (q != 0) {
                const auto qi = static_cast<std::int64_t>(q);
                for (std::size_t t = 0; t < B[k].size(); ++t) B[k][t] -= q * B[jj][t];
                add_row(U, k, jj, -qi);
                gso();
            }
        }
        if (bn[k] >= (0.99L - mu[k][k - 1] * mu[k][k - 1]) * bn[k - 1]) {
            ++k;
        } else {
            std::swap(B[k], B[k - 1]);
            std::swap(U[k], U[k - 1]);
            gso();
            k = std::max<std::size_t>(k - 1, 1);
        }
    }
    return U;
}

// Exact or floating squared norms through a Gram matrix.
template <class S>
struct GramOps {
    std::vector<std::vector<S>> G;

    S quad(const std::vector<std::int64_t>& a) const {
        S s = 0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (a[i] == 0) continue;
            S row = 0;
            for (std::size_t j = 0; j < a.size(); ++j)
                if (a[j] != 0) row += G[i][j] * S(a[j]);
            s += S(a[i]) * row;
        }
        return s;
    }
};

template <class S>
long double to_float(const S& v) {
    if constexpr (std::is_same_v<S, long double>)
        return v;
    else
        return v.template convert_to<long double>();
}

template <class S>
bool less_than(const S& x, const S& y) {
    if constexpr (std::is_same_v<S, long double>)
        return x < y * (1 - 1e-15L) - 1e-300L;
    else
        return x < y;
}

template <class S>
bool equal_to(const S& x, const S& y) {
    return !less_than(x, y) && !less_than(y, x);
}

template <class S>
std::vector<std::vector<S>> transformed_gram(const std::vector<std::vector<S>>& G, const IntMat& T) {
    const std::size_t m = T.size();
    std::vector<std::vector<S>> out(m, std::vector<S>(m, S(0)));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            S s = 0;
            for (std::size_t p = 0; p < m; ++p) {
                if (T[i][p] == 0) continue;
                S row = 0;
                for (std::size_t q = 0; q < m; ++q)
                    if (T[j][q] != 0) row += G[p][q] * S(T[j][q]);
                s += S(T[i][p]) * row;
            }
            out[i][j] = out[j][i] = s;
        }
    return out;
}

// All a in Z^m with a^T G a <= bound (floating), passed to `visit`; visit may lower the bound.
void enumerate_ellipsoid(const std::vector<std::vector<long double>>& G, long double& bound,
                         const std::function<void(const std::vector<std::int64_t>&)>& visit) {
    const std::size_t m = G.size();
    // Cholesky-style decomposition: q[i][i] = |b*_i|^2, q[i][j] = mu_{ji}
    std::vector<std::vector<long double>> q(m, std::vector<long double>(m, 0));
    std::vector<std::vector<long double>> A = G;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i; j < m; ++j) q[i][j] = A[i][j];
        for (std::size_t j = i + 1; j < m; ++j) q[i][j] = q[i][j] / q[i][i];
        for (std::size_t k = i + 1; k < m; ++k)
            for (std::size_t l = k; l < m; ++l) A[k][l] -= q[i][i] * q[i][k] * q[i][l];
        if (!(q[i][i] > 0)) throw DomainError("Gram matrix is not positive definite");
    }
    std::vector<std::int64_t> a(m, 0);
    std::function<void(std::size_t, long double)> rec = [&](std::size_t depth, long double used) {
        const std::size_t i = depth;
        long double c = 0;
        for (std::size_t j = i + 1; j < m; ++j) c -= q[i][j] * static_cast<long double>(a[j]);
        const long double room = bound - used;
        if (room < 0) return;
        const long double r = std::sqrt(room / q[i][i]);
        const auto lo = static_cast<std::int64_t>(std::ceil(c - r - 1e-9L));
        const auto hi = static_cast<std::int64_t>(std::floor(c + r + 1e-9L));
        for (std::int64_t x = lo; x <= hi; ++x) {
            a[i] = x;
            const long double d = static_cast<long double>(x) - c;
            const long double nu = used + q[i][i] * d * d;
            if (nu > bound * (1 + 1e-12L) + 1e-18L) continue;
            if (i == 0)
                visit(a);
            else
                rec(i - 1, nu);
        }
        a[i] = 0;
    };
    rec(m - 1, 0);
}

std::int64_t gcd_tail(const std::vector<std::int64_t>& a, std::size_t from) {
    std::int64_t g = 0;
    for (std::size_t k = from; k < a.size(); ++k) g = std::gcd(g, a[k] < 0 ? -a[k] : a[k]);
    return g;
}

template <class S, class V>
IntMat greedy(const std::vector<std::vector<S>>& G0, const std::vector<std::vector<V>>& W,
              const std::function<bool(const std::vector<V>&, const std::vector<V>&)>& lex_greater) {
    const std::size_t m = G0.size();
    const std::size_t n = W[0].size();
    IntMat T = identity(m);
    for (std::size_t i = 0; i < m; ++i) {
        const auto GT = transformed_gram(G0, T);
        std::vector<std::vector<long double>> Gf(m, std::vector<long double>(m));
        for (std::size_t r = 0; r < m; ++r)
            for (std::size_t c = 0; c < m; ++c) Gf[r][c] = to_float(GT[r][c]);
        GramOps<S> ops{GT};
        std::vector<std::int64_t> e(m, 0);
        e[i] = 1;
        S best = ops.quad(e);
        std::vector<std::vector<std::int64_t>> ties{e};
        long double bound = to_float(best);
        enumerate_ellipsoid(Gf, bound, [&](const std::vector<std::int64_t>& a) {
            if (gcd_tail(a, i) != 1) return;
            const S v = ops.quad(a);
            if (less_than(v, best)) {
                best = v;
                ties.assign(1, a);
                bound = to_float(best);
            } else if (equal_to(v, best)) {
                ties.push_back(a);
            }
        });
        // coordinates of each tie in the ambient space, sign-normalized
        auto ambient = [&](std::vector<std::int64_t>& a) {
            std::vector<V> v(n, V(0));
            for (std::size_t r = 0; r < m; ++r) {
                if (a[r] == 0) continue;
                for (std::size_t c = 0; c < m; ++c) {
                    const std::int64_t coef = checked_mul(a[r], T[r][c]);
                    if (coef == 0) continue;
                    for (std::size_t k = 0; k < n; ++k) v[k] += V(coef) * W[c][k];
                }
            }
            for (std::size_t k = 0; k < n; ++k) {
                if (v[k] == V(0)) continue;
                if (v[k] < V(0)) {
                    for (auto& x : v) x = -x;
                    for (auto& x : a) x = -x;
                }
                break;
            }
            return v;
        };
        std::vector<std::int64_t> choice = ties[0];
        std::vector<V> choice_v = ambient(choice);
        for (std::size_t t = 1; t < ties.size(); ++t) {
            std::vector<std::int64_t> a = ties[t];
            std::vector<V> v = ambient(a);
            if (lex_greater(v, choice_v)) {
                choice = a;
                choice_v = std::move(v);
            }
        }
        // Euclid on the tail coefficients: keep sum a_k T_k fixed while driving
        // all but one tail coefficient to zero.
        std::vector<std::int64_t> c = choice;
        for (;;) {
            std::size_t piv = m;
            std::size_t nonzero = 0;
            for (std::size_t k = i; k < m; ++k) {
                if (c[k] == 0) continue;
                ++nonzero;
                if (piv == m || std::llabs(c[k]) < std::llabs(c[piv])) piv = k;
            }
            if (nonzero <= 1) {
                if (piv != i) {
                    std::swap(T[piv], T[i]);
                    std::swap(c[piv], c[i]);
                }
                if (c[i] == -1) {
                    for (auto& x : T[i]) x = -x;
                    c[i] = 1;
                }
                break;
            }
            for (std::size_t k = i; k < m; ++k) {
                if (k == piv || c[k] == 0) continue;
                const std::int64_t qk = c[k] / c[piv];
                c[k] -= qk * c[piv];
                add_row(T, piv, k, qk);
            }
        }
        for (std::size_t k = 0; k < i; ++k)
            if (c[k] != 0) add_row(T, i, k, c[k]);
    }
    return T;
}

} // namespace

MinkowskiResult minkowski_reduce(const Lattice& L) {
    const std::size_t m = L.rank();
    const IntMat U = lll_transform(L.basis());
    IntMat T;
    if (L.is_exact()) {
        const auto& E = L.exact_basis();
        // integer scaling keeps the Gram matrix in exact integers
        Integer den = 1;
        for (const auto& r : E)
            for (const auto& x : r) den = boost::multiprecision::lcm(den, boost::multiprecision::denominator(x));
        std::vector<std::vector<Integer>> W(m);
        for (std::size_t i = 0; i < m; ++i) {
            std::vector<Integer> v(E[0].size(), Integer(0));
            for (std::size_t j = 0; j < m; ++j) {
                if (U[i][j] == 0) continue;
                for (std::size_t k = 0; k < v.size(); ++k) {
                    const Rational s = E[j][k] * den;
                    v[k] += Integer(U[i][j]) * boost::multiprecision::numerator(s);
                }
            }
            W[i] = std::move(v);
        }
        const auto G = gram(W);
        T = greedy<Integer, Integer>(G, W, [](const std::vector<Integer>& x, const std::vector<Integer>& y) {
            return std::lexicographical_compare(y.begin(), y.end(), x.begin(), x.end());
        });
    } else {
        const auto& R = L.basis();
        std::vector<std::vector<long double>> W(m, std::vector<long double>(R[0].size(), 0));
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j)
                for (std::size_t k = 0; k < R[0].size(); ++k) W[i][k] += static_cast<long double>(U[i][j]) * R[j][k];
        long double scale = 0;
        for (const auto& r : W)
            for (long double x : r) scale = std::max(scale, std::fabs(x));
        const long double tol = 1e-12L * scale;
        T = greedy<long double, long double>(gram(W), W,
                                             [tol](const std::vector<long double>& x, const std::vector<long double>& y) {
                                                 for (std::size_t k = 0; k < x.size(); ++k) {
                                                     if (x[k] > y[k] + tol) return true;
                                                     if (x[k] < y[k] - tol) return false;
                                                 }
                                                 return false;
                                             });
    }
    const IntMat total = matmul(T, U);
    MinkowskiResult out{L, total};
    if (L.is_exact()) {
        const auto& E = L.exact_basis();
        std::vector<std::vector<Rational>> rows(m, std::vector<Rational>(E[0].size(), Rational(0)));
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j)
                if (total[i][j] != 0)
                    for (std::size_t k = 0; k < E[0].size(); ++k) rows[i][k] += Rational(total[i][j]) * E[j][k];
        out.basis = Lattice::exact(std::move(rows));
    } else {
        const auto& R = L.basis();
        std::vector<std::vector<long double>> rows(m, std::vector<long double>(R[0].size(), 0));
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j)
                for (std::size_t k = 0; k < R[0].size(); ++k)
                    rows[i][k] += static_cast<long double>(total[i][j]) * R[j][k];
        out.basis = Lattice::real(std::move(rows));
    }
    return out;
}

Lattice minkowski_basis(const Lattice& L) { return minkowski_reduce(L).basis; }

long double second_theorem_ratio(const Lattice& L, const std::vector<std::vector<long double>>& B) {
    if (B.size() != L.rank()) throw ValidationError("basis size does not match the lattice rank");
    long double prod = 1;
    for (const auto& v : B) {
        long double s = 0;
        for (long double x : v) s += x * x;
        prod *= std::sqrt(s);
    }
    return prod / L.covolume();
}

// ----------------------------------------------------------- cell partitions

CellPartition cell_partition_point(long double c_cell) {
    if (!(c_cell > 0)) throw ValidationError("C_cell must be positive");
    CellPartition P;
    P.rank = 0;
    P.n = 1;
    P.c_cell = c_cell;
    P.cells.push_back(Cell{});
    return P;
}

CellPartition cell_partition(long double regulator, long double c_cell) {
    if (!(c_cell > 0)) throw ValidationError("C_cell must be positive");
    if (!(regulator > 0)) throw ValidationError("regulator must be positive");
    const auto n = static_cast<std::size_t>(std::ceil(regulator / c_cell));
    if (static_cast<long double>(n) >= 5 * regulator + 1)
        throw ConstraintError("cell count " + std::to_string(n) + " reaches 5R + 1; C_cell is too small");
    CellPartition P;
    P.rank = 1;
    P.n = n;
    P.c_cell = c_cell;
    P.regulator = regulator;
    P.divisions = {n};
    P.axis_length = {regulator};
    for (std::size_t k = 0; k < n; ++k)
        P.cells.push_back(Cell{{regulator * k / n}, {k + 1 == n ? regulator : regulator * (k + 1) / n}});
    P.max_diameter = regulator / n;
    return P;
}

CellPartition cell_partition(const Lattice& B, long double c_cell) {
    if (!(c_cell > 0)) throw ValidationError("C_cell must be positive");
    const std::size_t m = B.rank();
    CellPartition P;
    P.rank = m;
    P.c_cell = c_cell;
    std::size_t n = 1;
    long double diam = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const long double len = B.norm(i);
        const auto k = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(m * len / c_cell)));
        P.divisions.push_back(k);
        P.axis_length.push_back(len);
        diam += len / k;
        if (n > (std::size_t(1) << 24) / k) throw ConstraintError("cell partition too large");
        n *= k;
    }
    P.n = n;
    P.max_diameter = diam;
    if (m == 1) P.regulator = P.axis_length[0];
    // cells in basis coordinates, axis 0 varying slowest
    std::vector<std::size_t> idx(m, 0);
    for (std::size_t c = 0; c < n; ++c) {
        Cell cell;
        for (std::size_t i = 0; i < m; ++i) {
            cell.lo.push_back(static_cast<long double>(idx[i]) / P.divisions[i]);
            cell.hi.push_back(static_cast<long double>(idx[i] + 1) / P.divisions[i]);
        }
        P.cells.push_back(std::move(cell));
        for (std::size_t i = m; i-- > 0;) {
            if (++idx[i] < P.divisions[i]) break;
            idx[i] = 0;
        }
    }
    return P;
}

std::size_t cell_index(const CellPartition& P, long double t) {
    if (P.rank == 0) return 1;
    if (P.rank != 1) throw ValidationError("cell_index expects a rank-one partition");
    const long double R = P.regulator;
    t = std::fmod(t, R);
    if (t < 0) t += R;
    auto k = static_cast<std::size_t>(std::floor(t * P.n / R));
    if (k >= P.n) k = P.n - 1;
    // agree with the stored bounds when t sits on a rounded boundary
    if (P.cells.size() == P.n) {
        while (k > 0 && t < P.cells[k].lo[0]) --k;
        while (k + 1 < P.n && t >= P.cells[k + 1].lo[0]) ++k;
    }
    return k + 1;
}

} // namespace qtorsion::units
