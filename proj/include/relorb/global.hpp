#pragma once

#include "relorb/orbital.hpp"
#include "relorb/parallel.hpp"

#include <map>
#include <set>
#include <vector>

namespace relorb {

// Global data over F = Q: the level M, the primitive Dirichlet character chi of
// conductor q, and per-prime local data for every p | Mq. Places at other primes
// are built on demand (unramified, uniformizer value chi(p)).
struct GlobalSetup {
    Integer M = 1;
    DirichletCharacter chi;
    Rational U_max = 1;
    std::map<long, LocalPlaceData> places;
    std::vector<long> sigma_plus, sigma_minus;

    long q() const { return chi.modulus(); }

    LocalPlaceData place_for(long p) const {
        auto it = places.find(p);
        if (it != places.end()) return it->second;
        return LocalPlaceData::make(p, 0, 0, local_component_unramified(chi, p));
    }
};

inline std::vector<long> prime_factors(Integer x) {
    std::vector<long> out;
    x = abs(x);
    for (long p = 2; Integer(p) * p <= x; ++p) {
        if (x % p == 0) {
            out.push_back(p);
            while (x % p == 0) x /= p;
        }
    }
    if (x > 1) out.push_back(x.convert_to<long>());
    return out;
}

// Computes m_p = e_p(M) and n_p = conductor exponent of chi at every p | Mq,
// splits them into the sigma-plus/sigma-minus classes, and attaches the local
// characters from local_components.
inline GlobalSetup ramification_profile(const Integer& M, const DirichletCharacter& chi,
                                        const Rational& U_max = Rational(1)) {
    if (M < 1) throw std::invalid_argument("ramification_profile: M must be >= 1");
    if (!chi.is_primitive())
        throw std::invalid_argument("ramification_profile: chi must be primitive");
    GlobalSetup setup;
    setup.M = M;
    setup.chi = chi;
    setup.U_max = U_max;

    auto chi_loc = local_components(chi);
    std::set<long> ps;
    for (long p : prime_factors(M)) ps.insert(p);
    for (const auto& part : chi.parts()) ps.insert(part.p());

    for (long p : ps) {
        int m = static_cast<int>(valuation(M, p) == VAL_INF ? 0 : valuation(M, p));
        int n = chi.conductor_exponent_at(p);
        LocalCharacter lc = chi_loc.count(p) ? chi_loc.at(p) : local_component_unramified(chi, p);
        setup.places.emplace(p, LocalPlaceData::make(p, m, n, lc));
        if (n >= 1) {
            if (m >= n) setup.sigma_plus.push_back(p);
            else setup.sigma_minus.push_back(p);
        }
    }
    return setup;
}

struct SupportElement {
    Rational u;                         // u = t/(t-1), a lattice point
    Rational t;                         // t = u/(u-1)
    bool sigma_plus_window_miss = false;  // e_p(u) < m_p - n_p at some sigma-plus prime
};

// Lattice ideals of the support: R carries p^{m_p} for p coprime to the conductor,
// N carries p^{n_p - m_p} over sigma-minus primes.
inline Integer support_R(const GlobalSetup& setup) {
    Integer R = 1;
    for (const auto& [p, pl] : setup.places)
        if (pl.n == 0)
            for (int i = 0; i < pl.m; ++i) R *= p;
    return R;
}

inline Integer support_N(const GlobalSetup& setup) {
    Integer N = 1;
    for (long p : setup.sigma_minus) {
        const auto& pl = setup.places.at(p);
        for (int i = 0; i < pl.n - pl.m; ++i) N *= p;
    }
    return N;
}

// Enumerates the support lattice u = j R / N^2 with 0 < |u| <= U_max, u != 1,
// subject to nonnegative valuation at sigma-plus primes. Elements failing the
// stronger sigma-plus window e_p(u) >= m_p - n_p are kept but flagged for audit.
inline std::vector<SupportElement> support_set(const GlobalSetup& setup, const Rational& U_max) {
    Integer R = support_R(setup), N = support_N(setup);
    Rational step(R, N * N);
    std::vector<SupportElement> out;
    if (U_max <= 0) return out;
    for (Integer j = 1; Rational(j) * step <= U_max; ++j) {
        for (int sign : {1, -1}) {
            Rational u = sign * Rational(j) * step;
            if (u == 1) continue;
            bool ok = true, miss = false;
            for (long p : setup.sigma_plus) {
                const auto& pl = setup.places.at(p);
                long e = valuation(u, p);
                if (e < 0) ok = false;
                if (e < pl.m - pl.n) miss = true;
            }
            if (!ok) continue;
            Rational t = u / (u - 1);
            out.push_back(SupportElement{u, t, miss});
        }
    }
    return out;
}

struct SupportEvaluation {
    SupportElement element;
    CyclotomicSum product;          // prod over relevant finite places of E_p(t)
    std::vector<long> relevant_primes;
};

struct RegularOrbitalResult {
    bool empty = true;
    size_t support_size = 0;
    CyclotomicSum total;            // exact signed total (finite part)
    double abs_total = 0.0;         // sum of |E(t)| over elements
    std::vector<SupportEvaluation> elements;
};

inline std::vector<long> relevant_primes_for(const GlobalSetup& setup, const Rational& t) {
    std::set<long> ps;
    for (const auto& [p, pl] : setup.places) ps.insert(p);
    for (long p : prime_factors(numerator(t))) ps.insert(p);
    for (long p : prime_factors(denominator(t))) ps.insert(p);
    for (long p : prime_factors(numerator(Rational(1) - t))) ps.insert(p);
    return {ps.begin(), ps.end()};
}

// The finite part of the regular orbital sum: for each support element the exact
// product of local integrals over the relevant primes (every other place
// contributes 1). Elements are evaluated independently (optionally in parallel)
// and reduced in lattice order, so the result does not depend on the worker count.
inline RegularOrbitalResult regular_orbital_finite(const GlobalSetup& setup, const Rational& U_max,
                                                   int threads = 1) {
    RegularOrbitalResult res;
    auto elements = support_set(setup, U_max);
    res.support_size = elements.size();
    res.empty = elements.empty();
    res.total = CyclotomicSum(1);
    res.elements.resize(elements.size());
    parallel_for(elements.size(), threads, [&](size_t i) {
        SupportEvaluation ev;
        ev.element = elements[i];
        ev.relevant_primes = relevant_primes_for(setup, elements[i].t);
        CyclotomicSum prod = CyclotomicSum::from_rational(Rational(1));
        for (long p : ev.relevant_primes) {
            LocalPlaceData place = setup.place_for(p);
            OrbitalValue v = eval_orbital(place, elements[i].t);
            prod = prod * v.value;
            if (prod.structurally_zero()) break;
        }
        ev.product = std::move(prod);
        res.elements[i] = std::move(ev);
    });
    for (const auto& ev : res.elements) {
        res.total += ev.product;
        res.abs_total += ev.product.embed().abs().to_double();
    }
    return res;
}

struct StabilityRow {
    long M = 1;
    long gcd_Mq = 1;
    Integer R = 1, N = 1;
    size_t support_size = 0;
    bool empty = true;
    double finite_part_abs = 0.0;
    bool finite_part_exact_zero = true;
};

struct StabilityThresholdSummary {
    long gcd_class = 1;
    long first_empty_M = 0;    // 0 when no empty row in the class
    long last_nonempty_M = 0;  // 0 when every row in the class is empty
    Rational stability_bound = 0;  // q^2 gcd U_max
};

struct StabilityReport {
    long q = 1;
    Rational U_max = 1;
    std::vector<StabilityRow> rows;
    std::vector<StabilityThresholdSummary> summaries;  // one per gcd class seen
    bool divisibility_monotone = true;  // empty at M stays empty at multiples (same class)
};

// Scans M over a range for a fixed character, recording support size, emptiness
// and the finite regular-orbital part; verifies that emptiness is monotone under
// divisibility within a gcd class and summarizes the empirical threshold per class.
inline StabilityReport stability_threshold_scan(const DirichletCharacter& chi, long M_lo, long M_hi,
                                                const Rational& U_max, bool with_finite_part = true,
                                                int threads = 1) {
    StabilityReport rep;
    rep.q = chi.modulus();
    rep.U_max = U_max;
    for (long M = std::max(1L, M_lo); M <= M_hi; ++M) {
        GlobalSetup setup = ramification_profile(Integer(M), chi, U_max);
        StabilityRow row;
        row.M = M;
        row.gcd_Mq = std::gcd(M, rep.q);
        row.R = support_R(setup);
        row.N = support_N(setup);
        if (with_finite_part) {
            RegularOrbitalResult r = regular_orbital_finite(setup, U_max, threads);
            row.support_size = r.support_size;
            row.empty = r.empty;
            row.finite_part_abs = r.abs_total;
            row.finite_part_exact_zero = r.total.structurally_zero();
        } else {
            auto els = support_set(setup, U_max);
            row.support_size = els.size();
            row.empty = els.empty();
            row.finite_part_abs = 0.0;
            row.finite_part_exact_zero = row.empty;
        }
        rep.rows.push_back(std::move(row));
    }

    std::map<long, StabilityThresholdSummary> sums;
    for (const auto& a : rep.rows) {
        auto& s = sums[a.gcd_Mq];
        s.gcd_class = a.gcd_Mq;
        s.stability_bound = Rational(rep.q) * rep.q * a.gcd_Mq * U_max;
        if (a.empty && s.first_empty_M == 0) s.first_empty_M = a.M;
        if (!a.empty) s.last_nonempty_M = a.M;
        for (const auto& b : rep.rows)
            if (a.empty && b.M % a.M == 0 && b.M > a.M && b.gcd_Mq == a.gcd_Mq && !b.empty)
                rep.divisibility_monotone = false;
    }
    for (auto& [g, s] : sums) rep.summaries.push_back(s);
    return rep;
}

// ---------------------------------------------------------------------------
// Small-cell local integral, Eq.-(19)-style closed form specialized to F = Q.
// ---------------------------------------------------------------------------

// Value coeff * p^{p_exponent}; the exponent can be a non-integer rational when
// s is (e.g.) 1/4.
struct SmallCellValue {
    CyclotomicSum coeff;
    Rational p_exponent = 0;
    long p = 2;

    Embedded embed(mpfr_prec_t prec = 192) const {
        Embedded c = coeff.embed(prec);
        MpReal scale(prec), pr(prec), ex(prec);
        mpfr_set_si(pr.get(), p, MPFR_RNDN);
        mpfr_set_q(ex.get(), p_exponent.backend().data(), MPFR_RNDN);
        mpfr_pow(scale.get(), pr.get(), ex.get(), MPFR_RNDN);
        c.re *= scale;
        c.im *= scale;
        return c;
    }

    bool approx_equal(const SmallCellValue& other, long log2_tol = -40) const {
        MpReal d = embedded_distance(embed(), other.embed());
        return d < MpReal::two_pow(log2_tol, 192);
    }
};

// Closed form: for p | Q the integral is chi(-1) Vol(K[m])^{-1} on units of x and
// 0 off them; for p coprime to Q it is |x|^{1+2s} Vol(K[m])^{-1} on integral x.
// The chi(-1) factor is forced by the unipotent average (the shell sum collapses
// to tau(chi) tau(chibar) / p^n = chi(-1)).
inline SmallCellValue small_cell_local_eval(const LocalPlaceData& place, long e_x,
                                            const Rational& s) {
    if (s <= 0) throw std::invalid_argument("small_cell_local_eval: s must be > 0");
    place.validate();
    SmallCellValue val;
    val.p = place.p;
    Rational volinv = Rational(1) / vol_K_bar(place.p, place.m);
    if (place.n >= 1) {
        if (e_x == 0)
            val.coeff = place.chi.value(Rational(-1)) * volinv;
        else
            val.coeff = CyclotomicSum::from_rational(Rational(0));
        val.p_exponent = 0;
    } else {
        val.coeff = CyclotomicSum::from_rational(e_x >= 0 ? volinv : Rational(0));
        val.p_exponent = e_x >= 0 ? Rational(-e_x) * (1 + 2 * s) : Rational(0);
    }
    return val;
}

// Brute-force evaluation of the same object as a finite exact sum over valuation
// shells of y and the unipotent average, with psi values as exact roots of unity.
inline SmallCellValue small_cell_shell_bruteforce(const LocalPlaceData& place, long e_x,
                                                  const Rational& s) {
    if (s <= 0) throw std::invalid_argument("small_cell_shell_bruteforce: s must be > 0");
    place.validate();
    const long p = place.p;
    SmallCellValue val;
    val.p = p;

    if (e_x < 0) {  // the b-integral vanishes: psi is nontrivial on every coset of O
        val.coeff = CyclotomicSum::from_rational(Rational(0));
        return val;
    }
    Rational volinv = Rational(1) / vol_K_bar(p, place.m);
    val.p_exponent = Rational(-e_x) * (1 + 2 * s);

    if (place.n == 0) {
        // only the shell e(y) = 0, k = 0 survives; unit integrals are 1
        val.coeff = CyclotomicSum::from_rational(volinv);
        return val;
    }

    // n >= 1: sum over alpha, beta units mod p^n and the y-unit gamma mod p^n,
    // each term chi(alpha) chibar(beta) chibar(gamma) psi(-x (gamma beta + alpha) p^{-n}).
    // The psi exponent is (-(g b + a) p^{e_x} mod p^n)/p^n, so every term lives in
    // the roots of order lcm(chi order, p^n).
    const long pn = pow_long(p, place.n);
    const long phi = phi_prime_power(p, place.n);
    const auto& chi = place.chi.unit;
    const long L = std::lcm(chi.order(), pn);
    const long psi_stride = L / pn, chi_stride = L / chi.order();
    const long pex = e_x >= place.n ? 0 : pow_long(p, static_cast<int>(e_x)) % pn;
    std::vector<long> counts(static_cast<size_t>(L), 0);
    for (long a = 1; a < pn; ++a) {
        if (a % p == 0) continue;
        long ea = *chi.exponent_of(a);
        for (long b = 1; b < pn; ++b) {
            if (b % p == 0) continue;
            long eb = *chi.exponent_of(b);
            for (long g = 1; g < pn; ++g) {
                if (g % p == 0) continue;
                long eg = *chi.exponent_of(g);
                long psi = (-(g * b + a) % pn * pex % pn + pn) % pn;
                long e = ((ea - eb - eg) % chi.order() + chi.order()) % chi.order();
                ++counts[static_cast<size_t>((psi * psi_stride + e * chi_stride) % L)];
            }
        }
    }
    CyclotomicSum acc{L};
    for (long j = 0; j < L; ++j)
        if (counts[static_cast<size_t>(j)] != 0)
            acc.add_root(j, Integer(counts[static_cast<size_t>(j)]));
    acc *= volinv / (Rational(pn) * phi);
    val.coeff = acc;
    return val;
}

// ---------------------------------------------------------------------------
// Dual orbital: exact kernel sum and support verification.
// ---------------------------------------------------------------------------

// J_v(x_v) up to the archimedean factor: prefactor * sum_{m >= m_v} q^{-m} G(m) R(m, x),
// evaluated as the finite head where G or R vary plus the exact geometric tail
// where G = phi(p^n) and R = 1.
inline CyclotomicSum dual_kernel_eval(const LocalPlaceData& place, long e_x) {
    if (place.n < 1) throw std::invalid_argument("dual_kernel_eval: needs n >= 1");
    place.validate();
    const long p = place.p;
    const long phi = phi_prime_power(p, place.n);

    long lower = std::max<long>(place.m, -e_x - 1);
    long m0 = std::max({2L * place.n, -e_x, static_cast<long>(place.m)});
    CyclotomicSum acc{place.chi.unit.order()};
    for (long m = lower; m < m0; ++m) {
        Rational R = ramanujan_sum(p, m, e_x);
        if (R == 0) continue;
        CyclotomicSum G = dual_char_sum_G(place.chi, m);
        acc += G * (pow_rat(p, -m) * R);
    }
    // tail: sum_{m >= m0} p^{-m} phi = phi p^{-m0} p/(p-1)
    acc += CyclotomicSum::from_rational(Rational(phi) * pow_rat(p, -m0) * Rational(p, p - 1));

    Rational pref = Rational(1, pow_long(p, place.n)) / vol_K_bar(p, place.m) * Rational(p - 1, p);
    acc *= pref;
    acc = acc * place.chi.value(Rational(-1));
    return acc;
}

// Truncated direct summation of the same series (no tail); the oracle for the
// closed-form tail.
inline CyclotomicSum dual_kernel_direct_sum(const LocalPlaceData& place, long e_x, long m_cap) {
    if (place.n < 1) throw std::invalid_argument("dual_kernel_direct_sum: needs n >= 1");
    const long p = place.p;
    CyclotomicSum acc{place.chi.unit.order()};
    for (long m = place.m; m <= m_cap; ++m) {
        Rational R = ramanujan_sum(p, m, e_x);
        if (R == 0) continue;
        CyclotomicSum G = dual_char_sum_G(place.chi, m);
        acc += G * (pow_rat(p, -m) * R);
    }
    Rational pref = Rational(1, pow_long(p, place.n)) / vol_K_bar(p, place.m) * Rational(p - 1, p);
    acc *= pref;
    acc = acc * place.chi.value(Rational(-1));
    return acc;
}

// True iff some unipotent pair (alpha, beta) and central shift put the dual-orbit
// matrix with e(y) = e_y, e(b) = e_b inside K[m]. Unit parts of y and b are
// immaterial (they absorb into the alpha, beta enumeration).
inline bool dual_support_check(const LocalPlaceData& place, long e_y, long e_b) {
    place.validate();
    const long p = place.p;
    const long pn = pow_long(p, place.n);
    Rational y = pow_rat(p, e_y), b = pow_rat(p, e_b);
    if (place.n == 0)
        return projective_K_m_shift(Matrix2{y, Rational(0), b * y, Rational(1)}, p, place.m)
            .has_value();
    Rational pmn = pow_rat(p, -place.n);
    for (long alpha = 1; alpha < pn; ++alpha) {
        if (alpha % p == 0) continue;
        Rational top = (Rational(1) + alpha * b * pmn) * y;
        for (long beta = 1; beta < pn; ++beta) {
            if (beta % p == 0) continue;
            Matrix2 M{top, top * beta * pmn + alpha * pmn, b * y,
                      Rational(1) + beta * b * y * pmn};
            if (projective_K_m_shift(M, p, place.m)) return true;
        }
    }
    return false;
}

}  // namespace relorb
