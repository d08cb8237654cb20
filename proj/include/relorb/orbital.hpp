#pragma once

#include "relorb/characters.hpp"
#include "relorb/cyclotomic.hpp"
#include "relorb/matrix2.hpp"
#include "relorb/rational.hpp"

#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace relorb {

// Per-prime ramification data: level exponent m = e_p(M), character exponent
// n = conductor exponent of chi_p, the local character itself, and an optional
// central character with unit conductor <= m.
struct LocalPlaceData {
    long p = 2;
    int m = 0;
    int n = 0;
    LocalCharacter chi;
    std::optional<LocalCharacter> omega;

    bool is_unramified() const { return n == 0; }
    bool is_sigma_plus() const { return n >= 1 && m >= n; }
    bool is_sigma_minus() const { return n >= 1 && m < n; }

    void validate() const {
        require_prime(p, "LocalPlaceData");
        if (m < 0 || n < 0) throw std::invalid_argument("LocalPlaceData: negative exponent");
        if (chi.p() != p) throw std::invalid_argument("LocalPlaceData: chi has wrong prime");
        if (n >= 1) {
            if (chi.unit.n() != n || !chi.unit.is_primitive())
                throw std::invalid_argument("LocalPlaceData: chi must be primitive mod p^n");
        } else if (chi.unit.conductor() != 0) {
            throw std::invalid_argument("LocalPlaceData: n = 0 needs chi trivial on units");
        }
        if (omega && omega->unit.conductor() > m)
            throw std::invalid_argument("LocalPlaceData: omega conductor exceeds m");
        if (omega && omega->p() != p)
            throw std::invalid_argument("LocalPlaceData: omega has wrong prime");
    }

    static LocalPlaceData make(long p, int m, int n, LocalCharacter chi,
                               std::optional<LocalCharacter> omega = std::nullopt) {
        LocalPlaceData d{p, m, n, std::move(chi), std::move(omega)};
        d.validate();
        return d;
    }
};

struct BranchTerm {
    long k = 0, r1 = 0, r2 = 0;
    std::string label;
    CyclotomicSum partial;
};

struct OrbitalValue {
    CyclotomicSum value;
    bool support_hit = false;
    std::vector<BranchTerm> branch_trace;
};

namespace detail {

// Shared bookkeeping for the orbital evaluators: unit tables, chi exponents,
// and the common root-of-unity order for all accumulated terms.
struct OrbitalContext {
    const LocalPlaceData& place;
    long p;
    long pn;             // p^n
    long L;              // common root order
    long chi_order;
    std::vector<long> units;
    std::vector<long> chi_exp;  // indexed like units

    explicit OrbitalContext(const LocalPlaceData& pl) : place(pl), p(pl.p) {
        pl.validate();
        pn = pow_long(p, pl.n);
        chi_order = pl.chi.unit.order();
        long L0 = std::lcm(chi_order, denominator(pl.chi.uniformizer_angle).convert_to<long>());
        if (pl.omega) {
            L0 = std::lcm(L0, pl.omega->unit.order());
            L0 = std::lcm(L0, denominator(pl.omega->uniformizer_angle).convert_to<long>());
        }
        L = L0;
        for (long a = 1; a < pn; ++a) {
            if (pl.n >= 1 && a % p == 0) continue;
            units.push_back(a);
            chi_exp.push_back(pl.chi.unit.exponent_of(a).value_or(0));
        }
        if (pl.n == 0) {
            units = {1};
            chi_exp = {0};
        }
    }

    long angle_to_exp(const Rational& angle) const {
        Rational scaled = angle * L;
        if (denominator(scaled) != 1)
            throw std::logic_error("orbital: angle denominator escapes the common order");
        long e = numerator(scaled).convert_to<long>() % L;
        return e < 0 ? e + L : e;
    }

    // zeta-exponent of chibar(p^{r2}), the uniformizer factor of the y-integral.
    long uv_chi_exp(long r2) const {
        return angle_to_exp(LocalCharacter::reduce_angle(-place.chi.uniformizer_angle * r2));
    }

    // zeta-exponent of the omega factor, which collapses to omega(D)^{-1} for the
    // lower-right entry D of the unscaled matrix.
    std::optional<long> omega_exp(const Rational& D) const {
        if (!place.omega) return 0;
        auto a = place.omega->angle(D);
        if (!a) return std::nullopt;  // value 0: entry outside omega's units
        return angle_to_exp(LocalCharacter::reduce_angle(-*a));
    }

    Rational prefactor() const {
        Rational v = vol_K_bar(place.p, place.m);
        Rational tau2 = place.n >= 1 ? Rational(pn) : Rational(1);
        return Rational(1) / (tau2 * v);
    }
};

inline long abs_or_zero(long v) { return v == VAL_INF ? 0 : std::labs(v); }

}  // namespace detail

// Exact evaluation of the local regular orbital integral by direct enumeration of
// the shell/unipotent parameters (r1, r2, alpha, beta) with the projective-shift
// membership test for each candidate matrix.
inline OrbitalValue eval_orbital_bruteforce(const LocalPlaceData& place, const Rational& t,
                                            long window_pad = 2) {
    if (t == 0 || t == 1)
        throw std::domain_error("eval_orbital_bruteforce: t must avoid {0, 1}");
    if (place.n == 0)
        throw std::domain_error("eval_orbital_bruteforce: n = 0 places use eval_orbital_unramified");

    detail::OrbitalContext ctx(place);
    const long p = place.p;
    const long et = valuation(t, p);
    const long e1 = valuation(Rational(1) - t, p);
    const long W = place.m + place.n + detail::abs_or_zero(et) + detail::abs_or_zero(e1) + window_pad;

    CyclotomicSum acc{ctx.L};
    std::vector<BranchTerm> trace;
    bool hit = false;

    const Rational pm_n = pow_rat(p, -place.n);
    for (long r2 = -W; r2 <= W; ++r2) {
        if ((r2 + e1) % 2 != 0) continue;  // det(p^k Y) cannot be a unit
        long k = -(r2 + e1) / 2;
        long uvexp = ctx.uv_chi_exp(r2);
        for (long r1 = -W; r1 <= W; ++r1) {
            if (k + r1 + r2 < place.m) continue;  // lower-left entry
            // monomial prefilters: an entry whose least valuation is attained by a
            // single monomial cannot be integral when that valuation is negative
            long vA1 = k + r2, vA2 = k + r1 + r2 - place.n;
            if (std::min(vA1, vA2) < 0 && vA1 != vA2) continue;
            long vD1 = k, vD2 = k + r1 + r2 - place.n;
            if (std::min(vD1, vD2) < 0 && vD1 != vD2) continue;
            long vB[4] = {k + r2 - place.n, k + r1 + r2 - 2 * place.n, k - place.n,
                          k - r1 + (et == VAL_INF ? 0 : et)};
            long mB = std::min(std::min(vB[0], vB[1]), std::min(vB[2], vB[3]));
            if (mB < 0) {
                int at_min = 0;
                for (long v : vB) at_min += (v == mB);
                if (at_min == 1) continue;
            }

            const Rational P1 = pow_rat(p, r2);
            const Rational P2 = pow_rat(p, r1 + r2 - place.n);
            const Rational P4 = t * pow_rat(p, -r1);
            const Rational C = pow_rat(p, r1 + r2);

            std::vector<long> cell(ctx.L, 0);
            bool cell_hit = false;
            for (size_t ia = 0; ia < ctx.units.size(); ++ia) {
                const long alpha = ctx.units[ia];
                const Rational A = P1 + alpha * P2;
                const Rational A3 = A * pm_n;
                const Rational Sa = P4 + alpha * pm_n;
                for (size_t ib = 0; ib < ctx.units.size(); ++ib) {
                    const long beta = ctx.units[ib];
                    Matrix2 Y{A, A3 * beta + Sa, C, Rational(1) + beta * P2};
                    auto shift = projective_K_m_shift(Y, p, place.m);
                    if (!shift || *shift != k) continue;
                    auto oexp = ctx.omega_exp(Y.d);
                    if (!oexp) continue;
                    long e = ((ctx.chi_exp[ia] - ctx.chi_exp[ib]) % ctx.chi_order + ctx.chi_order) %
                             ctx.chi_order;
                    e = (e * (ctx.L / ctx.chi_order) + uvexp + *oexp) % ctx.L;
                    ++cell[static_cast<size_t>(e)];
                    cell_hit = true;
                }
            }
            if (cell_hit) {
                CyclotomicSum part(ctx.L);
                for (long j = 0; j < ctx.L; ++j)
                    if (cell[static_cast<size_t>(j)] != 0)
                        part.add_root(j, Integer(cell[static_cast<size_t>(j)]));
                acc += part;
                trace.push_back(BranchTerm{k, r1, r2, "bruteforce-cell", part});
                hit = true;
            }
        }
    }
    acc *= ctx.prefactor();
    return OrbitalValue{std::move(acc), hit, std::move(trace)};
}

// S(k): the k <= -1 hyperbola sum over alpha', beta' mod p^{n+k} with
// alpha' beta' = -(t-1) p^{2k}. Requires the admissible window.
inline CyclotomicSum charsum_S(const LocalPlaceData& place, long k, const Rational& t) {
    detail::OrbitalContext ctx(place);
    const long p = place.p;
    long lo = std::max<long>(place.m - place.n, 1 - place.n);
    if (k < lo || k > -1)
        throw std::invalid_argument("charsum_S: k outside the admissible window");
    if (valuation(Rational(1) - t, p) != -2 * k)
        throw std::invalid_argument("charsum_S: requires e_p(1-t) = -2k");

    long mod = pow_long(p, place.n + static_cast<int>(k));  // p^{n+k}, n+k >= 1
    Integer modz(mod);
    // -(t-1) p^{2k} is a unit by the window condition
    Integer target = unit_residue(-(t - 1) * pow_rat(p, 2 * k), p, place.n + static_cast<int>(k)).value;
    long pk = pow_long(p, static_cast<int>(-k));  // p^{-k}

    CyclotomicSum acc{ctx.L};
    for (long a1 = 1; a1 < mod; ++a1) {
        if (a1 % p == 0) continue;
        Integer b1 = (target * mod_inverse(Integer(a1), modz)) % modz;
        // chi(1 - p^{-k} alpha') chibar(1 - p^{-k} beta') omegabar(p^{-k} beta')
        Integer ra = Integer(1) - Integer(pk) * a1;
        Integer rb = Integer(1) - Integer(pk) * b1;
        auto ea = ctx.place.chi.unit.exponent_of(ra);
        auto eb = ctx.place.chi.unit.exponent_of(rb);
        if (!ea || !eb) continue;
        long e = ((*ea - *eb) % ctx.chi_order + ctx.chi_order) % ctx.chi_order;
        long exp = e * (ctx.L / ctx.chi_order);
        if (place.omega) {
            Rational arg = pow_rat(p, -k) * Rational(b1);
            auto oa = place.omega->angle(arg);
            if (!oa) continue;
            exp = (exp + ctx.angle_to_exp(LocalCharacter::reduce_angle(-*oa))) % ctx.L;
        }
        acc.add_root(exp);
    }
    return acc;
}

// J1(r1, t): the k = 0 character sum. In the admissible window beta is determined
// by alpha through a unit coefficient; outside it the defining double loop runs.
inline CyclotomicSum charsum_J1(const LocalPlaceData& place, long r1, const Rational& t) {
    detail::OrbitalContext ctx(place);
    const long p = place.p;
    const long e1 = valuation(Rational(1) - t, p);
    const long et = valuation(t, p);
    const long r2 = (e1 == VAL_INF) ? 0 : -e1;
    CyclotomicSum acc{ctx.L};

    bool fast = r2 >= 0 && r1 + r2 >= place.n && et != VAL_INF && place.n - r1 + et >= 0;
    if (fast) {
        Integer modz(ctx.pn);
        Integer T = residue_mod(t * pow_rat(p, place.n - r1), p, place.n);
        Integer Pr2 = residue_mod(pow_rat(p, r2), p, place.n);
        Integer Pb = residue_mod(pow_rat(p, r1 + r2 - place.n), p, place.n);
        for (size_t ia = 0; ia < ctx.units.size(); ++ia) {
            const long alpha = ctx.units[ia];
            Integer c1 = (Pr2 + alpha * Pb) % modz;
            if (c1 == 0 || c1 % p == 0) continue;  // no admissible beta
            Integer beta = ((-(T + alpha)) % modz) * mod_inverse(c1, modz) % modz;
            if (beta < 0) beta += modz;
            if (beta % p == 0) continue;
            auto eb = place.chi.unit.exponent_of(beta);
            if (!eb) continue;
            long e = ((ctx.chi_exp[ia] - *eb) % ctx.chi_order + ctx.chi_order) % ctx.chi_order;
            long exp = e * (ctx.L / ctx.chi_order);
            auto oexp = ctx.omega_exp(Rational(1) + Rational(beta) * pow_rat(p, r1 + r2 - place.n));
            if (!oexp) continue;
            acc.add_root((exp + *oexp) % ctx.L);
        }
        return acc;
    }

    // defining double loop with exact rational valuations
    for (size_t ia = 0; ia < ctx.units.size(); ++ia) {
        const long alpha = ctx.units[ia];
        Rational c1 = pow_rat(p, r2) + alpha * pow_rat(p, r1 + r2 - place.n);
        for (size_t ib = 0; ib < ctx.units.size(); ++ib) {
            const long beta = ctx.units[ib];
            Rational B = c1 * beta * pow_rat(p, -place.n) + t * pow_rat(p, -r1) +
                         alpha * pow_rat(p, -place.n);
            if (B != 0 && valuation(B, p) < 0) continue;
            auto oexp = ctx.omega_exp(Rational(1) + Rational(beta) * pow_rat(p, r1 + r2 - place.n));
            if (!oexp) continue;
            long e = ((ctx.chi_exp[ia] - ctx.chi_exp[ib]) % ctx.chi_order + ctx.chi_order) %
                     ctx.chi_order;
            acc.add_root((e * (ctx.L / ctx.chi_order) + *oexp) % ctx.L);
        }
    }
    return acc;
}

// J2(r1, r2, k, t): the k >= 1 character sum; alpha is determined by beta since
// beta + p^k is a unit.
inline CyclotomicSum charsum_J2(const LocalPlaceData& place, long r1, long r2, long k,
                                const Rational& t) {
    if (k < 1) throw std::invalid_argument("charsum_J2: needs k >= 1");
    detail::OrbitalContext ctx(place);
    const long p = place.p;
    CyclotomicSum acc{ctx.L};

    Rational rhs_rat = pow_rat(p, 2 * k + r2) - t * pow_rat(p, place.n + k - r1);
    bool fast = k + r2 >= 0 && rhs_rat != 0 && valuation(rhs_rat, p) >= 0;
    if (fast) {
        Integer modz(ctx.pn);
        Integer RHS = residue_mod(rhs_rat, p, place.n);
        Integer Pk = residue_mod(pow_rat(p, k), p, place.n);
        Integer Pkr2 = residue_mod(pow_rat(p, k + r2), p, place.n);
        for (size_t ib = 0; ib < ctx.units.size(); ++ib) {
            const long beta = ctx.units[ib];
            Integer lead = (beta + Pk) % modz;
            if (lead == 0 || lead % p == 0) continue;
            Integer alpha = (RHS * mod_inverse(lead, modz) - Pkr2) % modz;
            if (alpha < 0) alpha += modz;
            if (alpha == 0 || alpha % p == 0) continue;
            auto ea = place.chi.unit.exponent_of(alpha);
            if (!ea) continue;
            long e = ((*ea - ctx.chi_exp[ib]) % ctx.chi_order + ctx.chi_order) % ctx.chi_order;
            auto oexp = ctx.omega_exp(Rational(1) + Rational(beta) * pow_rat(p, r1 + r2 - place.n));
            if (!oexp) continue;
            acc.add_root((e * (ctx.L / ctx.chi_order) + *oexp) % ctx.L);
        }
        return acc;
    }

    for (size_t ia = 0; ia < ctx.units.size(); ++ia) {
        const long alpha = ctx.units[ia];
        for (size_t ib = 0; ib < ctx.units.size(); ++ib) {
            const long beta = ctx.units[ib];
            Rational lhs = (pow_rat(p, k + r2) + alpha) * (beta + pow_rat(p, k)) - rhs_rat;
            if (lhs != 0 && valuation(lhs, p) < place.n) continue;
            auto oexp = ctx.omega_exp(Rational(1) + Rational(beta) * pow_rat(p, r1 + r2 - place.n));
            if (!oexp) continue;
            long e = ((ctx.chi_exp[ia] - ctx.chi_exp[ib]) % ctx.chi_order + ctx.chi_order) %
                     ctx.chi_order;
            acc.add_root((e * (ctx.L / ctx.chi_order) + *oexp) % ctx.L);
        }
    }
    return acc;
}

// Case-analysis evaluator: the integral decomposes into the k <= -1, k = 0 and
// k >= 1 regimes, each a one-variable character sum over a derived window.
// Agrees exactly with eval_orbital_bruteforce.
inline OrbitalValue eval_orbital_cases(const LocalPlaceData& place, const Rational& t) {
    if (t == 0 || t == 1) throw std::domain_error("eval_orbital_cases: t must avoid {0, 1}");
    if (place.n == 0)
        throw std::domain_error("eval_orbital_cases: n = 0 places use eval_orbital_unramified");

    detail::OrbitalContext ctx(place);
    const long p = place.p;
    const long et = valuation(t, p);
    const long e1 = valuation(Rational(1) - t, p);

    CyclotomicSum acc{ctx.L};
    std::vector<BranchTerm> trace;
    bool hit = false;

    auto push = [&](long k, long r1, long r2, const char* label, CyclotomicSum part) {
        if (!part.structurally_zero()) hit = true;
        acc += part;
        trace.push_back(BranchTerm{k, r1, r2, label, std::move(part)});
    };

    // k <= -1: only at sigma-minus places, with e(1-t) = -2k
    if (place.is_sigma_minus() && e1 != VAL_INF && e1 >= 2 && e1 % 2 == 0) {
        long k = -e1 / 2;
        if (k == -place.n && place.m == 0) {
            // boundary cell: alpha = beta = -1 mod p^n is the single candidate pair
            long alpha = ctx.pn - 1;
            Matrix2 Y{Rational(1 + alpha),
                      (Rational(1 + alpha) * alpha + t + alpha) * pow_rat(p, -place.n),
                      pow_rat(p, place.n), Rational(1 + alpha)};
            auto shift = projective_K_m_shift(Y, p, place.m);
            if (shift && *shift == k) {
                auto oexp = ctx.omega_exp(Y.d);
                if (oexp) {
                    CyclotomicSum part = CyclotomicSum::root(ctx.L, *oexp);
                    push(k, place.n, 0, "boundary k=-n", std::move(part));
                }
            } else {
                trace.push_back(BranchTerm{k, place.n, 0, "boundary k=-n (empty)",
                                           CyclotomicSum(ctx.L)});
            }
        } else if (k > -place.n && k >= place.m - place.n) {
            push(k, place.n, 0, "S(k)", charsum_S(place, k, t));
        }
    }

    // k = 0: r2 = -e(1-t) >= 0, r1 over the class window
    if (e1 != VAL_INF && e1 <= 0 && et != VAL_INF) {
        long r2 = -e1;
        long lo = std::max<long>(place.n, place.m) + e1;
        long hi = et + place.n;
        for (long r1 = lo; r1 <= hi; ++r1) {
            CyclotomicSum part = charsum_J1(place, r1, t);
            part = part * CyclotomicSum::root(ctx.L, ctx.uv_chi_exp(r2));
            push(0, r1, r2, "J1", std::move(part));
        }
    }

    // k >= 1: forces e(t) = e(1-t) <= -1, k + r1 + r2 = n, and m = n at sigma-plus
    if (et != VAL_INF && et <= -1 && place.m <= place.n) {
        for (long k = 1; k <= -et; ++k) {
            long r1 = place.n + et + k;
            long r2 = -et - 2 * k;
            CyclotomicSum part = charsum_J2(place, r1, r2, k, t);
            part = part * CyclotomicSum::root(ctx.L, ctx.uv_chi_exp(r2));
            push(k, r1, r2, "J2", std::move(part));
        }
    }

    acc *= ctx.prefactor();
    return OrbitalValue{std::move(acc), hit, std::move(trace)};
}

// Unramified evaluator (n = 0): the double integral collapses to a finite sum over
// valuation shells; each admissible shell contributes chibar(p)^{r2} times the
// shell volume. Membership is decided on the shell representative.
inline OrbitalValue eval_orbital_unramified(const LocalPlaceData& place, const Rational& t,
                                            long window_pad = 2) {
    if (t == 0 || t == 1)
        throw std::domain_error("eval_orbital_unramified: t must avoid {0, 1}");
    if (place.n != 0)
        throw std::domain_error("eval_orbital_unramified: ramified places use the n >= 1 evaluators");
    place.validate();

    detail::OrbitalContext ctx(place);
    const long p = place.p;
    const long et = valuation(t, p);
    const long e1 = valuation(Rational(1) - t, p);
    const long W = place.m + detail::abs_or_zero(et) + detail::abs_or_zero(e1) + window_pad;

    CyclotomicSum acc{ctx.L};
    std::vector<BranchTerm> trace;
    bool hit = false;
    for (long r2 = -W; r2 <= W; ++r2) {
        if ((r2 + e1) % 2 != 0) continue;
        long k = -(r2 + e1) / 2;
        for (long r1 = -W; r1 <= W; ++r1) {
            Matrix2 Y{pow_rat(p, r2), t * pow_rat(p, -r1), pow_rat(p, r1 + r2), Rational(1)};
            auto shift = projective_K_m_shift(Y, p, place.m);
            if (!shift || *shift != k) continue;
            CyclotomicSum part = CyclotomicSum::root(ctx.L, ctx.uv_chi_exp(r2));
            acc += part;
            trace.push_back(BranchTerm{k, r1, r2, "shell", std::move(part)});
            hit = true;
        }
    }
    acc *= ctx.prefactor();
    return OrbitalValue{std::move(acc), hit, std::move(trace)};
}

// Dispatch on the place class.
inline OrbitalValue eval_orbital(const LocalPlaceData& place, const Rational& t) {
    return place.n == 0 ? eval_orbital_unramified(place, t) : eval_orbital_cases(place, t);
}

inline CyclotomicSum dual_char_sum_G(const LocalPlaceData& place, long m) {
    return dual_char_sum_G(place.chi, m);
}

}  // namespace relorb
