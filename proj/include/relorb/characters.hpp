#pragma once

#include "relorb/cyclotomic.hpp"
#include "relorb/rational.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <vector>

namespace relorb {

inline long phi_prime_power(long p, int n) {
    if (n == 0) return 1;
    long r = p - 1;
    for (int i = 1; i < n; ++i) r *= p;
    return r;
}

inline long pow_long(long b, int e) {
    long r = 1;
    while (e-- > 0) r *= b;
    return r;
}

inline long mul_order_mod(long g, long mod) {
    long x = g % mod, ord = 1;
    while (x != 1) {
        x = (x * g) % mod;
        if (++ord > mod) throw std::logic_error("mul_order_mod: not a unit");
    }
    return ord;
}

// Least primitive root of (Z/p^n)^x for odd p; a generator mod p that stays
// primitive mod p^2 generates every (Z/p^n)^x. For p = 2 only n = 2 is cyclic.
inline long canonical_generator(long p, int n) {
    if (p == 2) {
        if (n == 2) return 3;
        throw std::invalid_argument("canonical_generator: (Z/2^n)^x is not cyclic for n >= 3");
    }
    for (long g = 2; g < p; ++g) {
        if (mul_order_mod(g, p) == p - 1) {
            if (n == 1) return g;
            long p2 = p * p;
            long x = 1;
            for (long i = 0; i < p - 1; ++i) x = (x * g) % p2;
            return x == 1 ? g + p : g;
        }
    }
    throw std::logic_error("canonical_generator: none found");
}

// A character of (Z/p^n)^x tabulated as discrete logs: residue u maps to the
// exponent e(u) with chi(u) = zeta_{L0}^{e(u)}. For p = 2, n >= 3 the group is
// generated by <-1, 5>.
class UnitGroupCharacter {
public:
    UnitGroupCharacter() = default;

    static UnitGroupCharacter trivial(long p, int n) {
        require_prime(p, "UnitGroupCharacter");
        UnitGroupCharacter c;
        c.p_ = p;
        c.n_ = n;
        c.order_ = 1;
        long mod = pow_long(p, n);
        c.logtab_.assign(static_cast<size_t>(mod), -1);
        for (long u = 0; u < mod; ++u)
            if (mod == 1 || u % p != 0) c.logtab_[static_cast<size_t>(u)] = 0;
        c.conductor_ = 0;
        return c;
    }

    // Exponents are zeta_{L0}-exponents of the canonical generators: one value for
    // cyclic groups, the pair (image of -1, image of 5) for p = 2, n >= 3.
    static UnitGroupCharacter from_generator_exponents(long p, int n, std::vector<long> exps,
                                                       long order = 0) {
        require_prime(p, "build_unit_character");
        if (n < 0) throw std::invalid_argument("build_unit_character: n must be >= 0");
        if (n == 0 || (p == 2 && n == 1)) {
            for (long e : exps)
                if (order > 0 && e % order != 0)
                    throw std::invalid_argument(
                        "build_unit_character: nontrivial exponent on a trivial group");
            return trivial(p, n);
        }

        UnitGroupCharacter c;
        c.p_ = p;
        c.n_ = n;
        long mod = pow_long(p, n);
        c.logtab_.assign(static_cast<size_t>(mod), -1);

        if (p == 2 && n >= 3) {
            long five_order = pow_long(2, n - 2);
            c.order_ = order > 0 ? order : std::max(2L, five_order);
            if (exps.size() != 2)
                throw std::invalid_argument(
                    "build_unit_character: p=2, n>=3 needs two exponents (images of -1 and 5)");
            check_compatible(exps[0], 2, c.order_);
            check_compatible(exps[1], five_order, c.order_);
            for (long a = 0; a <= 1; ++a) {
                long ua = a == 0 ? 1 : mod - 1;
                long e5 = 0, u5 = 1;
                for (long b = 0; b < five_order; ++b) {
                    long u = mulmod(ua, u5, mod);
                    c.logtab_[static_cast<size_t>(u)] = mod_pos(a * exps[0] + e5, c.order_);
                    u5 = mulmod(u5, 5, mod);
                    e5 = mod_pos(e5 + exps[1], c.order_);
                }
            }
        } else {
            long g = canonical_generator(p, n);
            long ord_g = phi_prime_power(p, n);
            c.order_ = order > 0 ? order : ord_g;
            if (exps.size() != 1)
                throw std::invalid_argument("build_unit_character: cyclic group takes one exponent");
            check_compatible(exps[0], ord_g, c.order_);
            long u = 1, e = 0;
            for (long j = 0; j < ord_g; ++j) {
                c.logtab_[static_cast<size_t>(u)] = e;
                u = mulmod(u, g, mod);
                e = mod_pos(e + exps[0], c.order_);
            }
        }
        c.conductor_ = c.compute_conductor();
        return c;
    }

    long p() const { return p_; }
    int n() const { return n_; }
    long order() const { return order_; }
    int conductor() const { return conductor_; }
    bool is_primitive() const { return conductor_ == n_; }
    bool is_trivial_on_units() const { return conductor_ == 0; }
    long modulus() const { return static_cast<long>(logtab_.size()); }

    // zeta_{order}-exponent at a unit residue; nullopt when the residue is not a unit.
    std::optional<long> exponent_of(long residue) const {
        long mod = modulus();
        residue %= mod;
        if (residue < 0) residue += mod;
        long e = logtab_[static_cast<size_t>(residue)];
        if (e < 0) return std::nullopt;
        return e;
    }

    std::optional<long> exponent_of(const Integer& residue) const {
        Integer r = residue % Integer(modulus());
        return exponent_of(r.convert_to<long>());
    }

    UnitGroupCharacter inverse() const {
        UnitGroupCharacter c = *this;
        for (auto& e : c.logtab_)
            if (e > 0) e = order_ - e;
        return c;
    }

    bool is_real() const {
        for (long u = 0; u < modulus(); ++u) {
            long e = logtab_[static_cast<size_t>(u)];
            if (e > 0 && (2 * e) % order_ != 0) return false;
        }
        return true;
    }

    CyclotomicSum value(long residue) const {
        auto e = exponent_of(residue);
        if (!e) return CyclotomicSum(order_);  // zero
        return CyclotomicSum::root(order_, *e);
    }

private:
    static long mod_pos(long x, long m) {
        x %= m;
        return x < 0 ? x + m : x;
    }
    static long mulmod(long a, long b, long mod) {
        return static_cast<long>(
            (static_cast<unsigned long long>(a) * static_cast<unsigned long long>(b)) %
            static_cast<unsigned long long>(mod));
    }
    static void check_compatible(long e, long gen_order, long L0) {
        // chi(g)^{ord(g)} must be 1: e * ord(g) = 0 mod L0
        if (mod_pos(e, L0) * gen_order % L0 != 0)
            throw std::invalid_argument(
                "build_unit_character: exponent incompatible with generator order");
    }

    int compute_conductor() const {
        if (n_ == 0) return 0;
        long mod = modulus();
        for (int c = 0; c <= n_; ++c) {
            long step = pow_long(p_, c);
            bool trivial_here = true;
            for (long u = 1; u < mod && trivial_here; u += step)
                if (logtab_[static_cast<size_t>(u)] > 0) trivial_here = false;
            if (trivial_here) return c;
        }
        return n_;
    }

    long p_ = 2;
    int n_ = 0;
    long order_ = 1;
    int conductor_ = 0;
    std::vector<long> logtab_ = {0};
};

inline UnitGroupCharacter build_unit_character(long p, int n, std::vector<long> generator_exponents,
                                               long order = 0) {
    return UnitGroupCharacter::from_generator_exponents(p, n, std::move(generator_exponents), order);
}

// A character of Q_p^x: a unit-group character together with a root-of-unity value
// on the uniformizer, stored as the rational angle e with value exp(2 pi i e).
struct LocalCharacter {
    UnitGroupCharacter unit;
    Rational uniformizer_angle = 0;

    long p() const { return unit.p(); }
    int n() const { return unit.n(); }

    static LocalCharacter trivial(long p) {
        return LocalCharacter{UnitGroupCharacter::trivial(p, 0), Rational(0)};
    }

    static Rational floor_rational(const Rational& x) {
        Integer q = numerator(x) / denominator(x);
        if (x < 0 && q * denominator(x) != numerator(x)) q -= 1;
        return Rational(q);
    }

    static Rational reduce_angle(Rational a) {
        a -= floor_rational(a);
        return a;
    }

    static CyclotomicSum angle_to_root(const Rational& a) {
        Rational r = reduce_angle(a);
        long den = denominator(r).convert_to<long>();
        long num = numerator(r).convert_to<long>();
        return CyclotomicSum::root(den, num);
    }

    // Angle (in [0,1)) of the value at nonzero x, via the extension
    // chi(x) = uniformizer_value^{e_p(x)} * chi_unit(unit part). Nullopt means value 0
    // (unit part outside the tabulated units).
    std::optional<Rational> angle(const Rational& x) const {
        if (x == 0) return std::nullopt;
        long v = valuation(x, p());
        Rational a = uniformizer_angle * v;
        if (unit.n() > 0) {
            ResidueUnit u = unit_residue(x, p(), unit.n());
            auto e = unit.exponent_of(u.value);
            if (!e) return std::nullopt;
            a += Rational(*e, unit.order());
        }
        return reduce_angle(a);
    }

    CyclotomicSum value(const Rational& x) const {
        auto a = angle(x);
        if (!a) return CyclotomicSum(1);  // zero
        return angle_to_root(*a);
    }
};

// Gauss sum tau(chi) = sum over units alpha mod p^n of psi(alpha p^{-n}) chi(alpha),
// with the standard unramified additive character psi(alpha p^{-n}) = zeta_{p^n}^alpha.
inline CyclotomicSum gauss_sum(const UnitGroupCharacter& chi) {
    if (chi.n() < 1 || !chi.is_primitive())
        throw std::invalid_argument("gauss_sum: character must be primitive mod p^n, n >= 1");
    long mod = chi.modulus();
    long L = std::lcm(chi.order(), mod);
    CyclotomicSum s(L);
    for (long a = 1; a < mod; ++a) {
        auto e = chi.exponent_of(a);
        if (!e) continue;
        s.add_root(a * (L / mod) + *e * (L / chi.order()));
    }
    return s;
}

// Integral of psi(gamma p^m x) over the unit sphere, Vol = 1, with e_p(x) = e_x.
// Takes the value 1 / -1/(p-1) / 0 according to m + e_x >= 0 / = -1 / <= -2.
inline Rational ramanujan_sum(long p, long m, long e_x) {
    require_prime(p, "ramanujan_sum");
    long s = m + e_x;
    if (s >= 0) return Rational(1);
    if (s == -1) return Rational(-1, p - 1);
    return Rational(0);
}

// G(m) = sum over alpha of chi(1 + alpha p^{m-n}); negative-valuation arguments go
// through the LocalCharacter extension. Arguments of positive valuation (possible
// only at m = n) use the canonical representative lift in [1, p^n].
inline CyclotomicSum dual_char_sum_G(const LocalCharacter& chi, long m) {
    int n = chi.n();
    if (n < 1) throw std::invalid_argument("dual_char_sum_G: needs n >= 1");
    long p = chi.p();
    long mod = pow_long(p, n);
    if (m >= 2 * n) return CyclotomicSum::root(1, 0, Integer(phi_prime_power(p, n)));
    CyclotomicSum acc{chi.unit.order()};
    for (long a = 1; a < mod; ++a) {
        if (a % p == 0) continue;
        Rational arg = Rational(1) + Rational(a) * pow_rat(p, m - n);
        acc += chi.value(arg);
    }
    return acc;
}

// Primitive Dirichlet character of modulus q, held as its prime-power local parts
// and combined through the Chinese remainder theorem.
class DirichletCharacter {
public:
    DirichletCharacter() = default;  // the trivial character mod 1

    explicit DirichletCharacter(std::vector<UnitGroupCharacter> parts) : parts_(std::move(parts)) {
        std::sort(parts_.begin(), parts_.end(),
                  [](const auto& a, const auto& b) { return a.p() < b.p(); });
        modulus_ = 1;
        for (const auto& c : parts_) {
            if (c.n() == 0) throw std::invalid_argument("DirichletCharacter: empty local part");
            modulus_ *= c.modulus();
        }
    }

    const std::vector<UnitGroupCharacter>& parts() const { return parts_; }
    long modulus() const { return modulus_; }

    bool is_primitive() const {
        for (const auto& c : parts_)
            if (!c.is_primitive()) return false;
        return true;
    }

    int conductor_exponent_at(long p) const {
        for (const auto& c : parts_)
            if (c.p() == p) return c.conductor();
        return 0;
    }

    const UnitGroupCharacter* part_at(long p) const {
        for (const auto& c : parts_)
            if (c.p() == p) return &c;
        return nullptr;
    }

    // Angle of chi(a) in [0,1); nullopt when gcd(a, q) > 1 (value 0).
    std::optional<Rational> angle(const Integer& a) const {
        Rational total = 0;
        for (const auto& c : parts_) {
            auto e = c.exponent_of(a);
            if (!e) return std::nullopt;
            total += Rational(*e, c.order());
        }
        return LocalCharacter::reduce_angle(total);
    }

    std::optional<Rational> angle(long a) const { return angle(Integer(a)); }

    // chi extended multiplicatively to rationals whose valuation vanishes at p | q.
    std::optional<Rational> angle(const Rational& x) const {
        if (x == 0) return parts_.empty() ? std::optional<Rational>(Rational(0)) : std::nullopt;
        Rational total = 0;
        for (const auto& c : parts_) {
            if (valuation(x, c.p()) != 0) return std::nullopt;
            ResidueUnit u = unit_residue(x, c.p(), c.n());
            auto e = c.exponent_of(u.value);
            if (!e) return std::nullopt;
            total += Rational(*e, c.order());
        }
        return LocalCharacter::reduce_angle(total);
    }

    std::complex<double> value(const Integer& a) const {
        auto an = angle(a);
        if (!an) return {0.0, 0.0};
        double th = 2.0 * 3.14159265358979323846 * an->convert_to<double>();
        return {std::cos(th), std::sin(th)};
    }

    bool is_real() const {
        for (const auto& c : parts_)
            if (!c.is_real()) return false;
        return true;
    }

    // chi(-1) as +1/-1.
    int parity() const {
        auto a = angle(Integer(-1));
        if (!a) throw std::logic_error("parity: -1 must be a unit");
        return *a == 0 ? 1 : -1;
    }

private:
    std::vector<UnitGroupCharacter> parts_;
    long modulus_ = 1;
};

inline bool is_fundamental_discriminant(long d) {
    if (d == 0) return false;
    if (d == 1) return true;
    auto squarefree = [](long x) {
        x = std::labs(x);
        for (long f = 2; f * f <= x; ++f)
            if (x % (f * f) == 0) return false;
        return true;
    };
    long r = ((d % 4) + 4) % 4;
    if (r == 1) return squarefree(d);
    if (r == 0) {
        long m = d / 4;
        long rm = ((m % 4) + 4) % 4;
        return (rm == 2 || rm == 3) && squarefree(m);
    }
    return false;
}

inline int kronecker_symbol(long d, const Integer& a) {
    Integer dz(d);
    return mpz_kronecker(dz.backend().data(), a.backend().data());
}

inline Integer crt_lift(long u, long pn, long cof, long q) {
    if (cof == 1) return Integer(((u % q) + q) % q);
    // x = u mod pn, x = 1 mod cof
    Integer inv = mod_inverse(Integer(cof % pn), Integer(pn));
    Integer x = Integer(1) + Integer(cof) * ((Integer(u - 1) * inv) % pn);
    Integer qz(q);
    x %= qz;
    if (x < 0) x += qz;
    return x;
}

// The real primitive character of modulus |d| attached to a fundamental
// discriminant, chi(a) = (d|a). Each prime-power local part is cut out of the
// Kronecker symbol by a CRT section.
inline DirichletCharacter kronecker_character(long d) {
    if (!is_fundamental_discriminant(d))
        throw std::invalid_argument("kronecker_character: " + std::to_string(d) +
                                    " is not a fundamental discriminant");
    if (d == 1) return DirichletCharacter();
    long q = std::labs(d);
    std::vector<UnitGroupCharacter> parts;
    long rest = q;
    for (long p = 2; rest > 1; ++p) {
        if (rest % p != 0) continue;
        int n = 0;
        long pn = 1;
        while (rest % p == 0) {
            rest /= p;
            ++n;
            pn *= p;
        }
        long cof = q / pn;
        if (p == 2) {
            if (n == 2) {
                long e = kronecker_symbol(d, crt_lift(3, pn, cof, q)) == 1 ? 0 : 1;
                parts.push_back(build_unit_character(2, 2, {e}, 2));
            } else if (n == 3) {
                long e1 = kronecker_symbol(d, crt_lift(7, pn, cof, q)) == 1 ? 0 : 1;
                long e5 = kronecker_symbol(d, crt_lift(5, pn, cof, q)) == 1 ? 0 : 1;
                parts.push_back(build_unit_character(2, 3, {e1, e5}, 2));
            } else {
                throw std::logic_error("kronecker_character: unexpected 2-exponent");
            }
        } else {
            long g = canonical_generator(p, n);
            long e = kronecker_symbol(d, crt_lift(g, pn, cof, q)) == 1 ? 0 : 1;
            parts.push_back(build_unit_character(p, n, {e * (phi_prime_power(p, n) / 2)}));
        }
    }
    DirichletCharacter chi(std::move(parts));
    if (!chi.is_primitive())
        throw std::logic_error("kronecker_character: built character is imprimitive");
    return chi;
}

// Local components of the Hecke character attached to a primitive Dirichlet
// character: at p | q the unit part is the inverse of the p-part and the
// uniformizer value is pinned by the product formula; at p coprime to q the unit
// part is trivial and the uniformizer value is chi(p).
inline std::map<long, LocalCharacter> local_components(const DirichletCharacter& chi) {
    if (!chi.is_primitive())
        throw std::invalid_argument("local_components: character must be primitive");
    std::map<long, LocalCharacter> out;
    for (const auto& part : chi.parts()) {
        long p = part.p();
        Rational uv = 0;
        for (const auto& other : chi.parts()) {
            if (other.p() == p) continue;
            auto e = other.exponent_of(p % other.modulus());
            if (!e) throw std::logic_error("local_components: prime divides two parts");
            uv += Rational(*e, other.order());
        }
        out.insert_or_assign(p, LocalCharacter{part.inverse(), LocalCharacter::reduce_angle(uv)});
    }
    return out;
}

// The component at a prime not dividing q: trivial on units, chi(p) on the uniformizer.
inline LocalCharacter local_component_unramified(const DirichletCharacter& chi, long p) {
    auto a = chi.angle(Integer(p));
    if (!a) throw std::invalid_argument("local_component_unramified: p divides the conductor");
    return LocalCharacter{UnitGroupCharacter::trivial(p, 0), *a};
}

// ---------------------------------------------------------------------------
// Character specification mini-language:
//   "kronecker:<d>"                       real primitive character mod |d|
//   "p:<p>,n:<n>,g:<e>[;p:...]"           canonical-generator exponent per factor
//   "p:2,n:<n>,g:<e1>:<e5>"  (n >= 3)     e1 flags chi(-1) = -1; e5 is the
//                                         zeta_{2^{n-2}}-exponent of chi(5)
// ---------------------------------------------------------------------------
inline DirichletCharacter parse_character_spec(const std::string& spec) {
    auto to_long = [](const std::string& s) {
        try {
            size_t used = 0;
            long v = std::stol(s, &used);
            if (used != s.size()) throw std::invalid_argument("trailing junk");
            return v;
        } catch (const std::exception&) {
            throw std::invalid_argument("character spec: bad number '" + s + "'");
        }
    };
    if (spec.rfind("kronecker:", 0) == 0) return kronecker_character(to_long(spec.substr(10)));
    if (spec.empty() || spec == "trivial") return DirichletCharacter();
    std::vector<UnitGroupCharacter> parts;
    std::stringstream ss(spec);
    std::string factor;
    while (std::getline(ss, factor, ';')) {
        long p = -1, n = -1;
        std::vector<long> gexps;
        std::stringstream fs(factor);
        std::string kv;
        while (std::getline(fs, kv, ',')) {
            auto colon = kv.find(':');
            if (colon == std::string::npos)
                throw std::invalid_argument("character spec: bad token '" + kv + "'");
            std::string key = kv.substr(0, colon), val = kv.substr(colon + 1);
            if (key == "p") p = to_long(val);
            else if (key == "n") n = to_long(val);
            else if (key == "g") {
                std::stringstream gs(val);
                std::string e;
                while (std::getline(gs, e, ':')) gexps.push_back(to_long(e));
            } else {
                throw std::invalid_argument("character spec: unknown key '" + key + "'");
            }
        }
        if (p < 2 || n < 0 || gexps.empty())
            throw std::invalid_argument("character spec: factor needs p, n and g");
        if (p == 2 && n >= 3) {
            if (gexps.size() != 2)
                throw std::invalid_argument("character spec: p=2, n>=3 needs g:<e1>:<e5>");
            long five_order = pow_long(2, static_cast<int>(n) - 2);
            long L0 = std::max(2L, five_order);
            parts.push_back(build_unit_character(
                2, static_cast<int>(n), {gexps[0] * (L0 / 2), gexps[1] * (L0 / five_order)}, L0));
        } else {
            if (gexps.size() != 1)
                throw std::invalid_argument("character spec: one generator exponent expected");
            parts.push_back(build_unit_character(p, static_cast<int>(n), {gexps[0]}));
        }
    }
    return DirichletCharacter(std::move(parts));
}

}  // namespace relorb
