#include "relorb/cyclotomic.hpp"

#include <catch_amalgamated.hpp>

#include <complex>
#include <random>

using namespace relorb;

namespace {

std::complex<double> naive_embed(const CyclotomicSum& s) {
    std::complex<double> acc{0, 0};
    for (long j = 0; j < s.order(); ++j) {
        double th = 2 * 3.14159265358979323846 * j / s.order();
        acc += s.coeffs()[static_cast<size_t>(j)].convert_to<double>() *
               std::complex<double>(std::cos(th), std::sin(th));
    }
    return acc * s.scalar().convert_to<double>();
}

CyclotomicSum random_sum(std::mt19937_64& rng, long order) {
    std::uniform_int_distribution<long> coeff(-9, 9), den(1, 6), num(-6, 6);
    CyclotomicSum s(order);
    for (long j = 0; j < order; ++j) s.add_root(j, Integer(coeff(rng)));
    long d = den(rng);
    long n = num(rng);
    if (n == 0) n = 1;
    s *= Rational(n, d);
    return s;
}

}  // namespace

TEST_CASE("roots and plain rationals", "[cyclotomic]") {
    auto one = CyclotomicSum::root(4, 0);
    CHECK(one.is_plain_rational());
    CHECK(one.as_plain_rational() == 1);
    auto i = CyclotomicSum::root(4, 1);
    CHECK_FALSE(i.is_plain_rational());
    auto z = CyclotomicSum(6);
    CHECK(z.structurally_zero());
    CHECK((i + i.conjugate()).approx_zero(-60));
}

TEST_CASE("embedding respects ring operations", "[cyclotomic]") {
    std::mt19937_64 rng(5150);
    for (int trial = 0; trial < 40; ++trial) {
        long la = 1 + static_cast<long>(rng() % 10), lb = 1 + static_cast<long>(rng() % 10);
        auto a = random_sum(rng, la), b = random_sum(rng, lb);
        auto ea = naive_embed(a), eb = naive_embed(b);
        CHECK(std::abs((a + b).embed_double() - (ea + eb)) < 1e-9);
        CHECK(std::abs((a * b).embed_double() - (ea * eb)) < 1e-9);
        CHECK(std::abs(a.conjugate().embed_double() - std::conj(ea)) < 1e-9);
        CHECK(std::abs((a * Rational(3, 7)).embed_double() - ea * (3.0 / 7.0)) < 1e-9);
    }
}

TEST_CASE("rescaling preserves the value", "[cyclotomic]") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        auto a = random_sum(rng, 1 + static_cast<long>(rng() % 8));
        auto b = a.rescaled_to(a.order() * (1 + static_cast<long>(rng() % 4)));
        CHECK(a.approx_equal(b, -60));
    }
}

TEST_CASE("exact zero detection vs embedding", "[cyclotomic]") {
    // 1 + zeta_3 + zeta_3^2 = 0
    CyclotomicSum s(3);
    s.add_root(0);
    s.add_root(1);
    s.add_root(2);
    CHECK(s.approx_zero(-100));
    CHECK_FALSE(s.structurally_zero());
    // sum of all p-th roots minus a stray term is far from zero
    s.add_root(1);
    CHECK_FALSE(s.approx_zero(-40));
}

TEST_CASE("addition aligns scalars exactly", "[cyclotomic]") {
    auto a = CyclotomicSum::root(4, 1) * Rational(1, 6);
    auto b = CyclotomicSum::root(6, 1) * Rational(2, 9);
    auto c = a + b;
    CHECK(std::abs(c.embed_double() -
                   (naive_embed(CyclotomicSum::root(4, 1)) / 6.0 +
                    naive_embed(CyclotomicSum::root(6, 1)) * (2.0 / 9.0))) < 1e-12);
    CHECK(c.order() == 12);
}

TEST_CASE("precision budget grows with coefficients", "[cyclotomic]") {
    CyclotomicSum s(5);
    s.add_root(2, Integer("123456789012345678901234567890"));
    CHECK(s.required_precision() > 160);
    auto e = s.embed();
    CHECK(e.abs().to_double() > 1e29);
}

TEST_CASE("self addition doubles", "[cyclotomic]") {
    auto a = CyclotomicSum::root(6, 1) * Rational(3, 5);
    auto before = a.embed_double();
    a += a;
    CHECK(std::abs(a.embed_double() - 2.0 * before) < 1e-12);
}
