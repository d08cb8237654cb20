#include "relorb/matrix2.hpp"

#include <catch_amalgamated.hpp>

#include <random>

using namespace relorb;

namespace {

Matrix2 m2(long a, long b, long c, long d) {
    return Matrix2{Rational(a), Rational(b), Rational(c), Rational(d)};
}

// |GL2(Z/p^m)| and |{c = 0 subgroup}| by direct enumeration; their ratio is the
// index of K[m] in K.
long index_by_enumeration(long p, int m) {
    long mod = 1;
    for (int i = 0; i < m; ++i) mod *= p;
    long group = 0, subgroup = 0;
    for (long a = 0; a < mod; ++a)
        for (long b = 0; b < mod; ++b)
            for (long c = 0; c < mod; ++c)
                for (long d = 0; d < mod; ++d) {
                    long det = ((a * d - b * c) % mod + mod) % mod;
                    if (det % p == 0) continue;
                    ++group;
                    if (c == 0) ++subgroup;
                }
    return group / subgroup;
}

}  // namespace

TEST_CASE("K[m] membership by valuations", "[matrix2]") {
    CHECK(in_K_m(m2(1, 0, 0, 1), 3, 1));
    CHECK(in_K_m(m2(1, 0, 3, 1), 3, 1));
    CHECK_FALSE(in_K_m(m2(1, 0, 1, 1), 3, 1));
    CHECK_FALSE(in_K_m(Matrix2{Rational(1, 3), Rational(0), Rational(0), Rational(1)}, 3, 0));
    CHECK_FALSE(in_K_m(m2(3, 0, 0, 1), 3, 0));  // determinant not a unit
    CHECK(in_K_m(m2(2, 5, 9, 7), 3, 2));
}

TEST_CASE("projective shift examples", "[matrix2]") {
    Matrix2 scaled{Rational(1, 5), Rational(0), Rational(0), Rational(1, 5)};
    auto k = projective_K_m_shift(scaled, 5, 0);
    REQUIRE(k.has_value());
    CHECK(*k == 1);
    CHECK(projective_K_m_shift(m2(1, 0, 0, 1), 7, 0) == 0);
    // oracle: no k in a window brings (1,0;1,1) into K_3[1]
    for (long kk = -4; kk <= 4; ++kk)
        CHECK_FALSE(in_K_m(m2(1, 0, 1, 1).scaled_by_p_power(3, kk), 3, 1));
    CHECK_FALSE(projective_K_m_shift(m2(1, 0, 1, 1), 3, 1).has_value());
}

TEST_CASE("projective shift uniqueness", "[matrix2]") {
    std::mt19937_64 rng(42);
    std::uniform_int_distribution<long> entry(-40, 40), poww(-3, 3);
    for (long p : {2L, 3L, 5L}) {
        for (int m : {0, 1, 2}) {
            int found = 0;
            for (int trial = 0; trial < 4000 && found < 60; ++trial) {
                Matrix2 g = m2(entry(rng), entry(rng), entry(rng), entry(rng));
                if (g.det() == 0 || valuation(g.det(), p) % 2 != 0) continue;
                g = g.scaled_by_p_power(p, poww(rng));
                auto k = projective_K_m_shift(g, p, m);
                if (!k) continue;
                ++found;
                for (long j = *k - 2; j <= *k + 2; ++j)
                    CHECK(in_K_m(g.scaled_by_p_power(p, j), p, m) == (j == *k));
            }
            CHECK(found > 0);
        }
    }
}

TEST_CASE("vol_K_bar closed form and coset oracle", "[matrix2]") {
    CHECK(vol_K_bar(5, 0) == Rational(1));
    CHECK(vol_K_bar(5, 1) == Rational(1, 6));
    CHECK(vol_K_bar(2, 3) == Rational(1, 12));
    for (auto [p, m] : std::vector<std::pair<long, int>>{{2, 1}, {3, 1}, {5, 1}, {2, 2}, {3, 2},
                                                         {2, 3}, {3, 3}, {2, 4}}) {
        if (pow_int(p, m) > 27) continue;
        CHECK(vol_K_bar(p, m) * index_by_enumeration(p, m) == 1);
    }
}
