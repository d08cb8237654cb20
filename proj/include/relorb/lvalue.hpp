#pragma once

#include "relorb/characters.hpp"
#include "relorb/newforms.hpp"
#include "relorb/parallel.hpp"

#include <cmath>
#include <complex>
#include <string>
#include <vector>

namespace relorb {

struct LValueResult {
    std::complex<double> value;        // L(1/2, f x chi), analytic normalization
    long truncation = 0;
    double afe_discrepancy = 0.0;
    std::complex<double> root_number{1.0, 0.0};
};

namespace afe {

inline constexpr double kTwoPi = 6.28318530717958647692;

// Gamma(a, x)/Gamma(a) for integer a >= 1: e^{-x} sum_{j<a} x^j/j!.
inline double incomplete_gamma_weight(int a, double x) {
    double term = 1.0, sum = 1.0;
    for (int j = 1; j < a; ++j) {
        term *= x / j;
        sum += term;
    }
    return std::exp(-x) * sum;
}

// Smoothed Dirichlet sum I(X) = sum_n lambda_n chi(n) n^{-1/2} W(2 pi n/(X sqrt(C)))
// with lambda_n = a_n / n^{(k-1)/2} and W the normalized incomplete gamma.
inline std::complex<double> smoothed_sum(const NewformData& f, const DirichletCharacter& chi,
                                         double X, long terms) {
    const double sqrtC = std::sqrt(static_cast<double>(f.level) *
                                   static_cast<double>(chi.modulus()) * chi.modulus());
    const int a = f.weight / 2;
    std::complex<double> acc{0.0, 0.0};
    for (long n = 1; n <= terms; ++n) {
        std::complex<double> cv = chi.value(Integer(n));
        if (cv == std::complex<double>(0.0, 0.0)) continue;
        double lambda = f.a(static_cast<size_t>(n)).convert_to<double>() /
                        std::pow(static_cast<double>(n), (f.weight - 1) / 2.0);
        double w = incomplete_gamma_weight(a, kTwoPi * n / (X * sqrtC));
        acc += cv * (lambda / std::sqrt(static_cast<double>(n)) * w);
    }
    return acc;
}

inline void validate_inputs(const NewformData& f, const DirichletCharacter& chi, long terms) {
    if (f.weight % 2 != 0 || f.weight < 2)
        throw std::invalid_argument("central_value_afe: weight must be even and >= 2");
    if (chi.modulus() > 1 && (!chi.is_primitive() || !chi.is_real()))
        throw std::invalid_argument("central_value_afe: chi must be trivial or primitive quadratic");
    if (std::gcd(f.level, chi.modulus()) != 1)
        throw std::invalid_argument("central_value_afe: gcd(q, N) = 1 required");
    if (terms < 1) throw std::invalid_argument("central_value_afe: terms must be >= 1");
    if (static_cast<long>(f.count()) < terms)
        throw std::invalid_argument("central_value_afe: needs K >= " + std::to_string(terms) +
                                    " coefficients, have " + std::to_string(f.count()));
}

}  // namespace afe

// Root number from the two-sided AFE: the unbalanced identity
// Lambda(1/2) = I(X) + eps I(1/X) at two deformation points X pins eps without any
// classical sign convention. Post-validated to unit modulus; real data snaps to +-1.
inline std::complex<double> root_number_fit(const NewformData& f, const DirichletCharacter& chi,
                                            long terms, double X2 = 1.25) {
    afe::validate_inputs(f, chi, terms);
    const double X1 = 1.0;
    if (X2 <= 1.0) throw std::invalid_argument("root_number_fit: X2 must exceed 1");
    std::complex<double> i1 = afe::smoothed_sum(f, chi, X1, terms);
    std::complex<double> i2 = afe::smoothed_sum(f, chi, X2, terms);
    std::complex<double> d1 = afe::smoothed_sum(f, chi, 1.0 / X1, terms);
    std::complex<double> d2 = afe::smoothed_sum(f, chi, 1.0 / X2, terms);
    std::complex<double> den = d2 - d1;
    if (std::abs(den) < 1e-12)
        throw std::runtime_error("root_number_fit: ill-conditioned fit; increase coefficients/terms");
    std::complex<double> eps = (i1 - i2) / den;
    if (std::abs(std::abs(eps) - 1.0) > 1e-8)
        throw std::runtime_error("root_number_fit: |eps| = " + std::to_string(std::abs(eps)) +
                                 " fails the unit-modulus check");
    if (std::abs(eps.imag()) < 1e-6 && std::abs(std::abs(eps.real()) - 1.0) < 1e-6)
        eps = {eps.real() > 0 ? 1.0 : -1.0, 0.0};
    return eps;
}

// L(1/2, f x chi) by the approximate functional equation balanced at sqrt(C),
// C = N q^2: L = (1 + eps) sum_n lambda_n chi(n) n^{-1/2} W(2 pi n / sqrt(C)).
inline LValueResult central_value_afe(const NewformData& f, const DirichletCharacter& chi,
                                      long terms) {
    afe::validate_inputs(f, chi, terms);
    std::complex<double> eps = root_number_fit(f, chi, terms);
    auto lambda_at = [&](long T) {
        std::complex<double> base = afe::smoothed_sum(f, chi, 1.0, T);
        return base + eps * base;
    };
    std::complex<double> L = lambda_at(terms);
    long T2 = std::min<long>(2 * terms, static_cast<long>(f.count()));
    double disc = T2 > terms ? std::abs(L - lambda_at(T2)) : 0.0;
    return LValueResult{L, terms, disc, eps};
}

struct MomentRow {
    std::string label;
    std::complex<double> L;
    double absL2 = 0.0;
    double afe_discrepancy = 0.0;
    std::complex<double> root_number{1.0, 0.0};
};

struct MomentReport {
    long N = 1;
    int k = 12;
    long q = 1;
    std::vector<MomentRow> rows;     // ordered by label
    double S = 0.0;                  // sum of |L|^2
    double bound_kN = 0.0;
    double bound_sqrtk_q = 0.0;
    bool stability_indicator = false;  // N <= c q^2 gcd(N, q)
    double threshold_constant = 1.0;
    double fitted_constant = 0.0;      // S / (kN + sqrt(k) q [indicator])
};

// Second moment over a fixed-(N, k) family: S = sum |L(1/2, f x chi)|^2 with the
// bound components of the moment estimate and the fitted proportionality constant.
inline MomentReport second_moment(std::vector<NewformData> forms, const DirichletCharacter& chi,
                                  long terms, int threads = 1, double threshold_constant = 1.0) {
    MomentReport rep;
    rep.q = chi.modulus();
    rep.threshold_constant = threshold_constant;
    if (forms.empty()) return rep;
    for (const auto& f : forms)
        if (f.level != forms[0].level || f.weight != forms[0].weight)
            throw std::invalid_argument("second_moment: all forms must share (N, k)");
    std::sort(forms.begin(), forms.end(),
              [](const NewformData& a, const NewformData& b) { return a.label < b.label; });
    rep.N = forms[0].level;
    rep.k = forms[0].weight;

    std::vector<MomentRow> rows(forms.size());
    parallel_for(forms.size(), threads, [&](size_t i) {
        LValueResult r = central_value_afe(forms[i], chi, terms);
        rows[i] = MomentRow{forms[i].label, r.value, std::norm(r.value), r.afe_discrepancy,
                            r.root_number};
    });
    rep.rows = std::move(rows);
    for (const auto& row : rep.rows) rep.S += row.absL2;  // label order: deterministic

    rep.bound_kN = static_cast<double>(rep.k) * rep.N;
    rep.bound_sqrtk_q = std::sqrt(static_cast<double>(rep.k)) * rep.q;
    double g = static_cast<double>(std::gcd(rep.N, rep.q));
    rep.stability_indicator =
        static_cast<double>(rep.N) <= threshold_constant * rep.q * rep.q * g;
    double denomv = rep.bound_kN + (rep.stability_indicator ? rep.bound_sqrtk_q : 0.0);
    rep.fitted_constant = denomv > 0 ? rep.S / denomv : 0.0;
    return rep;
}

}  // namespace relorb
