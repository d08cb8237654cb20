// Walks one ramified place through the two orbital evaluators and prints the
// branch decomposition, then shows the stability threshold for a small scan.

#include "relorb/global.hpp"
#include "relorb/orbital.hpp"

#include <iostream>

int main() {
    using namespace relorb;

    auto chi = LocalCharacter{build_unit_character(5, 1, {1}), Rational(0)};
    auto place = LocalPlaceData::make(5, 1, 1, chi);
    Rational t(26, 5);

    auto brute = eval_orbital_bruteforce(place, t);
    auto cases = eval_orbital_cases(place, t);
    auto be = brute.value.embed_double();
    std::cout << "E_5(26/5) at (m, n) = (1, 1):\n";
    std::cout << "  brute force: " << be.real() << " + " << be.imag() << "i over "
              << brute.branch_trace.size() << " cells\n";
    std::cout << "  case analysis branches:\n";
    for (const auto& b : cases.branch_trace) {
        auto pe = b.partial.embed_double();
        std::cout << "    " << b.label << " (k=" << b.k << ", r1=" << b.r1 << ", r2=" << b.r2
                  << "): " << pe.real() << " + " << pe.imag() << "i\n";
    }
    std::cout << "  agree: " << (brute.value.approx_equal(cases.value, -40) ? "yes" : "no")
              << "\n\n";

    auto chi5 = kronecker_character(5);
    std::cout << "support size by level, q = 5, U_max = 1:\n  ";
    for (long M = 1; M <= 30; ++M) {
        auto setup = ramification_profile(Integer(M), chi5);
        std::cout << support_set(setup, 1).size() << (M < 30 ? " " : "\n");
    }
    return 0;
}
