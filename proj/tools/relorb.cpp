#include "relorb/global.hpp"
#include "relorb/lvalue.hpp"
#include "relorb/orbital.hpp"
#include "relorb/report.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <random>
#include <set>

namespace {

using namespace relorb;

// The derived t-grid {a/b : |a|, |b| <= p^{2n+2}, b | p^{2n+2}, t != 0, 1}:
// stratified deterministic sample hitting every valuation class plus a seeded fill.
std::vector<Rational> derived_t_grid(long p, int n, size_t want, uint64_t seed = 88) {
    long B = pow_long(p, 2 * n + 2);
    std::set<Rational> grid;
    std::mt19937_64 rng(seed + static_cast<uint64_t>(p) * 1000 + static_cast<uint64_t>(n));
    for (long j = 0; j <= 2 * n + 2; ++j) {
        long b = pow_long(p, static_cast<int>(j));
        if (b > B) break;
        for (long a = -25; a <= 25; ++a)
            if (a != 0 && a != b && std::labs(a) <= B) grid.insert(Rational(a, b));
        for (long off = 1; off <= 12; ++off) {
            if (b + off <= B) grid.insert(Rational(b + off, b));
            if (b - off != 0 && std::labs(b - off) <= B) grid.insert(Rational(b - off, b));
        }
        for (long i = 1; i <= 2 * n + 2; ++i) {
            long pi = pow_long(p, static_cast<int>(i));
            if (pi > B) break;
            for (long d : {-1L, 0L, 1L}) {
                long a = pi + d;
                if (a != 0 && a != b && std::labs(a) <= B) grid.insert(Rational(a, b));
                if (-a != 0 && -a != b) grid.insert(Rational(-a, b));
            }
        }
        std::uniform_int_distribution<long> U(1, B);
        for (int r = 0; r < 40; ++r) {
            long a = U(rng) * (rng() % 2 ? 1 : -1);
            if (a != 0 && a != b) grid.insert(Rational(a, b));
        }
    }
    std::vector<Rational> v(grid.begin(), grid.end());
    std::shuffle(v.begin(), v.end(), rng);
    if (v.size() > want) v.resize(want);
    return v;
}

UnitGroupCharacter single_local_part(const DirichletCharacter& chi, long p, int n) {
    if (n == 0) return UnitGroupCharacter::trivial(p, 0);
    const UnitGroupCharacter* part = chi.part_at(p);
    if (!part || part->n() != n)
        throw std::invalid_argument("character spec does not give a local factor mod p^n at p=" +
                                    std::to_string(p));
    return *part;
}

LocalPlaceData place_from_flags(long p, int n, int m, const std::string& chi_spec,
                                const std::string& uv, const std::string& omega_spec,
                                const std::string& omega_uv) {
    LocalCharacter chi;
    if (n == 0 && (chi_spec.empty() || chi_spec == "trivial")) {
        chi = LocalCharacter::trivial(p);
    } else {
        DirichletCharacter parsed = parse_character_spec(chi_spec);
        chi = LocalCharacter{single_local_part(parsed, p, n), Rational(0)};
    }
    if (!uv.empty()) chi.uniformizer_angle = LocalCharacter::reduce_angle(parse_rational(uv));
    std::optional<LocalCharacter> omega;
    if (!omega_spec.empty() && omega_spec != "trivial") {
        DirichletCharacter parsed = parse_character_spec(omega_spec);
        if (parsed.parts().size() != 1 || parsed.parts()[0].p() != p)
            throw std::invalid_argument("--omega must be a single local factor at p");
        omega = LocalCharacter{parsed.parts()[0], Rational(0)};
        if (!omega_uv.empty())
            omega->uniformizer_angle = LocalCharacter::reduce_angle(parse_rational(omega_uv));
    }
    return LocalPlaceData::make(p, m, n, chi, omega);
}

DirichletCharacter character_for_modulus(long q, const std::string& chi_spec) {
    if (!chi_spec.empty()) {
        DirichletCharacter chi = parse_character_spec(chi_spec);
        if (q > 1 && chi.modulus() != q)
            throw std::invalid_argument("--chi modulus does not match --q");
        return chi;
    }
    if (q == 1) return DirichletCharacter();
    for (long d : {q, -q})
        if (is_fundamental_discriminant(d)) return kronecker_character(d);
    throw std::invalid_argument("no canonical quadratic character mod " + std::to_string(q) +
                                "; pass --chi explicitly");
}

nlohmann::json cyclotomic_json(const CyclotomicSum& v) {
    nlohmann::json j;
    auto e = v.embed_double();
    j["re"] = fmt_double(e.real());
    j["im"] = fmt_double(e.imag());
    j["order"] = v.order();
    j["scalar"] = fmt_rational(v.scalar());
    auto& nz = j["coeffs"] = nlohmann::json::object();
    for (long i = 0; i < v.order(); ++i)
        if (v.coeffs()[static_cast<size_t>(i)] != 0)
            nz[std::to_string(i)] = v.coeffs()[static_cast<size_t>(i)].str();
    return j;
}

struct CommonFlags {
    std::string format = "json";
    std::string out;
    int threads = 1;
    double tol = 9.094947017729282e-13;  // 2^-40
};

void emit_json(const nlohmann::json& j, const std::string& path) {
    emit_text(j.dump(2) + "\n", path, std::cout);
}

int cmd_orbital_eval(long p, int n, int m, const std::string& chi_spec, const std::string& uv,
                     const std::string& omega_spec, const std::string& omega_uv,
                     const std::string& t_str, const std::string& method,
                     const CommonFlags& flags) {
    LocalPlaceData place = place_from_flags(p, n, m, chi_spec, uv, omega_spec, omega_uv);
    Rational t = parse_rational(t_str);
    OrbitalValue v;
    if (place.n == 0)
        v = eval_orbital_unramified(place, t);
    else if (method == "brute")
        v = eval_orbital_bruteforce(place, t);
    else
        v = eval_orbital_cases(place, t);
    nlohmann::json j;
    j["p"] = p;
    j["n"] = n;
    j["m"] = m;
    j["t"] = fmt_rational(t);
    j["method"] = place.n == 0 ? "unramified" : method;
    j["value"] = cyclotomic_json(v.value);
    j["support_hit"] = v.support_hit;
    auto& tr = j["branch_trace"] = nlohmann::json::array();
    for (const auto& b : v.branch_trace) {
        nlohmann::json row;
        row["k"] = b.k;
        row["r1"] = b.r1;
        row["r2"] = b.r2;
        row["label"] = b.label;
        auto e = b.partial.embed_double();
        row["partial_re"] = fmt_double(e.real());
        row["partial_im"] = fmt_double(e.imag());
        tr.push_back(row);
    }
    emit_json(j, flags.out);
    return 0;
}

int cmd_orbital_scan(long p, int n, int m, const std::string& chi_spec, const std::string& uv,
                     long count, uint64_t seed, const CommonFlags& flags) {
    LocalPlaceData place = place_from_flags(p, n, m, chi_spec, uv, "", "");
    auto ts = derived_t_grid(p, n, static_cast<size_t>(count), seed);
    struct Row {
        Rational t;
        long et, e1;
        std::complex<double> v;
        bool hit;
        bool agree;
    };
    std::vector<Row> rows(ts.size());
    parallel_for(ts.size(), flags.threads, [&](size_t i) {
        const Rational& t = ts[i];
        OrbitalValue a = place.n == 0 ? eval_orbital_unramified(place, t)
                                      : eval_orbital_cases(place, t);
        bool agree = true;
        if (place.n >= 1) {
            OrbitalValue b = eval_orbital_bruteforce(place, t);
            agree = a.value.approx_equal(b.value, -40) && a.support_hit == b.support_hit;
        }
        rows[i] = Row{t, valuation(t, p), valuation(Rational(1) - t, p), a.value.embed_double(),
                      a.support_hit, agree};
    });
    Table table;
    table.columns = {"t", "e_t", "e_1mt", "re", "im", "abs", "support_hit", "evaluators_agree"};
    for (const auto& r : rows)
        table.add_row({fmt_rational(r.t), std::to_string(r.et), std::to_string(r.e1),
                       fmt_double(r.v.real()), fmt_double(r.v.imag()), fmt_double(std::abs(r.v)),
                       r.hit ? "1" : "0", r.agree ? "1" : "0"});
    emit_report(table, flags.format == "json" ? "json" : "csv", flags.out);
    return 0;
}

int cmd_stability_scan(long q, const std::string& chi_spec, long m_min, long m_max,
                       const std::string& umax, bool support_only, const CommonFlags& flags) {
    DirichletCharacter chi = character_for_modulus(q, chi_spec);
    Rational U = parse_rational(umax);
    long lo = std::max(1L, m_min);
    if (m_max < lo) throw std::invalid_argument("stability-scan: empty M range");
    StabilityReport rep = stability_threshold_scan(chi, lo, m_max, U, !support_only, flags.threads);

    Table table;
    table.columns = {"M",     "q",     "gcd_Mq",          "R",
                     "N",     "support_size", "empty",   "finite_part_abs",
                     "finite_part_exact_zero"};
    for (const auto& r : rep.rows)
        table.add_row({std::to_string(r.M), std::to_string(chi.modulus()),
                       std::to_string(r.gcd_Mq), r.R.str(), r.N.str(),
                       std::to_string(r.support_size), r.empty ? "1" : "0",
                       fmt_double(r.finite_part_abs), r.finite_part_exact_zero ? "1" : "0"});
    if (flags.format == "json") {
        nlohmann::json j = table.to_json();
        j["divisibility_monotone"] = rep.divisibility_monotone;
        auto& sums = j["threshold_summary"] = nlohmann::json::array();
        for (const auto& s : rep.summaries) {
            nlohmann::json e;
            e["gcd_class"] = s.gcd_class;
            e["first_empty_M"] = s.first_empty_M;
            e["last_nonempty_M"] = s.last_nonempty_M;
            e["q2_gcd_umax"] = fmt_rational(s.stability_bound);
            sums.push_back(e);
        }
        emit_json(j, flags.out);
    } else {
        emit_report(table, "csv", flags.out);
    }
    return 0;
}

int cmd_charsum(const std::string& kind, long p, int n, int m, const std::string& chi_spec,
                const std::string& uv, const std::string& omega_spec, const std::string& omega_uv,
                long msum, long e_x, long k, long r1, long r2, const std::string& t_str,
                const CommonFlags& flags) {
    nlohmann::json j;
    j["kind"] = kind;
    if (kind == "ramanujan") {
        j["value"] = fmt_rational(ramanujan_sum(p, msum, e_x));
        emit_json(j, flags.out);
        return 0;
    }
    LocalPlaceData place = place_from_flags(p, n, m, chi_spec, uv, omega_spec, omega_uv);
    if (kind == "gauss") {
        j["value"] = cyclotomic_json(gauss_sum(place.chi.unit));
    } else if (kind == "G") {
        j["m"] = msum;
        j["value"] = cyclotomic_json(dual_char_sum_G(place.chi, msum));
    } else if (kind == "S") {
        j["k"] = k;
        j["value"] = cyclotomic_json(charsum_S(place, k, parse_rational(t_str)));
    } else if (kind == "J1") {
        j["r1"] = r1;
        j["value"] = cyclotomic_json(charsum_J1(place, r1, parse_rational(t_str)));
    } else if (kind == "J2") {
        j["r1"] = r1;
        j["r2"] = r2;
        j["k"] = k;
        j["value"] = cyclotomic_json(charsum_J2(place, r1, r2, k, parse_rational(t_str)));
    } else {
        throw std::invalid_argument("charsum: unknown kind '" + kind + "'");
    }
    emit_json(j, flags.out);
    return 0;
}

int cmd_smallcell(long p, int n, int m, const std::string& chi_spec, const std::string& uv,
                  long e_x, const std::string& s_str, bool check, const CommonFlags& flags) {
    LocalPlaceData place = place_from_flags(p, n, m, chi_spec, uv, "", "");
    Rational s = parse_rational(s_str);
    SmallCellValue v = small_cell_local_eval(place, e_x, s);
    nlohmann::json j;
    j["p"] = p;
    j["e_x"] = e_x;
    j["s"] = fmt_rational(s);
    j["coeff"] = cyclotomic_json(v.coeff);
    j["p_exponent"] = fmt_rational(v.p_exponent);
    auto e = v.embed().to_double();
    j["re"] = fmt_double(e.real());
    j["im"] = fmt_double(e.imag());
    if (check) {
        SmallCellValue b = small_cell_shell_bruteforce(place, e_x, s);
        auto be = b.embed().to_double();
        j["bruteforce_re"] = fmt_double(be.real());
        j["bruteforce_im"] = fmt_double(be.imag());
        j["agree"] = v.approx_equal(b, -40);
    }
    emit_json(j, flags.out);
    return 0;
}

int cmd_dualkernel(long p, int n, int m, const std::string& chi_spec, const std::string& uv,
                   long e_x, long direct_cap, const CommonFlags& flags) {
    LocalPlaceData place = place_from_flags(p, n, m, chi_spec, uv, "", "");
    CyclotomicSum v = dual_kernel_eval(place, e_x);
    nlohmann::json j;
    j["p"] = p;
    j["e_x"] = e_x;
    j["value"] = cyclotomic_json(v);
    if (direct_cap > 0) {
        CyclotomicSum d = dual_kernel_direct_sum(place, e_x, direct_cap);
        auto de = d.embed_double();
        j["direct_re"] = fmt_double(de.real());
        j["direct_im"] = fmt_double(de.imag());
        auto ve = v.embed_double();
        j["direct_gap"] = fmt_double(std::abs(std::complex<double>(ve.real() - de.real(),
                                                                   ve.imag() - de.imag())));
    }
    emit_json(j, flags.out);
    return 0;
}

std::vector<std::pair<long, long>> parse_eta_spec(const std::string& s) {
    std::vector<std::pair<long, long>> spec;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        auto colon = tok.find(':');
        if (colon == std::string::npos)
            throw std::invalid_argument("eta spec: expected d:r pairs, got '" + tok + "'");
        spec.emplace_back(std::stol(tok.substr(0, colon)), std::stol(tok.substr(colon + 1)));
    }
    return spec;
}

int cmd_moment(const std::string& coeffs_path, const std::string& eta, long level, int weight,
               const std::string& label, long q, const std::string& chi_spec, long terms,
               long K, const CommonFlags& flags) {
    std::vector<NewformData> forms;
    if (!coeffs_path.empty()) {
        forms = ingest_newforms(coeffs_path);
    } else if (!eta.empty()) {
        forms.push_back(newform_from_eta(label.empty() ? "eta" : label, level, weight,
                                         parse_eta_spec(eta), static_cast<size_t>(K)));
    } else {
        throw std::invalid_argument("moment: need --coeffs or --eta");
    }
    DirichletCharacter chi = character_for_modulus(q, chi_spec);
    MomentReport rep = second_moment(forms, chi, terms, flags.threads);

    Table table;
    table.columns = {"N", "k", "q", "label", "L_re", "L_im", "absL2"};
    for (const auto& row : rep.rows)
        table.add_row({std::to_string(rep.N), std::to_string(rep.k), std::to_string(rep.q),
                       row.label, fmt_double(row.L.real()), fmt_double(row.L.imag()),
                       fmt_double(row.absL2)});
    if (flags.format == "json") {
        nlohmann::json j = table.to_json();
        auto& s = j["summary"];
        s["S"] = fmt_double(rep.S);
        s["kN"] = fmt_double(rep.bound_kN);
        s["sqrtk_q"] = fmt_double(rep.bound_sqrtk_q);
        s["stability_indicator"] = rep.stability_indicator;
        s["threshold_constant"] = fmt_double(rep.threshold_constant);
        s["fitted_constant"] = fmt_double(rep.fitted_constant);
        emit_json(j, flags.out);
    } else {
        emit_report(table, "csv", flags.out);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact local/global geometric-side quantities and a twisted-L moment harness"};
    app.require_subcommand(1);

    CommonFlags flags;
    long p = 3, q = 1, e_x = 0, msum = 0, k = 0, r1 = 0, r2 = 0, count = 200, m_min = 1,
         m_max = 1, terms = 400, K = 1000, level = 1, direct_cap = 0;
    uint64_t seed = 88;
    int n = 1, m = 0, weight = 12;
    std::string chi_spec, uv, omega_spec, omega_uv, t_str = "2", method = "cases", umax = "1",
                kind = "gauss", s_str = "1/2", coeffs_path, eta, label;
    bool check = false, support_only = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--format", flags.format, "csv|json");
        cmd->add_option("--out", flags.out, "output path (default stdout)");
        cmd->add_option("--threads", flags.threads, "worker count");
        cmd->add_option("--tol", flags.tol, "comparison tolerance");
    };

    auto* oe = app.add_subcommand("orbital-eval", "evaluate one local regular orbital integral");
    oe->add_option("--p", p)->required();
    oe->add_option("--n", n)->required();
    oe->add_option("--m", m)->required();
    oe->add_option("--chi", chi_spec, "character spec");
    oe->add_option("--uv", uv, "uniformizer angle of chi (rational)");
    oe->add_option("--omega", omega_spec);
    oe->add_option("--omega-uv", omega_uv);
    oe->add_option("--t", t_str)->required();
    oe->add_option("--method", method, "cases|brute");
    add_common(oe);

    auto* os = app.add_subcommand("orbital-scan", "scan t over the derived grid");
    os->add_option("--p", p)->required();
    os->add_option("--n", n)->required();
    os->add_option("--m", m)->required();
    os->add_option("--chi", chi_spec);
    os->add_option("--uv", uv);
    os->add_option("--count", count);
    os->add_option("--seed", seed);
    add_common(os);

    auto* st = app.add_subcommand("stability-scan", "support lattice emptiness over an M range");
    st->add_option("--q", q)->required();
    st->add_option("--chi", chi_spec);
    st->add_option("--m-min", m_min);
    st->add_option("--m-max", m_max)->required();
    st->add_option("--umax", umax);
    st->add_flag("--support-only", support_only, "skip the orbital products");
    add_common(st);

    auto* cs = app.add_subcommand("charsum", "exact character sums");
    cs->add_option("--kind", kind, "gauss|G|ramanujan|S|J1|J2")->required();
    cs->add_option("--p", p)->required();
    cs->add_option("--n", n);
    cs->add_option("--m", m);
    cs->add_option("--chi", chi_spec);
    cs->add_option("--uv", uv);
    cs->add_option("--omega", omega_spec);
    cs->add_option("--omega-uv", omega_uv);
    cs->add_option("--msum", msum, "m parameter of G / ramanujan");
    cs->add_option("--e-x", e_x);
    cs->add_option("--k", k);
    cs->add_option("--r1", r1);
    cs->add_option("--r2", r2);
    cs->add_option("--t", t_str);
    add_common(cs);

    auto* sc = app.add_subcommand("smallcell", "small-cell local integral");
    sc->add_option("--p", p)->required();
    sc->add_option("--n", n)->required();
    sc->add_option("--m", m)->required();
    sc->add_option("--chi", chi_spec);
    sc->add_option("--uv", uv);
    sc->add_option("--e-x", e_x)->required();
    sc->add_option("--s", s_str);
    sc->add_flag("--check", check, "also run the shell brute force");
    add_common(sc);

    auto* dk = app.add_subcommand("dualkernel", "dual orbital kernel value");
    dk->add_option("--p", p)->required();
    dk->add_option("--n", n)->required();
    dk->add_option("--m", m)->required();
    dk->add_option("--chi", chi_spec);
    dk->add_option("--uv", uv);
    dk->add_option("--e-x", e_x)->required();
    dk->add_option("--direct-cap", direct_cap, "compare against direct summation to this cap");
    add_common(dk);

    auto* mo = app.add_subcommand("moment", "second moment of twisted central L-values");
    mo->add_option("--coeffs", coeffs_path, "newform file (JSON lines)");
    mo->add_option("--eta", eta, "eta-product spec d:r[,d:r...]");
    mo->add_option("--level", level);
    mo->add_option("--weight", weight);
    mo->add_option("--label", label);
    mo->add_option("--q", q);
    mo->add_option("--chi", chi_spec);
    mo->add_option("--terms", terms);
    mo->add_option("--K", K, "coefficient count for --eta");
    add_common(mo);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    try {
        if (oe->parsed())
            return cmd_orbital_eval(p, n, m, chi_spec, uv, omega_spec, omega_uv, t_str, method,
                                    flags);
        if (os->parsed()) return cmd_orbital_scan(p, n, m, chi_spec, uv, count, seed, flags);
        if (st->parsed())
            return cmd_stability_scan(q, chi_spec, m_min, m_max, umax, support_only, flags);
        if (cs->parsed())
            return cmd_charsum(kind, p, n, m, chi_spec, uv, omega_spec, omega_uv, msum, e_x, k, r1,
                               r2, t_str, flags);
        if (sc->parsed()) return cmd_smallcell(p, n, m, chi_spec, uv, e_x, s_str, check, flags);
        if (dk->parsed()) return cmd_dualkernel(p, n, m, chi_spec, uv, e_x, direct_cap, flags);
        if (mo->parsed())
            return cmd_moment(coeffs_path, eta, level, weight, label, q, chi_spec, terms, K, flags);
        std::cerr << "relorb: no subcommand\n";
        return 2;
    } catch (const relorb::IoError& e) {
        std::cerr << "relorb: I/O error: " << e.what() << "\n";
        return 4;
    } catch (const std::domain_error& e) {
        std::cerr << "relorb: domain error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "relorb: configuration error: " << e.what() << "\n";
        std::cerr << "run with --help for usage\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "relorb: error: " << e.what() << "\n";
        return 3;
    }
}
