#pragma once

#include "relorb/rational.hpp"

#include <json.hpp>

#include <fstream>
#include <string>
#include <utility>
#include <vector>

namespace relorb {

// Integer q-expansion of a holomorphic newform: label, level N, even weight k,
// coefficients a_1..a_K with a_1 = 1.
struct NewformData {
    std::string label;
    long level = 1;
    int weight = 12;
    std::vector<Integer> coeffs;  // coeffs[i] = a_{i+1}

    const Integer& a(size_t n) const {
        if (n < 1 || n > coeffs.size())
            throw std::out_of_range("NewformData: coefficient index out of range");
        return coeffs[n - 1];
    }
    size_t count() const { return coeffs.size(); }
};

namespace series {

// prod_{m >= 1} (1 - q^{d m}) up to q^K, by Euler's pentagonal expansion:
// sum over j in Z of (-1)^j q^{d j(3j-1)/2}.
inline std::vector<Integer> euler_factor(long d, size_t K) {
    std::vector<Integer> out(K + 1);
    out[0] = 1;
    for (long j = 1;; ++j) {
        long e1 = d * j * (3 * j - 1) / 2;
        long e2 = d * j * (3 * j + 1) / 2;
        if (static_cast<size_t>(e1) > K) break;
        int sgn = (j % 2 == 0) ? 1 : -1;
        out[static_cast<size_t>(e1)] += sgn;
        if (static_cast<size_t>(e2) <= K) out[static_cast<size_t>(e2)] += sgn;
    }
    return out;
}

inline std::vector<Integer> multiply(const std::vector<Integer>& a, const std::vector<Integer>& b,
                                     size_t K) {
    std::vector<Integer> c(K + 1);
    for (size_t i = 0; i <= K && i < a.size(); ++i) {
        if (a[i] == 0) continue;
        for (size_t j = 0; j + i <= K && j < b.size(); ++j) {
            if (b[j] == 0) continue;
            c[i + j] += a[i] * b[j];
        }
    }
    return c;
}

inline std::vector<Integer> shift(const std::vector<Integer>& a, size_t by, size_t K) {
    std::vector<Integer> c(K + 1);
    for (size_t i = 0; i + by <= K && i < a.size(); ++i) c[i + by] = a[i];
    return c;
}

}  // namespace series

// q-expansion of prod_d eta(d z)^{r_d} up to q^K, returned as coefficients of
// q^0..q^K. The leading power sum(d r)/24 must be a nonnegative integer.
inline std::vector<Integer> eta_product_coeffs(const std::vector<std::pair<long, long>>& spec,
                                               size_t K) {
    long wt24 = 0;
    for (auto [d, r] : spec) {
        if (d < 1) throw std::invalid_argument("eta_product_coeffs: scale must be >= 1");
        wt24 += d * r;
    }
    if (wt24 % 24 != 0 || wt24 < 0)
        throw std::invalid_argument("eta_product_coeffs: sum of d*r must be a nonnegative multiple of 24");
    size_t lead = static_cast<size_t>(wt24 / 24);

    std::vector<Integer> acc(K + 1);
    acc[0] = 1;
    for (auto [d, r] : spec) {
        if (r < 0) throw std::invalid_argument("eta_product_coeffs: negative exponents unsupported");
        std::vector<Integer> base = series::euler_factor(d, K);
        for (long i = 0; i < r; ++i) acc = series::multiply(acc, base, K);
    }
    if (lead > K) return std::vector<Integer>(K + 1);
    return series::shift(acc, lead, K);
}

// Convenience: cut the a_1.. sequence of a cusp-form eta product into NewformData.
inline NewformData newform_from_eta(const std::string& label, long level, int weight,
                                    const std::vector<std::pair<long, long>>& spec, size_t K) {
    std::vector<Integer> c = eta_product_coeffs(spec, K);
    if (c.empty() || c[0] != 0)
        throw std::invalid_argument("newform_from_eta: eta product is not cuspidal");
    NewformData f;
    f.label = label;
    f.level = level;
    f.weight = weight;
    f.coeffs.assign(c.begin() + 1, c.end());
    if (f.coeffs.empty() || f.coeffs[0] != 1)
        throw std::invalid_argument("newform_from_eta: a_1 must be 1");
    return f;
}

struct HeckeViolation {
    std::string kind;  // "multiplicativity" or "recursion"
    long p = 0;        // prime (recursion) or first factor (multiplicativity)
    long index = 0;    // offending coefficient index
};

// Checks a_{mn} = a_m a_n for coprime m, n and the recursion
// a_{p^{r+1}} = a_p a_{p^r} - p^{k-1} a_{p^{r-1}} at p coprime to the level.
inline std::vector<HeckeViolation> hecke_verify(const NewformData& f) {
    std::vector<HeckeViolation> out;
    const size_t K = f.count();
    for (long p = 2; static_cast<size_t>(p) * p <= K; ++p) {
        if (!is_prime(p) || f.level % p == 0) continue;
        Integer pk1 = pow_int(p, f.weight - 1);
        size_t pr = static_cast<size_t>(p);  // p^r
        for (long r = 1; pr * p <= K; ++r) {
            size_t prev = pr / p, next = pr * p;
            Integer expect = f.a(pr) * f.a(p) - pk1 * (r == 1 ? Integer(1) : f.a(prev));
            if (f.a(next) != expect)
                out.push_back({"recursion", p, static_cast<long>(next)});
            pr = next;
        }
    }
    for (size_t m = 2; m * 2 <= K; ++m) {
        for (size_t n = m + 1; m * n <= K; ++n) {
            if (std::gcd(m, n) != 1) continue;
            if (f.a(m * n) != f.a(m) * f.a(n))
                out.push_back({"multiplicativity", static_cast<long>(m), static_cast<long>(m * n)});
        }
    }
    return out;
}

// Line-delimited records: {"label": str, "level": int, "weight": int, "an": [ints]}.
// Each record is validated (a_1 = 1, Hecke relations); the first invalid record
// aborts the ingest with a diagnostic naming the line and cause.
inline std::vector<NewformData> ingest_newforms(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("ingest_newforms: cannot open " + path);
    std::vector<NewformData> out;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw std::runtime_error("ingest_newforms: line " + std::to_string(lineno) +
                                     ": parse error at byte " + std::to_string(e.byte));
        }
        NewformData f;
        try {
            f.label = j.at("label").get<std::string>();
            f.level = j.at("level").get<long>();
            f.weight = j.at("weight").get<int>();
            for (const auto& v : j.at("an")) {
                if (v.is_string())
                    f.coeffs.emplace_back(v.get<std::string>());
                else if (v.is_number_integer())
                    f.coeffs.emplace_back(Integer(v.get<long long>()));
                else
                    throw std::runtime_error("an entries must be integers");
            }
        } catch (const std::exception& e) {
            throw std::runtime_error("ingest_newforms: line " + std::to_string(lineno) +
                                     ": missing or malformed field (" + std::string(e.what()) + ")");
        }
        if (f.coeffs.empty() || f.coeffs[0] != 1)
            throw std::runtime_error("ingest_newforms: line " + std::to_string(lineno) +
                                     ": a_1 must be 1");
        auto viol = hecke_verify(f);
        if (!viol.empty())
            throw std::runtime_error("ingest_newforms: line " + std::to_string(lineno) + ": " +
                                     viol[0].kind + " violation at p=" + std::to_string(viol[0].p) +
                                     ", index " + std::to_string(viol[0].index));
        out.push_back(std::move(f));
    }
    return out;
}

inline void write_newforms(const std::vector<NewformData>& forms, const std::string& path) {
    std::ofstream outf(path);
    if (!outf) throw std::runtime_error("write_newforms: cannot open " + path);
    const Integer lo = std::numeric_limits<long long>::min();
    const Integer hi = std::numeric_limits<long long>::max();
    for (const auto& f : forms) {
        nlohmann::json j;
        j["label"] = f.label;
        j["level"] = f.level;
        j["weight"] = f.weight;
        auto& an = j["an"] = nlohmann::json::array();
        for (const auto& c : f.coeffs) {
            if (c >= lo && c <= hi)
                an.push_back(c.convert_to<long long>());
            else
                an.push_back(c.str());  // beyond 64 bits: decimal string
        }
        outf << j.dump() << '\n';
    }
}

}  // namespace relorb
