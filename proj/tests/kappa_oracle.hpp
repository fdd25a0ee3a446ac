#pragma once

// Exact-rational Cohen's kappa rounded once to the nearest double.

#include <gmp.h>
#include <mpfr.h>

#include <cstdint>
#include <optional>

namespace testutil {

inline std::optional<double> kappa_exact(std::uint64_t tp, std::uint64_t fn, std::uint64_t fp, std::uint64_t tn) {
    const unsigned long n = tp + fn + fp + tn;
    mpq_t po, pe, one, num, den;
    for (auto* q : {&po, &pe, &one, &num, &den}) mpq_init(*q);
    // p_o = (tp + tn) / n
    mpq_set_ui(po, tp + tn, n);
    mpq_canonicalize(po);
    // p_e = [(tp+fn)(tp+fp) + (fp+tn)(fn+tn)] / n^2
    mpz_t a, b, n2;
    mpz_inits(a, b, n2, nullptr);
    mpz_set_ui(a, tp + fn);
    mpz_mul_ui(a, a, tp + fp);
    mpz_set_ui(b, fp + tn);
    mpz_mul_ui(b, b, fn + tn);
    mpz_add(a, a, b);
    mpz_set_ui(n2, n);
    mpz_mul_ui(n2, n2, n);
    mpq_set_num(pe, a);
    mpq_set_den(pe, n2);
    mpq_canonicalize(pe);
    mpq_set_ui(one, 1, 1);
    mpq_sub(num, po, pe);
    mpq_sub(den, one, pe);
    std::optional<double> out;
    if (mpq_sgn(den) != 0) {
        mpq_div(num, num, den);
        mpfr_t r;
        mpfr_init2(r, 53);
        mpfr_set_q(r, num, MPFR_RNDN);
        out = mpfr_get_d(r, MPFR_RNDN);
        mpfr_clear(r);
    }
    mpz_clears(a, b, n2, nullptr);
    for (auto* q : {&po, &pe, &one, &num, &den}) mpq_clear(*q);
    return out;
}

}  // namespace testutil
