#pragma once

#include <gmpxx.h>

#include <cmath>
#include <string>
#include <vector>

#include "ktree/errors.hpp"
#include "ktree/model.hpp"
#include "ktree/omega.hpp"

namespace ktree {

// Truncated exponential generating function with exact rational coefficients;
// coeffs[n] is the coefficient of x^n.
struct EgfSeries {
  std::vector<mpq_class> coeffs;
  int order() const { return static_cast<int>(coeffs.size()) - 1; }
};

// Ordinary generating function with exact integer coefficients.
struct OgfSeries {
  std::vector<mpz_class> coeffs;
  int order() const { return static_cast<int>(coeffs.size()) - 1; }
};

namespace detail {

inline EgfSeries egf_zero(int n) {
  EgfSeries s;
  s.coeffs.assign(static_cast<std::size_t>(n) + 1, mpq_class(0));
  return s;
}

inline EgfSeries egf_mul(const EgfSeries& a, const EgfSeries& b, int n) {
  EgfSeries r = egf_zero(n);
  for (int i = 0; i <= n; ++i) {
    if (a.coeffs[i] == 0) continue;
    for (int j = 0; i + j <= n; ++j) {
      if (b.coeffs[j] == 0) continue;
      r.coeffs[i + j] += a.coeffs[i] * b.coeffs[j];
    }
  }
  return r;
}

inline EgfSeries egf_pow(const EgfSeries& a, int e, int n) {
  EgfSeries r = egf_zero(n);
  r.coeffs[0] = 1;
  for (int i = 0; i < e; ++i) r = egf_mul(r, a, n);
  return r;
}

// sum over the listed exponents i of a^i / i!, truncated at order n.
// Exponents beyond n cannot contribute when a has valuation >= 1.
inline EgfSeries egf_exp_like(const EgfSeries& a, const OmegaSet& omega,
                              bool out_set, int n) {
  EgfSeries r = egf_zero(n);
  EgfSeries pw = egf_zero(n);
  pw.coeffs[0] = 1;
  mpz_class fact(1);
  for (int i = 0; i <= n; ++i) {
    if (i > 0) {
      pw = egf_mul(pw, a, n);
      fact *= i;
    }
    const bool in = out_set ? omega.out_contains(i) : omega.contains(i);
    if (!in) continue;
    const mpq_class inv_fact(mpz_class(1), fact);
    for (int j = 0; j <= n; ++j)
      if (pw.coeffs[j] != 0) r.coeffs[j] += pw.coeffs[j] * inv_fact;
  }
  return r;
}

inline mpz_class factorial(int n) {
  mpz_class f(1);
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

inline mpz_class binomial(long n, long k) {
  mpz_class r;
  mpz_bin_uiui(r.get_mpz_t(), static_cast<unsigned long>(n),
               static_cast<unsigned long>(k));
  return r;
}

// Extract the integer coefficient count a[n] = n! * [x^n] series.
inline mpz_class egf_count(const EgfSeries& s, int n) {
  mpq_class q = s.coeffs[n] * factorial(n);
  q.canonicalize();
  if (q.get_den() != 1)
    throw DivisibilityViolation("EGF coefficient times n! is not an integer");
  return q.get_num();
}

}  // namespace detail

struct LabelledCounts {
  std::vector<mpz_class> b;       // reduced coding trees, fixed root front
  std::vector<mpz_class> c_circ;  // circ-rooted trees, outdegree set Omega_out
  std::vector<mpz_class> c;       // coding trees, root outdegree in Omega
  EgfSeries b_series;
};

// Fixed-point iteration on the coupled system
//   B = x * C_circ(B)^k,   C_circ = sum_{i in Omega_out} B^i/i!,
//   C = sum_{i in Omega} B^i/i!.
// B has valuation 1, so N+1 rounds starting from B = 0 fix the first N
// coefficients: after round t the coefficients up to order t are exact.
inline LabelledCounts labelled_counts(int k, const OmegaSet& omega, int N) {
  if (N < 0) throw Error("N must be >= 0");
  EgfSeries b = detail::egf_zero(N);
  for (int round = 0; round <= N; ++round) {
    EgfSeries cc = detail::egf_exp_like(b, omega, /*out_set=*/true, N);
    EgfSeries next = detail::egf_pow(cc, k, N);
    // multiply by x
    EgfSeries shifted = detail::egf_zero(N);
    for (int j = 0; j + 1 <= N; ++j) shifted.coeffs[j + 1] = next.coeffs[j];
    b = std::move(shifted);
  }
  EgfSeries c_circ = detail::egf_exp_like(b, omega, /*out_set=*/true, N);
  EgfSeries c = detail::egf_exp_like(b, omega, /*out_set=*/false, N);

  LabelledCounts out;
  for (int n = 0; n <= N; ++n) {
    out.b.push_back(detail::egf_count(b, n));
    out.c_circ.push_back(detail::egf_count(c_circ, n));
    out.c.push_back(detail::egf_count(c, n));
  }
  out.b_series = std::move(b);
  return out;
}

// Number of Omega-k-trees with n hedra rooted at a front:
//   Par(n) = binom(n+k, k) * c(n) / (kn + 1), exactly divisible.
inline mpz_class partial_ktree_count_from(const LabelledCounts& lc, int k, int n) {
  mpz_class num = detail::binomial(n + k, k) * lc.c.at(n);
  mpz_class q, r;
  mpz_fdiv_qr_ui(q.get_mpz_t(), r.get_mpz_t(), num.get_mpz_t(),
                 static_cast<unsigned long>(k) * n + 1);
  if (r != 0)
    throw DivisibilityViolation("(kn+1) does not divide binom(n+k,k)*c(n) at n=" +
                                std::to_string(n));
  return q;
}

inline mpz_class partial_ktree_count(int k, const OmegaSet& omega, int n) {
  if (n < 1) throw Error("n must be >= 1");
  return partial_ktree_count_from(labelled_counts(k, omega, n), k, n);
}

struct ClosedFormReport {
  std::vector<int> failed_n;
  bool all_pass() const { return failed_n.empty(); }
};

// For Omega = N0 the Lagrange inversion closed forms are
//   b(n) = (kn)^{n-1},  c(n) = (kn+1)^{n-1},  Par(n) = binom(n+k,k)(kn+1)^{n-2}.
inline ClosedFormReport closed_form_check(int k, int N) {
  const OmegaSet omega = OmegaSet::naturals();
  const LabelledCounts lc = labelled_counts(k, omega, N);
  ClosedFormReport rep;
  for (int n = 1; n <= N; ++n) {
    mpz_class kn(static_cast<long>(k) * n), kn1(static_cast<long>(k) * n + 1);
    mpz_class b_exp, c_exp;
    mpz_pow_ui(b_exp.get_mpz_t(), kn.get_mpz_t(), n - 1);
    mpz_pow_ui(c_exp.get_mpz_t(), kn1.get_mpz_t(), n - 1);
    // Par via the exact rational (kn+1)^(n-2); n = 1 gives binom/(k+1).
    mpq_class par_exp = mpq_class(detail::binomial(n + k, k) * c_exp, kn1);
    par_exp.canonicalize();
    bool ok = lc.b[n] == b_exp && lc.c[n] == c_exp;
    ok = ok && par_exp.get_den() == 1 &&
         partial_ktree_count_from(lc, k, n) == par_exp.get_num();
    if (!ok) rep.failed_n.push_back(n);
  }
  return rep;
}

struct UnlabeledCounts {
  OgfSeries black_rooted;  // shapes rooted at a black node with k slots
  OgfSeries white_rooted;  // shapes rooted at a white node (multiset of the above)
};

namespace detail {

// exp of a rational series with zero constant term, via e' = s' e.
inline EgfSeries egf_exp(const EgfSeries& s, int n) {
  EgfSeries e = egf_zero(n);
  e.coeffs[0] = 1;
  for (int m = 1; m <= n; ++m) {
    mpq_class acc(0);
    for (int j = 1; j <= m; ++j)
      if (s.coeffs[j] != 0 && e.coeffs[m - j] != 0)
        acc += mpq_class(j) * s.coeffs[j] * e.coeffs[m - j];
    e.coeffs[m] = acc / m;
  }
  return e;
}

}  // namespace detail

// Polya-type fixed point for unlabeled coding-tree shapes, Omega = N0 only:
//   A(z) = z * exp(k * sum_{i>=1} A(z^i)/i),
// i.e. a black root carrying k slots, each an unordered multiset of shapes.
// The white-rooted series is exp(sum A(z^i)/i) = MSET(A).  For k = 1 this is
// the classical rooted-unlabeled-trees equation.
inline UnlabeledCounts unlabeled_counts(int k, const OmegaSet& omega, int N) {
  if (!omega.is_naturals())
    throw UnsupportedOmega("unlabeled counts implemented for N0 only");
  EgfSeries a = detail::egf_zero(N);
  for (int round = 0; round <= N; ++round) {
    // plethystic sum  sum_{i>=1} A(z^i)/i, truncated at N
    EgfSeries s = detail::egf_zero(N);
    for (int i = 1; i <= N; ++i)
      for (int j = 1; i * j <= N; ++j)
        if (a.coeffs[j] != 0) s.coeffs[i * j] += a.coeffs[j] / i;
    EgfSeries ks = s;
    for (auto& q : ks.coeffs) q *= k;
    EgfSeries e = detail::egf_exp(ks, N);
    EgfSeries next = detail::egf_zero(N);
    for (int j = 0; j + 1 <= N; ++j) next.coeffs[j + 1] = e.coeffs[j];
    a = std::move(next);
  }
  EgfSeries s = detail::egf_zero(N);
  for (int i = 1; i <= N; ++i)
    for (int j = 1; i * j <= N; ++j)
      if (a.coeffs[j] != 0) s.coeffs[i * j] += a.coeffs[j] / i;
  EgfSeries u = detail::egf_exp(s, N);

  UnlabeledCounts out;
  for (int n = 0; n <= N; ++n) {
    mpq_class qa = a.coeffs[n], qu = u.coeffs[n];
    qa.canonicalize();
    qu.canonicalize();
    if (qa.get_den() != 1 || qu.get_den() != 1)
      throw Error("unlabeled fixed point produced a non-integer coefficient");
    out.black_rooted.coeffs.push_back(qa.get_num());
    out.white_rooted.coeffs.push_back(qu.get_num());
  }
  return out;
}

// Coefficient-ratio estimate of the OGF's radius of convergence.
inline double ogf_radius_estimate(const OgfSeries& s) {
  const int n = s.order();
  if (n < 2 || s.coeffs[n] == 0) return 0.0;
  mpq_class ratio(s.coeffs[n - 1], s.coeffs[n]);
  return ratio.get_d();
}

// Diagnostic sequence r(n) = b(n) * rho^n * n^{3/2} / n!, which flattens to
// the subexponential constant d1 when b(n) ~ d1 n^{-3/2} n! rho^{-n}.
// Computed in log space to dodge overflow.
inline std::vector<double> subexponential_ratio(int k, const OmegaSet& omega, int N) {
  const auto sol = solve_singularity(k, omega);
  const LabelledCounts lc = labelled_counts(k, omega, N);
  std::vector<double> r(static_cast<std::size_t>(N) + 1, 0.0);
  for (int n = 1; n <= N; ++n) {
    if (lc.b[n] == 0) continue;
    signed long exp2;
    const double mant = mpz_get_d_2exp(&exp2, lc.b[n].get_mpz_t());
    const double log_b = std::log(mant) + static_cast<double>(exp2) * M_LN2;
    const double log_r = log_b + n * std::log(sol.rho) + 1.5 * std::log(n) -
                         std::lgamma(n + 1.0);
    r[n] = std::exp(log_r);
  }
  return r;
}

}  // namespace ktree
