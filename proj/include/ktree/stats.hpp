#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ktree/errors.hpp"

namespace ktree::stats {

namespace detail {

// Regularized lower incomplete gamma P(a, x), series / continued fraction.
inline double gamma_p(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw Error("gamma_p domain");
  if (x == 0.0) return 0.0;
  const double lg = std::lgamma(a);
  if (x < a + 1.0) {
    double ap = a, sum = 1.0 / a, del = sum;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - lg);
  }
  // Lentz continued fraction for Q(a, x)
  const double tiny = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-15) break;
  }
  const double q = std::exp(-x + a * std::log(x) - lg) * h;
  return 1.0 - q;
}

}  // namespace detail

// Upper tail of the chi-square distribution with `dof` degrees of freedom.
inline double chi_square_pvalue(double stat, int dof) {
  if (dof <= 0) return 1.0;
  return 1.0 - detail::gamma_p(dof / 2.0, stat / 2.0);
}

struct ChiSquare {
  double stat = 0.0;
  int dof = 0;
  double pvalue = 1.0;
};

// Goodness of fit of observed category counts against the uniform law over
// `total_cells` categories (unobserved cells still contribute).
inline ChiSquare chi_square_uniform(
    const std::map<std::string, std::uint64_t>& observed,
    std::uint64_t total_cells) {
  std::uint64_t n = 0;
  for (const auto& [key, cnt] : observed) n += cnt;
  if (observed.size() > total_cells)
    throw Error("observed more categories than the uniform support");
  const double expected = static_cast<double>(n) / total_cells;
  ChiSquare r;
  for (const auto& [key, cnt] : observed) {
    const double d = cnt - expected;
    r.stat += d * d / expected;
  }
  r.stat += (total_cells - observed.size()) * expected;
  r.dof = static_cast<int>(total_cells) - 1;
  r.pvalue = chi_square_pvalue(r.stat, r.dof);
  return r;
}

// Two-sample homogeneity chi-square over the union of categories.
inline ChiSquare chi_square_two_sample(
    const std::map<std::string, std::uint64_t>& a,
    const std::map<std::string, std::uint64_t>& b) {
  double na = 0, nb = 0;
  for (const auto& [k, v] : a) na += v;
  for (const auto& [k, v] : b) nb += v;
  std::map<std::string, std::pair<double, double>> cells;
  for (const auto& [k, v] : a) cells[k].first = v;
  for (const auto& [k, v] : b) cells[k].second = v;
  ChiSquare r;
  int used = 0;
  for (const auto& [k, v] : cells) {
    const double tot = v.first + v.second;
    const double ea = na * tot / (na + nb);
    const double eb = nb * tot / (na + nb);
    if (ea > 0) r.stat += (v.first - ea) * (v.first - ea) / ea;
    if (eb > 0) r.stat += (v.second - eb) * (v.second - eb) / eb;
    ++used;
  }
  r.dof = used - 1;
  r.pvalue = chi_square_pvalue(r.stat, r.dof);
  return r;
}

struct KsResult {
  double stat = 0.0;
  double pvalue = 1.0;
};

// Two-sample Kolmogorov-Smirnov with the asymptotic tail Q(lambda).
inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  const double lambda = (ne + 0.12 + 0.11 / ne) * d;
  double p = 0.0;
  for (int t = 1; t <= 128; ++t) {
    const double term = 2.0 * ((t % 2) ? 1.0 : -1.0) *
                        std::exp(-2.0 * t * t * lambda * lambda);
    p += term;
    if (std::abs(term) < 1e-12) break;
  }
  return {d, std::clamp(p, 0.0, 1.0)};
}

// Total variation distance between two empirical frequency tables.
inline double total_variation(const std::map<std::string, std::uint64_t>& a,
                              const std::map<std::string, std::uint64_t>& b) {
  double na = 0, nb = 0;
  for (const auto& [k, v] : a) na += v;
  for (const auto& [k, v] : b) nb += v;
  std::map<std::string, std::pair<double, double>> cells;
  for (const auto& [k, v] : a) cells[k].first = v / na;
  for (const auto& [k, v] : b) cells[k].second = v / nb;
  double tv = 0.0;
  for (const auto& [k, v] : cells) tv += std::abs(v.first - v.second);
  return tv / 2.0;
}

// TV between an empirical table over integers and an exact pmf.
inline double total_variation_exact(const std::map<int, std::uint64_t>& emp,
                                    const std::vector<int>& values,
                                    const std::vector<double>& probs) {
  double n = 0;
  for (const auto& [k, v] : emp) n += v;
  std::map<int, std::pair<double, double>> cells;
  for (const auto& [k, v] : emp) cells[k].first = v / n;
  for (std::size_t i = 0; i < values.size(); ++i) cells[values[i]].second = probs[i];
  double tv = 0.0;
  for (const auto& [k, v] : cells) tv += std::abs(v.first - v.second);
  return tv / 2.0;
}

}  // namespace ktree::stats
