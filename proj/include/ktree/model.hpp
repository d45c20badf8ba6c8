#pragma once

#include <gmpxx.h>

#include <cmath>
#include <string>
#include <vector>

#include "json.hpp"
#include "ktree/errors.hpp"
#include "ktree/omega.hpp"
#include "ktree/pmf.hpp"

namespace ktree {

namespace detail {

// Left side of the singularity condition:
//   g(B) = sum over {i >= 1 : i+1 in Omega} of (k*i - 1)/i! * B^i.
// Strictly increasing in B whenever some coefficient is positive.  For the
// cofinite-full set the factorial decay makes truncation exact to double
// precision: stop once a term falls below tol * partial sum.
inline double singularity_lhs(int k, const OmegaSet& omega, double b, double tol) {
  double sum = 0.0;
  double pow_b = 1.0;   // B^i
  double fact = 1.0;    // i!
  const int cap = omega.is_naturals() ? 400 : omega.max_member() - 1;
  for (int i = 1; i <= cap; ++i) {
    pow_b *= b;
    fact *= i;
    if (!omega.contains(i + 1)) continue;
    const double term = (static_cast<double>(k) * i - 1.0) / fact * pow_b;
    sum += term;
    if (omega.is_naturals() && i > b && term < tol * 1e-4 * (sum + 1.0)) break;
  }
  return sum;
}

// sum over i in Omega_out (resp. Omega) of B^i / i!.
inline double exp_like_sum(const OmegaSet& omega, double b, bool out_set) {
  double sum = 0.0;
  double pow_b = 1.0;
  double fact = 1.0;
  const int cap = omega.is_naturals() ? 400 : omega.max_member();
  for (int i = 0; i <= cap; ++i) {
    if (i > 0) {
      pow_b *= b;
      fact *= i;
    }
    const bool in = out_set ? omega.out_contains(i) : omega.contains(i);
    if (in) {
      const double term = pow_b / fact;
      sum += term;
      if (omega.is_naturals() && i > b + 2 && term < 1e-18 * (sum + 1.0)) break;
    }
  }
  return sum;
}

inline mpq_class harmonic_times_k(int k) {
  mpq_class h(0);
  for (int i = 1; i <= k; ++i) h += mpq_class(1, i);
  return mpq_class(k) * h;
}

}  // namespace detail

struct SingularitySolution {
  double rho;    // dominant singularity rho_{k,Omega}
  double b_rho;  // B_k(rho)
};

// Solve the criticality equation for B = B_k(rho) by bisection and recover
// rho = B / C_circ(B)^k.  Throws DegenerateModel when the left side is
// bounded below 1 (all coefficients vanish; only possible for k = 1 with
// Omega free of elements >= 3).
inline SingularitySolution solve_singularity(int k, const OmegaSet& omega,
                                             double tol = 1e-12) {
  if (k < 1) throw Error("k must be >= 1");
  if (!(tol > 0.0)) throw Error("tol must be positive");

  bool has_positive_coeff = false;
  if (omega.is_naturals()) {
    has_positive_coeff = true;  // (k*i - 1) > 0 for i = 2
  } else {
    for (int m : omega.members())
      if (m >= 2 && (static_cast<long long>(k) * (m - 1) - 1) > 0)
        has_positive_coeff = true;
  }
  if (!has_positive_coeff)
    throw DegenerateModel("singularity equation is identically zero for k=" +
                          std::to_string(k) + ", omega=" + omega.to_string());

  double hi = 1.0;
  int doublings = 0;
  while (detail::singularity_lhs(k, omega, hi, tol) < 1.0) {
    hi *= 2.0;
    if (++doublings > 60)
      throw DegenerateModel("singularity bracket did not close");
  }
  double lo = 0.0;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (detail::singularity_lhs(k, omega, mid, tol) < 1.0 ? lo : hi) = mid;
  }
  const double b = 0.5 * (lo + hi);
  const double c_circ = detail::exp_like_sum(omega, b, /*out_set=*/true);
  const double rho = b / std::pow(c_circ, k);
  return {rho, b};
}

// The degree set together with every analytic constant and offspring law the
// samplers and experiments need.  Immutable after construction; safe to share
// across threads.
class ModelParams {
 public:
  static ModelParams make(int k, const OmegaSet& omega, double tol = 1e-12) {
    ModelParams p(k, omega, tol);
    return p;
  }

  int k() const { return k_; }
  const OmegaSet& omega() const { return omega_; }
  double tol() const { return tol_; }
  double rho() const { return rho_; }
  double b_rho() const { return b_rho_; }
  double c_rho() const { return c_rho_; }
  double c_circ_rho() const { return c_circ_rho_; }
  double sigma() const { return sigma_; }
  double m_k() const { return m_k_double_; }
  const mpq_class& m_k_exact() const { return m_k_exact_; }
  int span() const { return span_; }

  // Rescaling factor k*H_k*sigma / (2*sqrt(n)) from the scaling-limit theorem.
  double scale(double n) const { return m_k_double_ * sigma_ / (2.0 * std::sqrt(n)); }

  // Offspring law xi_circ of non-root white nodes (support in Omega_out).
  const DiscretePmf& xi_circ() const { return xi_circ_; }
  // Black-tree offspring xi_bullet: k-fold convolution of xi_circ.
  const DiscretePmf& xi_bullet() const { return xi_bullet_; }
  // Plane-tree offspring xi = k * xi_circ (support scaled, not convolved).
  const DiscretePmf& xi() const { return xi_; }
  // Root law eta_circ (support in Omega) and eta = k * eta_circ.
  const DiscretePmf& eta_circ() const { return eta_circ_; }
  const DiscretePmf& eta() const { return eta_; }
  // Size-biased laws used by the Kesten tree.
  const DiscretePmf& xi_hat() const { return xi_hat_; }
  const DiscretePmf& eta_hat() const { return eta_hat_; }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["k"] = k_;
    if (omega_.is_naturals())
      j["omega"] = "N0";
    else
      j["omega"] = omega_.members();
    j["rho"] = rho_;
    j["b_rho"] = b_rho_;
    j["sigma"] = sigma_;
    j["m_k"] = m_k_double_;
    j["span"] = span_;
    return j;
  }

  static ModelParams from_json(const nlohmann::json& j, double tol = 1e-12) {
    const int k = j.at("k").get<int>();
    OmegaSet omega = j.at("omega").is_string()
                         ? OmegaSet::parse(j.at("omega").get<std::string>())
                         : OmegaSet::finite(j.at("omega").get<std::vector<int>>());
    ModelParams p = make(k, omega, tol);
    if (j.contains("rho") && std::abs(j.at("rho").get<double>() - p.rho()) > 1e-8)
      throw Error("stored rho disagrees with recomputed singularity");
    return p;
  }

 private:
  ModelParams(int k, const OmegaSet& omega, double tol)
      : k_(k), omega_(omega), tol_(tol) {
    const auto sol = solve_singularity(k, omega, tol);
    rho_ = sol.rho;
    b_rho_ = sol.b_rho;
    c_circ_rho_ = detail::exp_like_sum(omega, b_rho_, /*out_set=*/true);
    c_rho_ = detail::exp_like_sum(omega, b_rho_, /*out_set=*/false);
    span_ = omega.span();
    m_k_exact_ = detail::harmonic_times_k(k);
    m_k_double_ = m_k_exact_.get_d();

    xi_circ_ = weight_pmf(/*out_set=*/true);
    eta_circ_ = weight_pmf(/*out_set=*/false);
    xi_bullet_ = xi_circ_.convolve_power(k_);
    xi_ = xi_circ_.scaled(k_);
    eta_ = eta_circ_.scaled(k_);
    xi_hat_ = xi_.size_biased();
    eta_hat_ = eta_.size_biased();
    sigma_ = std::sqrt(k_ * xi_circ_.variance());

    if (std::abs(xi_bullet_.mean() - 1.0) > 10 * tol_)
      throw Error("criticality violated: E[xi_bullet] != 1");
  }

  // P[i] proportional to B(rho)^i / i! over Omega_out (or Omega).  Explicit
  // array up to the point where the tail mass drops below 1e-12 of the total.
  DiscretePmf weight_pmf(bool out_set) const {
    std::vector<int> vals;
    std::vector<double> ws;
    double pow_b = 1.0, fact = 1.0, total = 0.0;
    const int hard_cap =
        omega_.is_naturals() ? 4000 : (omega_.max_member() + 1);
    for (int i = 0; i <= hard_cap; ++i) {
      if (i > 0) {
        pow_b *= b_rho_;
        fact *= i;
      }
      const bool in = out_set ? omega_.out_contains(i) : omega_.contains(i);
      if (!in) continue;
      const double w = pow_b / fact;
      vals.push_back(i);
      ws.push_back(w);
      total += w;
      if (omega_.is_naturals() && i > b_rho_ + 2 && w < 1e-18 * total) break;
    }
    return DiscretePmf(std::move(vals), std::move(ws));
  }

  int k_;
  OmegaSet omega_;
  double tol_;
  double rho_ = 0, b_rho_ = 0, c_rho_ = 0, c_circ_rho_ = 0;
  double sigma_ = 0, m_k_double_ = 0;
  mpq_class m_k_exact_;
  int span_ = 1;
  DiscretePmf xi_circ_, xi_bullet_, xi_, eta_circ_, eta_, xi_hat_, eta_hat_;
};

// Free-function spellings of the model operations.
inline DiscretePmf offspring_white(const ModelParams& p) { return p.xi_circ(); }
inline DiscretePmf offspring_black(const ModelParams& p) { return p.xi_bullet(); }
inline DiscretePmf root_law(const ModelParams& p) { return p.eta_circ(); }
inline DiscretePmf size_bias(const DiscretePmf& pmf) { return pmf.size_biased(); }

struct ModelConstants {
  double sigma;
  double m_k;
};

inline ModelConstants constants(const ModelParams& p) {
  return {p.sigma(), p.m_k()};
}

}  // namespace ktree
