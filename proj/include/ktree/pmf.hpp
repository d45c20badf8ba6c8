#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "ktree/errors.hpp"
#include "ktree/rng.hpp"

namespace ktree {

// Finitely supported probability mass function on non-negative integers,
// with a Walker alias table for O(1) sampling.
class DiscretePmf {
 public:
  DiscretePmf() = default;

  DiscretePmf(std::vector<int> values, std::vector<double> probs)
      : values_(std::move(values)), probs_(std::move(probs)) {
    double total = 0.0;
    for (double p : probs_) total += p;
    if (!(total > 0.0)) throw Error("pmf has no mass");
    for (double& p : probs_) p /= total;
    build_alias();
  }

  const std::vector<int>& values() const { return values_; }
  const std::vector<double>& probs() const { return probs_; }

  double prob_of(int v) const {
    for (std::size_t i = 0; i < values_.size(); ++i)
      if (values_[i] == v) return probs_[i];
    return 0.0;
  }

  double mean() const {
    double m = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) m += values_[i] * probs_[i];
    return m;
  }

  double variance() const {
    const double m = mean();
    double v = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) {
      const double d = values_[i] - m;
      v += d * d * probs_[i];
    }
    return v;
  }

  int max_value() const {
    int m = 0;
    for (int v : values_) m = std::max(m, v);
    return m;
  }

  int sample(RngHandle& rng) const {
    const std::size_t n = values_.size();
    if (n == 1) return values_[0];
    const std::size_t i = static_cast<std::size_t>(rng.below(n));
    return rng.u01() < alias_prob_[i] ? values_[i] : values_[alias_[i]];
  }

  // P_out[v] = v * P_in[v] / mean(P_in).  Throws ZeroMean on a zero-mean input.
  DiscretePmf size_biased() const {
    const double m = mean();
    if (!(m > 0.0)) throw ZeroMean("size_bias of a zero-mean pmf");
    std::vector<int> vals;
    std::vector<double> ps;
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (values_[i] == 0) continue;
      vals.push_back(values_[i]);
      ps.push_back(values_[i] * probs_[i] / m);
    }
    return DiscretePmf(std::move(vals), std::move(ps));
  }

  // Law of c*X.
  DiscretePmf scaled(int c) const {
    std::vector<int> vals(values_);
    for (int& v : vals) v *= c;
    return DiscretePmf(std::move(vals), probs_);
  }

  DiscretePmf convolve(const DiscretePmf& o) const {
    const int m = max_value() + o.max_value();
    std::vector<double> acc(static_cast<std::size_t>(m) + 1, 0.0);
    for (std::size_t i = 0; i < values_.size(); ++i)
      for (std::size_t j = 0; j < o.values_.size(); ++j)
        acc[values_[i] + o.values_[j]] += probs_[i] * o.probs_[j];
    std::vector<int> vals;
    std::vector<double> ps;
    for (int v = 0; v <= m; ++v)
      if (acc[v] > 0.0) {
        vals.push_back(v);
        ps.push_back(acc[v]);
      }
    return DiscretePmf(std::move(vals), std::move(ps));
  }

  DiscretePmf convolve_power(int k) const {
    DiscretePmf acc = *this;
    for (int i = 1; i < k; ++i) acc = acc.convolve(*this);
    return acc;
  }

 private:
  void build_alias() {
    const std::size_t n = values_.size();
    alias_.assign(n, 0);
    alias_prob_.assign(n, 1.0);
    std::vector<double> scaled(n);
    std::vector<std::size_t> small, large;
    for (std::size_t i = 0; i < n; ++i) {
      scaled[i] = probs_[i] * n;
      (scaled[i] < 1.0 ? small : large).push_back(i);
    }
    while (!small.empty() && !large.empty()) {
      const std::size_t s = small.back();
      const std::size_t l = large.back();
      small.pop_back();
      alias_prob_[s] = scaled[s];
      alias_[s] = static_cast<int>(l);
      scaled[l] -= 1.0 - scaled[s];
      if (scaled[l] < 1.0) {
        large.pop_back();
        small.push_back(l);
      }
    }
  }

  std::vector<int> values_;
  std::vector<double> probs_;
  std::vector<int> alias_;
  std::vector<double> alias_prob_;
};

}  // namespace ktree
