#pragma once

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ktree/errors.hpp"

namespace ktree {

// The degree set Omega: either an explicit finite set or all of N0.
// Must contain 0, 1 and at least one integer >= 2.
class OmegaSet {
 public:
  static OmegaSet naturals() {
    OmegaSet w;
    w.naturals_ = true;
    return w;
  }

  static OmegaSet finite(std::vector<int> xs) {
    OmegaSet w;
    std::set<int> s(xs.begin(), xs.end());
    w.members_.assign(s.begin(), s.end());
    if (!w.members_.empty() && w.members_.front() < 0)
      throw InvalidOmega("omega contains a negative integer");
    if (!w.contains(0) || !w.contains(1))
      throw InvalidOmega("omega must contain 0 and 1");
    if (w.members_.back() < 2)
      throw InvalidOmega("omega must contain an integer >= 2");
    return w;
  }

  // "N0" for the cofinite-full set, otherwise e.g. "0,1,2" or "{0,1,2}".
  static OmegaSet parse(const std::string& spec) {
    std::string s;
    for (char c : spec)
      if (c != '{' && c != '}' && c != ' ') s.push_back(c);
    if (s == "N0" || s == "n0" || s == "N" || s == "nat") return naturals();
    std::vector<int> xs;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (tok.empty()) continue;
      xs.push_back(std::stoi(tok));
    }
    if (xs.empty()) throw InvalidOmega("cannot parse omega spec: " + spec);
    return finite(std::move(xs));
  }

  bool is_naturals() const { return naturals_; }

  bool contains(int i) const {
    if (i < 0) return false;
    if (naturals_) return true;
    return std::binary_search(members_.begin(), members_.end(), i);
  }

  // Omega_out = { i : i+1 in Omega, i >= 0 }, the outdegree set of non-root
  // white nodes.
  bool out_contains(int i) const { return i >= 0 && contains(i + 1); }

  // Finite case only: the sorted member list.
  const std::vector<int>& members() const { return members_; }

  int max_member() const { return members_.empty() ? -1 : members_.back(); }

  // Members of Omega (resp. Omega_out) up to `cap` inclusive.
  std::vector<int> members_up_to(int cap) const {
    std::vector<int> out;
    if (naturals_) {
      for (int i = 0; i <= cap; ++i) out.push_back(i);
    } else {
      for (int m : members_)
        if (m <= cap) out.push_back(m);
    }
    return out;
  }

  std::vector<int> out_members_up_to(int cap) const {
    std::vector<int> out;
    if (naturals_) {
      for (int i = 0; i <= cap; ++i) out.push_back(i);
    } else {
      for (int m : members_)
        if (m >= 1 && m - 1 <= cap) out.push_back(m - 1);
    }
    return out;
  }

  // gcd of the nonzero elements of Omega_out; 1 for N0.
  int span() const {
    if (naturals_) return 1;
    int g = 0;
    for (int m : members_)
      if (m >= 2) g = std::gcd(g, m - 1);
    return g == 0 ? 1 : g;
  }

  std::string to_string() const {
    if (naturals_) return "N0";
    std::string s = "{";
    for (std::size_t i = 0; i < members_.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(members_[i]);
    }
    return s + "}";
  }

  bool operator==(const OmegaSet& o) const {
    return naturals_ == o.naturals_ && members_ == o.members_;
  }

 private:
  OmegaSet() = default;
  bool naturals_ = false;
  std::vector<int> members_;
};

}  // namespace ktree
