#pragma once

// Independent reference computations for the test suites. None of these call
// into the library's own implementations of the same quantity.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "basedlab/matrix.hpp"

namespace oracle {

// Published emission schedule (year, block reward, annual emission).
struct EmissionRow {
  int year;
  const char* block_reward;
  const char* annual_emission;
  double tft_weight;
};

inline const std::vector<EmissionRow>& published_emissions() {
  static const std::vector<EmissionRow> rows{
      {1, "10", "31536000", 0.0},       {2, "5", "15768000", 0.0},         {3, "2.5", "7884000", 0.9},
      {4, "1.25", "3942000", 0.9},      {5, "0.625", "1971000", 1.0},      {6, "0.3125", "985500", 1.0},
      {7, "0.15625", "492750", 1.0},    {8, "0.078125", "246375", 1.0},    {9, "0.0390625", "123187.5", 1.0},
      {10, "0.01953125", "61593.75", 1.0}};
  return rows;
}

inline constexpr std::int64_t kNano = 1'000'000'000;
inline constexpr std::int64_t kBlocksPerYear = 365LL * 24 * 60 * 6;

inline std::int64_t block_reward_units(int year) { return (10 * kNano) >> (year - 1); }
inline std::int64_t annual_emission_units(int year) { return block_reward_units(year) * kBlocksPerYear; }

// "123187.5" -> base units, by plain digit arithmetic.
inline std::int64_t decimal_units(const std::string& s) {
  std::int64_t whole = 0, frac = 0;
  int frac_digits = 0;
  bool in_frac = false;
  for (char c : s) {
    if (c == '.') {
      in_frac = true;
      continue;
    }
    if (c == ',') continue;
    if (in_frac) {
      frac = frac * 10 + (c - '0');
      ++frac_digits;
    } else {
      whole = whole * 10 + (c - '0');
    }
  }
  while (frac_digits < 9) {
    frac *= 10;
    ++frac_digits;
  }
  return whole * kNano + frac;
}

inline std::int64_t burn_total_pepecoin(int brains) {
  std::int64_t total = 0;
  for (int k = 1; k <= brains; ++k) total += 1000 + 200 * (k - 1);
  return total;
}

// ---------------------------------------------------------------------------
// Routing: brute-force argmin over peers in ascending-id order.

struct PeerCase {
  std::int64_t id;
  std::vector<std::vector<double>> history;
};

inline double euclid(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(acc);
}

// item index -> assigned peer id.
inline std::vector<std::int64_t> route(const std::vector<std::vector<double>>& items, std::vector<PeerCase> peers) {
  std::sort(peers.begin(), peers.end(), [](const PeerCase& a, const PeerCase& b) { return a.id < b.id; });
  bool any_history = false;
  for (const auto& p : peers) any_history = any_history || !p.history.empty();
  std::vector<std::int64_t> out(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (!any_history) {
      out[i] = peers[i % peers.size()].id;
      continue;
    }
    double best = std::numeric_limits<double>::infinity();
    std::int64_t chosen = -1;
    for (const auto& p : peers) {
      double d = std::numeric_limits<double>::infinity();
      for (const auto& h : p.history) d = std::min(d, euclid(items[i], h));
      if (d < best) {
        best = d;
        chosen = p.id;
      }
    }
    out[i] = chosen;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Head selection: every subset, ties to the lexicographically smallest index list.

inline std::vector<std::size_t> best_subset(const std::vector<double>& scores, const std::vector<double>& costs,
                                            double budget) {
  const std::size_t k = scores.size();
  std::vector<std::size_t> best;
  double best_score = 0.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << k); ++mask) {
    std::vector<std::size_t> set;
    double c = 0.0, s = 0.0;
    for (std::size_t i = 0; i < k; ++i)
      if (mask & (std::uint64_t{1} << i)) {
        set.push_back(i);
        c += costs[i];
        s += scores[i];
      }
    if (!(c < budget)) continue;
    if (s > best_score || (s == best_score && set < best)) {
      best_score = s;
      best = set;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Linear algebra in extended precision.

inline std::vector<double> mat_vec(const basedlab::Matrix& w, const std::vector<double>& s) {
  std::vector<double> out(static_cast<std::size_t>(w.rows()));
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    long double acc = 0.0L;
    for (Eigen::Index j = 0; j < w.cols(); ++j)
      acc += static_cast<long double>(w(i, j)) * static_cast<long double>(s[static_cast<std::size_t>(j)]);
    out[static_cast<std::size_t>(i)] = static_cast<double>(acc);
  }
  return out;
}

// Fraction of stake held by peers with a mutual positive weight to peer i.
inline std::vector<double> trusted_fraction(const basedlab::Matrix& w, const std::vector<double>& s) {
  const auto n = static_cast<std::size_t>(w.rows());
  long double total = 0.0L;
  for (double v : s) total += v;
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    long double acc = 0.0L;
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) > 0.0 &&
          w(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) > 0.0)
        acc += s[j];
    out[i] = static_cast<double>(acc / total);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Random instances.

inline basedlab::Matrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols, double lo,
                                      double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  basedlab::Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

}  // namespace oracle
