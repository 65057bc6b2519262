#pragma once

// Exact probability distributions over {0,1}^n and the entropy measures
// built on them.
//
// Statistical distance is HALF the L1 norm of the difference. With that
// convention the threshold-mass characterization of smooth min-entropy is
// exact in both directions:
//
//   smooth_min_entropy(X, delta) >= k  <=>  mass_above_threshold(X, k) <= delta
//
// and smoothing_witness() returns a distribution realizing the left side at
// distance exactly mass_above_threshold(X, k).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "numeric.hpp"
#include "random.hpp"

namespace pe {

inline constexpr unsigned kMaxDomainBits = 30;
inline constexpr double kProbabilityTolerance = 1e-9;

struct Entry {
  std::uint64_t point = 0;
  double p = 0.0;

  friend bool operator==(const Entry&, const Entry&) = default;
};

class Distribution {
 public:
  enum class Repr { dense, sparse };

  // Takes 2^n probabilities indexed by point.
  static Distribution from_dense(unsigned n, std::vector<double> probs) {
    check_bits(n);
    if (probs.size() != (std::uint64_t{1} << n)) {
      throw ValidationError("dense distribution needs 2^n = " +
                            std::to_string(std::uint64_t{1} << n) + " probabilities, got " +
                            std::to_string(probs.size()));
    }
    CompensatedSum total;
    for (double p : probs) {
      check_probability(p);
      total += p;
    }
    check_total(total.value());
    Distribution d(n);
    d.dense_ = std::move(probs);
    d.repr_ = Repr::dense;
    d.canonicalize();
    return d;
  }

  // Points must be strictly increasing and below 2^n. Zero entries are dropped.
  static Distribution from_sparse(unsigned n, std::vector<Entry> entries) {
    check_bits(n);
    const std::uint64_t size = std::uint64_t{1} << n;
    CompensatedSum total;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (entries[i].point >= size) {
        throw ValidationError("point " + std::to_string(entries[i].point) +
                              " outside the n = " + std::to_string(n) + " domain");
      }
      if (i > 0 && entries[i].point <= entries[i - 1].point) {
        throw ValidationError("sparse points must be strictly increasing");
      }
      check_probability(entries[i].p);
      total += entries[i].p;
    }
    check_total(total.value());
    std::erase_if(entries, [](const Entry& e) { return e.p == 0.0; });
    Distribution d(n);
    d.sparse_ = std::move(entries);
    d.repr_ = Repr::sparse;
    d.canonicalize();
    return d;
  }

  [[nodiscard]] unsigned bits() const noexcept { return n_; }
  [[nodiscard]] std::uint64_t domain_size() const noexcept { return std::uint64_t{1} << n_; }
  [[nodiscard]] Repr repr() const noexcept { return repr_; }
  [[nodiscard]] bool is_dense() const noexcept { return repr_ == Repr::dense; }

  [[nodiscard]] double probability(std::uint64_t x) const {
    if (x >= domain_size()) throw DimensionError("point outside the domain");
    if (is_dense()) return dense_[x];
    const auto it = std::lower_bound(sparse_.begin(), sparse_.end(), x,
                                     [](const Entry& e, std::uint64_t v) { return e.point < v; });
    return (it != sparse_.end() && it->point == x) ? it->p : 0.0;
  }

  // Calls f(point, p) for every point with p > 0, in ascending point order.
  template <typename F>
  void for_each_nonzero(F&& f) const {
    if (is_dense()) {
      for (std::uint64_t x = 0; x < dense_.size(); ++x) {
        if (dense_[x] > 0.0) f(x, dense_[x]);
      }
    } else {
      for (const Entry& e : sparse_) f(e.point, e.p);
    }
  }

  [[nodiscard]] std::vector<Entry> support() const {
    if (!is_dense()) return sparse_;
    std::vector<Entry> out;
    for_each_nonzero([&](std::uint64_t x, double p) { out.push_back({x, p}); });
    return out;
  }

  [[nodiscard]] std::size_t support_size() const {
    if (!is_dense()) return sparse_.size();
    return static_cast<std::size_t>(
        std::count_if(dense_.begin(), dense_.end(), [](double p) { return p > 0.0; }));
  }

  [[nodiscard]] std::vector<double> to_dense() const {
    if (is_dense()) return dense_;
    std::vector<double> out(domain_size(), 0.0);
    for (const Entry& e : sparse_) out[e.point] = e.p;
    return out;
  }

  // Forces a representation; both directions are exact.
  [[nodiscard]] Distribution as(Repr r) const {
    Distribution d(n_);
    d.repr_ = r;
    if (r == Repr::dense) {
      d.dense_ = to_dense();
    } else {
      d.sparse_ = support();
    }
    return d;
  }

  friend bool operator==(const Distribution& a, const Distribution& b) {
    return a.n_ == b.n_ && a.support() == b.support();
  }

 private:
  explicit Distribution(unsigned n) : n_(n) {}

  static void check_bits(unsigned n) {
    if (n < 1 || n > kMaxDomainBits) {
      throw ValidationError("domain bit-width must be in [1, 30], got " + std::to_string(n));
    }
  }
  static void check_probability(double p) {
    if (!std::isfinite(p) || p < 0.0) {
      throw ValidationError("probabilities must be finite and non-negative");
    }
  }
  static void check_total(double total) {
    if (std::fabs(total - 1.0) > kProbabilityTolerance) {
      throw ValidationError("probabilities sum to " + std::to_string(total) + ", expected 1");
    }
  }

  // Dense iff more than 1/8 of the domain carries mass.
  void canonicalize() {
    const std::size_t count = support_size();
    const Repr want = count > (domain_size() >> 3) ? Repr::dense : Repr::sparse;
    if (want == repr_) return;
    if (want == Repr::dense) {
      dense_ = to_dense();
      sparse_.clear();
      sparse_.shrink_to_fit();
    } else {
      sparse_ = support();
      dense_.clear();
      dense_.shrink_to_fit();
    }
    repr_ = want;
  }

  unsigned n_;
  Repr repr_ = Repr::sparse;
  std::vector<double> dense_;
  std::vector<Entry> sparse_;
};

namespace detail {

inline void require_same_domain(const Distribution& a, const Distribution& b) {
  if (a.bits() != b.bits()) {
    throw DimensionError("distributions live on different domains (n = " +
                         std::to_string(a.bits()) + " vs n = " + std::to_string(b.bits()) + ")");
  }
}

// f(point, pa, pb) over the union of both supports, ascending.
template <typename F>
void for_each_union(const Distribution& a, const Distribution& b, F&& f) {
  require_same_domain(a, b);
  const std::vector<Entry> sa = a.support();
  const std::vector<Entry> sb = b.support();
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < sa.size() || j < sb.size()) {
    if (j == sb.size() || (i < sa.size() && sa[i].point < sb[j].point)) {
      f(sa[i].point, sa[i].p, 0.0);
      ++i;
    } else if (i == sa.size() || sb[j].point < sa[i].point) {
      f(sb[j].point, 0.0, sb[j].p);
      ++j;
    } else {
      f(sa[i].point, sa[i].p, sb[j].p);
      ++i;
      ++j;
    }
  }
}

}  // namespace detail

inline double threshold_for(double k) { return std::exp2(-k); }

inline double max_probability(const Distribution& d) {
  double best = 0.0;
  d.for_each_nonzero([&](std::uint64_t, double p) { best = std::max(best, p); });
  return best;
}

inline double min_entropy(const Distribution& d) {
  const double pmax = max_probability(d);
  if (pmax <= 0.0) throw ValidationError("min-entropy of an all-zero vector is undefined");
  return std::clamp(-std::log2(pmax), 0.0, static_cast<double>(d.bits()));
}

inline double statistical_distance(const Distribution& a, const Distribution& b) {
  CompensatedSum s;
  detail::for_each_union(a, b, [&](std::uint64_t, double pa, double pb) { s += std::fabs(pa - pb); });
  return 0.5 * s.value();
}

inline double euclidean_distance(const Distribution& a, const Distribution& b) {
  CompensatedSum s;
  detail::for_each_union(a, b, [&](std::uint64_t, double pa, double pb) {
    const double diff = pa - pb;
    s += diff * diff;
  });
  return std::sqrt(s.value());
}

// Nonzero entries of P_a - P_b, ascending by point.
inline std::vector<Entry> signed_difference(const Distribution& a, const Distribution& b) {
  std::vector<Entry> out;
  detail::for_each_union(a, b, [&](std::uint64_t x, double pa, double pb) {
    if (pa != pb) out.push_back({x, pa - pb});
  });
  return out;
}

// sum_x max(P(x) - 2^-k, 0); nondecreasing in k.
inline double mass_above_threshold(const Distribution& d, double k) {
  if (!(k >= 0.0)) throw ValidationError("k must be a non-negative number of bits");
  const double tau = threshold_for(k);
  CompensatedSum s;
  d.for_each_nonzero([&](std::uint64_t, double p) {
    if (p > tau) s += p - tau;
  });
  return s.value();
}

// Largest k with mass_above_threshold(d, k) <= delta, capped at n.
//
// g(tau) = sum max(p - tau, 0) is piecewise linear in tau with breakpoints
// at the sorted probabilities; on [p_{j+1}, p_j] it equals S_j - j*tau.
inline double smooth_min_entropy(const Distribution& d, double delta) {
  if (!(delta >= 0.0 && delta <= 1.0)) throw ValidationError("delta must lie in [0, 1]");
  std::vector<double> probs;
  probs.reserve(d.support_size());
  d.for_each_nonzero([&](std::uint64_t, double p) { probs.push_back(p); });
  std::sort(probs.begin(), probs.end(), std::greater<>());

  const double n = static_cast<double>(d.bits());
  CompensatedSum prefix;
  for (std::size_t j = 1; j <= probs.size(); ++j) {
    prefix += probs[j - 1];
    const double next = j < probs.size() ? probs[j] : 0.0;
    const double tau = (prefix.value() - delta) / static_cast<double>(j);
    if (tau >= next) {
      if (tau <= 0.0) return n;
      return std::min(n, -std::log2(tau));
    }
  }
  return n;
}

// Caps every probability at 2^-k and pours the excess, in ascending point
// order, into points still below the cap. Requires k <= n.
inline Distribution smoothing_witness(const Distribution& d, double k) {
  if (!(k >= 0.0)) throw ValidationError("k must be a non-negative number of bits");
  if (k > static_cast<double>(d.bits())) {
    throw PreconditionError("no distribution on n = " + std::to_string(d.bits()) +
                            " bits has min-entropy " + std::to_string(k));
  }
  const double cap = threshold_for(k);
  double remaining = mass_above_threshold(d, k);

  const std::vector<Entry> support = d.support();
  std::vector<Entry> out;
  out.reserve(support.size());
  std::size_t next = 0;
  std::uint64_t x = 0;
  const std::uint64_t size = d.domain_size();
  while (x < size) {
    const bool in_support = next < support.size() && support[next].point == x;
    double y = in_support ? std::min(support[next].p, cap) : 0.0;
    if (remaining > 0.0 && y < cap) {
      const double add = std::min(cap - y, remaining);
      y += add;
      remaining -= add;
    }
    if (y > 0.0) out.push_back({x, y});
    if (in_support) ++next;
    if (remaining <= 0.0) {
      // Nothing left to pour: copy the rest of the support, capped.
      for (; next < support.size(); ++next) {
        if (support[next].point <= x) continue;
        out.push_back({support[next].point, std::min(support[next].p, cap)});
      }
      break;
    }
    ++x;
  }
  return Distribution::from_sparse(d.bits(), std::move(out));
}

// {x : P(x) > 2^-k}, ascending.
inline std::vector<std::uint64_t> biased_set(const Distribution& d, double k) {
  const double tau = threshold_for(k);
  std::vector<std::uint64_t> out;
  d.for_each_nonzero([&](std::uint64_t x, double p) {
    if (p > tau) out.push_back(x);
  });
  return out;
}

struct EntropyReport {
  double min_entropy = 0.0;
  double smooth_min_entropy = 0.0;
  double delta = 0.0;
  double k = 0.0;
  double mass_above = 0.0;
  std::size_t biased_set_size = 0;
};

inline EntropyReport entropy_report(const Distribution& d, double delta, double k) {
  return EntropyReport{
      .min_entropy = min_entropy(d),
      .smooth_min_entropy = smooth_min_entropy(d, delta),
      .delta = delta,
      .k = k,
      .mass_above = mass_above_threshold(d, k),
      .biased_set_size = biased_set(d, k).size(),
  };
}

// ---------------------------------------------------------------------------
// Fixtures

inline Distribution uniform(unsigned n) {
  if (n < 1 || n > kMaxDomainBits) throw ValidationError("domain bit-width must be in [1, 30]");
  const std::uint64_t size = std::uint64_t{1} << n;
  return Distribution::from_dense(n, std::vector<double>(size, 1.0 / static_cast<double>(size)));
}

inline Distribution point_mass(unsigned n, std::uint64_t x) {
  return Distribution::from_sparse(n, {{x, 1.0}});
}

// Uniform over the given points (need not be sorted, must be distinct).
inline Distribution flat_on(unsigned n, std::vector<std::uint64_t> points) {
  if (points.empty()) throw ValidationError("flat distribution needs at least one point");
  std::sort(points.begin(), points.end());
  const double p = 1.0 / static_cast<double>(points.size());
  std::vector<Entry> entries;
  entries.reserve(points.size());
  for (std::uint64_t x : points) entries.push_back({x, p});
  return Distribution::from_sparse(n, std::move(entries));
}

// P(y) = |f^-1(y)| / |table| for f given by its value table.
inline Distribution pushforward(unsigned n, std::vector<std::uint64_t> table) {
  if (table.empty()) throw ValidationError("pushforward needs a non-empty function table");
  std::sort(table.begin(), table.end());
  const double unit = 1.0 / static_cast<double>(table.size());
  std::vector<Entry> entries;
  for (std::size_t i = 0; i < table.size();) {
    std::size_t j = i;
    while (j < table.size() && table[j] == table[i]) ++j;
    entries.push_back({table[i], static_cast<double>(j - i) * unit});
    i = j;
  }
  return Distribution::from_sparse(n, std::move(entries));
}

// `count` distinct points of {0,1}^n, none of them in `excluded` (sorted).
inline std::vector<std::uint64_t> sample_distinct_points(unsigned n, std::uint64_t count, Rng& rng,
                                                         const std::vector<std::uint64_t>& excluded = {}) {
  const std::uint64_t size = std::uint64_t{1} << n;
  if (count + excluded.size() > size) {
    throw ValidationError("cannot pick " + std::to_string(count) + " distinct points from a domain of " +
                          std::to_string(size - excluded.size()));
  }
  std::vector<std::uint64_t> taken = excluded;
  std::vector<std::uint64_t> out;
  out.reserve(count);
  if (count * 4 > size) {
    // Dense request: shuffle the admissible points.
    std::vector<std::uint64_t> pool;
    pool.reserve(size - excluded.size());
    for (std::uint64_t x = 0; x < size; ++x) {
      if (!std::binary_search(excluded.begin(), excluded.end(), x)) pool.push_back(x);
    }
    shuffle(std::span<std::uint64_t>(pool), rng);
    out.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(count));
    return out;
  }
  std::sort(taken.begin(), taken.end());
  while (out.size() < count) {
    const std::uint64_t x = uniform_below(rng, size);
    const auto it = std::lower_bound(taken.begin(), taken.end(), x);
    if (it != taken.end() && *it == x) continue;
    taken.insert(it, x);
    out.push_back(x);
  }
  return out;
}

// Mass `spike` on point 0, the rest spread uniformly over the other points.
inline Distribution spiked_uniform(unsigned n, double spike) {
  if (!(spike >= 0.0 && spike <= 1.0)) throw ValidationError("spike mass must lie in [0, 1]");
  const std::uint64_t size = std::uint64_t{1} << n;
  std::vector<double> probs(size, (1.0 - spike) / static_cast<double>(size - 1));
  probs[0] = spike;
  return Distribution::from_dense(n, std::move(probs));
}

struct FixtureParams {
  unsigned n = 16;
  double k = 8;          // log2 of the support / seed length where relevant
  double spike = 0.0625;  // spiked-uniform only
  std::uint64_t point = 0;  // point-mass only
};

inline constexpr unsigned kMaxPushforwardSeedBits = 26;

// Named fixtures: uniform, point-mass, flat, pushforward,
// pushforward-injective, spiked-uniform. Deterministic for a fixed seed.
inline Distribution make(std::string_view kind, const FixtureParams& params, std::uint64_t seed) {
  Rng rng(seed);
  const auto seed_bits = [&](double limit) -> unsigned {
    if (!(params.k >= 0.0) || params.k != std::floor(params.k) || params.k > limit) {
      throw UsageError("fixture '" + std::string(kind) + "' needs an integer k in [0, " +
                       std::to_string(static_cast<unsigned>(limit)) + "]");
    }
    return static_cast<unsigned>(params.k);
  };
  if (kind == "uniform") return uniform(params.n);
  if (kind == "point-mass") return point_mass(params.n, params.point);
  if (kind == "spiked-uniform") return spiked_uniform(params.n, params.spike);
  if (kind == "flat" || kind == "pushforward-injective") {
    return flat_on(params.n, sample_distinct_points(params.n, std::uint64_t{1} << seed_bits(params.n), rng));
  }
  if (kind == "pushforward") {
    // f may compress, so k is allowed to exceed n.
    const std::uint64_t inputs = std::uint64_t{1} << seed_bits(kMaxPushforwardSeedBits);
    const std::uint64_t size = std::uint64_t{1} << params.n;
    std::vector<std::uint64_t> table(inputs);
    for (auto& y : table) y = uniform_below(rng, size);
    return pushforward(params.n, std::move(table));
  }
  throw UsageError("unknown distribution kind '" + std::string(kind) +
                   "' (expected uniform, point-mass, flat, pushforward, pushforward-injective, "
                   "spiked-uniform)");
}

}  // namespace pe
