#pragma once

// Sliced sign distinguishers.
//
// A base sign function D (4-wise independent +-1 values) and a slice hash h
// partition the domain into T = 2^t slices S_i = {x : h(x) = i}. Knowing X
// and Y exactly, the builder records one advice sign per slice,
//
//   beta_i = sign( sum_{x in S_i} D(x) (P_X(x) - P_Y(x)) ),
//
// and the composed distinguisher is Dhat(x) = beta_{h(x)} * D(x). Its
// advantage is the sum over slices of the absolute slice advantages.
//
// All advantages use the +-1 convention: Adv = |sum_x Dhat(x) (P_X - P_Y)|,
// which is twice the advantage of the boolean view (1 + Dhat) / 2.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "distribution.hpp"
#include "errors.hpp"
#include "hashing.hpp"
#include "numeric.hpp"
#include "random.hpp"

namespace pe {

// Minimum advantage promised for a fresh (D, h) with probability >= 1/17.
inline double advantage_bound(std::uint64_t slices, double k, double delta) {
  return std::sqrt(static_cast<double>(slices)) * std::exp2(-k / 2.0) * delta / 3.0;
}

inline constexpr double kSuccessProbabilityFloor = 1.0 / 17.0;

struct AttackParams {
  unsigned n = 16;
  double k = 8;
  double delta = 0.5;
  std::uint64_t slices = 1;  // T

  void validate() const {
    if (n < 1 || n > kMaxDomainBits) throw UsageError("n must be in [1, 30]");
    if (!(delta > 0.0 && delta <= 1.0)) throw UsageError("delta must lie in (0, 1]");
    if (!(k >= 0.0 && k <= static_cast<double>(n))) throw UsageError("k must lie in [0, n]");
    if (!is_power_of_two(slices)) throw UsageError("slice count T must be a power of 2");
    if (slice_bits() > kMaxSliceBits) throw UsageError("slice count T must be at most 2^32");
  }

  [[nodiscard]] unsigned slice_bits() const noexcept { return log2_exact(slices); }
  [[nodiscard]] double bound() const { return advantage_bound(slices, k, delta); }
};

// ---------------------------------------------------------------------------
// Advantage

// sum_{x in diff} D(x) * diff(x), before the absolute value.
template <typename SignFn>
double advantage_signed(const SignFn& dist, std::span<const Entry> diff) {
  CompensatedSum s;
  for (const Entry& e : diff) s += static_cast<double>(dist(e.point)) * e.p;
  return s.value();
}

template <typename SignFn>
double advantage_signed(const SignFn& dist, const Distribution& x, const Distribution& y) {
  const std::vector<Entry> diff = signed_difference(x, y);
  return advantage_signed(dist, std::span<const Entry>(diff));
}

// Restricted to the sorted point set `subset`.
template <typename SignFn>
double advantage_signed(const SignFn& dist, const Distribution& x, const Distribution& y,
                        std::span<const std::uint64_t> subset) {
  if (!std::is_sorted(subset.begin(), subset.end())) throw UsageError("subset must be sorted");
  const std::vector<Entry> diff = signed_difference(x, y);
  CompensatedSum s;
  for (const Entry& e : diff) {
    if (std::binary_search(subset.begin(), subset.end(), e.point)) {
      s += static_cast<double>(dist(e.point)) * e.p;
    }
  }
  return s.value();
}

// ---------------------------------------------------------------------------
// Sliced distinguisher

class SlicedDistinguisher {
 public:
  SlicedDistinguisher(SignHash sign, SliceHash slicer, std::vector<std::int8_t> advice)
      : sign_(sign), slicer_(slicer), advice_(std::move(advice)) {
    if (advice_.size() != slicer_.slice_count()) {
      throw ValidationError("advice must hold exactly one sign per slice");
    }
    for (std::int8_t b : advice_) {
      if (b != 1 && b != -1) throw ValidationError("advice signs must be +1 or -1");
    }
  }

  int operator()(std::uint64_t x) const noexcept {
    return advice_[static_cast<std::size_t>(slicer_(x))] * sign_(x);
  }

  [[nodiscard]] const SignHash& sign() const noexcept { return sign_; }
  [[nodiscard]] const SliceHash& slicer() const noexcept { return slicer_; }
  [[nodiscard]] const std::vector<std::int8_t>& advice() const noexcept { return advice_; }
  [[nodiscard]] std::uint64_t slice_count() const noexcept { return slicer_.slice_count(); }

 private:
  SignHash sign_;
  SliceHash slicer_;
  std::vector<std::int8_t> advice_;
};

struct SlicedBuild {
  SlicedDistinguisher distinguisher;
  // Signed advantage of the base sign on each slice, before flipping.
  std::vector<double> slice_advantage;

  // sum_i |slice advantage|, the advantage of the composed distinguisher.
  [[nodiscard]] double total() const {
    CompensatedSum s;
    for (double a : slice_advantage) s += std::fabs(a);
    return s.value();
  }
};

inline SlicedBuild build_sliced(const SignHash& sign, const SliceHash& slicer, std::span<const Entry> diff) {
  const std::uint64_t slices = slicer.slice_count();
  std::vector<CompensatedSum> sums(slices);
  for (const Entry& e : diff) {
    sums[static_cast<std::size_t>(slicer(e.point))] += static_cast<double>(sign(e.point)) * e.p;
  }
  std::vector<double> per_slice(slices);
  std::vector<std::int8_t> advice(slices);
  for (std::size_t i = 0; i < slices; ++i) {
    per_slice[i] = sums[i].value();
    // Ties (incl. empty slices) go to +1.
    advice[i] = per_slice[i] < 0.0 ? std::int8_t{-1} : std::int8_t{1};
  }
  return SlicedBuild{SlicedDistinguisher(sign, slicer, std::move(advice)), std::move(per_slice)};
}

inline SlicedDistinguisher build_sliced(const SignHash& sign, const SliceHash& slicer, const Distribution& x,
                                        const Distribution& y) {
  const std::vector<Entry> diff = signed_difference(x, y);
  return build_sliced(sign, slicer, std::span<const Entry>(diff)).distinguisher;
}

inline int evaluate(const SlicedDistinguisher& dhat, std::uint64_t x) { return dhat(x); }

// |Pr[D'(X) = 1] - Pr[D'(Y) = 1]| for the boolean view D' = (1 + Dhat) / 2.
template <typename SignFn>
double boolean_advantage(const SignFn& dist, const Distribution& x, const Distribution& y) {
  CompensatedSum px;
  CompensatedSum py;
  x.for_each_nonzero([&](std::uint64_t p, double w) {
    if (dist(p) == 1) px += w;
  });
  y.for_each_nonzero([&](std::uint64_t p, double w) {
    if (dist(p) == 1) py += w;
  });
  return std::fabs(px.value() - py.value());
}

// ---------------------------------------------------------------------------
// Trials

inline double circuit_size_estimate(std::uint64_t slices, unsigned n) {
  // T advice gates plus two degree-3 hash evaluations modeled at n^2 each.
  const double hash_cost = static_cast<double>(n) * static_cast<double>(n);
  return static_cast<double>(slices) + 2.0 * hash_cost;
}

inline double circuit_size_estimate(const AttackParams& params) {
  return circuit_size_estimate(params.slices, params.n);
}

struct AttackReport {
  double advantage = 0.0;
  double bound = 0.0;
  bool success = false;
  // False when smooth_min_entropy(X, delta) >= k, where nothing is promised.
  bool guaranteed = true;
  double size_units = 0.0;
  std::vector<double> per_slice;  // |slice advantage|, one per slice
  std::uint64_t trial_seed = 0;
  PolyHash sign_hash = make_polyhash(0, 0, 0, 0);
  PolyHash slice_hash = make_polyhash(0, 0, 0, 0);
  AttackParams params;
};

// Per-(X, Y) work shared by all trials.
class AttackInstance {
 public:
  AttackInstance(const Distribution& x, const Distribution& y, const AttackParams& params)
      : params_(params) {
    params_.validate();
    if (x.bits() != params.n || y.bits() != params.n) {
      throw DimensionError("distributions must live on the n = " + std::to_string(params.n) + " domain");
    }
    const double y_entropy = min_entropy(y);
    if (y_entropy < params.k - kProbabilityTolerance) {
      throw PreconditionError("Y has min-entropy " + std::to_string(y_entropy) + " < k = " +
                              std::to_string(params.k));
    }
    guaranteed_ = smooth_min_entropy(x, params.delta) < params.k;
    diff_ = signed_difference(x, y);
  }

  [[nodiscard]] const AttackParams& params() const noexcept { return params_; }
  [[nodiscard]] bool guaranteed() const noexcept { return guaranteed_; }
  [[nodiscard]] std::span<const Entry> difference() const noexcept { return diff_; }

  [[nodiscard]] AttackReport run(Rng& rng, std::uint64_t trial_seed = 0) const {
    const SignHash sign = sample_sign_hash(rng);
    const SliceHash slicer = sample_slice_hash(rng, params_.slice_bits());
    const SlicedBuild built = build_sliced(sign, slicer, diff_);

    AttackReport r;
    r.params = params_;
    r.trial_seed = trial_seed;
    r.sign_hash = sign.base();
    r.slice_hash = slicer.base();
    r.guaranteed = guaranteed_;
    // Measured directly on Dhat, independently of the per-slice sums.
    r.advantage = std::fabs(advantage_signed(built.distinguisher, std::span<const Entry>(diff_)));
    r.per_slice.reserve(built.slice_advantage.size());
    for (double a : built.slice_advantage) r.per_slice.push_back(std::fabs(a));
    r.bound = params_.bound();
    r.success = r.advantage >= r.bound;
    r.size_units = circuit_size_estimate(params_);
    return r;
  }

  [[nodiscard]] AttackReport run_seeded(std::uint64_t trial_seed) const {
    Rng rng(trial_seed);
    return run(rng, trial_seed);
  }

 private:
  AttackParams params_;
  bool guaranteed_ = true;
  std::vector<Entry> diff_;
};

// Samples a sign hash and a slice hash from `rng`, builds Dhat and reports.
inline AttackReport run_trial(const Distribution& x, const Distribution& y, const AttackParams& params,
                              Rng& rng) {
  return AttackInstance(x, y, params).run(rng);
}

struct SuccessEstimate {
  std::uint64_t trials = 0;
  std::uint64_t successes = 0;
  bool guaranteed = true;
  std::vector<AttackReport> reports;

  [[nodiscard]] double fraction() const noexcept {
    return trials == 0 ? 0.0 : static_cast<double>(successes) / static_cast<double>(trials);
  }
  [[nodiscard]] double wilson_lower() const noexcept { return wilson_lower_bound(successes, trials); }
  [[nodiscard]] bool meets_floor() const noexcept { return wilson_lower() >= kSuccessProbabilityFloor; }
};

inline constexpr std::uint64_t kMinSuccessTrials = 30;

// Trial i uses seed derive_seed(root_seed, i); results do not depend on the
// order in which trials run.
inline SuccessEstimate estimate_success_probability(const AttackInstance& instance, std::uint64_t trials,
                                                    std::uint64_t root_seed) {
  if (trials < kMinSuccessTrials) throw UsageError("success estimation needs at least 30 trials");
  SuccessEstimate est;
  est.trials = trials;
  est.guaranteed = instance.guaranteed();
  est.reports.reserve(trials);
  for (std::uint64_t i = 0; i < trials; ++i) {
    est.reports.push_back(instance.run_seeded(derive_seed(root_seed, i)));
    if (est.reports.back().success) ++est.successes;
  }
  return est;
}

inline SuccessEstimate estimate_success_probability(const Distribution& x, const Distribution& y,
                                                    const AttackParams& params, std::uint64_t trials,
                                                    std::uint64_t root_seed) {
  return estimate_success_probability(AttackInstance(x, y, params), trials, root_seed);
}

// ---------------------------------------------------------------------------
// Tradeoff

// Smallest power of two T with advantage_bound(T, k, delta) >= epsilon,
// i.e. T >= 9 * epsilon^2 * 2^k / delta^2. Throws if T would exceed 2^n.
inline std::uint64_t choose_slices(double epsilon, double k, double delta, unsigned n) {
  if (!(epsilon > 0.0)) throw UsageError("epsilon must be positive");
  if (!(delta > 0.0 && delta <= 1.0)) throw UsageError("delta must lie in (0, 1]");
  const double required = 9.0 * epsilon * epsilon * std::exp2(k) / (delta * delta);
  // Relative slack absorbs rounding when epsilon sits exactly on a bound.
  const double target = required * (1.0 - 1e-12);
  unsigned t = 0;
  while (std::exp2(static_cast<double>(t)) < target) {
    ++t;
    if (t > n || t > kMaxSliceBits) {
      throw RangeError("epsilon " + std::to_string(epsilon) + " needs more than 2^" + std::to_string(n) +
                       " slices");
    }
  }
  return std::uint64_t{1} << t;
}

// ---------------------------------------------------------------------------
// Worst case over all Y with min-entropy >= k

struct WorstCase {
  double value = 0.0;  // min over Y of |E_X[D] - E_Y[D]|
  double expectation_x = 0.0;
  double lowest = 0.0;   // min over Y of E_Y[D]
  double highest = 0.0;  // max over Y of E_Y[D]
  Distribution witness;
};

inline constexpr unsigned kMaxWorstCaseBits = 24;

namespace detail {

// Greedy extreme point: mass 2^-k on the points in `order` until mass runs out.
inline std::vector<double> fill_in_order(const std::vector<std::uint64_t>& order, double cap, std::size_t size) {
  std::vector<double> y(size, 0.0);
  double remaining = 1.0;
  for (std::uint64_t x : order) {
    if (remaining <= 0.0) break;
    const double put = std::min(cap, remaining);
    y[x] = put;
    remaining -= put;
  }
  return y;
}

inline double expectation(std::span<const double> values, std::span<const double> probs) {
  CompensatedSum s;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (probs[i] != 0.0) s += values[i] * probs[i];
  }
  return s.value();
}

}  // namespace detail

// `values` lists the distinguisher's output on every point of {0,1}^n.
inline WorstCase worst_case_advantage(std::span<const double> values, const Distribution& x, double k) {
  const unsigned n = x.bits();
  if (n > kMaxWorstCaseBits) throw RangeError("worst-case search enumerates the domain; n must be <= 24");
  if (values.size() != x.domain_size()) throw DimensionError("need one distinguisher value per point");
  if (!(k >= 0.0 && k <= static_cast<double>(n))) throw UsageError("k must lie in [0, n]");

  const double cap = threshold_for(k);
  std::vector<std::uint64_t> order(values.size());
  for (std::uint64_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::uint64_t a, std::uint64_t b) { return values[a] > values[b]; });
  const std::vector<double> y_high = detail::fill_in_order(order, cap, values.size());
  for (std::uint64_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::uint64_t a, std::uint64_t b) { return values[a] < values[b]; });
  const std::vector<double> y_low = detail::fill_in_order(order, cap, values.size());

  const std::vector<double> px = x.to_dense();
  const double ex = detail::expectation(values, px);
  const double hi = detail::expectation(values, y_high);
  const double lo = detail::expectation(values, y_low);

  std::vector<double> witness;
  double value = 0.0;
  if (ex >= hi) {
    value = ex - hi;
    witness = y_high;
  } else if (ex <= lo) {
    value = lo - ex;
    witness = y_low;
  } else {
    // Mix the two extremes to hit E_X exactly; the cap is preserved.
    const double lambda = (ex - lo) / (hi - lo);
    witness.resize(values.size());
    for (std::size_t i = 0; i < witness.size(); ++i) witness[i] = lambda * y_high[i] + (1.0 - lambda) * y_low[i];
  }
  return WorstCase{value, ex, lo, hi, Distribution::from_dense(n, std::move(witness))};
}

template <typename SignFn>
std::vector<double> tabulate(const SignFn& dist, unsigned n) {
  if (n > kMaxWorstCaseBits) throw RangeError("tabulation enumerates the domain; n must be <= 24");
  std::vector<double> values(std::size_t{1} << n);
  for (std::uint64_t x = 0; x < values.size(); ++x) values[x] = static_cast<double>(dist(x));
  return values;
}

inline WorstCase worst_case_advantage(const SlicedDistinguisher& dhat, const Distribution& x, double k) {
  const std::vector<double> values = tabulate(dhat, x.bits());
  return worst_case_advantage(std::span<const double>(values), x, k);
}

}  // namespace pe
