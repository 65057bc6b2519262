#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "oracles.hpp"

using namespace pe;

namespace {

Distribution dense(unsigned n, std::vector<double> p) { return Distribution::from_dense(n, std::move(p)); }

const Distribution kHalfQuarter = dense(2, {0.5, 0.25, 0.25, 0.0});

}  // namespace

// ---------------------------------------------------------------------------
// construction

TEST(Distribution, RejectsInvalidInput) {
  EXPECT_THROW(dense(2, {0.5, 0.5, 0.5, 0.0}), ValidationError);
  EXPECT_THROW(dense(2, {1.5, -0.5, 0.0, 0.0}), ValidationError);
  EXPECT_THROW(dense(2, {0.0, 0.0, 0.0, 0.0}), ValidationError);
  EXPECT_THROW(dense(2, {1.0, 0.0}), ValidationError);
  EXPECT_THROW(dense(0, {1.0}), ValidationError);
  EXPECT_THROW(Distribution::from_sparse(31, {{0, 1.0}}), ValidationError);
  EXPECT_THROW(Distribution::from_sparse(3, {{2, 0.5}, {1, 0.5}}), ValidationError);
  EXPECT_THROW(Distribution::from_sparse(3, {{2, 0.5}, {2, 0.5}}), ValidationError);
  EXPECT_THROW(Distribution::from_sparse(3, {{8, 1.0}}), ValidationError);
  EXPECT_THROW(dense(1, {std::nan(""), 1.0}), ValidationError);
}

TEST(Distribution, RepresentationFollowsSupportDensity) {
  // 2^6 / 8 = 8 points is the cutoff.
  std::vector<std::uint64_t> eight(8);
  std::iota(eight.begin(), eight.end(), 0);
  EXPECT_FALSE(flat_on(6, eight).is_dense());
  eight.push_back(9);
  EXPECT_TRUE(flat_on(6, eight).is_dense());
  EXPECT_FALSE(point_mass(6, 3).is_dense());
  EXPECT_TRUE(uniform(6).is_dense());
}

TEST(Distribution, ConversionsAreExact) {
  Rng rng(17);
  for (int i = 0; i < 50; ++i) {
    const Distribution d = oracle::random_spiky(rng, 7, 1 + uniform_below(rng, 100));
    const Distribution as_dense = d.as(Distribution::Repr::dense);
    const Distribution as_sparse = d.as(Distribution::Repr::sparse);
    EXPECT_TRUE(as_dense.is_dense());
    EXPECT_FALSE(as_sparse.is_dense());
    EXPECT_EQ(as_dense.to_dense(), d.to_dense());
    EXPECT_EQ(as_sparse.to_dense(), d.to_dense());
    EXPECT_EQ(as_sparse.as(Distribution::Repr::dense).to_dense(), d.to_dense());
    EXPECT_TRUE(as_dense == d);
  }
}

// ---------------------------------------------------------------------------
// min_entropy

TEST(MinEntropy, Examples) {
  EXPECT_DOUBLE_EQ(min_entropy(uniform(3)), 3.0);
  EXPECT_DOUBLE_EQ(min_entropy(point_mass(5, 17)), 0.0);
  EXPECT_DOUBLE_EQ(min_entropy(kHalfQuarter), 1.0);
}

TEST(MinEntropy, LiesBetweenZeroAndN) {
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    const unsigned n = 1 + static_cast<unsigned>(uniform_below(rng, 10));
    const Distribution d = oracle::random_dyadic(rng, n, 40);
    EXPECT_GE(min_entropy(d), 0.0);
    EXPECT_LE(min_entropy(d), n + 1e-12);
  }
}

// ---------------------------------------------------------------------------
// distances

TEST(StatisticalDistance, Examples) {
  EXPECT_DOUBLE_EQ(statistical_distance(kHalfQuarter, kHalfQuarter), 0.0);
  EXPECT_DOUBLE_EQ(statistical_distance(flat_on(3, {0, 1}), flat_on(3, {4, 5, 6, 7})), 1.0);
  EXPECT_DOUBLE_EQ(statistical_distance(dense(1, {1, 0}), dense(1, {0.5, 0.5})), 0.5);
}

TEST(StatisticalDistance, MismatchedDomainsThrow) {
  EXPECT_THROW(statistical_distance(uniform(2), uniform(3)), DimensionError);
  EXPECT_THROW(euclidean_distance(uniform(2), uniform(3)), DimensionError);
}

TEST(StatisticalDistance, MatchesDenseOracleAndIsSymmetric) {
  Rng rng(23);
  for (int i = 0; i < 100; ++i) {
    const Distribution a = oracle::random_dyadic(rng, 6, 64);
    const Distribution b = oracle::random_dyadic(rng, 6, 10);
    const double d = statistical_distance(a, b);
    EXPECT_NEAR(d, oracle::half_l1(a.to_dense(), b.to_dense()), 1e-15);
    EXPECT_DOUBLE_EQ(d, statistical_distance(b, a));
    EXPECT_GT(d, 0.0);
  }
}

TEST(EuclideanDistance, Examples) {
  EXPECT_DOUBLE_EQ(euclidean_distance(kHalfQuarter, kHalfQuarter), 0.0);
  EXPECT_DOUBLE_EQ(euclidean_distance(dense(1, {1, 0}), dense(1, {0, 1})), std::sqrt(2.0));
  for (unsigned k = 1; k <= 5; ++k) {
    std::vector<std::uint64_t> a(std::size_t{1} << k);
    std::vector<std::uint64_t> b(std::size_t{1} << (k + 1));
    std::iota(a.begin(), a.end(), 0);
    std::iota(b.begin(), b.end(), a.size());
    EXPECT_NEAR(euclidean_distance(flat_on(8, a), flat_on(8, b)), std::sqrt(3.0 * std::exp2(-(k + 1.0))), 1e-15);
  }
}

// ---------------------------------------------------------------------------
// mass_above_threshold

TEST(MassAboveThreshold, Examples) {
  EXPECT_DOUBLE_EQ(mass_above_threshold(kHalfQuarter, 1), 0.0);
  EXPECT_DOUBLE_EQ(mass_above_threshold(kHalfQuarter, 2), 0.25);
  const double spike = 0.1;
  const Distribution s = spiked_uniform(8, spike);
  EXPECT_NEAR(mass_above_threshold(s, 8), spike - std::exp2(-8), 1e-15);
}

TEST(MassAboveThreshold, ExactAgainstRationalOracle) {
  Rng rng(99);
  for (int i = 0; i < 200; ++i) {
    const unsigned n = 1 + static_cast<unsigned>(uniform_below(rng, 8));
    const Distribution d = oracle::random_dyadic(rng, n, 80);
    const unsigned k = static_cast<unsigned>(uniform_below(rng, n + 1));
    const auto exact = oracle::exact_mass_above(d.to_dense(), k);
    EXPECT_NEAR(mass_above_threshold(d, k), exact.convert_to<double>(), 1e-15);
  }
}

TEST(MassAboveThreshold, ContinuousAndNondecreasingInK) {
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const Distribution d = oracle::random_spiky(rng, 10, 200);
    double prev = -1;
    for (double k = 0; k <= 10; k += 0.01) {
      const double m = mass_above_threshold(d, k);
      EXPECT_GE(m, prev - 1e-15);
      // The derivative in k is bounded by ln 2 * 2^-k * |support|.
      if (prev >= 0) { EXPECT_LE(m - prev, 0.01 * std::log(2.0) * std::exp2(-(k - 0.01)) * 200 + 1e-15); }
      prev = m;
    }
  }
}

// ---------------------------------------------------------------------------
// smooth_min_entropy

TEST(SmoothMinEntropy, FlatAtOneHalfGainsOneBit) {
  for (unsigned k = 0; k <= 10; ++k) {
    std::vector<std::uint64_t> pts(std::size_t{1} << k);
    std::iota(pts.begin(), pts.end(), 0);
    EXPECT_DOUBLE_EQ(smooth_min_entropy(flat_on(12, pts), 0.5), k + 1.0) << "k = " << k;
  }
}

TEST(SmoothMinEntropy, ZeroDeltaIsMinEntropy) {
  Rng rng(8);
  for (int i = 0; i < 100; ++i) {
    const Distribution d = oracle::random_spiky(rng, 9, 1 + uniform_below(rng, 300));
    EXPECT_NEAR(smooth_min_entropy(d, 0.0), min_entropy(d), 1e-12);
  }
}

TEST(SmoothMinEntropy, SpikedUniformSmoothsToFullEntropy) {
  for (double spike : {0.01, 0.0625, 0.3}) {
    const Distribution d = spiked_uniform(12, spike);
    EXPECT_DOUBLE_EQ(smooth_min_entropy(d, spike), 12.0);
  }
}

TEST(SmoothMinEntropy, FullSmoothingGivesN) {
  EXPECT_DOUBLE_EQ(smooth_min_entropy(point_mass(5, 0), 1.0), 5.0);
  EXPECT_DOUBLE_EQ(smooth_min_entropy(point_mass(5, 0), 1.0 - 1.0 / 32), 5.0);
}

TEST(SmoothMinEntropy, NondecreasingInDeltaAndAboveMinEntropy) {
  Rng rng(41);
  for (int i = 0; i < 50; ++i) {
    const Distribution d = oracle::random_spiky(rng, 8, 1 + uniform_below(rng, 256));
    double prev = -1;
    for (double delta = 0; delta <= 1.0; delta += 0.005) {
      const double h = smooth_min_entropy(d, delta);
      EXPECT_GE(h, prev - 1e-12);
      EXPECT_GE(h, min_entropy(d) - 1e-12);
      EXPECT_LE(h, 8.0);
      prev = h;
    }
  }
}

TEST(SmoothMinEntropy, CharacterizationRoundTrip) {
  Rng rng(77);
  for (int i = 0; i < 300; ++i) {
    const unsigned n = 1 + static_cast<unsigned>(uniform_below(rng, 12));
    const Distribution d = oracle::random_spiky(rng, n, 1 + uniform_below(rng, std::min<std::uint64_t>(64, 1u << n)));
    const double k = uniform_unit(rng) * n;
    const double delta = mass_above_threshold(d, k);
    EXPECT_GE(smooth_min_entropy(d, delta), k - 1e-9);
    // Slightly less smoothing than needed must fall short of k.
    if (delta > 1e-6) { EXPECT_LT(smooth_min_entropy(d, delta * (1 - 1e-6)), k); }
  }
}

// ---------------------------------------------------------------------------
// smoothing_witness

TEST(SmoothingWitness, CapForcesUniform) {
  const Distribution d = dense(2, {0.5, 0.5, 0, 0});
  const Distribution w = smoothing_witness(d, 2);
  EXPECT_EQ(w.to_dense(), (std::vector<double>{0.25, 0.25, 0.25, 0.25}));
  EXPECT_DOUBLE_EQ(statistical_distance(d, w), 0.5);
}

TEST(SmoothingWitness, AlreadyEntropicIsUnchanged) {
  const Distribution d = dense(2, {0.25, 0.25, 0.5, 0});
  const Distribution w = smoothing_witness(d, 1);
  EXPECT_TRUE(w == d);
  EXPECT_DOUBLE_EQ(statistical_distance(d, w), 0.0);
}

TEST(SmoothingWitness, FillsBelowCapInAscendingPointOrder) {
  // Excess 3/8 - 1/4 = 1/8 goes to point 1 first.
  const Distribution d = dense(3, {0.375, 0.125, 0.25, 0.25, 0, 0, 0, 0});
  const Distribution w = smoothing_witness(d, 2);
  EXPECT_EQ(w.to_dense(), (std::vector<double>{0.25, 0.25, 0.25, 0.25, 0, 0, 0, 0}));
}

TEST(SmoothingWitness, KAboveNThrows) { EXPECT_THROW(smoothing_witness(uniform(3), 3.5), PreconditionError); }

TEST(SmoothingWitness, DistanceEqualsMassAboveExactly) {
  Rng rng(1234);
  for (int i = 0; i < 300; ++i) {
    const unsigned n = 1 + static_cast<unsigned>(uniform_below(rng, 8));
    const Distribution d = oracle::random_dyadic(rng, n, 64);
    const unsigned k = static_cast<unsigned>(uniform_below(rng, n + 1));
    const Distribution w = smoothing_witness(d, k);
    EXPECT_GE(min_entropy(w), k - 1e-12);
    // Dyadic inputs and an integer k keep every step exact.
    EXPECT_EQ(oracle::exact_half_l1(d.to_dense(), w.to_dense()), oracle::exact_mass_above(d.to_dense(), k));
  }
}

TEST(SmoothingWitness, RandomSparseDistanceMatchesRecomputation) {
  Rng rng(2024);
  for (int i = 0; i < 300; ++i) {
    const unsigned n = 1 + static_cast<unsigned>(uniform_below(rng, 12));
    const Distribution d = oracle::random_spiky(rng, n, 1 + uniform_below(rng, std::min<std::uint64_t>(100, 1u << n)));
    const double k = uniform_unit(rng) * n;
    const Distribution w = smoothing_witness(d, k);
    EXPECT_NEAR(oracle::half_l1(d.to_dense(), w.to_dense()), oracle::mass_above(d.to_dense(), k), 1e-12);
    EXPECT_GE(min_entropy(w), k - 1e-9);
  }
}

TEST(SmoothingWitness, OptimalAgainstFlatCandidates) {
  Rng rng(55);
  for (int i = 0; i < 40; ++i) {
    const Distribution d = oracle::random_spiky(rng, 4, 1 + uniform_below(rng, 16));
    for (unsigned k = 0; k <= 4; ++k) {
      const double witness = statistical_distance(d, smoothing_witness(d, k));
      EXPECT_GE(oracle::min_flat_distance(d.to_dense(), k), mass_above_threshold(d, k) - 1e-12);
      EXPECT_NEAR(witness, mass_above_threshold(d, k), 1e-12);
    }
  }
}

TEST(SmoothingWitness, OptimalOverWholeCappedSimplex) {
  Rng rng(66);
  for (int i = 0; i < 60; ++i) {
    const unsigned n = 1 + static_cast<unsigned>(uniform_below(rng, 3));
    const Distribution d = oracle::random_spiky(rng, n, 1 + uniform_below(rng, 1u << n));
    const double k = uniform_unit(rng) * n;
    const double best = oracle::capped_simplex_distance(d.to_dense(), std::exp2(-k));
    EXPECT_NEAR(mass_above_threshold(d, k), best, 1e-12);
  }
}

// ---------------------------------------------------------------------------
// biased_set

TEST(BiasedSet, Examples) {
  for (unsigned k = 0; k < 6; ++k) EXPECT_TRUE(biased_set(uniform(6), k).empty());
  EXPECT_EQ(biased_set(point_mass(4, 9), 1), (std::vector<std::uint64_t>{9}));
  EXPECT_EQ(biased_set(flat_on(5, {1, 4, 7, 30}), 3), (std::vector<std::uint64_t>{1, 4, 7, 30}));
}

TEST(BiasedSet, SmallerThanTwoToKWhenMassAbove) {
  Rng rng(12);
  for (int i = 0; i < 200; ++i) {
    const Distribution d = oracle::random_spiky(rng, 10, 1 + uniform_below(rng, 500));
    const double k = uniform_unit(rng) * 10;
    if (mass_above_threshold(d, k) > 0) { EXPECT_LT(static_cast<double>(biased_set(d, k).size()), std::exp2(k)); }
    const EntropyReport r = entropy_report(d, 0.1, k);
    EXPECT_EQ(r.biased_set_size, biased_set(d, k).size());
    EXPECT_GE(r.smooth_min_entropy, r.min_entropy);
  }
}

// ---------------------------------------------------------------------------
// Euclidean consequences

TEST(JensenBound, RestrictedL2DominatesScaledL1) {
  Rng rng(31);
  for (int i = 0; i < 200; ++i) {
    const Distribution a = oracle::random_spiky(rng, 5, 1 + uniform_below(rng, 32));
    const Distribution b = oracle::random_spiky(rng, 5, 1 + uniform_below(rng, 32));
    const std::vector<double> pa = a.to_dense();
    const std::vector<double> pb = b.to_dense();
    std::vector<std::uint64_t> subset;
    for (std::uint64_t x = 0; x < 32; ++x) {
      if (uniform_below(rng, 2) == 1) subset.push_back(x);
    }
    if (subset.empty()) continue;
    long double l1 = 0;
    long double l2 = 0;
    double lo = 1e9;
    double hi = -1;
    for (auto x : subset) {
      const double diff = std::fabs(pa[x] - pb[x]);
      l1 += diff;
      l2 += static_cast<long double>(diff) * diff;
      lo = std::min(lo, diff);
      hi = std::max(hi, diff);
    }
    const double lhs = std::sqrt(static_cast<double>(l2));
    const double rhs = static_cast<double>(l1) / std::sqrt(static_cast<double>(subset.size()));
    EXPECT_GE(lhs, rhs * (1 - 1e-12));
    if (hi - lo > 1e-9) { EXPECT_GT(lhs, rhs); }
  }
}

TEST(JensenBound, EqualityWhenDifferencesAreConstant) {
  const Distribution a = flat_on(3, {0, 1});
  const Distribution b = flat_on(3, {2, 3});
  // |diff| = 1/2 on all four points.
  EXPECT_NEAR(euclidean_distance(a, b), 2 * statistical_distance(a, b) / 2.0, 1e-15);
}

TEST(NoSmoothEntropyImpliesEuclideanDistance, GeneratedInstances) {
  Rng rng(808);
  int checked = 0;
  for (int i = 0; i < 200; ++i) {
    const unsigned n = 8;
    const Distribution x = oracle::random_spiky(rng, n, 1 + uniform_below(rng, 40));
    const double k = 3 + uniform_unit(rng) * 4;
    const double above = mass_above_threshold(x, k);
    if (above <= 1e-9) continue;
    const double delta = above * (0.5 + 0.49 * uniform_unit(rng));
    ASSERT_LT(smooth_min_entropy(x, delta), k);
    const double floor = std::exp2(-k / 2) * delta;
    // Several Y with min-entropy >= k: the witness, flats, and capped mixtures.
    std::vector<Distribution> ys{smoothing_witness(x, k), uniform(n)};
    const auto size = static_cast<std::uint64_t>(std::ceil(std::exp2(k)));
    ys.push_back(flat_on(n, sample_distinct_points(n, size, rng)));
    ys.push_back(flat_on(n, sample_distinct_points(n, std::min<std::uint64_t>(256, size * 2), rng)));
    for (const Distribution& y : ys) {
      ASSERT_GE(min_entropy(y), k - 1e-9);
      EXPECT_GT(euclidean_distance(x, y), floor);
    }
    ++checked;
  }
  EXPECT_GT(checked, 100);
}

// ---------------------------------------------------------------------------
// fixtures

TEST(Make, PushforwardExamples) {
  std::vector<std::uint64_t> identity(256);
  std::iota(identity.begin(), identity.end(), 0);
  EXPECT_TRUE(pushforward(8, identity) == uniform(8));
  EXPECT_TRUE(pushforward(8, std::vector<std::uint64_t>(64, 42)) == point_mass(8, 42));
  const Distribution d = pushforward(4, {5, 5, 5, 11});
  EXPECT_DOUBLE_EQ(d.probability(5), 0.75);
  EXPECT_DOUBLE_EQ(d.probability(11), 0.25);
  EXPECT_EQ(d.support_size(), 2u);
}

TEST(Make, DeterministicForSeedAndValidKinds) {
  const FixtureParams params{.n = 10, .k = 4, .spike = 0.2, .point = 3};
  for (const char* kind : {"uniform", "point-mass", "flat", "pushforward", "pushforward-injective", "spiked-uniform"}) {
    const Distribution a = make(kind, params, 7);
    EXPECT_TRUE(a == make(kind, params, 7)) << kind;
    EXPECT_EQ(a.bits(), 10u);
  }
  EXPECT_TRUE(make("flat", params, 1) != make("flat", params, 2));
  EXPECT_EQ(make("flat", params, 1).support_size(), 16u);
  EXPECT_DOUBLE_EQ(min_entropy(make("pushforward-injective", params, 5)), 4.0);
  EXPECT_DOUBLE_EQ(make("spiked-uniform", params, 0).probability(0), 0.2);
  EXPECT_THROW(make("gaussian", params, 0), UsageError);
}

TEST(Make, PushforwardCountsPreimages) {
  const FixtureParams params{.n = 6, .k = 8};
  const Distribution d = make("pushforward", params, 19);
  d.for_each_nonzero([](std::uint64_t, double p) {
    const double count = p * 256;
    EXPECT_DOUBLE_EQ(count, std::round(count));
  });
}
