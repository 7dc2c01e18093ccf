#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "eisc/evalx.hpp"
#include "eisc/spectra.hpp"
#include "oracles.hpp"

using namespace eisc;

namespace {

Spectrum comb(std::vector<double> v) { return Spectrum(std::move(v), LaplacianKind::combinatorial); }

SpectralFunction step_function(std::vector<double> knots, std::vector<double> values) {
  return SpectralFunction(std::move(knots), std::move(values), MatchMethod::clrl, 2);
}

double scale_for(MatchMethod m, const std::vector<double>& ev) {
  switch (m) {
    case MatchMethod::clrl: return ev.back();
    case MatchMethod::clssal:
    case MatchMethod::clmxl: return static_cast<double>(ev.size());
    case MatchMethod::nll: return 1.0;
  }
  return 1.0;
}

}  // namespace

TEST(BuildSpectralFunction, Clrl) {
  const auto f = build_spectral_function(comb({0, 1, 4}), MatchMethod::clrl);
  EXPECT_EQ(f.knots(), (std::vector<double>{0, 0.5, 1}));
  EXPECT_EQ(f.values(), (std::vector<double>{1, 0.25, 0}));
}

TEST(BuildSpectralFunction, Clssal) {
  const auto f = build_spectral_function(comb({0, 1, 4}), MatchMethod::clssal);
  EXPECT_EQ(f.knots(), (std::vector<double>{0, 0.5, 1}));
  EXPECT_DOUBLE_EQ(f.values()[0], 4.0 / 3.0);
  EXPECT_DOUBLE_EQ(f.values()[1], 1.0 / 3.0);
  EXPECT_EQ(f.values()[2], 0.0);
}

TEST(BuildSpectralFunction, NllIsIdentity) {
  const auto f = build_spectral_function(Spectrum({0, 2}, LaplacianKind::normalized), MatchMethod::nll);
  EXPECT_EQ(f.knots(), (std::vector<double>{0, 1}));
  EXPECT_EQ(f.values(), (std::vector<double>{2, 0}));
}

TEST(BuildSpectralFunction, Errors) {
  EXPECT_THROW(build_spectral_function(comb({1}), MatchMethod::clrl), DegenerateSpectrum);
  EXPECT_THROW(build_spectral_function(comb({0, 1}), MatchMethod::nll), MethodMismatch);
  EXPECT_THROW(build_spectral_function(Spectrum({0, 1}, LaplacianKind::normalized), MatchMethod::clssal),
               MethodMismatch);
}

TEST(BuildSpectralFunction, ZeroSpectrumUnderClrlIsZero) {
  const auto f = build_spectral_function(comb({0, 0, 0}), MatchMethod::clrl);
  EXPECT_EQ(f.values(), (std::vector<double>{0, 0, 0}));
}

TEST(BuildSpectralFunction, ClrlEndpointsAndScaleInvariance) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 50; ++t) {
    auto ev = oracle::random_spectrum(2 + t, 10.0, t % 2 == 0, rng);
    const auto f = build_spectral_function(comb(ev), MatchMethod::clrl);
    EXPECT_EQ(f.values().front(), 1.0);
    EXPECT_DOUBLE_EQ(f.values().back(), ev.front() / ev.back());
    EXPECT_TRUE(std::is_sorted(f.values().rbegin(), f.values().rend()));
    for (double& v : ev) v *= 3.5;
    const auto g = build_spectral_function(comb(ev), MatchMethod::clrl);
    for (std::size_t i = 0; i < f.values().size(); ++i) {
      EXPECT_NEAR(f.values()[i], g.values()[i], 1e-15);
    }
    if (t % 2 == 0) {
      const auto s = build_spectral_function(comb(ev), MatchMethod::clssal);
      EXPECT_EQ(s.values().back(), 0.0);
      EXPECT_EQ(g.values().back(), 0.0);
    }
  }
}

TEST(EvaluateAt, InterpolatesAndHitsKnots) {
  const auto f = build_spectral_function(comb({0, 1, 4}), MatchMethod::clrl);
  EXPECT_DOUBLE_EQ(evaluate_at(f, 0.25), 0.625);
  EXPECT_EQ(evaluate_at(f, 0.0), 1.0);
  EXPECT_EQ(evaluate_at(f, 0.5), 0.25);
  EXPECT_EQ(evaluate_at(f, 1.0), 0.0);
  EXPECT_THROW(evaluate_at(f, -0.01), DomainError);
  EXPECT_THROW(evaluate_at(f, 1.01), DomainError);
}

TEST(SpectralDistance, Examples) {
  const auto f = build_spectral_function(comb({0, 1, 4}), MatchMethod::clssal);
  EXPECT_EQ(spectral_distance(f, f, MatchMethod::clssal), 0.0);
  EXPECT_DOUBLE_EQ(spectral_distance(step_function({0, 1}, {1, 0}), step_function({0, 1}, {0, 0}),
                                     MatchMethod::clrl),
                   0.5);
  const auto a = build_spectral_function(comb({0, 1, 4}), MatchMethod::clmxl);
  const auto b = build_spectral_function(comb({0, 0, 3}), MatchMethod::clmxl);
  EXPECT_DOUBLE_EQ(spectral_distance(a, b, MatchMethod::clmxl), 1.0 / 3.0);
}

TEST(SpectralDistance, CrossingSegmentsSplitAtRoot) {
  // (1 -> -1) crosses zero at 0.5: two triangles of area 0.25.
  EXPECT_DOUBLE_EQ(spectral_distance(step_function({0, 1}, {1, 0}), step_function({0, 1}, {0, 1}),
                                     MatchMethod::clrl),
                   0.5);
}

TEST(SpectralDistance, MethodMismatch) {
  const auto a = build_spectral_function(comb({0, 1, 4}), MatchMethod::clssal);
  const auto b = build_spectral_function(comb({0, 1, 4}), MatchMethod::clrl);
  EXPECT_THROW(spectral_distance(a, b, MatchMethod::clssal), MethodMismatch);
  EXPECT_THROW(spectral_distance(a, a, MatchMethod::clrl), MethodMismatch);
}

TEST(SpectralDistance, MatchesQuadratureOracle) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<std::size_t> size(2, 60);
  for (auto method : kAllMethods) {
    const auto kind = laplacian_kind_for(method);
    const double hi = kind == LaplacianKind::normalized ? 2.0 : 30.0;
    for (int t = 0; t < 20; ++t) {
      const auto e1 = oracle::random_spectrum(size(rng), hi, true, rng);
      const auto e2 = oracle::random_spectrum(size(rng), hi, true, rng);
      const auto f1 = build_spectral_function(Spectrum(e1, kind), method);
      const auto f2 = build_spectral_function(Spectrum(e2, kind), method);
      const double exact = spectral_distance(f1, f2, method);
      const double s1 = scale_for(method, e1), s2 = scale_for(method, e2);
      if (method == MatchMethod::clmxl) {
        EXPECT_EQ(exact, std::abs(oracle::specfun_value(e1, s1, 0) - oracle::specfun_value(e2, s2, 0)));
        continue;
      }
      const double quad = oracle::trapezoid_abs_diff(
          [&](double x) { return oracle::specfun_value(e1, s1, x); },
          [&](double x) { return oracle::specfun_value(e2, s2, x); }, 100000);
      EXPECT_NEAR(exact, quad, 1e-6);
    }
  }
}

TEST(SpectralDistance, PseudometricOnRandomTriples) {
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<std::size_t> size(2, 40);
  for (auto method : kAllMethods) {
    const auto kind = laplacian_kind_for(method);
    for (int t = 0; t < 100; ++t) {
      std::vector<SpectralFunction> f;
      for (int i = 0; i < 3; ++i) {
        f.push_back(build_spectral_function(
            Spectrum(oracle::random_spectrum(size(rng), 2.0, false, rng), kind), method));
      }
      const double ab = spectral_distance(f[0], f[1], method);
      const double bc = spectral_distance(f[1], f[2], method);
      const double ac = spectral_distance(f[0], f[2], method);
      EXPECT_GE(ab, 0.0);
      EXPECT_EQ(ab, spectral_distance(f[1], f[0], method));
      EXPECT_EQ(spectral_distance(f[0], f[0], method), 0.0);
      EXPECT_LE(ac, ab + bc + 1e-12);
    }
  }
}

TEST(SpectralFunctionCsv, RoundTrip) {
  const auto f = build_spectral_function(comb({0, 0.3, 1.7, 4.1}), MatchMethod::clssal);
  const auto csv = spectral_function_to_csv(f);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "# method=clssal source_n=4");
  EXPECT_EQ(spectral_function_from_csv(csv), f);
  EXPECT_THROW(spectral_function_from_csv("x,value\n0,1\n1,0\n"), ParseError);
}

// Subsamples of one homogeneous group are closer to each other than to a
// sample of a different group.
TEST(SpectralDistance, SameGroupSubsamplesAreCloser) {
  const auto corpus = generate_synthetic_corpus(default_synthetic_spec(400, 0.1, 31));
  const auto labels = class_labels(corpus);
  const auto members = members_by_label(corpus, labels);
  const auto s = similarity_of(corpus, Weighting::tf);
  int wins = 0;
  const int trials = 200;
  for (int t = 0; t < trials; ++t) {
    std::mt19937_64 rng(1000 + t);
    const std::size_t g = static_cast<std::size_t>(t) % labels.size();
    const std::size_t other = (g + 1 + static_cast<std::size_t>(t / 3) % 2) % labels.size();
    auto pool = members[g];
    std::shuffle(pool.begin(), pool.end(), rng);
    const std::size_t half = pool.size() / 4;
    std::vector<std::size_t> a(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(half));
    std::vector<std::size_t> b(pool.begin() + static_cast<std::ptrdiff_t>(half),
                               pool.begin() + static_cast<std::ptrdiff_t>(2 * half));
    std::vector<std::size_t> c;
    std::sample(members[other].begin(), members[other].end(), std::back_inserter(c), half, rng);
    const auto fa = spectral_function_of(s.submatrix(a), MatchMethod::clssal);
    const auto fb = spectral_function_of(s.submatrix(b), MatchMethod::clssal);
    const auto fc = spectral_function_of(s.submatrix(c), MatchMethod::clssal);
    if (spectral_distance(fa, fb, MatchMethod::clssal) < spectral_distance(fa, fc, MatchMethod::clssal)) {
      ++wins;
    }
  }
  EXPECT_GE(wins, 190) << wins << " of " << trials;
}
