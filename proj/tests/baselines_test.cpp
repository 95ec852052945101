#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <string>

#include "gig/baselines.hpp"
#include "gig/errors.hpp"
#include "support/fixtures.hpp"

using namespace gig;
using gig::testing::small_moons;

namespace {

MlpModel linear_logit(double w0, double w1) {
  DenseLayer l{2, 2, {0.0, 0.0, w0, w1}, {0.0, 0.0}};
  return MlpModel({l});
}

}  // namespace

TEST(Methods, NamesRoundTrip) {
  std::set<std::string> seen;
  for (Method m : all_methods()) {
    const std::string name(method_name(m));
    EXPECT_TRUE(seen.insert(name).second);
    EXPECT_EQ(parse_method(name), m);
  }
  EXPECT_EQ(seen.size(), 8u);
  EXPECT_FALSE(parse_method("guided_ig").has_value());
}

TEST(Methods, ConfigValidation) {
  MethodConfig c;
  c.method = Method::ig;
  c.ig_steps = 0;
  EXPECT_THROW(c.validate(), ArgumentError);
  c = {};
  c.method = Method::geodesic_knn;
  c.knn.k = 0;
  EXPECT_THROW(c.validate(), ArgumentError);
  c = {};
  c.method = Method::gradient_shap;
  c.shap_noise_sigma = -1.0;
  EXPECT_THROW(c.validate(), ArgumentError);
  c = {};
  c.method = Method::geodesic_svi;
  c.energy.n_points = 1;
  EXPECT_THROW(c.validate(), ArgumentError);
}

TEST(InputXGradient, LinearLogitCompleteAgainstZero) {
  const MlpModel m = linear_logit(2.0, -1.0);
  const Attribution a = input_x_gradient(m, {1, OutputSpace::logit}, Vec{0.5, 3.0});
  EXPECT_DOUBLE_EQ(a.values[0], 1.0);
  EXPECT_DOUBLE_EQ(a.values[1], -3.0);
  EXPECT_NEAR(a.completeness_residual, 0.0, 1e-15);
}

TEST(GradientShap, NoiselessLinearLogitEqualsIg) {
  const MlpModel m = linear_logit(1.5, 0.5);
  const ScalarTarget t{1, OutputSpace::logit};
  const Attribution a = gradient_shap(m, t, Vec{1.0, 2.0}, Vec{-1.0, 0.0}, 16, 0.0, 3);
  EXPECT_NEAR(a.values[0], 3.0, 1e-12);
  EXPECT_NEAR(a.values[1], 1.0, 1e-12);
}

TEST(GradientShap, SeededAndConvergesToIg) {
  const auto& s = small_moons();
  const Vec x{0.3, 0.8};
  const ScalarTarget t = predicted_target(s.model, x);
  const Vec& b = gig::testing::kMoonsBaseline;
  const Attribution a1 = gradient_shap(s.model, t, x, b, 64, 0.1, 7);
  const Attribution a2 = gradient_shap(s.model, t, x, b, 64, 0.1, 7);
  EXPECT_EQ(a1.values, a2.values);
  const Attribution many = gradient_shap(s.model, t, x, b, 20000, 0.0, 1);
  const Attribution ig = integrated_gradients(s.model, t, x, b, 512);
  EXPECT_NEAR(many.values[0], ig.values[0], 0.02);
  EXPECT_NEAR(many.values[1], ig.values[1], 0.02);
  EXPECT_THROW(gradient_shap(s.model, t, x, b, 0, 0.0, 1), ArgumentError);
}

TEST(Occlusion, HandComputed) {
  const auto& s = small_moons();
  const ScalarTarget t{1, OutputSpace::probability};
  const Vec x{0.1, 0.9}, fill{-0.5, -0.5};
  const Attribution a = occlusion(s.model, t, x, fill);
  const double fx = scalar_output(s.model, x, t);
  EXPECT_DOUBLE_EQ(a.values[0], fx - scalar_output(s.model, Vec{-0.5, 0.9}, t));
  EXPECT_DOUBLE_EQ(a.values[1], fx - scalar_output(s.model, Vec{0.1, -0.5}, t));
  EXPECT_THROW(occlusion(s.model, t, x, fill, 2), ArgumentError);
}

TEST(EnhancedIg, FlatModelGivesZero) {
  const std::size_t sizes[] = {2, 4, 2};
  const MlpModel m = MlpModel::zeros(sizes);
  const Points samples(small_moons().test.points.begin(), small_moons().test.points.begin() + 60);
  const PathAttributionResult r =
      enhanced_ig(m, {0, OutputSpace::probability}, Vec{1.0, 0.0}, Vec{-0.5, -0.5}, samples, 5);
  EXPECT_EQ(r.attribution.values, (Vec{0.0, 0.0}));
}

TEST(EnhancedIg, PathIsEuclideanShortest) {
  const auto& s = small_moons();
  const Points samples(s.test.points.begin(), s.test.points.begin() + 150);
  const Vec x = s.test.points[300];
  const ScalarTarget t = predicted_target(s.model, x);
  const PathAttributionResult e =
      enhanced_ig(s.model, t, x, gig::testing::kMoonsBaseline, samples, 15);
  KnnPathConfig cfg;
  const PathAttributionResult g = geodesic_ig_knn(s.model, t, x, gig::testing::kMoonsBaseline,
                                                  samples, cfg, EdgeRule::euclidean);
  EXPECT_EQ(e.path.anchors, g.path.anchors);
  EXPECT_EQ(e.attribution.values, g.attribution.values);
}

TEST(RandomAttribution, SeededStandardNormal) {
  const Vec x(2000, 0.0);
  const Attribution a = random_attribution(x, 4);
  EXPECT_EQ(a.values, random_attribution(x, 4).values);
  EXPECT_NE(a.values, random_attribution(x, 5).values);
  double mean = 0, sq = 0;
  for (double v : a.values) {
    mean += v;
    sq += v * v;
  }
  mean /= 2000;
  EXPECT_NEAR(mean, 0.0, 0.1);
  EXPECT_NEAR(sq / 2000, 1.0, 0.1);
}
