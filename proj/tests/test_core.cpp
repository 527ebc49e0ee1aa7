#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "boxdistill/error.hpp"
#include "boxdistill/image_ops.hpp"
#include "boxdistill/rng.hpp"
#include "boxdistill/synthetic.hpp"
#include "boxdistill/tensor.hpp"
#include "test_util.hpp"

using namespace boxdistill;

TEST_CASE("rng streams are deterministic and fork-independent") {
  RngStream a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  RngStream root(7);
  RngStream f1 = root.fork("weak");
  RngStream f2 = root.fork("strong");
  CHECK(f1.next_u64() != f2.next_u64());

  // fork does not advance the parent
  RngStream r1(9), r2(9);
  (void)r1.fork("x");
  CHECK(r1.next_u64() == r2.next_u64());
}

TEST_CASE("rng uniform and normal ranges") {
  RngStream rng(3);
  double sum = 0.0, sumsq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const double z = rng.normal();
    sum += z;
    sumsq += z * z;
  }
  CHECK(std::abs(sum / n) < 0.05);
  CHECK(std::abs(sumsq / n - 1.0) < 0.05);
}

TEST_CASE("image tensor validation") {
  ImageTensor img(4, 4, 1);
  img.validate();
  img.at(1, 2, 0) = 1.5;
  CHECK_THROWS_AS(img.validate(), InputError);
  img.at(1, 2, 0) = 0.5;
  img.validate();
}

TEST_CASE("soft label map invariants and argmax tie-break") {
  SoftLabelMap m(1, 2, 3);
  m.at(0, 0, 0) = 0.2;
  m.at(0, 0, 1) = 0.5;
  m.at(0, 0, 2) = 0.3;
  m.at(0, 1, 0) = 0.4;
  m.at(0, 1, 1) = 0.4;
  m.at(0, 1, 2) = 0.2;
  m.validate();
  const LabelMask am = m.argmax();
  CHECK(am.at(0, 0) == 1);
  CHECK(am.at(0, 1) == 0);  // tie -> lowest class index

  m.at(0, 0, 0) = 0.4;
  CHECK_FALSE(m.row_stochastic());
}

TEST_CASE("resize identity is exact") {
  const ImageTensor img = testutil::random_image(7, 5, 2, 11);
  const ImageTensor same = resize(img, 7, 5);
  CHECK(same.values == img.values);
}

TEST_CASE("resize of constant image stays constant") {
  ImageTensor img(6, 6, 1);
  for (double& v : img.values) v = 0.42;
  const ImageTensor out = resize(img, 13, 9);
  for (const double v : out.values) CHECK(v == doctest::Approx(0.42).epsilon(1e-12));
}

TEST_CASE("resize_mask matches hand-enumerated nearest-neighbor oracle") {
  // 2x2 mask [[0,1],[0,1]] -> 2x4 gives rows [0,0,1,1]
  LabelMask m(2, 2);
  m.at(0, 0) = 0;
  m.at(0, 1) = 1;
  m.at(1, 0) = 0;
  m.at(1, 1) = 1;
  const LabelMask r = resize_mask(m, 2, 4);
  for (int y = 0; y < 2; ++y) {
    CHECK(r.at(y, 0) == 0);
    CHECK(r.at(y, 1) == 0);
    CHECK(r.at(y, 2) == 1);
    CHECK(r.at(y, 3) == 1);
  }
}

TEST_CASE("resize_mask output uses only input classes") {
  const LabelMask m = testutil::random_mask(9, 7, 4, 5);
  const LabelMask r = resize_mask(m, 17, 4);
  for (const int v : r.values) {
    CHECK(v >= 0);
    CHECK(v < 4);
  }
}

TEST_CASE("gaussian blur preserves mean roughly and is identity at sigma 0") {
  const ImageTensor img = testutil::random_image(16, 16, 1, 1);
  CHECK(gaussian_blur(img, 0.0).values == img.values);
  const ImageTensor blurred = gaussian_blur(img, 1.5);
  double m0 = 0.0, m1 = 0.0;
  for (const double v : img.values) m0 += v;
  for (const double v : blurred.values) m1 += v;
  // reflect border redistributes a little mass on unstructured noise
  CHECK(std::abs(m0 - m1) / img.values.size() < 1e-2);
}

TEST_CASE("synthetic identity spec reproduces source bit-exactly") {
  SyntheticShiftSpec spec;
  spec.seed = 7;
  const auto [source, target] = generate_synthetic_pair(spec, 3, 2, 32);
  REQUIRE(source.train.size() == 3);
  REQUIRE(target.train.size() == 3);
  for (std::size_t i = 0; i < source.train.samples.size(); ++i)
    CHECK(source.train.samples[i].image.values ==
          target.train.samples[i].image.values);
}

TEST_CASE("synthetic generation is deterministic under a fixed seed") {
  SyntheticShiftSpec spec;
  spec.seed = 7;
  spec.noise_std = 0.1;
  const auto [s1, t1] = generate_synthetic_pair(spec, 4, 2, 32);
  const auto [s2, t2] = generate_synthetic_pair(spec, 4, 2, 32);
  for (std::size_t i = 0; i < t1.train.samples.size(); ++i) {
    CHECK(t1.train.samples[i].image.values == t2.train.samples[i].image.values);
    CHECK(s1.train.samples[i].image.values == s2.train.samples[i].image.values);
  }
  CHECK(s1.test.samples[0].mask->values == s2.test.samples[0].mask->values);
}

TEST_CASE("synthetic blur shift changes paired renderings") {
  SyntheticShiftSpec spec;
  spec.seed = 7;
  spec.blur_sigma = 2.0;
  const auto [source, target] = generate_synthetic_pair(spec, 4, 1, 32);
  double mad = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < source.train.samples.size(); ++i) {
    const auto& a = source.train.samples[i].image.values;
    const auto& b = target.train.samples[i].image.values;
    for (std::size_t j = 0; j < a.size(); ++j) mad += std::abs(a[j] - b[j]);
    n += a.size();
  }
  mad /= static_cast<double>(n);
  CHECK(mad > 0.0);
  // Regression fixture: recorded from the generator at this seed/spec.
  CHECK(mad == doctest::Approx(0.0333046).epsilon(0.02));
}

TEST_CASE("synthetic dataset invariants") {
  SyntheticShiftSpec spec;
  spec.seed = 3;
  spec.noise_std = 0.05;
  spec.intensity_offset = 0.1;
  const auto [source, target] = generate_synthetic_pair(spec, 3, 2, 32);
  source.train.validate();
  source.test.validate();
  target.train.validate();
  target.test.validate();
  CHECK(source.train.labeled());
  CHECK(source.test.labeled());
  CHECK_FALSE(target.train.labeled());  // no labels at adaptation time
  CHECK(target.test.labeled());
  for (const auto& s : target.train.samples) CHECK_FALSE(s.mask.has_value());
  // all three classes actually appear
  bool seen[3] = {false, false, false};
  for (const auto& s : source.train.samples)
    for (const int v : s.mask->values) seen[v] = true;
  CHECK(seen[0]);
  CHECK(seen[1]);
  CHECK(seen[2]);
}

TEST_CASE("synthetic spec validation") {
  SyntheticShiftSpec bad;
  bad.blur_sigma = -1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = SyntheticShiftSpec{};
  bad.contrast_scale = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = SyntheticShiftSpec{};
  CHECK_THROWS_AS(generate_synthetic_pair(bad, 0, 1, 32), ConfigError);
  CHECK_THROWS_AS(generate_synthetic_pair(bad, 1, 1, 8), ConfigError);
}
