#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "boxdistill/dataset.hpp"
#include "boxdistill/error.hpp"
#include "boxdistill/synthetic.hpp"
#include "test_util.hpp"

using namespace boxdistill;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("save/load round trip preserves count, masks and quantized values") {
  TempDir dir("boxdistill_ds_roundtrip");
  const Dataset ds = testutil::tiny_labeled_dataset(4, 16, 3, 7,
                                                    Domain::source, Split::train);
  save_dataset(dir.path, ds);
  const Dataset loaded =
      load_dataset(dir.path, 3, Domain::source, Split::train);
  REQUIRE(loaded.size() == 4);
  CHECK(loaded.labeled());
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(loaded.samples[i].mask->values == ds.samples[i].mask->values);
    // images go through 8-bit quantization
    for (std::size_t j = 0; j < ds.samples[i].image.values.size(); ++j)
      CHECK(std::abs(loaded.samples[i].image.values[j] -
                     ds.samples[i].image.values[j]) <= 0.5 / 255.0 + 1e-12);
    CHECK(loaded.samples[i].image.values[0] <= 1.0);
  }
}

TEST_CASE("mask with out-of-range class is a data error") {
  TempDir dir("boxdistill_ds_badmask");
  Dataset ds = testutil::tiny_labeled_dataset(2, 16, 3, 8, Domain::source,
                                              Split::train);
  ds.samples[1].mask->at(3, 3) = 3;  // class == K
  ds.class_count = 4;                // trick save-side validation
  save_dataset(dir.path, ds);
  CHECK_THROWS_AS(load_dataset(dir.path, 3, Domain::source, Split::train),
                  DataError);
}

TEST_CASE("unlabeled dataset loads without mask directory") {
  TempDir dir("boxdistill_ds_unlabeled");
  Dataset ds = testutil::tiny_labeled_dataset(3, 16, 3, 9, Domain::target,
                                              Split::train);
  for (auto& s : ds.samples) s.mask.reset();
  save_dataset(dir.path, ds);
  CHECK_FALSE(fs::exists(dir.path / "masks"));
  const Dataset loaded =
      load_dataset(dir.path, 3, Domain::target, Split::train);
  CHECK(loaded.size() == 3);
  CHECK_FALSE(loaded.labeled());
}

TEST_CASE("missing directory is a data error") {
  CHECK_THROWS_AS(load_dataset("/nonexistent/boxdistill", 3, Domain::source,
                               Split::train),
                  DataError);
}

TEST_CASE("dataset validation catches duplicates and shape mismatches") {
  Dataset ds = testutil::tiny_labeled_dataset(2, 16, 3, 10, Domain::source,
                                              Split::train);
  ds.samples[1].id = ds.samples[0].id;
  CHECK_THROWS_AS(ds.validate(), DataError);

  Dataset ds2 = testutil::tiny_labeled_dataset(2, 16, 3, 10, Domain::source,
                                               Split::train);
  ds2.samples[0].mask = LabelMask(8, 8);
  CHECK_THROWS_AS(ds2.validate(), DataError);
}

TEST_CASE("synthetic benchmark survives a disk round trip") {
  TempDir dir("boxdistill_ds_synth");
  SyntheticShiftSpec spec;
  spec.seed = 21;
  spec.noise_std = 0.05;
  const auto [source, target] = generate_synthetic_pair(spec, 3, 2, 32);
  save_dataset(dir.path / "source_train", source.train);
  save_dataset(dir.path / "target_test", target.test);
  const Dataset s =
      load_dataset(dir.path / "source_train", 3, Domain::source, Split::train);
  const Dataset t =
      load_dataset(dir.path / "target_test", 3, Domain::target, Split::test);
  CHECK(s.size() == 3);
  CHECK(t.size() == 2);
  CHECK(s.labeled());
  CHECK(t.labeled());
  CHECK(s.samples[0].mask->values == source.train.samples[0].mask->values);
}
