#include <doctest.h>

#include <algorithm>
#include <set>
#include <vector>

#include "xdeval/average_precision.hpp"
#include "xdeval/errors.hpp"
#include "xdeval/mask.hpp"
#include "xdeval/synth.hpp"

using namespace xdeval;

TEST_CASE("background mode names round-trip") {
  for (BackgroundMode m :
       {BackgroundMode::kPlain, BackgroundMode::kMildClutter,
        BackgroundMode::kHeavyClutter}) {
    CHECK(background_mode_from_name(background_mode_name(m)) == m);
  }
  CHECK_THROWS_AS(background_mode_from_name("foggy"), ValidationError);
}

TEST_CASE("domain validation") {
  DomainSpec d = DomainSpec::plain();
  CHECK_NOTHROW(d.validate());
  d.height = 12;
  CHECK_THROWS_AS(d.validate(), ValidationError);
  d = DomainSpec::plain();
  d.clutter_density = 1.5;
  CHECK_THROWS_AS(d.validate(), ValidationError);
  d = DomainSpec::plain();
  d.noise_sigma = -0.1;
  CHECK_THROWS_AS(d.validate(), ValidationError);
  d = DomainSpec::plain();
  d.object_scale_max = 0.95;
  CHECK_THROWS_AS(d.validate(), ValidationError);
}

TEST_CASE("generation is deterministic and order-independent") {
  const DomainSpec domain = DomainSpec::mild_clutter();
  const DatasetBundle a = generate(domain, 6, 77);
  const DatasetBundle b = generate(domain, 6, 77);
  REQUIRE(a.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(a.images[i].data == b.images[i].data);
    CHECK(a.ground_truths[i].category_id == b.ground_truths[i].category_id);
    CHECK(a.ground_truths[i].box.x_min() == b.ground_truths[i].box.x_min());
  }

  // Image i depends only on (seed, i): a longer run shares its prefix.
  const DatasetBundle longer = generate(domain, 10, 77);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(longer.images[i].data == a.images[i].data);
  }

  const DatasetBundle other = generate(domain, 6, 78);
  CHECK(other.images[0].data != a.images[0].data);
}

TEST_CASE("image ids are 1-based and sequential") {
  const DatasetBundle bundle = generate(DomainSpec::plain(), 5, 3);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(bundle.ground_truths[i].image_id ==
          static_cast<std::int64_t>(i) + 1);
  }
}

TEST_CASE("pixels stay in [0, 1] and boxes stay in frame") {
  for (const DomainSpec& domain :
       {DomainSpec::plain(), DomainSpec::mild_clutter(),
        DomainSpec::heavy_clutter()}) {
    const DatasetBundle bundle = generate(domain, 8, 5);
    for (const Tensor& img : bundle.images) {
      for (double v : img.data) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
      }
    }
    for (const GroundTruth& gt : bundle.ground_truths) {
      CHECK(gt.box.x_min() >= 0.0);
      CHECK(gt.box.y_min() >= 0.0);
      CHECK(gt.box.x_max() <= static_cast<double>(domain.width));
      CHECK(gt.box.y_max() <= static_cast<double>(domain.height));
      CHECK(gt.category_id >= 1);
      CHECK(gt.category_id <= 4);
    }
  }
}

TEST_CASE("all four categories appear over a modest sample") {
  const DatasetBundle bundle = generate(DomainSpec::plain(), 60, 9);
  std::set<int> seen;
  for (const GroundTruth& gt : bundle.ground_truths) {
    seen.insert(gt.category_id);
  }
  CHECK(seen == std::set<int>({1, 2, 3, 4}));
}

TEST_CASE("ground-truth boxes are pixel-tight around the painted object") {
  const DomainSpec domain = DomainSpec::plain();
  for (std::uint64_t i = 0; i < 20; ++i) {
    Rng bg(derive_seed(derive_seed(100, i), 1));
    Rng obj(derive_seed(derive_seed(100, i), 2));
    Tensor image = Tensor::zeros({3, domain.height, domain.width});
    render_background(domain, bg, image);
    const ObjectRender render = render_object(domain, obj, image);

    const BinaryMask box_mask =
        rasterize(render.box, domain.width, domain.height);
    std::size_t painted_count = 0;
    bool touch_top = false, touch_bottom = false, touch_left = false,
         touch_right = false;
    const auto x0 = static_cast<std::size_t>(render.box.x_min());
    const auto y0 = static_cast<std::size_t>(render.box.y_min());
    const auto x1 = static_cast<std::size_t>(render.box.x_max()) - 1;
    const auto y1 = static_cast<std::size_t>(render.box.y_max()) - 1;
    for (std::size_t y = 0; y < domain.height; ++y) {
      for (std::size_t x = 0; x < domain.width; ++x) {
        if (!render.painted[y * domain.width + x]) continue;
        ++painted_count;
        CHECK(box_mask.at(y, x));  // every painted pixel lies inside the box
        touch_top = touch_top || y == y0;
        touch_bottom = touch_bottom || y == y1;
        touch_left = touch_left || x == x0;
        touch_right = touch_right || x == x1;
      }
    }
    CHECK(painted_count > 0);
    // Tightness: the object touches all four box edges.
    CHECK(touch_top);
    CHECK(touch_bottom);
    CHECK(touch_left);
    CHECK(touch_right);
    // The painted area fills a sane fraction of its box (worst case is the
    // triangle at roughly half the box).
    CHECK(static_cast<double>(painted_count) >=
          0.3 * static_cast<double>(box_mask.popcount()));
  }
}

TEST_CASE("zero-density clutter domain renders identically to plain") {
  DomainSpec quiet = DomainSpec::mild_clutter();
  quiet.clutter_density = 0.0;
  quiet.noise_sigma = DomainSpec::plain().noise_sigma;
  const DatasetBundle a = generate(quiet, 4, 13);
  const DatasetBundle b = generate(DomainSpec::plain(), 4, 13);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(a.images[i].data == b.images[i].data);
  }
}

TEST_CASE("clutter density changes pixels; object stream is unaffected") {
  const DatasetBundle plain = generate(DomainSpec::plain(), 4, 21);
  const DatasetBundle heavy = generate(DomainSpec::heavy_clutter(), 4, 21);
  CHECK(plain.images[0].data != heavy.images[0].data);
  // Same seed, same object stream: identical classes and boxes.
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(plain.ground_truths[i].category_id ==
          heavy.ground_truths[i].category_id);
    CHECK(plain.ground_truths[i].box.x_min() ==
          heavy.ground_truths[i].box.x_min());
    CHECK(plain.ground_truths[i].box.width() ==
          heavy.ground_truths[i].box.width());
  }
}

TEST_CASE("generate rejects degenerate requests") {
  CHECK_THROWS_AS(generate(DomainSpec::plain(), 0, 1), ValidationError);
  DomainSpec bad = DomainSpec::plain();
  bad.width = 10;  // not a multiple of 8
  CHECK_THROWS_AS(generate(bad, 1, 1), ValidationError);
}

TEST_CASE("split sizes: floor for val/test, remainder to train") {
  const DatasetBundle bundle = generate(DomainSpec::plain(), 10, 31);
  const SplitResult s = split(bundle, SplitRatios{}, 5);
  CHECK(s.train.size() == 6);
  CHECK(s.val.size() == 2);
  CHECK(s.test.size() == 2);

  const DatasetBundle eleven = generate(DomainSpec::plain(), 11, 31);
  const SplitResult s11 = split(eleven, SplitRatios{}, 5);
  CHECK(s11.train.size() == 7);  // floors stay at 2 and 2
  CHECK(s11.val.size() == 2);
  CHECK(s11.test.size() == 2);
}

TEST_CASE("split is a disjoint partition of the bundle") {
  const DatasetBundle bundle = generate(DomainSpec::plain(), 17, 33);
  const SplitResult s = split(bundle, SplitRatios{}, 9);
  std::multiset<std::int64_t> ids;
  for (const DatasetBundle* part : {&s.train, &s.val, &s.test}) {
    REQUIRE(part->images.size() == part->ground_truths.size());
    for (std::size_t i = 0; i < part->size(); ++i) {
      ids.insert(part->ground_truths[i].image_id);
      // Image follows its annotation through the shuffle.
      const std::size_t orig =
          static_cast<std::size_t>(part->ground_truths[i].image_id) - 1;
      CHECK(part->images[i].data == bundle.images[orig].data);
    }
  }
  std::multiset<std::int64_t> want;
  for (std::int64_t i = 1; i <= 17; ++i) want.insert(i);
  CHECK(ids == want);
}

TEST_CASE("split determinism and seed sensitivity") {
  const DatasetBundle bundle = generate(DomainSpec::plain(), 12, 35);
  const SplitResult a = split(bundle, SplitRatios{}, 1);
  const SplitResult b = split(bundle, SplitRatios{}, 1);
  const SplitResult c = split(bundle, SplitRatios{}, 2);
  const auto ids_of = [](const DatasetBundle& part) {
    std::vector<std::int64_t> ids;
    for (const GroundTruth& gt : part.ground_truths) ids.push_back(gt.image_id);
    return ids;
  };
  CHECK(ids_of(a.train) == ids_of(b.train));
  CHECK(ids_of(a.val) == ids_of(b.val));
  CHECK(ids_of(a.train) != ids_of(c.train));
}

TEST_CASE("bundles below five images cannot be split") {
  const DatasetBundle bundle = generate(DomainSpec::plain(), 4, 37);
  CHECK_THROWS_AS(split(bundle, SplitRatios{}, 1), TooSmall);
  const DatasetBundle five = generate(DomainSpec::plain(), 5, 37);
  CHECK_NOTHROW(split(five, SplitRatios{}, 1));
}

TEST_CASE("split ratio validation") {
  const DatasetBundle bundle = generate(DomainSpec::plain(), 10, 39);
  SplitRatios bad;
  bad.val = 0.0;
  bad.train = 0.8;
  CHECK_THROWS_AS(split(bundle, bad, 1), ValidationError);
  bad = SplitRatios{};
  bad.train = 0.7;  // sums to 1.1
  CHECK_THROWS_AS(split(bundle, bad, 1), ValidationError);
}

TEST_CASE("an oracle that reports the ground truth scores a perfect AP") {
  const DatasetBundle bundle = generate(DomainSpec::heavy_clutter(), 12, 41);
  std::vector<Detection> dets;
  for (const GroundTruth& gt : bundle.ground_truths) {
    dets.push_back(Detection{gt.image_id, gt.category_id, gt.box, 0.9});
  }
  const ApReport report =
      mean_ap(dets, bundle.ground_truths, ApConfig{});
  CHECK(report.mean_ap == doctest::Approx(1.0).epsilon(1e-12));
}
