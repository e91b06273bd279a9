#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "geonet/datapipe.hpp"
#include "geonet/error.hpp"
#include "geonet/parallel.hpp"
#include "test_util.hpp"

using namespace geonet;
using geonet::testing::max_abs_diff;
using geonet::testing::random_image;
using geonet::testing::scratch_dir;

TEST(ExpandLabels, EightExactVariants) {
    const auto img = random_image(9, 6, 2);
    const auto out = expand_labels(img, 42);
    ASSERT_EQ(out.size(), 8u);
    EXPECT_EQ(out[0].image, img);
    std::set<int> labels;
    for (std::size_t y = 0; y < 8; ++y) {
        labels.insert(out[y].label);
        EXPECT_EQ(out[y].label, static_cast<int>(y));
        EXPECT_EQ(out[y].source, 42u);
        EXPECT_EQ(out[y].image, apply_2d(img, orient_2d(static_cast<int>(y))));
    }
    EXPECT_EQ(labels.size(), 8u);
}

TEST(ExpandLabels, Slices174Give1392) {
    const auto slices = synth_slices(174, 3, 32);
    std::vector<std::size_t> all(slices.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    const auto samples = build_samples(slices, all, PrepareOptions{});
    EXPECT_EQ(samples.size(), 1392u);
    std::map<int, std::size_t> per_label;
    for (const auto& s : samples) ++per_label[s.label];
    for (int y = 0; y < 8; ++y) EXPECT_EQ(per_label[y], 174u);
}

TEST(MakeSplit, FloorEightyPercentBySlice) {
    const auto s = make_split(174, 9);
    EXPECT_EQ(s.train.size(), 139u);
    EXPECT_EQ(s.test.size(), 35u);
    std::set<std::size_t> all(s.train.begin(), s.train.end());
    for (auto i : s.test) EXPECT_TRUE(all.insert(i).second) << "slice " << i << " on both sides";
    EXPECT_EQ(all.size(), 174u);
    EXPECT_EQ(*all.rbegin(), 173u);

    const auto five = make_split(5, 0);
    EXPECT_EQ(five.train.size(), 4u);
    EXPECT_EQ(five.test.size(), 1u);
    EXPECT_THROW(make_split(4, 0), ConfigError);
}

TEST(MakeSplit, DeterministicAndSeedDependent) {
    const auto a = make_split(50, 1), b = make_split(50, 1), c = make_split(50, 2);
    EXPECT_EQ(a.train, b.train);
    EXPECT_EQ(a.test, b.test);
    EXPECT_NE(a.test, c.test);
}

TEST(Augment, CropSideUsesAreaReading) {
    EXPECT_EQ(crop_side(256, 256, 0.7), 214u);
    EXPECT_EQ(crop_side(96, 120, 0.7), static_cast<std::size_t>(std::floor(std::sqrt(0.7) * 96)));
    EXPECT_EQ(crop_side(10, 10, 1.0), 10u);
}

TEST(Augment, FullCropNoJitterIsIdentity) {
    const auto img = random_image(20, 20, 4);
    AugmentConfig cfg;
    cfg.crop_fraction = 1.0;
    cfg.max_jitter_degrees = 0.0;
    cfg.out_size = 20;
    Rng rng(1);
    const auto out = augment(img, cfg, rng);
    for (std::size_t i = 0; i < img.size(); ++i) EXPECT_NEAR(out.pixels()[i], img.pixels()[i], 1e-6);
}

TEST(Augment, OutputSizeAndDeterminism) {
    AugmentConfig cfg;
    cfg.out_size = 24;
    for (auto [h, w] : {std::pair<std::size_t, std::size_t>{40, 40}, {33, 57}, {64, 30}}) {
        const auto img = random_image(h, w, h * w);
        Rng r1(5), r2(5);
        const auto a = augment(img, cfg, r1);
        EXPECT_EQ(a.height(), 24u);
        EXPECT_EQ(a.width(), 24u);
        EXPECT_EQ(a, augment(img, cfg, r2));
    }
}

TEST(Augment, RejectsBadConfig) {
    AugmentConfig cfg;
    cfg.crop_fraction = 0.0;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = {};
    cfg.max_jitter_degrees = 45.0;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = {};
    cfg.out_size = 4;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = {};
    Rng rng(0);
    EXPECT_THROW(augment(GrayImage(1, 1, 0.5f), cfg, rng), ConfigError);
}

TEST(Augment, WithoutJitterOutputIsAWindowOfTheInput) {
    // Exhaustive search over window positions; the label transform is carried along untouched.
    const auto img = synth_phantom(8, 40, 40);
    AugmentConfig cfg;
    cfg.max_jitter_degrees = 0.0;
    cfg.out_size = crop_side(40, 40, cfg.crop_fraction);
    for (const auto& s : expand_labels(img, 0)) {
        Rng rng(sample_seed(0, 0, 1, s.label));
        const auto aug = augment(s.image, cfg, rng);
        double best = 1e9;
        for (std::size_t top = 0; top + cfg.out_size <= 40; ++top)
            for (std::size_t left = 0; left + cfg.out_size <= 40; ++left)
                best = std::min(best, max_abs_diff(aug, crop(s.image, top, left, cfg.out_size, cfg.out_size)));
        EXPECT_LT(best, 1e-6) << "label " << s.label;
    }
}

TEST(SampleSeed, DependsOnEveryCoordinate) {
    const auto base = sample_seed(1, 2, 3, 4);
    EXPECT_EQ(base, sample_seed(1, 2, 3, 4));
    EXPECT_NE(base, sample_seed(2, 2, 3, 4));
    EXPECT_NE(base, sample_seed(1, 3, 3, 4));
    EXPECT_NE(base, sample_seed(1, 2, 4, 4));
    EXPECT_NE(base, sample_seed(1, 2, 3, 5));
}

TEST(Phantom, DeterministicBoundedAndAsymmetric) {
    for (std::uint64_t seed : {0ull, 1ull, 17ull, 12345ull}) {
        const auto img = synth_phantom(seed, 64, 80);
        EXPECT_EQ(img, synth_phantom(seed, 64, 80));
        for (float v : img.pixels()) {
            EXPECT_GE(v, 0.0f);
            EXPECT_LE(v, 1.0f);
        }
        const auto square = synth_phantom(seed, 96, 96);
        for (const auto& t : enumerate_2d()) {
            if (t.label == 0) continue;
            EXPECT_GT(mean_abs_diff(square, apply_2d(square, t)), 0.01) << "seed " << seed << " label " << t.label;
        }
    }
    EXPECT_NE(synth_phantom(0, 64, 64), synth_phantom(1, 64, 64));
    EXPECT_THROW(synth_phantom(0, 31, 64), ConfigError);
}

TEST(LoadSlices, SortedByFileName) {
    const auto dir = scratch_dir("load_sorted");
    write_pgm(dir / "b.pgm", GrayImage(4, 4, 0.5f));
    write_pgm(dir / "a.pgm", GrayImage(4, 4, 1.0f));
    std::ofstream(dir / "notes.txt") << "ignored";
    const auto slices = load_slices(dir);
    ASSERT_EQ(slices.size(), 2u);
    EXPECT_EQ(slices[0].id, "a");
    EXPECT_EQ(slices[1].id, "b");
    EXPECT_FLOAT_EQ(slices[0].image(0, 0), 1.0f);
}

TEST(LoadSlices, Loads174Slices) {
    const auto dir = scratch_dir("load_174");
    for (std::size_t i = 0; i < 174; ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "s%03zu.pgm", i);
        write_pgm(dir / name, synth_phantom(i, 32, 32));
    }
    EXPECT_EQ(load_slices(dir).size(), 174u);
}

TEST(LoadSlices, ErrorsNameTheCulprit) {
    const auto empty = scratch_dir("load_empty");
    EXPECT_THROW(load_slices(empty), DataError);
    const auto dir = scratch_dir("load_bad");
    write_pgm(dir / "good.pgm", GrayImage(4, 4, 0.5f));
    std::ofstream(dir / "broken.pgm") << "P6\n1 1\n255\nabc";
    try {
        load_slices(dir);
        FAIL();
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("broken.pgm"), std::string::npos);
    }
}

TEST(BuildSamples, EqualizationOrder) {
    const auto slices = synth_slices(3, 1, 48);
    PrepareOptions before;
    const auto pre = build_samples(slices, {0, 2}, before);
    ASSERT_EQ(pre.size(), 16u);
    const auto eq0 = clahe(slices[0].image);
    for (int y = 0; y < 8; ++y) EXPECT_EQ(pre[y].image, apply_2d(eq0, orient_2d(y)));
    EXPECT_EQ(pre[8].source, 2u);

    PrepareOptions after;
    after.order = AheOrder::AfterExpansion;
    const auto post = build_samples(slices, {0}, after);
    for (int y = 0; y < 8; ++y) EXPECT_EQ(post[y].image, clahe(apply_2d(slices[0].image, orient_2d(y))));

    PrepareOptions none;
    none.equalize = false;
    EXPECT_EQ(build_samples(slices, {1}, none)[3].image, apply_2d(slices[1].image, orient_2d(3)));
}

TEST(BuildSamples, IndependentOfWorkerCount) {
    const auto slices = synth_slices(6, 2, 40);
    set_num_workers(1);
    const auto a = build_samples(slices, {0, 1, 2, 3, 4, 5}, PrepareOptions{});
    set_num_workers(4);
    const auto b = build_samples(slices, {0, 1, 2, 3, 4, 5}, PrepareOptions{});
    set_num_workers(1);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].image, b[i].image);
        EXPECT_EQ(a[i].label, b[i].label);
    }
}

TEST(Materialize, TreeAndManifestWithoutLeakage) {
    const auto dir = scratch_dir("materialize");
    const auto slices = synth_slices(10, 4, 32);
    const auto split = make_split(10, 4);
    const auto rows = materialize_dataset(slices, split, PrepareOptions{}, dir);
    EXPECT_EQ(rows.size(), 80u);
    const auto back = read_manifest(dir / "manifest.tsv");
    ASSERT_EQ(back.size(), 80u);
    std::map<std::string, std::set<std::string>> sides;
    for (const auto& r : back) {
        sides[r.source_id].insert(r.split);
        EXPECT_TRUE(std::filesystem::exists(dir / r.path)) << r.path;
        EXPECT_EQ(r.path, r.split + "/" + std::to_string(r.label) + "/" + r.source_id + "_" + std::to_string(r.label) + ".pgm");
    }
    EXPECT_EQ(sides.size(), 10u);
    for (const auto& [id, s] : sides) EXPECT_EQ(s.size(), 1u) << id;
    const auto& first = back.front();
    EXPECT_EQ(read_pgm(dir / first.path).height(), 32u);
}

TEST(ExpandSerial, SixteenLabelledStacks) {
    const ImageStack stack({random_image(4, 5, 1), random_image(4, 5, 2)});
    const auto out = expand_serial(stack);
    ASSERT_EQ(out.size(), 16u);
    for (int l = 0; l < 16; ++l) {
        EXPECT_EQ(out[l].label, l);
        EXPECT_EQ(out[l].stack, apply_serial(stack, serial_transform(l)));
    }
    EXPECT_EQ(out[0].stack, stack);
}
