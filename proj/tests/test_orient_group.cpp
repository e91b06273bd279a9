#include <gtest/gtest.h>

#include <set>

#include "geonet/orient_group.hpp"

using namespace geonet;

namespace {

// Set T, in its published order.
const Mat2i kSetT[8] = {
    {{{1, 0}, {0, 1}}},   {{{0, 1}, {-1, 0}}}, {{{-1, 0}, {0, -1}}}, {{{0, -1}, {1, 0}}},
    {{{-1, 0}, {0, 1}}},  {{{0, -1}, {-1, 0}}}, {{{1, 0}, {0, -1}}},  {{{0, 1}, {1, 0}}},
};

Mat2i naive_mul(const Mat2i& a, const Mat2i& b) {
    Mat2i r{};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k) r[i][j] += a[i][k] * b[k][j];
    return r;
}

Mat3i naive_mul3(const Mat3i& a, const Mat3i& b) {
    Mat3i r{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) r[i][j] += a[i][k] * b[k][j];
    return r;
}

int det3(const Mat3i& m) {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

}  // namespace

TEST(Enumerate2D, MatchesSetTInOrder) {
    const auto& all = enumerate_2d();
    ASSERT_EQ(all.size(), 8u);
    for (int i = 0; i < 8; ++i) {
        EXPECT_EQ(all[i].label, i);
        EXPECT_EQ(all[i].matrix, kSetT[i]) << "label " << i;
    }
    EXPECT_EQ(all[0].matrix, (Mat2i{{{1, 0}, {0, 1}}}));
    EXPECT_EQ(all[2].matrix, (Mat2i{{{-1, 0}, {0, -1}}}));
}

TEST(Enumerate2D, DistinctOrthogonalFourOfEachDeterminant) {
    std::set<Mat2i> seen;
    int pos = 0, neg = 0;
    for (const auto& t : enumerate_2d()) {
        seen.insert(t.matrix);
        EXPECT_EQ(naive_mul(transpose(t.matrix), t.matrix), (Mat2i{{{1, 0}, {0, 1}}}));
        (t.determinant() == 1 ? pos : neg)++;
        EXPECT_EQ(std::abs(t.determinant()), 1);
    }
    EXPECT_EQ(seen.size(), 8u);
    EXPECT_EQ(pos, 4);
    EXPECT_EQ(neg, 4);
}

TEST(Enumerate2D, OutOfRangeLabelThrows) {
    EXPECT_THROW(orient_2d(8), std::out_of_range);
    EXPECT_THROW(orient_2d(-1), std::out_of_range);
}

TEST(Compose2D, ClosureTableMatchesBruteForce) {
    for (int a = 0; a < 8; ++a)
        for (int b = 0; b < 8; ++b) {
            const Mat2i prod = naive_mul(kSetT[a], kSetT[b]);
            int expected = -1;
            for (int c = 0; c < 8; ++c)
                if (kSetT[c] == prod) expected = c;
            ASSERT_NE(expected, -1) << a << "*" << b << " leaves the set";
            EXPECT_EQ(compose_2d(orient_2d(a), orient_2d(b)).label, expected);
        }
}

TEST(Compose2D, IdentityAndRotationSquare) {
    for (const auto& t : enumerate_2d()) {
        EXPECT_EQ(compose_2d(orient_2d(0), t), t);
        EXPECT_EQ(compose_2d(t, orient_2d(0)), t);
    }
    EXPECT_EQ(compose_2d(orient_2d(1), orient_2d(1)).matrix, (Mat2i{{{-1, 0}, {0, -1}}}));
}

TEST(Compose2D, Associative) {
    for (int a = 0; a < 8; ++a)
        for (int b = 0; b < 8; ++b)
            for (int c = 0; c < 8; ++c)
                EXPECT_EQ(compose_2d(compose_2d(orient_2d(a), orient_2d(b)), orient_2d(c)),
                          compose_2d(orient_2d(a), compose_2d(orient_2d(b), orient_2d(c))));
}

TEST(Inverse2D, TransposeAndGroupInverse) {
    EXPECT_EQ(inverse_2d(orient_2d(0)), orient_2d(0));
    EXPECT_EQ(inverse_2d(orient_2d(1)).matrix, (Mat2i{{{0, -1}, {1, 0}}}));
    for (const auto& t : enumerate_2d()) {
        const auto inv = inverse_2d(t);
        EXPECT_EQ(inv.matrix, transpose(t.matrix));
        EXPECT_EQ(compose_2d(t, inv).label, 0);
        EXPECT_EQ(compose_2d(inv, t).label, 0);
        if (t.determinant() == -1) {
            EXPECT_EQ(inv, t);
            EXPECT_EQ(naive_mul(t.matrix, t.matrix), (Mat2i{{{1, 0}, {0, 1}}}));
        }
    }
}

TEST(Find2D, RejectsMatricesOutsideTheSet) {
    EXPECT_EQ(find_2d(Mat2i{{{1, 1}, {0, 1}}}), -1);
    EXPECT_EQ(find_2d(Mat2i{{{2, 0}, {0, 1}}}), -1);
    for (int i = 0; i < 8; ++i) EXPECT_EQ(find_2d(kSetT[i]), i);
}

TEST(Enumerate3D, CandidatesAreFlipTimesRotation) {
    const auto& e = enumerate_3d();
    ASSERT_EQ(e.raw_count(), 18u);
    const Mat3i flips[3] = {{{{1, 0, 0}, {0, 1, 0}, {0, 0, -1}}},
                            {{{1, 0, 0}, {0, -1, 0}, {0, 0, 1}}},
                            {{{-1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}};
    // Rx(90) maps y to z; Ry(90) maps z to x.
    const Mat3i rots[6] = {{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}},  {{{1, 0, 0}, {0, 0, -1}, {0, 1, 0}}},
                           {{{1, 0, 0}, {0, -1, 0}, {0, 0, -1}}}, {{{1, 0, 0}, {0, 0, 1}, {0, -1, 0}}},
                           {{{0, 0, 1}, {0, 1, 0}, {-1, 0, 0}}},  {{{0, 0, -1}, {0, 1, 0}, {1, 0, 0}}}};
    for (int p = 0; p < 3; ++p)
        for (int k = 0; k < 6; ++k) {
            const Mat3i expected = naive_mul3(rots[k], flips[p]);
            EXPECT_EQ(e.candidates[p * 6 + k], expected) << "plane " << p << " rotation " << k;
        }
    EXPECT_EQ(e.transforms.at(0).matrix, flips[0]);
}

TEST(Enumerate3D, OrthogonalSignedPermutationsWithNegativeDeterminant) {
    const Mat3i eye{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
    for (const auto& m : enumerate_3d().candidates) {
        EXPECT_EQ(naive_mul3(transpose(m), m), eye);
        EXPECT_EQ(det3(m), -1);
        EXPECT_TRUE(is_signed_permutation(m));
        for (int r = 0; r < 3; ++r) {
            int nz = 0;
            for (int c = 0; c < 3; ++c) nz += m[r][c] != 0;
            EXPECT_EQ(nz, 1);
        }
    }
}

TEST(Enumerate3D, DistinctCountFromPairwiseComparison) {
    const auto& e = enumerate_3d();
    std::size_t distinct = 0;
    for (std::size_t i = 0; i < e.candidates.size(); ++i) {
        bool dup = false;
        for (std::size_t j = 0; j < i; ++j) dup = dup || e.candidates[i] == e.candidates[j];
        distinct += !dup;
    }
    EXPECT_EQ(distinct, 12u);
    EXPECT_EQ(e.distinct_count(), distinct);
    for (std::size_t i = 0; i < e.transforms.size(); ++i) {
        EXPECT_EQ(e.transforms[i].label, static_cast<int>(i));
        EXPECT_EQ(e.transforms[i].determinant(), -1);
    }
    // Rotating the xOy mirror by 180 degrees about x gives the xOz mirror.
    EXPECT_EQ(e.candidates[2], e.candidates[6]);
}

TEST(EnumerateSerial, SixteenDistinctPairs) {
    const auto& all = enumerate_serial();
    ASSERT_EQ(all.size(), 16u);
    std::set<std::pair<int, bool>> pairs;
    for (int l = 0; l < 16; ++l) {
        const auto& s = all[l];
        EXPECT_EQ(s.label(), l);
        EXPECT_EQ(s.planar.label, l % 8);
        EXPECT_EQ(s.time_reversed, l >= 8);
        EXPECT_EQ(serial_transform(l), s);
        pairs.insert({s.planar.label, s.time_reversed});
        const auto inv = inverse_serial(s);
        EXPECT_EQ(inv.planar, inverse_2d(s.planar));
        EXPECT_EQ(inv.time_reversed, s.time_reversed);
    }
    EXPECT_EQ(pairs.size(), 16u);
    EXPECT_EQ(serial_transform(0).planar.label, 0);
    EXPECT_FALSE(serial_transform(0).time_reversed);
    EXPECT_EQ(serial_transform(8).planar.label, 0);
    EXPECT_TRUE(serial_transform(8).time_reversed);
    EXPECT_THROW(serial_transform(16), std::out_of_range);
}
