#include "geonet/orient_group.hpp"

#include <cassert>
#include <stdexcept>

namespace geonet {

namespace {

// Listing order of the transform set: identity, the three remaining
// rotations, then the four mirror axes.
constexpr std::array<Mat2i, 8> kSetT{{
    {{{1, 0}, {0, 1}}},
    {{{0, 1}, {-1, 0}}},
    {{{-1, 0}, {0, -1}}},
    {{{0, -1}, {1, 0}}},
    {{{-1, 0}, {0, 1}}},
    {{{0, -1}, {-1, 0}}},
    {{{1, 0}, {0, -1}}},
    {{{0, 1}, {1, 0}}},
}};

constexpr std::array<const char*, 8> kNames{
    "identity", "rot90", "rot180", "rot270", "flip-x", "flip-antidiag", "flip-y", "flip-diag"};

constexpr std::array<Mat3i, 3> kFlips{{
    {{{1, 0, 0}, {0, 1, 0}, {0, 0, -1}}},  // xOy
    {{{1, 0, 0}, {0, -1, 0}, {0, 0, 1}}},  // xOz
    {{{-1, 0, 0}, {0, 1, 0}, {0, 0, 1}}},  // yOz
}};

constexpr std::array<Mat3i, 6> kFaceRotations{{
    {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}},
    {{{1, 0, 0}, {0, 0, -1}, {0, 1, 0}}},   // Rx(90)
    {{{1, 0, 0}, {0, -1, 0}, {0, 0, -1}}},  // Rx(180)
    {{{1, 0, 0}, {0, 0, 1}, {0, -1, 0}}},   // Rx(270)
    {{{0, 0, 1}, {0, 1, 0}, {-1, 0, 0}}},   // Ry(90)
    {{{0, 0, -1}, {0, 1, 0}, {1, 0, 0}}},   // Ry(270)
}};

}  // namespace

int OrientTransform2D::determinant() const {
    return matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0];
}

std::string OrientTransform2D::name() const { return kNames.at(static_cast<std::size_t>(label)); }

int OrientTransform3D::determinant() const { return geonet::determinant(matrix); }

Mat2i multiply(const Mat2i& a, const Mat2i& b) {
    Mat2i r{};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
    return r;
}

Mat3i multiply(const Mat3i& a, const Mat3i& b) {
    Mat3i r{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) r[i][j] += a[i][k] * b[k][j];
    return r;
}

Mat2i transpose(const Mat2i& m) { return {{{m[0][0], m[1][0]}, {m[0][1], m[1][1]}}}; }

Mat3i transpose(const Mat3i& m) {
    Mat3i r{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r[i][j] = m[j][i];
    return r;
}

int determinant(const Mat3i& m) {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

bool is_signed_permutation(const Mat3i& m) {
    for (int i = 0; i < 3; ++i) {
        int row_nz = 0;
        int col_nz = 0;
        for (int j = 0; j < 3; ++j) {
            if (m[i][j] != 0) {
                if (m[i][j] != 1 && m[i][j] != -1) return false;
                ++row_nz;
            }
            if (m[j][i] != 0) ++col_nz;
        }
        if (row_nz != 1 || col_nz != 1) return false;
    }
    return true;
}

const std::vector<OrientTransform2D>& enumerate_2d() {
    static const std::vector<OrientTransform2D> set = [] {
        std::vector<OrientTransform2D> out;
        for (int i = 0; i < kNumOrient2D; ++i) out.push_back({i, kSetT[static_cast<std::size_t>(i)]});
        return out;
    }();
    return set;
}

const OrientTransform2D& orient_2d(int label) {
    if (label < 0 || label >= kNumOrient2D)
        throw std::out_of_range("2D transform label out of range: " + std::to_string(label));
    return enumerate_2d()[static_cast<std::size_t>(label)];
}

int find_2d(const Mat2i& m) {
    for (int i = 0; i < kNumOrient2D; ++i)
        if (kSetT[static_cast<std::size_t>(i)] == m) return i;
    return -1;
}

OrientTransform2D compose_2d(const OrientTransform2D& a, const OrientTransform2D& b) {
    const int label = find_2d(multiply(a.matrix, b.matrix));
    assert(label >= 0 && "orientation set is not closed under composition");
    if (label < 0) throw std::logic_error("orientation product left the transform set");
    return orient_2d(label);
}

OrientTransform2D inverse_2d(const OrientTransform2D& a) {
    const int label = find_2d(transpose(a.matrix));
    if (label < 0) throw std::logic_error("orientation inverse left the transform set");
    return orient_2d(label);
}

std::span<const Mat3i> cube_flips() { return kFlips; }
std::span<const Mat3i> cube_face_rotations() { return kFaceRotations; }

const Enumeration3D& enumerate_3d() {
    static const Enumeration3D e = [] {
        Enumeration3D out;
        for (const Mat3i& flip : kFlips) {
            for (const Mat3i& rot : kFaceRotations) {
                const Mat3i m = multiply(rot, flip);
                out.candidates.push_back(m);
                bool seen = false;
                for (const auto& t : out.transforms) seen = seen || t.matrix == m;
                if (!seen) out.transforms.push_back({static_cast<int>(out.transforms.size()), m});
            }
        }
        return out;
    }();
    return e;
}

const std::vector<SerialTransform>& enumerate_serial() {
    static const std::vector<SerialTransform> set = [] {
        std::vector<SerialTransform> out;
        for (int rev = 0; rev < 2; ++rev)
            for (const auto& t : enumerate_2d()) out.push_back({t, rev == 1});
        return out;
    }();
    return set;
}

const SerialTransform& serial_transform(int label) {
    if (label < 0 || label >= kNumSerial)
        throw std::out_of_range("serial transform label out of range: " + std::to_string(label));
    return enumerate_serial()[static_cast<std::size_t>(label)];
}

SerialTransform inverse_serial(const SerialTransform& s) {
    return {inverse_2d(s.planar), s.time_reversed};
}

}  // namespace geonet
