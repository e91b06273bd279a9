#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace geonet {

/// Exact integer 2x2 matrix, row-major: {{m00, m01}, {m10, m11}}.
using Mat2i = std::array<std::array<int, 2>, 2>;
/// Exact integer 3x3 matrix, row-major.
using Mat3i = std::array<std::array<int, 3>, 3>;

/**
 * One element of the eight-element orientation group of the square
 * (rotations by multiples of 90 degrees combined with mirror flips).
 *
 * Matrices act on column vectors (x, y) where x runs along image columns
 * and y runs down the rows. Point-set users that right-multiply n x 2 row
 * matrices should use the transpose.
 */
struct OrientTransform2D {
    int label = 0;
    Mat2i matrix{{{1, 0}, {0, 1}}};

    int determinant() const;
    /// True when the matrix exchanges the x and y axes (output shape is transposed).
    bool swaps_axes() const { return matrix[0][0] == 0; }
    std::string name() const;

    friend bool operator==(const OrientTransform2D&, const OrientTransform2D&) = default;
};

/// Flip composed with a proper rotation of the cube, as a signed permutation matrix.
struct OrientTransform3D {
    int label = 0;
    Mat3i matrix{};

    int determinant() const;
    friend bool operator==(const OrientTransform3D&, const OrientTransform3D&) = default;
};

/// Planar transform of every frame plus an optional reversal of frame order.
struct SerialTransform {
    OrientTransform2D planar;
    bool time_reversed = false;

    int label() const { return planar.label + (time_reversed ? 8 : 0); }
    friend bool operator==(const SerialTransform&, const SerialTransform&) = default;
};

inline constexpr int kNumOrient2D = 8;
inline constexpr int kNumSerial = 16;

/// The eight transforms in canonical label order 0..7.
const std::vector<OrientTransform2D>& enumerate_2d();
/// Transform with the given label; throws std::out_of_range outside 0..7.
const OrientTransform2D& orient_2d(int label);

/// Element whose matrix is a.matrix * b.matrix, i.e. b is applied first.
OrientTransform2D compose_2d(const OrientTransform2D& a, const OrientTransform2D& b);
OrientTransform2D inverse_2d(const OrientTransform2D& a);

/// Label of the element with the given matrix, or -1 when it is not in the set.
int find_2d(const Mat2i& m);

Mat2i multiply(const Mat2i& a, const Mat2i& b);
Mat3i multiply(const Mat3i& a, const Mat3i& b);
Mat2i transpose(const Mat2i& m);
Mat3i transpose(const Mat3i& m);
int determinant(const Mat3i& m);
bool is_signed_permutation(const Mat3i& m);

struct Enumeration3D {
    /// De-duplicated transforms, labelled in construction order.
    std::vector<OrientTransform3D> transforms;
    /// All flip/rotation products before de-duplication (plane-major, rotation-minor).
    std::vector<Mat3i> candidates;
    std::size_t raw_count() const { return candidates.size(); }
    std::size_t distinct_count() const { return transforms.size(); }
};

/**
 * Three mirror flips (xOy, xOz, yOz planes) each followed by the six
 * rotations carrying the +z face onto each cube face. Duplicate products
 * are dropped, so the distinct count is reported rather than assumed.
 */
const Enumeration3D& enumerate_3d();

/// Mirror flips in plane order xOy, xOz, yOz.
std::span<const Mat3i> cube_flips();
/// Face rotations: identity, Rx(90), Rx(180), Rx(270), Ry(90), Ry(270).
std::span<const Mat3i> cube_face_rotations();

/// Labels 0..7 keep frame order, 8..15 reverse it.
const std::vector<SerialTransform>& enumerate_serial();
const SerialTransform& serial_transform(int label);
SerialTransform inverse_serial(const SerialTransform& s);

}  // namespace geonet
