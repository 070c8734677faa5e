#pragma once

#include "vessel4d/types.hpp"

namespace vessel4d::predicates {

/// Sign of det[a-d; b-d; c-d]: positive when d lies below the plane of
/// a,b,c (a,b,c counterclockwise seen from above). Exact: a floating-point
/// filter with a forward error bound, falling back to rational arithmetic.
int orient3d(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d);

/// Positive when e lies strictly inside the sphere through a,b,c,d, given
/// orient3d(a,b,c,d) > 0. Exact in the same way as orient3d.
int insphere(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d, const Vec3& e);

/// Same predicates without the floating-point filter; used to test the filter.
int orient3d_exact(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d);
int insphere_exact(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d, const Vec3& e);

}  // namespace vessel4d::predicates
