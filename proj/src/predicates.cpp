#include "vessel4d/predicates.hpp"

#include <cmath>

#include <gmpxx.h>

namespace vessel4d::predicates {
namespace {

// Forward error bounds for the straightforward double evaluation
// (Shewchuk, "Adaptive Precision Floating-Point Arithmetic").
constexpr double kEps = 0x1.0p-53;
constexpr double kOrientBound = (7.0 + 56.0 * kEps) * kEps;
constexpr double kInsphereBound = (16.0 + 224.0 * kEps) * kEps;

template <typename T>
T orient_det(const T& adx, const T& ady, const T& adz, const T& bdx, const T& bdy, const T& bdz, const T& cdx,
             const T& cdy, const T& cdz) {
  return adz * (bdx * cdy - cdx * bdy) + bdz * (cdx * ady - adx * cdy) + cdz * (adx * bdy - bdx * ady);
}

template <typename T>
T insphere_det(const T (&a)[3], const T (&b)[3], const T (&c)[3], const T (&d)[3]) {
  // Coordinates are already relative to the query point e.
  const T ab = a[0] * b[1] - b[0] * a[1];
  const T bc = b[0] * c[1] - c[0] * b[1];
  const T cd = c[0] * d[1] - d[0] * c[1];
  const T da = d[0] * a[1] - a[0] * d[1];
  const T ac = a[0] * c[1] - c[0] * a[1];
  const T bd = b[0] * d[1] - d[0] * b[1];

  const T abc = a[2] * bc - b[2] * ac + c[2] * ab;
  const T bcd = b[2] * cd - c[2] * bd + d[2] * bc;
  const T cda = c[2] * da + d[2] * ac + a[2] * cd;
  const T dab = d[2] * ab + a[2] * bd + b[2] * da;

  const T alift = a[0] * a[0] + a[1] * a[1] + a[2] * a[2];
  const T blift = b[0] * b[0] + b[1] * b[1] + b[2] * b[2];
  const T clift = c[0] * c[0] + c[1] * c[1] + c[2] * c[2];
  const T dlift = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];

  return (dlift * abc - clift * dab) + (blift * cda - alift * bcd);
}

}  // namespace

int orient3d_exact(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  // Differences of doubles are exact in rationals.
  const mpq_class dx(d.x()), dy(d.y()), dz(d.z());
  const mpq_class adx = mpq_class(a.x()) - dx, ady = mpq_class(a.y()) - dy, adz = mpq_class(a.z()) - dz;
  const mpq_class bdx = mpq_class(b.x()) - dx, bdy = mpq_class(b.y()) - dy, bdz = mpq_class(b.z()) - dz;
  const mpq_class cdx = mpq_class(c.x()) - dx, cdy = mpq_class(c.y()) - dy, cdz = mpq_class(c.z()) - dz;
  const mpq_class det = orient_det<mpq_class>(adx, ady, adz, bdx, bdy, bdz, cdx, cdy, cdz);
  return sgn(det);
}

int orient3d(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  const double adx = a.x() - d.x(), bdx = b.x() - d.x(), cdx = c.x() - d.x();
  const double ady = a.y() - d.y(), bdy = b.y() - d.y(), cdy = c.y() - d.y();
  const double adz = a.z() - d.z(), bdz = b.z() - d.z(), cdz = c.z() - d.z();

  const double bdxcdy = bdx * cdy, cdxbdy = cdx * bdy;
  const double cdxady = cdx * ady, adxcdy = adx * cdy;
  const double adxbdy = adx * bdy, bdxady = bdx * ady;
  const double det = adz * (bdxcdy - cdxbdy) + bdz * (cdxady - adxcdy) + cdz * (adxbdy - bdxady);
  const double permanent = (std::abs(bdxcdy) + std::abs(cdxbdy)) * std::abs(adz) +
                           (std::abs(cdxady) + std::abs(adxcdy)) * std::abs(bdz) +
                           (std::abs(adxbdy) + std::abs(bdxady)) * std::abs(cdz);
  const double bound = kOrientBound * permanent;
  // Bound widened 4x; anything inside it is decided in rationals.
  const double slack = bound * 4.0 + 0x1.0p-1000;
  if (det > slack) return 1;
  if (-det > slack) return -1;
  return orient3d_exact(a, b, c, d);
}

int insphere_exact(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d, const Vec3& e) {
  const mpq_class ex(e.x()), ey(e.y()), ez(e.z());
  const mpq_class ra[3] = {mpq_class(a.x()) - ex, mpq_class(a.y()) - ey, mpq_class(a.z()) - ez};
  const mpq_class rb[3] = {mpq_class(b.x()) - ex, mpq_class(b.y()) - ey, mpq_class(b.z()) - ez};
  const mpq_class rc[3] = {mpq_class(c.x()) - ex, mpq_class(c.y()) - ey, mpq_class(c.z()) - ez};
  const mpq_class rd[3] = {mpq_class(d.x()) - ex, mpq_class(d.y()) - ey, mpq_class(d.z()) - ez};
  return sgn(insphere_det<mpq_class>(ra, rb, rc, rd));
}

int insphere(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d, const Vec3& e) {
  const double ra[3] = {a.x() - e.x(), a.y() - e.y(), a.z() - e.z()};
  const double rb[3] = {b.x() - e.x(), b.y() - e.y(), b.z() - e.z()};
  const double rc[3] = {c.x() - e.x(), c.y() - e.y(), c.z() - e.z()};
  const double rd[3] = {d.x() - e.x(), d.y() - e.y(), d.z() - e.z()};
  const double det = insphere_det<double>(ra, rb, rc, rd);

  auto mag = [](const double (&p)[3], const double (&q)[3]) {
    return std::abs(p[0] * q[1]) + std::abs(q[0] * p[1]);
  };
  const double ab = mag(ra, rb), bc = mag(rb, rc), cd = mag(rc, rd);
  const double da = mag(rd, ra), ac = mag(ra, rc), bd = mag(rb, rd);
  const double az = std::abs(ra[2]), bz = std::abs(rb[2]), cz = std::abs(rc[2]), dz = std::abs(rd[2]);
  auto lift = [](const double (&p)[3]) { return p[0] * p[0] + p[1] * p[1] + p[2] * p[2]; };
  const double permanent = (cd * bz + bd * cz + bc * dz) * lift(ra) + (da * cz + ac * dz + cd * az) * lift(rb) +
                           (ab * dz + bd * az + da * bz) * lift(rc) + (bc * az + ac * bz + ab * cz) * lift(rd);
  const double slack = kInsphereBound * permanent * 4.0 + 0x1.0p-1000;
  if (det > slack) return 1;
  if (-det > slack) return -1;
  return insphere_exact(a, b, c, d, e);
}

}  // namespace vessel4d::predicates
