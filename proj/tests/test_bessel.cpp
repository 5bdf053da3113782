#include <gtest/gtest.h>

#include <cmath>

#include "phasespace/bessel.hpp"
#include "phasespace/bessel_quadrature.hpp"

using namespace phasespace;
using namespace phasespace::bessel;

namespace {

struct Reference {
  int m;
  cplx z;
  cplx J, Y, dJ, dY;
};

// 30-digit arbitrary-precision values, rounded to double.
const Reference kReference[] = {
    {0, {0.7, 0.0}, {0.8812008886074053, 0.0}, {-0.19066492933739512, 0.0}, {-0.32899574154005893, 0.0}, {1.1032498719076334, 0.0}},
    {1, {5.3, -0.2}, {-0.35269299431819516, 0.002040103448441243}, {0.044097425340724344, 0.069591112971365815},
     {-0.0095446681325395094, -0.067517240666959161}, {-0.35218892536653311, -0.0045456262979588733}},
    {7, {14.1, -1e-6}, {-0.13465833237868983, -1.6615716558107292e-7}, {-0.18367533105495645, 1.0865548245024307e-7},
     {0.16615716558111493, -8.9685371656125488e-8}, {-0.10865548245026887, -1.4611158215323121e-7}},
    {30, {0.7, 0.0}, {7.8825182682050977e-47, 0.0}, {-1.3464253358175517e+44, 0.0}, {3.3773320432792465e-45, 0.0}, {5.768769055038973e+45, 0.0}},
    {60, {47.0, -0.5}, {0.00010326484185105485, -4.42223770583068e-5}, {-70.439626673882534, -28.748488569484696},
     {8.4497513127922511e-5, -3.3594573651142521e-5}, {53.934870697591295, 23.884432485699332}},
    {60, {3.0, -2.0}, {-2.0915238677858155e-67, 1.6687629124569411e-67}, {1.553004950516218e+64, 1.2348576506650792e+64},
     {-4.4339504339929043e-66, 3.7242074854339771e-67}, {-1.0044020052007199e+65, -3.142843794858905e+65}},
    {20, {160.0, -0.01}, {-0.06145109626856662, -0.00015386743758600086}, {-0.015312195774372244, 0.0006091884580403316},
     {0.015387260794382697, -0.0006039277414137436}, {-0.060920841491538504, -0.00015453178031385792}},
};

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(Bessel, MatchesReferenceValues) {
  for (const auto& r : kReference) {
    const auto j = bessel_j(r.m, r.z);
    const auto y = bessel_y(r.m, r.z);
    EXPECT_LT(rel(j.value, r.J), 1e-12) << "m=" << r.m;
    EXPECT_LT(rel(j.deriv, r.dJ), 1e-12) << "m=" << r.m;
    EXPECT_LT(rel(y.value, r.Y), 1e-12) << "m=" << r.m;
    EXPECT_LT(rel(y.deriv, r.dY), 1e-12) << "m=" << r.m;
  }
}

TEST(Bessel, AgreesWithStandardLibraryOnRealAxis) {
  for (int m : {0, 1, 2, 5, 13, 40}) {
    for (double x : {0.1, 1.0, 7.5, 33.0, 90.0}) {
      const auto j = bessel_j(m, x);
      const auto y = bessel_y(m, x);
      EXPECT_NEAR(j.value.real(), std::cyl_bessel_j(m, x), 1e-13 * std::max(1.0, std::abs(std::cyl_bessel_j(m, x))));
      EXPECT_LT(std::abs(y.value.real() / std::cyl_neumann(m, x) - 1.0), 1e-11);
    }
  }
}

TEST(Bessel, Wronskian) {
  for (int m : {0, 3, 17}) {
    for (cplx z : {cplx(2.0, -0.1), cplx(11.0, -1.0), cplx(25.0, -0.001)}) {
      const auto j = bessel_j(m, z);
      const auto y = bessel_y(m, z);
      const cplx w = j.value * y.deriv - j.deriv * y.value;
      EXPECT_LT(std::abs(w - 2.0 / (kPi * z)) / std::abs(2.0 / (kPi * z)), 1e-12);
    }
  }
}

TEST(Bessel, NegativeOrderParity) {
  const cplx z(4.2, -0.3);
  EXPECT_LT(std::abs(bessel_j(-3, z).value + bessel_j(3, z).value), 1e-15);
  EXPECT_LT(std::abs(bessel_j(-4, z).value - bessel_j(4, z).value), 1e-15);
  EXPECT_LT(std::abs(hankel1(-5, z).value + hankel1(5, z).value), 1e-14);
}

TEST(Bessel, RequiresRightHalfPlane) { EXPECT_THROW(bessel_y(1, cplx(-1.0, 0.5)), DomainError); }

TEST(Bessel, QuadratureCrossCheck) {
  // Independent route through Bessel and Schlafli integrals.
  for (const auto& r : kReference) {
    if (std::abs(r.J) < 1e-10) continue;  // trapezoid J has absolute accuracy only
    EXPECT_LT(rel(bessel_j_quadrature(r.m, r.z), r.J), 1e-10) << "m=" << r.m;
    EXPECT_LT(rel(bessel_y_quadrature(r.m, r.z), r.Y), 1e-10) << "m=" << r.m;
  }
}

TEST(Bessel, HankelLogDerivativeForms) {
  for (int m : {2, 20, 45}) {
    for (cplx z : {cplx(3.0, -1e-9), cplx(12.0, -0.2), cplx(60.0, -2.0)}) {
      const auto h = hankel1(m, z);
      const cplx direct = h.deriv / h.value;
      EXPECT_LT(rel(hankel1_log_derivative<RecurrenceCylinder>(m, z), direct), 1e-12);
    }
  }
}
