#include "twinboot/rng.hpp"

#include <cmath>

namespace twinboot {

namespace detail {

ZigguratTables::ZigguratTables() {
  const double m1 = 9007199254740992.0;  // 2^53
  double dn = 3.442619855899;
  const double vn = 9.91256303526217e-3;
  double tn = dn;
  const double q = vn / std::exp(-0.5 * dn * dn);
  k[0] = (dn / q) * m1;
  k[1] = 0.0;
  w[0] = q / m1;
  w[127] = dn / m1;
  f[0] = 1.0;
  f[127] = std::exp(-0.5 * dn * dn);
  for (int i = 126; i >= 1; --i) {
    dn = std::sqrt(-2.0 * std::log(vn / dn + std::exp(-0.5 * dn * dn)));
    k[i + 1] = (dn / tn) * m1;
    tn = dn;
    f[i] = std::exp(-0.5 * dn * dn);
    w[i] = dn / m1;
  }
}

const ZigguratTables zig_tables;

}  // namespace detail

double RngStream::normal_slow(std::int64_t hz, int iz) {
  const detail::ZigguratTables& t = detail::zig_tables;
  const double r = 3.442619855899;
  for (;;) {
    const double x = static_cast<double>(hz) * t.w[iz];
    if (iz == 0) {
      // tail beyond r
      double xx, yy;
      do {
        xx = -std::log(1.0 - uniform01()) / r;
        yy = -std::log(1.0 - uniform01());
      } while (yy + yy < xx * xx);
      return hz > 0 ? r + xx : -(r + xx);
    }
    if (t.f[iz] + uniform01() * (t.f[iz - 1] - t.f[iz]) <
        std::exp(-0.5 * x * x)) {
      return x;
    }
    const std::uint64_t u = next_u64();
    iz = static_cast<int>(u & 127);
    hz = static_cast<std::int64_t>(u >> 10) - 9007199254740992LL;
    const double ahz = static_cast<double>(hz < 0 ? -hz : hz);
    if (ahz < t.k[iz]) return static_cast<double>(hz) * t.w[iz];
  }
}

}  // namespace twinboot
