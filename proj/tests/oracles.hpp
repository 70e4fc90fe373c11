// SPDX-License-Identifier: Apache-2.0
//
// Independent scalar re-implementations used as test oracles. These stay
// deliberately separate from the library code paths they check.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "dcmp/adwt.hpp"

namespace dcmp::test {

struct OracleSteps {
  double q[kSubbandCount];
};

inline double oracle_clamp(double q) {
  return std::clamp(q, kQuantStepMin, kQuantStepMax);
}

inline void oracle_level(double e_ll, double e_hl, double e_lh, double e_hh, double q_ll,
                         double alpha, double& q_hl, double& q_lh, double& q_hh) {
  if (e_hh <= 0.0) {
    q_hh = oracle_clamp(q_ll);
  } else {
    const double ll = e_ll > 0.0
                          ? e_ll
                          : std::numeric_limits<double>::epsilon() * (e_ll + e_hl + e_lh + e_hh);
    q_hh = oracle_clamp(alpha * std::log2(ll / e_hh + 1.0) * q_ll);
  }
  if (e_hl + e_lh <= 0.0) {
    q_hl = q_lh = oracle_clamp(0.5 * (q_ll + q_hh));
  } else {
    const double whl = e_hl / (e_hl + e_lh), wlh = e_lh / (e_hl + e_lh);
    q_hl = oracle_clamp(whl * q_ll + (1.0 - whl) * q_hh);
    q_lh = oracle_clamp(wlh * q_ll + (1.0 - wlh) * q_hh);
  }
}

inline OracleSteps oracle_assign(const SubbandEnergies& e, double q_ll3, double alpha) {
  OracleSteps o{};
  o.q[kLL3] = q_ll3;
  oracle_level(e.e[kLL3], e.e[kHL3], e.e[kLH3], e.e[kHH3], q_ll3, alpha, o.q[kHL3],
               o.q[kLH3], o.q[kHH3]);
  const double es3 = e.e[kLL3] + e.e[kHL3] + e.e[kLH3] + e.e[kHH3];
  double q_ll2;
  if (es3 <= 0.0)
    q_ll2 = oracle_clamp(0.25 * (o.q[kLL3] + o.q[kHL3] + o.q[kLH3] + o.q[kHH3]));
  else
    q_ll2 = oracle_clamp((o.q[kLL3] * e.e[kLL3] + o.q[kHL3] * e.e[kHL3] +
                          o.q[kLH3] * e.e[kLH3] + o.q[kHH3] * e.e[kHH3]) /
                         es3);
  oracle_level(es3, e.e[kHL2], e.e[kLH2], e.e[kHH2], q_ll2, alpha, o.q[kHL2], o.q[kLH2],
               o.q[kHH2]);
  const double es2 = es3 + e.e[kHL2] + e.e[kLH2] + e.e[kHH2];
  double q_ll1;
  if (es2 <= 0.0)
    q_ll1 = oracle_clamp(0.25 * (q_ll2 + o.q[kHL2] + o.q[kLH2] + o.q[kHH2]));
  else
    q_ll1 = oracle_clamp((q_ll2 * es3 + o.q[kHL2] * e.e[kHL2] + o.q[kLH2] * e.e[kLH2] +
                          o.q[kHH2] * e.e[kHH2]) /
                         es2);
  oracle_level(es2, e.e[kHL1], e.e[kLH1], e.e[kHH1], q_ll1, alpha, o.q[kHL1], o.q[kLH1],
               o.q[kHH1]);
  return o;
}

}  // namespace dcmp::test
