// SPDX-License-Identifier: Apache-2.0
#include "dcmp/ratecontrol.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dcmp/adwt.hpp"

namespace dcmp {

RDModel rd_model_preset(RcDataset dataset) {
  switch (dataset) {
    case RcDataset::NuScenes: return {0.0109, 1.82, 0.234, 1.0};
    case RcDataset::Waymo: return {0.0101, 0.72, 0.243, 1.0};
    default: return {0.0100, 0.86, 0.277, 1.0};
  }
}

void FrameBudget::reset(std::int64_t target, std::vector<double> energies) {
  target_bits = target;
  remaining_bits = target;
  consumed_bits = 0;
  block_energy = std::move(energies);
  next_block = 0;
}

void FrameBudget::consume(std::int64_t bits) {
  consumed_bits += bits;
  remaining_bits = target_bits - consumed_bits;
}

std::int64_t allocate_block_bits(const FrameBudget& budget, std::size_t block_index) {
  double e_cur = budget.block_energy[block_index];
  double e_rest = 0.0;
  for (std::size_t b = block_index; b < budget.block_energy.size(); ++b)
    e_rest += budget.block_energy[b];

  double share;
  if (e_rest <= 0.0) {
    const std::size_t remaining_blocks = budget.block_energy.size() - block_index;
    share = 1.0 / static_cast<double>(remaining_blocks);
  } else {
    share = e_cur / e_rest;
  }
  const double bits = share * static_cast<double>(std::max<std::int64_t>(budget.remaining_bits, 0));
  return std::max<std::int64_t>(kBlockBitsFloor, std::llround(bits));
}

double lambda_at_step(double q, const RDModel& model) {
  // -dD/dR with D = a_D Q^2 and R = a_R Q^-b_R:
  // lambda(Q) = 2 a_D / (a_R b_R) * Q^(b_R + 2)
  return 2.0 * model.a_d / (model.a_r * model.b_r) * std::pow(q, model.b_r + 2.0);
}

double estimate_lambda(double r_target_bpp, const RDModel& model) {
  const double q_hint = std::pow(model.a_r / r_target_bpp, 1.0 / model.b_r);
  return std::clamp(lambda_at_step(q_hint, model), kLambdaMin, kLambdaMax);
}

double solve_qstar(double lambda, double rc_alpha, double rc_beta) {
  auto f = [&](double q) { return rc_alpha * q * std::exp(rc_beta * q); };
  if (lambda <= f(kQuantStepMin)) return kQuantStepMin;
  if (lambda >= f(kQuantStepMax)) return kQuantStepMax;

  double lo = kQuantStepMin, hi = kQuantStepMax;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < lambda ? lo : hi) = mid;
  }
  // Newton polish in the log domain: g(q) = ln alpha + ln q + beta q - ln lambda,
  // g'(q) = 1/q + beta.
  double q = 0.5 * (lo + hi);
  const double log_target = std::log(lambda) - std::log(rc_alpha);
  for (int i = 0; i < 3; ++i) {
    const double g = std::log(q) + rc_beta * q - log_target;
    q -= g / (1.0 / q + rc_beta);
    q = std::clamp(q, kQuantStepMin, kQuantStepMax);
  }
  return q;
}

void update_model(BlockRCState& state, double q_actual, double q_estimated,
                  double delta_alpha, double delta_beta) {
  const double beta_old = state.rc_beta;
  const double denom = beta_old * q_actual + 1.0;
  const double err = q_actual - q_estimated;
  const double alpha_next = state.rc_alpha + delta_alpha * state.rc_alpha * q_actual * err / denom;
  const double beta_next = beta_old + delta_beta * q_actual * q_actual * err / denom;
  state.rc_alpha = std::clamp(alpha_next, kRcParamMin, kRcParamMax);
  state.rc_beta = std::clamp(beta_next, kRcParamMin, kRcParamMax);
}

DqFit fit_dq_model(const std::vector<std::pair<double, double>>& qd) {
  if (qd.size() < 3) throw DegenerateFit("fit_dq_model: need at least 3 samples");
  bool all_equal = true;
  for (const auto& [q, d] : qd) {
    if (!(q > 0.0) || d < 0.0) throw DegenerateFit("fit_dq_model: require Q > 0, D >= 0");
    all_equal = all_equal && (q == qd.front().first);
  }
  if (all_equal) throw DegenerateFit("fit_dq_model: all steps equal");

  double num = 0.0, den = 0.0, d_mean = 0.0;
  for (const auto& [q, d] : qd) {
    num += d * q * q;
    den += q * q * q * q;
    d_mean += d;
  }
  d_mean /= static_cast<double>(qd.size());

  DqFit fit;
  fit.a_d = num / den;
  double ss_res = 0.0, ss_tot = 0.0;
  for (const auto& [q, d] : qd) {
    const double e = d - fit.a_d * q * q;
    ss_res += e * e;
    ss_tot += (d - d_mean) * (d - d_mean);
  }
  fit.cod = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

RqFit fit_rq_model(const std::vector<std::pair<double, double>>& qr) {
  if (qr.size() < 3) throw DegenerateFit("fit_rq_model: need at least 3 samples");
  bool all_equal = true;
  for (const auto& [q, r] : qr) {
    if (!(q > 0.0) || !(r > 0.0)) throw DegenerateFit("fit_rq_model: require Q > 0, R > 0");
    all_equal = all_equal && (q == qr.front().first);
  }
  if (all_equal) throw DegenerateFit("fit_rq_model: all steps equal");

  // log R = log a_R - b_R log Q
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(qr.size());
  for (const auto& [q, r] : qr) {
    const double x = std::log(q), y = std::log(r);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw DegenerateFit("fit_rq_model: singular regression");
  const double slope = (n * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / n;

  RqFit fit;
  fit.b_r = -slope;
  fit.a_r = std::exp(intercept);
  double ss_res = 0.0, ss_tot = 0.0;
  const double y_mean = sy / n;
  for (const auto& [q, r] : qr) {
    const double y = std::log(r);
    const double e = y - (intercept + slope * std::log(q));
    ss_res += e * e;
    ss_tot += (y - y_mean) * (y - y_mean);
  }
  fit.cod = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

RateController::RateController(int block_rows, int block_cols, RcDataset dataset)
    : block_rows_(block_rows), block_cols_(block_cols), model_(rd_model_preset(dataset)),
      states_(static_cast<std::size_t>(block_rows) * block_cols) {}

void RateController::begin_frame(std::int64_t frame_target_bits, std::int64_t overhead_bits,
                                 std::vector<double> block_energies) {
  maybe_refit();
  ++frame_counter_;
  const std::int64_t blocks_budget = frame_target_bits - overhead_bits - carryover_debt_;
  budget_.reset(blocks_budget, std::move(block_energies));
}

RateController::BlockDecision RateController::decide_block(std::size_t block_index,
                                                           std::int64_t block_points) {
  BlockDecision d;
  if (budget_.remaining_bits <= 0 || block_points <= 0) {
    d.q = kQuantStepMax;
    d.target_bits = kBlockBitsFloor;
    d.floor_mode = true;
    return d;
  }
  d.target_bits = allocate_block_bits(budget_, block_index);
  const double r_target = static_cast<double>(d.target_bits) / static_cast<double>(block_points);
  d.lambda = estimate_lambda(r_target, model_);
  BlockRCState& st = states_[block_index];
  d.q = solve_qstar(d.lambda, st.rc_alpha, st.rc_beta);
  return d;
}

void RateController::end_block(std::size_t block_index, const BlockDecision& decision,
                               std::int64_t actual_bits, double block_mse,
                               std::int64_t block_points) {
  budget_.consume(actual_bits);
  budget_.block_energy[block_index] = 0.0;  // mark encoded for Eq. (5) sums
  BlockRCState& st = states_[block_index];
  st.last_bits = actual_bits;
  if (decision.floor_mode || block_points <= 0) return;

  // Realized lambda at the step actually used, through the fitted models;
  // the actual optimum is that lambda pushed back through the alpha/beta map.
  const double lambda_real =
      std::clamp(lambda_at_step(decision.q, model_), kLambdaMin, kLambdaMax);
  const double q_actual = solve_qstar(lambda_real, st.rc_alpha, st.rc_beta);
  update_model(st, q_actual, decision.q);
  st.last_lambda = decision.lambda;
  st.last_qstar = decision.q;

  const double r_real = static_cast<double>(actual_bits) / static_cast<double>(block_points);
  if (r_real > 0.0 && block_mse >= 0.0) {
    samples_.push_back({decision.q, block_mse, r_real});
    while (samples_.size() > 1024) samples_.pop_front();
  }
}

void RateController::end_frame(std::int64_t frame_real_bits, std::int64_t frame_target_bits) {
  carryover_debt_ = std::max<std::int64_t>(0, frame_real_bits - frame_target_bits);
}

void RateController::maybe_refit() {
  if (frame_counter_ == 0 || frame_counter_ % 32 != 0 || samples_.size() < 64) return;
  std::vector<std::pair<double, double>> qd, qr;
  qd.reserve(samples_.size());
  qr.reserve(samples_.size());
  for (const auto& s : samples_) {
    if (s[1] > 0.0) qd.emplace_back(s[0], s[1]);
    qr.emplace_back(s[0], s[2]);
  }
  try {
    if (qd.size() >= 16) model_.a_d = fit_dq_model(qd).a_d;
    const RqFit rq = fit_rq_model(qr);
    if (rq.b_r > 0.01 && rq.a_r > 0.0) {
      model_.a_r = rq.a_r;
      model_.b_r = rq.b_r;
    }
  } catch (const DegenerateFit&) {
    // keep the previous model
  }
}

}  // namespace dcmp
