// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <stdexcept>
#include <utility>
#include <vector>

namespace dcmp {

inline constexpr double kLambdaMin = 1e-6;
inline constexpr double kLambdaMax = 1e6;
inline constexpr double kRcParamMin = 1e-4;
inline constexpr double kRcParamMax = 1e2;
inline constexpr std::int64_t kBlockBitsFloor = 64;

/// Fitted D-Q (quadratic, D = a_D Q^2) and R-Q (hyperbolic, R = a_R Q^-b_R)
/// model constants plus the non-zero coefficient fraction.
struct RDModel {
  double a_d = 0.0100;
  double a_r = 0.86;
  double b_r = 0.277;
  double rho = 1.0;
};

enum class RcDataset { Kitti, NuScenes, Waymo };

/// Published per-dataset model means used for initialization.
RDModel rd_model_preset(RcDataset dataset);

/// Per-block-position state of the lambda-to-Q map lambda = alpha Q e^(beta Q).
struct BlockRCState {
  double rc_alpha = 0.014;
  double rc_beta = 0.91;
  double last_lambda = 0.0;
  double last_qstar = 0.0;
  std::int64_t last_bits = 0;
};

/// Frame bit budget with an exact integer ledger:
/// remaining + consumed == target at all times.
struct FrameBudget {
  std::int64_t target_bits = 0;     // B_fTar
  std::int64_t remaining_bits = 0;  // B_rem, may go negative
  std::int64_t consumed_bits = 0;
  std::vector<double> block_energy;  // spatial residual sum x^2 per block
  std::size_t next_block = 0;

  void reset(std::int64_t target, std::vector<double> energies);
  void consume(std::int64_t bits);
};

/// Per-block target: B_curTar = (E_cur / sum of unencoded E) * B_rem,
/// uniform split when the unencoded energy is zero, floored at 64 bits.
std::int64_t allocate_block_bits(const FrameBudget& budget, std::size_t block_index);

/// lambda estimate for a block-level bpp target: invert the hyperbolic R-Q
/// model to a step hint, then take the R-D slope of the two fitted models
/// at that step. Clamped to [kLambdaMin, kLambdaMax].
double estimate_lambda(double r_target_bpp, const RDModel& model);

/// R-D slope of the fitted models at a given step (used for the realized
/// lambda after encoding).
double lambda_at_step(double q, const RDModel& model);

/// Unique positive root of lambda = rc_alpha * Q * exp(rc_beta * Q),
/// bisection plus Newton polish, clamped to the step bounds.
double solve_qstar(double lambda, double rc_alpha, double rc_beta);

/// Adaptive least-mean-squares update of (rc_alpha, rc_beta) from the
/// actual optimum versus the estimate; both denominators use the
/// pre-update rc_beta, results clamped to [kRcParamMin, kRcParamMax].
void update_model(BlockRCState& state, double q_actual, double q_estimated,
                  double delta_alpha = 0.4, double delta_beta = 0.3);

struct DqFit {
  double a_d = 0.0;
  double cod = 0.0;  // coefficient of determination in D-vs-Q^2 space
};
struct RqFit {
  double a_r = 0.0;
  double b_r = 0.0;
  double cod = 0.0;  // coefficient of determination in log-log space
};

class DegenerateFit : public std::runtime_error {
 public:
  explicit DegenerateFit(const std::string& what) : std::runtime_error(what) {}
};

/// Least-squares D = a_D Q^2 through the origin. Throws DegenerateFit when
/// all steps coincide or fewer than 3 samples are given.
DqFit fit_dq_model(const std::vector<std::pair<double, double>>& qd_samples);
/// Log-log linear regression for R = a_R Q^-b_R; same degeneracy rules.
RqFit fit_rq_model(const std::vector<std::pair<double, double>>& qr_samples);

/// Per-stream rate controller: block-position state grid, frame budgeting
/// with virtual-buffer carryover, and periodic model refits from recent
/// block samples.
class RateController {
 public:
  RateController(int block_rows, int block_cols, RcDataset dataset = RcDataset::Kitti);

  /// Start a frame: target bits from the schedule minus the non-block
  /// overhead already spent, debited by the previous frames' overshoot.
  void begin_frame(std::int64_t frame_target_bits, std::int64_t overhead_bits,
                   std::vector<double> block_energies);

  struct BlockDecision {
    double q = kRcParamMax;        // base step for the block
    double lambda = 0.0;
    std::int64_t target_bits = 0;
    bool floor_mode = false;       // budget exhausted, maximal step
  };

  /// Step decision for the next block (block order is raster).
  BlockDecision decide_block(std::size_t block_index, std::int64_t block_points);

  /// Report the encoded block: actual bits and residual-domain distortion.
  void end_block(std::size_t block_index, const BlockDecision& decision,
                 std::int64_t actual_bits, double block_mse, std::int64_t block_points);

  /// Finish the frame: returns the realized total block bits and updates
  /// the carryover debt from overshoot.
  void end_frame(std::int64_t frame_real_bits, std::int64_t frame_target_bits);

  const FrameBudget& budget() const { return budget_; }
  const RDModel& model() const { return model_; }
  const BlockRCState& block_state(std::size_t block_index) const {
    return states_[block_index];
  }

 private:
  void maybe_refit();

  int block_rows_, block_cols_;
  RDModel model_;
  std::vector<BlockRCState> states_;
  FrameBudget budget_;
  std::int64_t carryover_debt_ = 0;
  std::int64_t frame_counter_ = 0;
  std::deque<std::array<double, 3>> samples_;  // (Q, D, R) per block
};

}  // namespace dcmp
