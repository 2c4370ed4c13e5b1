#pragma once

// Hybrid propagator: an input network corrects the mean elements fed to SGP4,
// an output network corrects the propagated state, and optional drag tuning
// parameters adjust SGP4 itself. Both networks start with zero output layers,
// so an untrained model reproduces SGP4 exactly.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dsgp4kit/gradients.hpp"
#include "dsgp4kit/mlp.hpp"

namespace dsgp4kit {

enum class Split : int { Train = 0, Valid = 1, Test = 2 };
std::string_view split_name(Split s);
Split parse_split(std::string_view name);

struct Sample {
  std::size_t tle = 0;  ///< index into SampleSet::tles
  double tsince_min = 0.0;
  Vector6 target = Vector6::Zero();  ///< km, km/s
};

/// Rows pairing a TLE with a reference state; the split is assigned per TLE.
struct SampleSet {
  std::vector<TleRecord> tles;
  std::vector<ElementSet> elements;  ///< to_elements(tles[k])
  std::vector<Split> tle_split;
  std::vector<Sample> rows;
  std::uint64_t seed = 0;
  std::array<double, 3> fractions{0.69, 0.16, 0.15};
  double altitude_holdout_km = 0.0;  ///< 0 disables the holdout

  [[nodiscard]] Split split_of(const Sample& s) const { return tle_split[s.tle]; }
  [[nodiscard]] std::vector<std::size_t> indices(Split s) const;
  /// Throws SplitOverlap if one TLE (catalog number and epoch) is assigned
  /// to more than one split.
  void check_split_hygiene() const;
};

/// Input features: each of the nine element parameters scaled as
/// (x - mean) / scale, plus tsince / time_scale.
struct FeatureNormalization {
  std::array<double, 9> mean{};
  std::array<double, 9> scale{1, 1, 1, 1, 1, 1, 1, 1, 1};
  double time_scale_min = 4320.0;
};
FeatureNormalization fit_normalization(const SampleSet& data, Split split = Split::Train);

struct HybridConfig {
  bool use_input_net = true;
  bool use_output_net = true;
  bool learn_sgp4 = false;  ///< B* offset and C1 scale
  std::vector<int> input_hidden{35, 35, 35};
  std::vector<int> output_hidden{35, 35, 35};
  /// Element correction per unit of input-net output, in element units
  /// (n, e, i, raan, argp, ma, bstar, ndot, nddot).
  std::array<double, 9> input_correction_scale{1e-7, 1e-5, 1e-5, 1e-5, 1e-4, 1e-4, 1e-5, 1e-10, 1e-14};
  /// State correction per unit of output-net output, in normalized units.
  double output_correction_scale = 1e-4;
  std::uint64_t seed = 0;
};

/// Output-only comparator: input net and drag tuning off, 4 x 32 output net.
HybridConfig output_only_config(std::uint64_t seed = 0);

inline constexpr int kInputFeatures = 10;
inline constexpr int kOutputFeatures = 7;
inline constexpr int kSgp4Params = 2;

struct HybridModel {
  HybridConfig config;
  Mlp input_net;   ///< empty when disabled
  Mlp output_net;  ///< empty when disabled
  DragTuning<double> sgp4;
  FeatureNormalization norm;
  GravityConstants gc = GravityConstants::wgs72();

  static HybridModel create(const HybridConfig& cfg, const FeatureNormalization& norm,
                            const GravityConstants& gc = GravityConstants::wgs72());
  [[nodiscard]] std::size_t parameter_count() const;
  /// Flat parameter vector: input net, then drag tuning (if learned), then
  /// output net.
  [[nodiscard]] std::vector<double> flat_parameters() const;
  void set_flat_parameters(std::span<const double> p);
};

struct HybridOutput {
  StateTeme state;
  bool clamped = false;
};

HybridOutput hybrid_forward(const HybridModel& model, const ElementSet& x0, double tsince);

/// Sample loss mean_c ((x_c - y_c) / S_c)^2 with S = 6378.135 km or 7.905 km/s,
/// evaluated entirely in T (double or long double).
template <typename T>
T sample_loss(const HybridModel& model, const ElementSet& x0, double tsince, const Vector6& target);

struct LossGrads {
  double loss = 0.0;  ///< mean over used samples
  std::vector<double> grad;  ///< same layout as flat_parameters
  std::size_t used = 0;
  std::size_t skipped = 0;  ///< propagation errors
  std::size_t clamped = 0;
};

/// Gradient by backprop through the networks and jets through SGP4. Sums are
/// formed in fixed chunks, so the result does not depend on `workers`.
LossGrads loss_and_grads(const HybridModel& model, const SampleSet& data, std::span<const std::size_t> rows,
                         int workers = 1);

enum class Optimizer { Adam, Sgd };

struct TrainConfig {
  double lr_input = 3e-3;
  double lr_sgp4 = 3e-3;
  double lr_output = 3e-3;
  int epochs = 30;
  int batch_size = 256;
  Optimizer optimizer = Optimizer::Adam;
  std::uint64_t seed = 0;
  int workers = 1;
};

struct EpochRecord {
  int epoch = 0;
  double train_mse = 0.0;
  double valid_mse = 0.0;
};

struct TrainHistory {
  double initial_train_mse = 0.0;
  double initial_valid_mse = 0.0;
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;  ///< 0 means the initial model
  std::size_t skipped = 0;
};

class TrainingDiverged : public Error {
 public:
  TrainingDiverged(const std::string& what, TrainHistory history)
      : Error(ErrorCode::DivergedLoss, what), history_(std::move(history)) {}
  [[nodiscard]] const TrainHistory& history() const { return history_; }

 private:
  TrainHistory history_;
};

struct TrainResult {
  HybridModel model;  ///< best validation snapshot
  TrainHistory history;
};

TrainResult train(const HybridModel& init, const SampleSet& data, const TrainConfig& cfg);

struct Metrics {
  double state_mse = 0.0;  ///< normalized
  double position_rmse_km = 0.0;
  double velocity_rmse_kms = 0.0;
  std::size_t count = 0;
  std::size_t skipped = 0;
};

Metrics evaluate(const HybridModel& model, const SampleSet& data, Split split, int workers = 1);
/// Plain SGP4 against the targets.
Metrics baseline_metrics(const SampleSet& data, Split split, const GravityConstants& gc = GravityConstants::wgs72(),
                         int workers = 1);

std::string checkpoint_json(const HybridModel& model);
HybridModel load_checkpoint(const std::string& text);
/// "epoch,train_mse,valid_mse"; row 0 is the initial model.
std::string history_csv(const TrainHistory& h);

}  // namespace dsgp4kit
