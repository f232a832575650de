#pragma once

// Temporal workload forecasting: a single-layer LSTM (d_h = 64) over
// per-shard load features with streaming EMA normalization, trained in
// float64 and deployed as a Q47.16 fixed-point model for deterministic
// inference. Multi-step forecasts use autoregressive rollout; predictive
// uncertainty comes from Monte Carlo dropout on the output projection,
// and capacity planning consumes the 1.96-sigma upper confidence bound.
//
// The float64 and fixed-point paths instantiate the same templated core,
// so they execute the same operation sequence and stay comparable
// entry-by-entry.

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "psap/fixed_point.hpp"
#include "psap/rng.hpp"
#include "psap/types.hpp"
#include "psap/workload.hpp"

namespace psap::twf {

struct TwfError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Feature vector layout: [x_1 .. x_K, total_gas, hour_sin, hour_cos].
inline int feature_dim(int shards) { return shards + 3; }

struct TwfConfig {
    uint16_t shards = 8;
    uint32_t blocks_per_hour = 20;
    int hidden = 64;
    double dropout = 0.2;
};

/// Raw (unnormalized) feature vector for one block.
std::vector<double> raw_features(const std::vector<uint32_t>& counts, uint64_t gas,
                                 BlockHeight t, uint32_t blocks_per_hour);

// ---- streaming normalizer -------------------------------------------------

// EMA decay is pinned to the exact Q16 value 64881/65536 (~0.99) in both
// paths so the float64 shadow and the quantized deployment agree. The
// variance floor is one Q16 ulp for the same reason.
inline constexpr int64_t kEmaDecayRaw = 64881;
inline constexpr int64_t kVarFloorRaw = 1;

template <class S>
struct Normalizer {
    std::vector<S> mean;
    std::vector<S> var;
    bool initialized = false;

    /// Normalize one feature vector and then fold it into the EMA state.
    std::vector<S> normalize_and_update(const std::vector<S>& f);
    /// Normalize without touching the state (future-step features).
    std::vector<S> apply(const std::vector<S>& f) const;
    /// Map a z-space shard prediction back to load units.
    S denorm_load(S z, size_t shard) const;
    /// Load-unit scale of one shard feature (sqrt(var + floor)).
    S load_scale(size_t shard) const;
};

using NormalizerF = Normalizer<double>;
using NormalizerQ = Normalizer<FixedPoint>;

NormalizerQ quantize(const NormalizerF& n);

// ---- LSTM parameters --------------------------------------------------------

// Gate packing order along the 4h axis: input, forget, cell, output.
template <class S>
struct LstmWeights {
    int input = 0;
    int hidden = 0;
    int output = 0;
    std::vector<S> wx;     // 4h x input
    std::vector<S> wh;     // 4h x hidden
    std::vector<S> b;      // 4h
    std::vector<S> w_out;  // output x hidden
    std::vector<S> b_out;  // output

    size_t parameter_count() const {
        return wx.size() + wh.size() + b.size() + w_out.size() + b_out.size();
    }
    S* flat(size_t i);
};

using LstmWeightsF = LstmWeights<double>;
using LstmWeightsQ = LstmWeights<FixedPoint>;

LstmWeightsF init_weights(int input, int hidden, int output, uint64_t seed);
LstmWeightsQ quantize(const LstmWeightsF& w);

// ---- forecasting ------------------------------------------------------------

struct ForecastBundle {
    int horizon = 0;
    std::vector<LoadVector> pred;    // H x K, load units, clamped at 0
    std::vector<LoadVector> sigma;   // H x K, load units
    std::vector<LoadVector> var;     // H x K, sigma squared
    std::vector<LoadVector> hedged;  // H x K, pred + 1.96 sigma
};

inline constexpr int kMaxHorizon = 32;

struct ForecastRequest {
    BlockHeight anchor = 0;   // height of the last window entry
    int horizon = 1;          // H <= kMaxHorizon
    int samples = 1;          // MC-dropout sample count N
    bool dropout = false;     // off => deterministic point forecast
    uint32_t blocks_per_hour = 20;
};

/// Fixed-point production inference. `window` holds normalized feature
/// vectors (oldest first); throws TwfError("insufficient history") when
/// empty. Dropout masks come from `rng` (one mask per sample, held fixed
/// across the sample's rollout steps).
ForecastBundle forecast(const std::vector<std::vector<FixedPoint>>& window,
                        const LstmWeightsQ& params, const NormalizerQ& norm,
                        const ForecastRequest& req, DeterministicRng& rng);

/// float64 shadow of the same computation.
ForecastBundle forecast_shadow(const std::vector<std::vector<double>>& window,
                               const LstmWeightsF& params, const NormalizerF& norm,
                               const ForecastRequest& req, DeterministicRng& rng);

// ---- training ----------------------------------------------------------------

struct TrainHyper {
    int window = 32;
    int horizon = 8;        // teacher-forced steps per sample
    int epochs = 40;
    int minibatch = 16;
    int stride = 4;         // anchor stride within the training range
    double lr = 1e-3;       // cosine-decayed
    double weight_decay = 1e-5;
    double dropout = 0.2;
    int patience = 6;       // early stop on validation plateau
    double val_fraction = 0.2;
    int burn_in = 200;      // blocks skipped while the normalizer warms up
    uint64_t seed = 1;
};

struct TrainReport {
    std::vector<double> train_loss;  // NMSE per epoch
    std::vector<double> val_loss;
    int best_epoch = -1;
    double best_val = 0.0;
    double initial_val = 0.0;
};

struct TrainedModel {
    TwfConfig config;
    LstmWeightsF f64;
    NormalizerF norm_f64;
    LstmWeightsQ quant;
    NormalizerQ norm_quant;
};

/// Teacher-forced training on a trace matrix. Deterministic given
/// (data, hyper). Returns parameters whose validation NMSE is <= the
/// initial parameters' NMSE.
TrainedModel train(const workload::TraceMatrix& data, const TwfConfig& cfg,
                   const TrainHyper& hyper, TrainReport* report = nullptr);

/// NMSE loss and analytic parameter gradient for one batch of samples;
/// exposed for the finite-difference verification.
struct GradCheckSample {
    std::vector<std::vector<double>> inputs;   // (W + H - 1) x D, normalized
    std::vector<std::vector<double>> targets;  // H x K, z-space loads
};
double loss_and_grad(const LstmWeightsF& w, const std::vector<GradCheckSample>& batch,
                     const std::vector<double>& shard_var, double dropout_keep,
                     const std::vector<std::vector<uint8_t>>& masks,
                     LstmWeightsF* grad);

// ---- evaluation ----------------------------------------------------------------

struct AccuracyResult {
    double mae = 0.0;
    double mape = 0.0;  // fraction, not percent
    double rmse = 0.0;
    uint64_t mape_skipped = 0;  // entries with actual == 0
};

/// Standard error metrics; shapes must match. Entries with actual == 0 are
/// skipped for MAPE and counted; throws TwfError when every actual is zero.
AccuracyResult accuracy(const std::vector<std::vector<double>>& predictions,
                        const std::vector<std::vector<double>>& actuals);

/// MAPE of the exactly-h-step-ahead prediction over a trace range, using
/// the fixed-point model with deterministic point rollouts. `h` may exceed
/// kMaxHorizon for evaluation purposes.
double horizon_mape(const TrainedModel& model, const workload::TraceMatrix& data,
                    size_t eval_start, size_t eval_stop, int h, int window,
                    int anchor_stride);

// ---- checkpoint -----------------------------------------------------------------

/// Versioned binary checkpoint of the quantized model; the trailing
/// SHA-256 content hash participates in the determinism audit.
void save_checkpoint(const std::string& path, const TrainedModel& model);
struct Checkpoint {
    TwfConfig config;
    LstmWeightsQ weights;
    NormalizerQ norm;
    Digest content_hash{};
};
Checkpoint load_checkpoint(const std::string& path);

}  // namespace psap::twf
