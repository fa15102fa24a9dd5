#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "sonn/checkpoint.hpp"
#include "sonn/denoise.hpp"
#include "sonn/tensor.hpp"

namespace sonn {

/// ADAM moments, one (m, v) pair per parameter tensor, plus the step count
/// and hyperparameters.
struct AdamState {
    std::vector<Tensor> m;
    std::vector<Tensor> v;
    long t = 0;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

AdamState make_adam(const std::vector<Tensor*>& params, double lr = 1e-3);

/// One bias-corrected ADAM update over aligned parameter/gradient lists.
void adam_step(AdamState& state, const std::vector<Tensor*>& params,
               const std::vector<const Tensor*>& grads);

struct MseResult {
    double loss = 0.0;
    Tensor grad;  // 2*(pred - target)/N
};

MseResult mse_loss(const Tensor& pred, const Tensor& target);

struct TrainPlan {
    int epochs = 100;
    int batch_size = 32;
    double lr = 1e-3;
    bool lr_step_decay = false;  // halve the rate every 30 epochs
    std::uint64_t seed = 0;
    double split_ratio = 0.9;    // train fraction of the 9:1 split
    std::filesystem::path log_path;  // per-epoch CSV when non-empty
};

struct EpochLog {
    int epoch = 0;
    double train_loss = 0.0;
    double val_psnr = 0.0;
};

struct TrainResult {
    Checkpoint best;             // state of the epoch with the highest validation PSNR
    std::vector<EpochLog> log;   // one row per trained epoch
};

/// Shuffles the dataset deterministically by seed, splits it into train and
/// validation parts, and runs mini-batch ADAM on the MSE between network
/// output and clean target in the internal [-1,1] domain. Validation PSNR is
/// measured each epoch through the same path as denoise_image; the returned
/// checkpoint is the epoch that maximized it (epoch 0 = untrained baseline).
/// A non-finite loss aborts with a NumericError naming the offending batch.
TrainResult train(const NetworkConfig& config, const PatchSet& dataset, const TrainPlan& plan);

/// CSV with header epoch,train_loss,val_psnr.
void write_train_log_csv(std::ostream& os, const std::vector<EpochLog>& log);

struct GradCheckRow {
    std::string tensor_name;  // e.g. "layer1/weight"
    double max_rel_err = 0.0;
};

struct GradCheckReport {
    std::vector<GradCheckRow> rows;
    double max_rel_err = 0.0;
    double tolerance = 0.0;
    bool passed = false;
};

/// Compares the analytic gradient of the MSE training loss with central
/// finite differences (step 1e-5), coordinate by coordinate, for every
/// parameter tensor of a network built from config on a random 8x8 input.
/// The per-coordinate relative error is |a - n| / max(|a|, |n|, floor) with
/// floor = 1e-3 * the largest gradient magnitude in the tensor, so
/// negligible coordinates are measured against the tensor's own scale.
GradCheckReport grad_check(const NetworkConfig& config, std::uint64_t seed, double tolerance);

}  // namespace sonn
