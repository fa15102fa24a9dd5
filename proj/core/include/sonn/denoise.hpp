#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "sonn/checkpoint.hpp"
#include "sonn/tensor.hpp"

namespace sonn {

/// Additive white Gaussian noise. sigma lives on the 0-255 scale and is
/// divided by 255 before it meets [0,1] images.
struct NoiseSpec {
    double sigma = 0.0;
    std::uint64_t seed = 0;
};

/// i.i.d. zero-mean normal draws of the given standard deviation, one per
/// element, in linear index order.
Tensor gaussian_field(const std::vector<std::size_t>& shape, double std_dev, std::uint64_t seed);

/// clip(clean + g, 0, 1) with g ~ N(0, (sigma/255)^2), deterministic per seed.
Tensor add_awgn(const Tensor& clean, const NoiseSpec& spec);

/// 10*log10(peak^2 / MSE) in dB; identical tensors give +infinity.
double psnr(const Tensor& reference, const Tensor& test, double peak = 1.0);

/// Aligned (noisy, clean) training pairs, each [C,P,P] in [0,1].
struct PatchSet {
    std::vector<std::pair<Tensor, Tensor>> pairs;  // (noisy, clean)
    int patch_size = 0;
};

/// Regular-grid crops of a [C,H,W] image at the given stride. When
/// max_patches > 0 and the grid is larger, a seed-determined subset is kept
/// in grid order. Images smaller than the patch yield an empty list with a
/// warning on stderr.
std::vector<Tensor> extract_patches(const Tensor& image, int size, int stride,
                                    std::uint64_t seed, std::size_t max_patches = 0);

/// Pairs images across two directories by filename, normalizes to [0,1] and
/// crops aligned patches. Filenames present in only one directory are an
/// error that names the orphans.
PatchSet ingest_pairs(const std::filesystem::path& noisy_dir,
                      const std::filesystem::path& clean_dir, int patch_size = 40,
                      int stride = 40);

/// Maps [0,1] input to the network's internal [-1,1] domain, runs the whole
/// image through the forward pass (all layers preserve resolution), maps back
/// and clips to [0,1]. Input and output are [C,H,W].
Tensor denoise_image(const NetworkConfig& config, const NetworkState& state, const Tensor& noisy);
Tensor denoise_image(const Checkpoint& checkpoint, const Tensor& noisy);

struct ReportRow {
    std::string dataset;
    double sigma = 0.0;
    bool real_noise = false;  // sigma column reads "real" for paired data
    std::string model;
    double psnr_db = 0.0;
};

struct DenoiseReport {
    std::vector<ReportRow> rows;
};

/// For each sigma: corrupt every clean image with a seed derived from
/// eval_seed, denoise, and average the per-image PSNR into one report row.
DenoiseReport evaluate(const Checkpoint& checkpoint, const std::string& dataset_name,
                       const std::vector<Tensor>& clean_images, const std::vector<double>& sigmas,
                       std::uint64_t eval_seed = 0);

/// CSV with header dataset,sigma,model,psnr_db; infinite PSNR prints "inf".
void write_report_csv(std::ostream& os, const DenoiseReport& report);

}  // namespace sonn
