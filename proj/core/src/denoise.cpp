#include "sonn/denoise.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <map>
#include <set>

#include "sonn/errors.hpp"
#include "sonn/image_io.hpp"
#include "sonn/rng.hpp"

namespace sonn {

Tensor gaussian_field(const std::vector<std::size_t>& shape, double std_dev,
                      std::uint64_t seed) {
    Tensor field(shape);
    Rng rng(seed);
    for (std::size_t i = 0; i < field.size(); ++i) field[i] = std_dev * rng.gaussian();
    return field;
}

Tensor add_awgn(const Tensor& clean, const NoiseSpec& spec) {
    if (spec.sigma < 0.0) throw ParameterError("add_awgn: sigma must be >= 0");
    if (spec.sigma == 0.0) return clean;
    const Tensor g = gaussian_field(clean.shape(), spec.sigma / 255.0, spec.seed);
    Tensor noisy = clean;
    for (std::size_t i = 0; i < noisy.size(); ++i)
        noisy[i] = std::clamp(noisy[i] + g[i], 0.0, 1.0);
    return noisy;
}

double psnr(const Tensor& reference, const Tensor& test, double peak) {
    if (!reference.same_shape(test)) throw DimensionError("psnr: shape mismatch");
    if (reference.empty()) throw ParameterError("psnr: empty tensors");
    double mse = 0.0;
    for (std::size_t i = 0; i < reference.size(); ++i) {
        const double d = reference[i] - test[i];
        mse += d * d;
    }
    mse /= static_cast<double>(reference.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse);
}

std::vector<Tensor> extract_patches(const Tensor& image, int size, int stride,
                                    std::uint64_t seed, std::size_t max_patches) {
    if (image.rank() != 3) throw DimensionError("extract_patches: expected a [C,H,W] image");
    if (size < 1 || stride < 1)
        throw ParameterError("extract_patches: size and stride must be >= 1");
    const std::size_t c = image.extent(0), h = image.extent(1), w = image.extent(2);
    if (h < static_cast<std::size_t>(size) || w < static_cast<std::size_t>(size)) {
        std::cerr << "extract_patches: skipping " << h << "x" << w
                  << " image smaller than patch size " << size << "\n";
        return {};
    }
    const std::size_t rows = (h - size) / stride + 1;
    const std::size_t cols = (w - size) / stride + 1;

    std::vector<std::size_t> keep(rows * cols);
    for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = i;
    if (max_patches > 0 && keep.size() > max_patches) {
        Rng rng(seed);
        for (std::size_t i = keep.size() - 1; i > 0; --i)
            std::swap(keep[i], keep[rng.next_u64() % (i + 1)]);
        keep.resize(max_patches);
        std::sort(keep.begin(), keep.end());  // preserve grid order
    }

    std::vector<Tensor> patches;
    patches.reserve(keep.size());
    for (std::size_t idx : keep) {
        const std::size_t m0 = (idx / cols) * stride, n0 = (idx % cols) * stride;
        Tensor patch({c, static_cast<std::size_t>(size), static_cast<std::size_t>(size)});
        for (std::size_t ch = 0; ch < c; ++ch)
            for (std::size_t m = 0; m < static_cast<std::size_t>(size); ++m)
                for (std::size_t n = 0; n < static_cast<std::size_t>(size); ++n)
                    patch(ch, m, n) = image(ch, m0 + m, n0 + n);
        patches.push_back(std::move(patch));
    }
    return patches;
}

namespace {

std::map<std::string, std::filesystem::path> list_images(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir))
        throw IoError("not a directory: '" + dir.string() + "'");
    std::map<std::string, std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string ext = entry.path().extension().string();
        if (ext == ".pgm" || ext == ".ppm") files[entry.path().filename().string()] = entry.path();
    }
    return files;
}

}  // namespace

PatchSet ingest_pairs(const std::filesystem::path& noisy_dir,
                      const std::filesystem::path& clean_dir, int patch_size, int stride) {
    const auto noisy_files = list_images(noisy_dir);
    const auto clean_files = list_images(clean_dir);

    std::vector<std::string> orphans;
    for (const auto& [name, _] : noisy_files)
        if (!clean_files.count(name)) orphans.push_back(name + " (noisy only)");
    for (const auto& [name, _] : clean_files)
        if (!noisy_files.count(name)) orphans.push_back(name + " (clean only)");
    if (!orphans.empty()) {
        std::string msg = "ingest_pairs: unmatched filenames:";
        for (const std::string& o : orphans) msg += " " + o;
        throw ParameterError(msg);
    }

    PatchSet set;
    set.patch_size = patch_size;
    if (noisy_files.empty()) {
        std::cerr << "ingest_pairs: no images found under '" << noisy_dir.string() << "'\n";
        return set;
    }
    for (const auto& [name, noisy_path] : noisy_files) {
        const Tensor noisy = load_image(noisy_path);
        const Tensor clean = load_image(clean_files.at(name));
        if (!noisy.same_shape(clean))
            throw DimensionError("ingest_pairs: shape mismatch for '" + name + "'");
        auto noisy_patches = extract_patches(noisy, patch_size, stride, 0);
        auto clean_patches = extract_patches(clean, patch_size, stride, 0);
        for (std::size_t i = 0; i < noisy_patches.size(); ++i)
            set.pairs.emplace_back(std::move(noisy_patches[i]), std::move(clean_patches[i]));
    }
    return set;
}

Tensor denoise_image(const NetworkConfig& config, const NetworkState& state,
                     const Tensor& noisy) {
    if (noisy.rank() != 3) throw DimensionError("denoise_image: expected a [C,H,W] image");
    if (config.layers.empty() ||
        noisy.extent(0) != static_cast<std::size_t>(config.layers.front().in_channels))
        throw DimensionError("denoise_image: image channels do not match the model");
    const std::size_t c = noisy.extent(0), h = noisy.extent(1), w = noisy.extent(2);

    Tensor input({1, c, h, w});
    for (std::size_t i = 0; i < noisy.size(); ++i) input[i] = 2.0 * noisy[i] - 1.0;
    const Tensor output = network_forward(config, state, input);

    Tensor denoised({c, h, w});
    for (std::size_t i = 0; i < denoised.size(); ++i)
        denoised[i] = std::clamp((output[i] + 1.0) / 2.0, 0.0, 1.0);
    return denoised;
}

Tensor denoise_image(const Checkpoint& checkpoint, const Tensor& noisy) {
    return denoise_image(checkpoint.meta.config, state_from_checkpoint(checkpoint), noisy);
}

DenoiseReport evaluate(const Checkpoint& checkpoint, const std::string& dataset_name,
                       const std::vector<Tensor>& clean_images, const std::vector<double>& sigmas,
                       std::uint64_t eval_seed) {
    if (clean_images.empty()) throw ParameterError("evaluate: empty dataset");
    const NetworkState state = state_from_checkpoint(checkpoint);
    DenoiseReport report;
    for (std::size_t si = 0; si < sigmas.size(); ++si) {
        double sum = 0.0;
        for (std::size_t i = 0; i < clean_images.size(); ++i) {
            const NoiseSpec spec{sigmas[si], mix_seed(eval_seed, si, i)};
            const Tensor noisy = add_awgn(clean_images[i], spec);
            const Tensor denoised = denoise_image(checkpoint.meta.config, state, noisy);
            sum += psnr(clean_images[i], denoised);
        }
        report.rows.push_back({dataset_name, sigmas[si], false, checkpoint.meta.config.name,
                               sum / static_cast<double>(clean_images.size())});
    }
    return report;
}

void write_report_csv(std::ostream& os, const DenoiseReport& report) {
    os << "dataset,sigma,model,psnr_db\n";
    for (const ReportRow& row : report.rows) {
        os << row.dataset << ",";
        if (row.real_noise)
            os << "real";
        else
            os << row.sigma;
        os << "," << row.model << ",";
        if (std::isinf(row.psnr_db))
            os << (row.psnr_db > 0 ? "inf" : "-inf");
        else
            os << row.psnr_db;
        os << "\n";
    }
}

}  // namespace sonn
