#include "sonn/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "sonn/errors.hpp"

namespace sonn {

namespace {

// Next header token, skipping whitespace and '#' comment lines.
std::string next_token(std::istream& is, const std::filesystem::path& path) {
    std::string tok;
    int ch;
    while ((ch = is.get()) != EOF) {
        if (ch == '#') {
            while ((ch = is.get()) != EOF && ch != '\n') {
            }
        } else if (!std::isspace(ch)) {
            tok.push_back(static_cast<char>(ch));
            while ((ch = is.get()) != EOF && !std::isspace(ch) && ch != '#')
                tok.push_back(static_cast<char>(ch));
            if (ch == '#') is.unget();
            return tok;
        }
    }
    throw FormatError("image '" + path.string() + "': truncated header");
}

std::size_t parse_size(const std::string& tok, const std::filesystem::path& path) {
    std::size_t value = 0;
    for (char c : tok) {
        if (!std::isdigit(static_cast<unsigned char>(c)))
            throw FormatError("image '" + path.string() + "': bad header token '" + tok + "'");
        value = value * 10 + static_cast<std::size_t>(c - '0');
    }
    return value;
}

}  // namespace

Tensor load_image(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open image '" + path.string() + "'");

    const std::string magic = next_token(is, path);
    std::size_t channels;
    if (magic == "P5")
        channels = 1;
    else if (magic == "P6")
        channels = 3;
    else
        throw FormatError("image '" + path.string() + "': unsupported magic '" + magic + "'");

    const std::size_t width = parse_size(next_token(is, path), path);
    const std::size_t height = parse_size(next_token(is, path), path);
    const std::size_t maxval = parse_size(next_token(is, path), path);
    if (width == 0 || height == 0)
        throw FormatError("image '" + path.string() + "': zero extent");
    if (maxval != 255)
        throw FormatError("image '" + path.string() + "': only maxval 255 is supported, got " +
                          std::to_string(maxval));
    // The maxval is followed by exactly one whitespace byte, already consumed
    // by the tokenizer's terminating read.

    std::vector<unsigned char> raw(width * height * channels);
    if (!is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size())))
        throw FormatError("image '" + path.string() + "': truncated pixel data");

    Tensor image({channels, height, width});
    for (std::size_t m = 0; m < height; ++m)
        for (std::size_t n = 0; n < width; ++n)
            for (std::size_t c = 0; c < channels; ++c)
                image(c, m, n) = static_cast<double>(raw[(m * width + n) * channels + c]) / 255.0;
    return image;
}

void save_image(const std::filesystem::path& path, const Tensor& image) {
    if (image.rank() != 3 || (image.extent(0) != 1 && image.extent(0) != 3))
        throw DimensionError("save_image: expected a [1,H,W] or [3,H,W] tensor");
    const std::size_t channels = image.extent(0);
    const std::size_t height = image.extent(1), width = image.extent(2);

    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
    os << (channels == 1 ? "P5" : "P6") << "\n" << width << " " << height << "\n255\n";

    std::vector<unsigned char> raw(width * height * channels);
    for (std::size_t m = 0; m < height; ++m)
        for (std::size_t n = 0; n < width; ++n)
            for (std::size_t c = 0; c < channels; ++c) {
                const double v = std::clamp(image(c, m, n), 0.0, 1.0);
                raw[(m * width + n) * channels + c] =
                    static_cast<unsigned char>(std::lround(v * 255.0));
            }
    os.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!os) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace sonn
