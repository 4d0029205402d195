#include "synrl/datasets.hpp"

#include "synrl/errors.hpp"
#include "synrl/rng.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>

namespace fs = std::filesystem;

namespace synrl {

namespace {

constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

void put_be32(std::ofstream& out, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                                static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_be32(const std::vector<unsigned char>& buf, std::size_t offset) {
    return (std::uint32_t{buf[offset]} << 24) | (std::uint32_t{buf[offset + 1]} << 16) |
           (std::uint32_t{buf[offset + 2]} << 8) | std::uint32_t{buf[offset + 3]};
}

std::vector<unsigned char> read_all(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Eigen::Index argmax_row(const Matrix& m, Eigen::Index row) {
    Eigen::Index best = 0;
    m.row(row).maxCoeff(&best);
    return best;
}

bool is_idx_dir(const fs::path& p) {
    return fs::is_directory(p) && fs::is_regular_file(p / kIdxImagesFile) && fs::is_regular_file(p / kIdxLabelsFile);
}

}  // namespace

BoundaryTask generate_boundary_task(const BoundaryTaskSpec& spec) {
    if (spec.hidden_units == 0 || spec.input_dim == 0 || spec.n_points == 0)
        throw ValidationError("boundary task dimensions must be positive");
    if (!(spec.weight_lo < spec.weight_hi) || !(spec.data_lo < spec.data_hi))
        throw ValidationError("boundary task ranges must satisfy lo < hi");
    if (spec.max_attempts == 0) throw ValidationError("boundary task needs at least one attempt");

    const auto layers =
        chain_layers({spec.input_dim, spec.hidden_units, 1}, spec.hidden_activation, ActivationKind::Identity);
    for (std::size_t attempt = 0; attempt < spec.max_attempts; ++attempt) {
        Rng rng(mix_seed(spec.seed, attempt));
        Mlp target(layers, LossKind::MeanSquaredEuclidean);
        for (std::size_t k = 0; k < target.layer_count(); ++k) {
            auto& w = target.weights(k);
            for (Eigen::Index r = 0; r < w.rows(); ++r)
                for (Eigen::Index c = 1; c < w.cols(); ++c) w(r, c) = rng.uniform(spec.weight_lo, spec.weight_hi);
        }
        Dataset data;
        data.X.resize(static_cast<Eigen::Index>(spec.n_points), static_cast<Eigen::Index>(spec.input_dim));
        for (Eigen::Index i = 0; i < data.X.size(); ++i) data.X.data()[i] = rng.uniform(spec.data_lo, spec.data_hi);
        const Matrix out = forward(target, data.X);
        data.Y.resize(out.rows(), 1);
        std::size_t positives = 0;
        for (Eigen::Index i = 0; i < out.rows(); ++i) {
            const bool pos = out(i, 0) > 0.0;
            data.Y(i, 0) = pos ? 1.0 : -1.0;
            positives += pos;
        }
        const double frac = static_cast<double>(positives) / static_cast<double>(spec.n_points);
        if (std::min(frac, 1.0 - frac) >= spec.min_class_fraction)
            return {std::move(target), std::move(data), attempt + 1};
    }
    throw ValidationError("no balanced boundary task found in " + std::to_string(spec.max_attempts) + " attempts");
}

std::vector<std::uint8_t> decode_png_grey(const fs::path& file, std::size_t& width, std::size_t& height) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, file.c_str()))
        throw std::runtime_error("png decode failed for " + file.string() + ": " + image.message);
    image.format = PNG_FORMAT_GRAY;
    std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, pixels.data(), 0, nullptr)) {
        const std::string msg = image.message;
        png_image_free(&image);
        throw std::runtime_error("png decode failed for " + file.string() + ": " + msg);
    }
    width = image.width;
    height = image.height;
    return pixels;
}

void write_png_grey(const fs::path& file, const std::vector<std::uint8_t>& pixels, std::size_t width,
                    std::size_t height) {
    if (pixels.size() != width * height) throw ValidationError("pixel buffer does not match image size");
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(width);
    image.height = static_cast<png_uint_32>(height);
    image.format = PNG_FORMAT_GRAY;
    if (!png_image_write_to_file(&image, file.c_str(), 0, pixels.data(), 0, nullptr))
        throw std::runtime_error("png encode failed for " + file.string() + ": " + image.message);
}

Dataset read_idx_pair(const fs::path& images, const fs::path& labels, std::size_t classes) {
    const auto ib = read_all(images);
    const auto lb = read_all(labels);
    if (ib.size() < 16 || get_be32(ib, 0) != kIdxImagesMagic) throw ValidationError(images.string() + " is not an IDX image file");
    if (lb.size() < 8 || get_be32(lb, 0) != kIdxLabelsMagic) throw ValidationError(labels.string() + " is not an IDX label file");
    const std::size_t n = get_be32(ib, 4), rows = get_be32(ib, 8), cols = get_be32(ib, 12);
    const std::size_t nl = get_be32(lb, 4);
    if (n != nl)
        throw ValidationError("IDX count mismatch: " + std::to_string(n) + " images vs " + std::to_string(nl) +
                              " labels");
    if (n == 0) throw ValidationError("IDX pair holds no images");
    const std::size_t d = rows * cols;
    if (ib.size() != 16 + n * d) throw ValidationError("IDX image file length does not match its header");
    if (lb.size() != 8 + n) throw ValidationError("IDX label file length does not match its header");

    Dataset data;
    data.X.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    data.Y = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(classes));
    for (std::size_t i = 0; i < n * d; ++i) data.X.data()[i] = ib[16 + i] / 255.0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t label = lb[8 + i];
        if (label >= classes)
            throw ValidationError("IDX label " + std::to_string(label) + " outside " + std::to_string(classes) +
                                  " classes");
        data.Y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(label)) = 1.0;
    }
    return data;
}

void export_idx_cache(const Dataset& data, const fs::path& dir) {
    validate_dataset(data);
    const std::size_t n = data.size(), d = data.input_dim();
    const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(d))));
    if (side * side != d) throw ValidationError("dataset rows are not square images");
    if (data.output_dim() < 2 || data.output_dim() > 256) throw ValidationError("dataset labels are not one-hot classes");
    if (data.X.minCoeff() < 0.0 || data.X.maxCoeff() > 1.0) throw ValidationError("image features must lie in [0, 1]");
    for (Eigen::Index i = 0; i < data.Y.rows(); ++i) {
        const auto row = data.Y.row(i);
        if ((row.array() == 1.0).count() != 1 || (row.array() == 0.0).count() != row.size() - 1)
            throw ValidationError("label row " + std::to_string(i) + " is not one-hot");
    }

    fs::create_directories(dir);
    {
        std::ofstream out(dir / kIdxImagesFile, std::ios::binary | std::ios::trunc);
        put_be32(out, kIdxImagesMagic);
        put_be32(out, static_cast<std::uint32_t>(n));
        put_be32(out, static_cast<std::uint32_t>(side));
        put_be32(out, static_cast<std::uint32_t>(side));
        std::vector<char> bytes(n * d);
        for (std::size_t i = 0; i < n * d; ++i)
            bytes[i] = static_cast<char>(static_cast<unsigned char>(std::lround(data.X.data()[i] * 255.0)));
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw std::runtime_error("failed writing " + (dir / kIdxImagesFile).string());
    }
    {
        std::ofstream out(dir / kIdxLabelsFile, std::ios::binary | std::ios::trunc);
        put_be32(out, kIdxLabelsMagic);
        put_be32(out, static_cast<std::uint32_t>(n));
        for (std::size_t i = 0; i < n; ++i) out.put(static_cast<char>(argmax_row(data.Y, static_cast<Eigen::Index>(i))));
        if (!out) throw std::runtime_error("failed writing " + (dir / kIdxLabelsFile).string());
    }
}

Dataset load_image_source(const ImageDatasetSpec& spec, std::size_t* skipped, std::vector<std::string>* class_names) {
    if (spec.source_path.empty() || !fs::exists(spec.source_path))
        throw ValidationError("image source '" + spec.source_path.string() + "' does not exist");
    if (spec.classes == 0 || spec.image_side == 0) throw ValidationError("image spec needs classes and image_side");

    if (is_idx_dir(spec.source_path)) {
        Dataset data = read_idx_pair(spec.source_path / kIdxImagesFile, spec.source_path / kIdxLabelsFile, spec.classes);
        if (data.input_dim() != spec.image_side * spec.image_side)
            throw ValidationError("IDX images are not " + std::to_string(spec.image_side) + "x" +
                                  std::to_string(spec.image_side));
        if (skipped) *skipped = 0;
        return data;
    }
    if (!fs::is_directory(spec.source_path))
        throw ValidationError("image source must be a class-per-directory tree or an IDX cache directory");

    std::vector<fs::path> class_dirs;
    for (const auto& entry : fs::directory_iterator(spec.source_path))
        if (entry.is_directory()) class_dirs.push_back(entry.path());
    std::sort(class_dirs.begin(), class_dirs.end());
    if (class_dirs.size() != spec.classes)
        throw ValidationError("expected " + std::to_string(spec.classes) + " class directories under " +
                              spec.source_path.string() + ", found " + std::to_string(class_dirs.size()));

    const std::size_t d = spec.image_side * spec.image_side;
    std::vector<std::uint8_t> pixels;
    std::vector<std::size_t> labels;
    std::size_t bad = 0;
    for (std::size_t c = 0; c < class_dirs.size(); ++c) {
        if (class_names) class_names->push_back(class_dirs[c].filename().string());
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(class_dirs[c]))
            if (entry.is_regular_file() && entry.path().extension() == ".png") files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            try {
                std::size_t w = 0, h = 0;
                auto img = decode_png_grey(f, w, h);
                if (w != spec.image_side || h != spec.image_side) {
                    ++bad;
                    continue;
                }
                pixels.insert(pixels.end(), img.begin(), img.end());
                labels.push_back(c);
            } catch (const std::runtime_error&) {
                ++bad;
            }
        }
    }
    if (labels.empty()) throw ValidationError("no readable images under " + spec.source_path.string());
    if (skipped) *skipped = bad;

    Dataset data;
    data.X.resize(static_cast<Eigen::Index>(labels.size()), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < pixels.size(); ++i) data.X.data()[i] = pixels[i] / 255.0;
    data.Y = Matrix::Zero(static_cast<Eigen::Index>(labels.size()), static_cast<Eigen::Index>(spec.classes));
    for (std::size_t i = 0; i < labels.size(); ++i)
        data.Y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(labels[i])) = 1.0;
    return data;
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& data, double fraction, std::uint64_t seed) {
    validate_dataset(data);
    if (!(fraction > 0.0 && fraction < 1.0)) throw ValidationError("split fraction must lie in (0, 1)");
    const std::size_t n = data.size();
    if (n < 2) throw ValidationError("cannot split fewer than two samples");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
    const auto cut = std::clamp<std::size_t>(static_cast<std::size_t>(std::floor(static_cast<double>(n) * fraction)),
                                             1, n - 1);
    return {data.subset({order.begin(), order.begin() + static_cast<std::ptrdiff_t>(cut)}),
            data.subset({order.begin() + static_cast<std::ptrdiff_t>(cut), order.end()})};
}

ImageDataset load_image_dataset(const ImageDatasetSpec& spec) {
    ImageDataset out;
    const Dataset all = load_image_source(spec, &out.skipped, &out.class_names);
    auto [train, val] = split_dataset(all, spec.split_fraction, spec.seed);
    out.train = std::move(train);
    out.validation = std::move(val);
    return out;
}

}  // namespace synrl
