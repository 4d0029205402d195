#pragma once

#include "synrl/mlp.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace synrl {

struct BoundaryTaskSpec {
    std::size_t hidden_units = 100;
    std::size_t input_dim = 2;
    std::size_t n_points = 2000;
    double weight_lo = -1.0;
    double weight_hi = 1.0;
    double data_lo = -10.0;
    double data_hi = 10.0;
    std::uint64_t seed = 0;
    ActivationKind hidden_activation = ActivationKind::Tanh;
    // Regenerate when either class holds less than this fraction of the points.
    double min_class_fraction = 0.05;
    std::size_t max_attempts = 100;
};

struct BoundaryTask {
    Mlp target;    // input -> hidden -> 1, zero biases, Identity output
    Dataset data;  // labels are exactly +1 / -1
    std::size_t attempts = 1;
};

// Deterministic given spec.seed. Labels are +1 iff the target output is > 0.
BoundaryTask generate_boundary_task(const BoundaryTaskSpec& spec);

struct ImageDatasetSpec {
    // Either a directory tree <root>/<class>/*.png, or an IDX cache directory holding
    // images-idx3-ubyte and labels-idx1-ubyte.
    std::filesystem::path source_path;
    std::size_t image_side = 28;
    std::size_t classes = 10;
    double split_fraction = 0.75;
    std::uint64_t seed = 0;
};

struct ImageDataset {
    Dataset train;
    Dataset validation;
    std::size_t skipped = 0;  // unreadable or wrongly sized images
    std::vector<std::string> class_names;
};

// Canonical order (class, then filename), seeded shuffle, then split.
ImageDataset load_image_dataset(const ImageDatasetSpec& spec);

// Loads every image in canonical order without splitting.
Dataset load_image_source(const ImageDatasetSpec& spec, std::size_t* skipped = nullptr,
                          std::vector<std::string>* class_names = nullptr);

// Seeded permutation then a cut at floor(N * fraction); both sides keep at least one row.
std::pair<Dataset, Dataset> split_dataset(const Dataset& data, double fraction, std::uint64_t seed);

inline constexpr const char* kIdxImagesFile = "images-idx3-ubyte";
inline constexpr const char* kIdxLabelsFile = "labels-idx1-ubyte";

// Writes the two IDX files into `dir` (created if needed). Pixels are rounded back
// to bytes, labels are the one-hot argmax.
void export_idx_cache(const Dataset& data, const std::filesystem::path& dir);

// Reads an IDX pair into a [0,1]-scaled dataset with `classes`-wide one-hot labels.
Dataset read_idx_pair(const std::filesystem::path& images, const std::filesystem::path& labels,
                      std::size_t classes);

// Decodes one PNG into 8-bit greyscale, row-major. Throws on any decode failure.
std::vector<std::uint8_t> decode_png_grey(const std::filesystem::path& file, std::size_t& width,
                                          std::size_t& height);

// Encodes 8-bit greyscale as PNG; used to build fixture trees.
void write_png_grey(const std::filesystem::path& file, const std::vector<std::uint8_t>& pixels, std::size_t width,
                    std::size_t height);

}  // namespace synrl
