#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fepcd/dbn.hpp"
#include "fepcd/matrix.hpp"
#include "fepcd/rbm.hpp"

namespace fepcd {

struct NormalizationStats {
    Vector min;
    Vector max;
};

/// m samples of d features, optional integer labels in [0, n_classes).
struct Dataset {
    Matrix features;
    std::optional<std::vector<int>> labels;
    std::optional<NormalizationStats> normalization;

    std::size_t size() const { return features.rows(); }
    std::size_t dim() const { return features.cols(); }
    // 1 + largest label; throws PreconditionError without labels.
    std::size_t n_classes() const;
    const std::vector<int>& require_labels() const;
};

// ---- MNIST IDX ----------------------------------------------------------

inline constexpr std::uint32_t kIdxImageMagic = 2051;
inline constexpr std::uint32_t kIdxLabelMagic = 2049;

struct IdxImages {
    std::uint32_t rows = 0;
    std::uint32_t cols = 0;
    std::vector<std::vector<std::uint8_t>> images;  // each rows*cols bytes
};

// Throws BadMagicError, TruncatedFileError, or FormatError (unreadable file).
IdxImages read_idx_images(const std::filesystem::path& path);
std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path& path);

void write_idx_images(const std::filesystem::path& path, const IdxImages& images);
void write_idx_labels(const std::filesystem::path& path, const std::vector<std::uint8_t>& labels);

// Pixels stay in 0..255 until minmax_normalize. Throws CountMismatchError
// when the two files disagree on the sample count.
Dataset load_mnist_idx(const std::filesystem::path& images,
                       const std::optional<std::filesystem::path>& labels = std::nullopt);

// ---- CSV ----------------------------------------------------------------

// Rows of `n_features` reals followed by an integral class label; the label
// minus `label_offset` must be >= 0. With n_features == 0 the width is taken
// from the first row. Blank lines are skipped. Throws CsvError naming the line.
Dataset load_labeled_csv(const std::filesystem::path& path, std::size_t n_features, int label_offset);

inline constexpr std::size_t kIsoletFeatures = 617;

// ISOLET: 617 features, label 1..26 mapped to 0..25.
Dataset load_isolet_csv(const std::filesystem::path& path);

// ---- preprocessing --------------------------------------------------------

// Per-column (x - min) / (max - min) with statistics taken from `ds`;
// constant columns map to 0.
Dataset minmax_normalize(const Dataset& ds);

// Applies existing statistics and clamps to [0, 1].
Dataset apply_normalization(const Dataset& ds, const NormalizationStats& stats);

// The first n rows after a shuffle drawn from (seed, streams::kSubset).
// n >= size() keeps everything (still shuffled).
Dataset take_subset(const Dataset& ds, std::size_t n, std::uint64_t seed);

// ---- model files ----------------------------------------------------------

inline constexpr int kModelFormatVersion = 1;

using Model = std::variant<RbmParams, LabeledRbm, DbnModel, FeedforwardNet>;

std::string model_to_json(const Model& model);
// Throws VersionError, SchemaError.
Model model_from_json(const std::string& text);

// Written to a sibling temporary and renamed into place.
void save_model(const std::filesystem::path& path, const Model& model);
Model load_model(const std::filesystem::path& path);

// Writes `content` to path via a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

// %.17g; parse_double rejects anything that does not fully parse to a finite value.
std::string format_double(double x);
double parse_double(const std::string& text);

}  // namespace fepcd
