#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "histmap/raster.hpp"

namespace histmap {

/// n samples by d features, finite values, n >= 2.
struct FeatureSet {
    Eigen::MatrixXd data;

    Eigen::Index count() const { return data.rows(); }
    Eigen::Index dim() const { return data.cols(); }
    void validate() const;
};

struct GaussianSummary {
    Eigen::VectorXd mu;
    Eigen::MatrixXd sigma;
    Eigen::Index count = 0; ///< samples the summary was computed from
};

/// Column means and unbiased sample covariance (divisor n - 1), symmetrized.
GaussianSummary summarize_features(const FeatureSet& features);

/// Principal square root of a symmetric positive semidefinite matrix via
/// eigendecomposition. Eigenvalues below 1e-8 * max|lambda| (including
/// negative round-off) are clamped to zero. Throws ValidationError when the
/// input is not symmetric within 1e-10 relative to its largest entry.
Eigen::MatrixXd sqrtm_psd(const Eigen::MatrixXd& m);

/// Frechet distance between two Gaussians:
/// |mu_a - mu_b|^2 + Tr(S_a + S_b - 2 sqrtm(S_a^1/2 S_b S_a^1/2)).
/// The raw value may dip below zero by round-off; see fid_clamped().
double fid(const GaussianSummary& a, const GaussianSummary& b);
double fid_clamped(const GaussianSummary& a, const GaussianSummary& b);

/// 64-d deterministic image descriptor standing in for network embeddings.
///
/// Bins 0..47: 16-bin histograms of R, G, B (value >> 4).
/// Bins 48..63: gradients of luma L = (77R + 150G + 29B) >> 8 by central
/// differences with replicated borders. Bin 48 counts zero gradients; bins
/// 49 + 3*s + m hold sector s of 5 unsigned-orientation sectors centered on
/// 0, 36, 72, 108, 144 degrees and magnitude band m (|g| < 16, < 64, else).
/// Every pixel adds 1 to one bin per group; the vector is divided by 4 * pixels.
inline constexpr int kToyEmbeddingDim = 64;
std::array<double, kToyEmbeddingDim> toy_embedder(const RasterImage& image);

// FVEC interchange: "FVEC", u32 LE n, u32 LE d, then n*d f32 LE row-major.

void write_feature_file(const std::filesystem::path& path, const FeatureSet& features);
FeatureSet read_feature_file(const std::filesystem::path& path);

/// Row-at-a-time reader for files too large to hold as doubles.
class FeatureFileReader {
public:
    explicit FeatureFileReader(const std::filesystem::path& path);

    std::uint32_t count() const { return n_; }
    std::uint32_t dim() const { return d_; }

    /// Reads the next row into `row` (size dim()); false after the last row.
    /// Throws FormatError on truncation.
    bool next(std::span<float> row);

private:
    std::ifstream in_;
    std::uint32_t n_ = 0;
    std::uint32_t d_ = 0;
    std::uint32_t rows_read_ = 0;
    std::uint64_t offset_ = 0;
};

} // namespace histmap
