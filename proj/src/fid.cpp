#include "histmap/fid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

#include <Eigen/Eigenvalues>

#include "histmap/errors.hpp"

namespace histmap {

namespace fs = std::filesystem;

void FeatureSet::validate() const {
    if (count() < 2) throw ValidationError("feature set needs at least 2 samples, got " + std::to_string(count()));
    if (dim() < 1) throw ValidationError("feature set needs dimension >= 1");
    if (!data.allFinite()) throw ValidationError("feature set contains non-finite values");
}

GaussianSummary summarize_features(const FeatureSet& features) {
    features.validate();
    GaussianSummary s;
    s.count = features.count();
    s.mu = features.data.colwise().mean().transpose();
    const Eigen::MatrixXd centered = features.data.rowwise() - s.mu.transpose();
    s.sigma = (centered.transpose() * centered) / double(features.count() - 1);
    s.sigma = 0.5 * (s.sigma + s.sigma.transpose()).eval();
    return s;
}

Eigen::MatrixXd sqrtm_psd(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) throw ValidationError("sqrtm needs a square matrix");
    if (m.size() == 0) return m;
    if (!m.allFinite()) throw ValidationError("sqrtm input has non-finite entries");
    const double scale = m.cwiseAbs().maxCoeff();
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(scale, 1e-300))
        throw ValidationError("sqrtm input is not symmetric");
    if (scale == 0.0) return Eigen::MatrixXd::Zero(m.rows(), m.cols());

    const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
    if (solver.info() != Eigen::Success) throw ValidationError("eigendecomposition did not converge");
    Eigen::VectorXd lambda = solver.eigenvalues();
    const double floor = 1e-8 * lambda.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < lambda.size(); ++i) lambda[i] = lambda[i] < floor ? 0.0 : std::sqrt(lambda[i]);
    const Eigen::MatrixXd& q = solver.eigenvectors();
    Eigen::MatrixXd root = q * lambda.asDiagonal() * q.transpose();
    return 0.5 * (root + root.transpose());
}

double fid(const GaussianSummary& a, const GaussianSummary& b) {
    const auto d = a.mu.size();
    if (b.mu.size() != d || a.sigma.rows() != d || a.sigma.cols() != d || b.sigma.rows() != d || b.sigma.cols() != d)
        throw ValidationError("feature dimensions differ: " + std::to_string(a.mu.size()) + " vs " +
                              std::to_string(b.mu.size()));
    const double mean_term = (a.mu - b.mu).squaredNorm();
    const Eigen::MatrixXd ra = sqrtm_psd(a.sigma);
    Eigen::MatrixXd inner = ra * b.sigma * ra;
    inner = 0.5 * (inner + inner.transpose()).eval();
    const double cross = sqrtm_psd(inner).trace();
    return mean_term + a.sigma.trace() + b.sigma.trace() - 2.0 * cross;
}

double fid_clamped(const GaussianSummary& a, const GaussianSummary& b) { return std::max(0.0, fid(a, b)); }

namespace {

// Orientation sector of a gradient folded into [0, 180) degrees. Sector k
// covers [36k - 18, 36k + 18). Only comparisons against tangent constants are
// used so the result is platform-exact.
int orientation_sector(int gx, int gy) {
    constexpr double kTan18 = 0.32491969623290634;
    constexpr double kTan54 = 1.3763819204711736;
    if (gy < 0 || (gy == 0 && gx < 0)) {
        gx = -gx;
        gy = -gy;
    }
    const double ax = std::abs(double(gx));
    const double y = double(gy);
    if (gx > 0) {
        if (y < kTan18 * ax) return 0;
        if (y < kTan54 * ax) return 1;
        return 2;
    }
    if (gx == 0) return 3;
    if (y > kTan54 * ax) return 3;
    if (y > kTan18 * ax) return 4;
    return 0;
}

} // namespace

std::array<double, kToyEmbeddingDim> toy_embedder(const RasterImage& image) {
    std::array<double, kToyEmbeddingDim> v{};
    const int w = image.width();
    const int h = image.height();
    if (w == 0 || h == 0) return v;
    std::vector<int> luma(std::size_t(w) * h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const Rgb p = image.at(x, y);
            v[p.r >> 4] += 1.0;
            v[16 + (p.g >> 4)] += 1.0;
            v[32 + (p.b >> 4)] += 1.0;
            luma[std::size_t(y) * w + x] = (77 * p.r + 150 * p.g + 29 * p.b) >> 8;
        }
    auto L = [&](int x, int y) {
        x = std::clamp(x, 0, w - 1);
        y = std::clamp(y, 0, h - 1);
        return luma[std::size_t(y) * w + x];
    };
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const int gx = L(x + 1, y) - L(x - 1, y);
            const int gy = L(x, y + 1) - L(x, y - 1);
            if (gx == 0 && gy == 0) {
                v[48] += 1.0;
                continue;
            }
            const int mag2 = gx * gx + gy * gy;
            const int band = mag2 < 16 * 16 ? 0 : (mag2 < 64 * 64 ? 1 : 2);
            v[49 + 3 * orientation_sector(gx, gy) + band] += 1.0;
        }
    const double norm = 4.0 * double(w) * double(h);
    for (auto& x : v) x /= norm;
    return v;
}

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
    const unsigned char b[4] = {std::uint8_t(v), std::uint8_t(v >> 8), std::uint8_t(v >> 16), std::uint8_t(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(const unsigned char* b) {
    return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 | std::uint32_t(b[2]) << 16 | std::uint32_t(b[3]) << 24;
}

} // namespace

void write_feature_file(const fs::path& path, const FeatureSet& features) {
    if (features.count() > 0xFFFFFFFFLL || features.dim() > 0xFFFFFFFFLL)
        throw ValidationError("feature set too large for the FVEC format");
    if (!features.data.allFinite()) throw ValidationError("feature set contains non-finite values");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out.write("FVEC", 4);
    put_u32(out, std::uint32_t(features.count()));
    put_u32(out, std::uint32_t(features.dim()));
    std::vector<unsigned char> row(std::size_t(features.dim()) * 4);
    for (Eigen::Index i = 0; i < features.count(); ++i) {
        for (Eigen::Index j = 0; j < features.dim(); ++j) {
            const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(features.data(i, j)));
            for (int k = 0; k < 4; ++k) row[std::size_t(j) * 4 + k] = std::uint8_t(bits >> (8 * k));
        }
        out.write(reinterpret_cast<const char*>(row.data()), std::streamsize(row.size()));
    }
    out.close();
    if (!out) throw IoError("cannot write '" + path.string() + "'");
}

FeatureFileReader::FeatureFileReader(const fs::path& path) : in_(path, std::ios::binary) {
    if (!in_) throw IoError("cannot read '" + path.string() + "'");
    unsigned char header[12];
    in_.read(reinterpret_cast<char*>(header), 12);
    const auto got = static_cast<std::uint64_t>(in_.gcount());
    if (got >= 4 && std::memcmp(header, "FVEC", 4) != 0) throw FormatError("bad magic, expected FVEC", 0);
    if (got < 12) throw FormatError("truncated header", got);
    n_ = get_u32(header + 4);
    d_ = get_u32(header + 8);
    if (d_ == 0) throw FormatError("dimension must be positive", 8);
    offset_ = 12;
}

bool FeatureFileReader::next(std::span<float> row) {
    if (rows_read_ == n_) return false;
    if (row.size() != d_) throw ValidationError("row buffer size differs from file dimension");
    std::vector<unsigned char> buf(std::size_t(d_) * 4);
    in_.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size()));
    const auto got = static_cast<std::uint64_t>(in_.gcount());
    if (got != buf.size())
        throw FormatError("truncated payload in row " + std::to_string(rows_read_) + " of " + std::to_string(n_),
                          offset_ + got);
    for (std::uint32_t j = 0; j < d_; ++j) row[j] = std::bit_cast<float>(get_u32(buf.data() + std::size_t(j) * 4));
    offset_ += got;
    ++rows_read_;
    return true;
}

FeatureSet read_feature_file(const fs::path& path) {
    FeatureFileReader reader(path);
    FeatureSet fs;
    fs.data.resize(reader.count(), reader.dim());
    std::vector<float> row(reader.dim());
    for (std::uint32_t i = 0; reader.next(row); ++i)
        for (std::uint32_t j = 0; j < reader.dim(); ++j) fs.data(i, j) = row[j];
    return fs;
}

} // namespace histmap
