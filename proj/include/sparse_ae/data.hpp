#ifndef SPARSE_AE_DATA_HPP
#define SPARSE_AE_DATA_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "numerics.hpp"

namespace sparse_ae {

enum class Provenance { MNIST, CIFAR10_PATCHES, SYNTHETIC, STROKES, RAW };

inline std::string to_string(Provenance p) {
    switch (p) {
        case Provenance::MNIST: return "MNIST";
        case Provenance::CIFAR10_PATCHES: return "CIFAR10_PATCHES";
        case Provenance::SYNTHETIC: return "SYNTHETIC";
        case Provenance::STROKES: return "STROKES";
        case Provenance::RAW: return "RAW";
    }
    return "RAW";
}

struct Dataset {
    Matrix samples;  ///< N x n, one sample per row
    Provenance provenance = Provenance::RAW;

    Eigen::Index size() const { return samples.rows(); }
    Eigen::Index dim() const { return samples.cols(); }
};

/// Malformed binary input. `offset` is the byte position where parsing failed.
class FormatError : public std::runtime_error {
public:
    FormatError(const std::string& path, std::uint64_t offset, const std::string& what)
        : std::runtime_error(path + " @" + std::to_string(offset) + ": " + what), offset_(offset) {}
    std::uint64_t offset() const { return offset_; }

private:
    std::uint64_t offset_;
};

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;
inline constexpr Eigen::Index kMnistTrainImages = 50000;

namespace detail {

inline std::vector<unsigned char> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::uint32_t read_be32(const std::vector<unsigned char>& buf, std::size_t offset, const std::string& path) {
    if (offset + 4 > buf.size()) throw FormatError(path, offset, "truncated header");
    return (std::uint32_t{buf[offset]} << 24) | (std::uint32_t{buf[offset + 1]} << 16) |
           (std::uint32_t{buf[offset + 2]} << 8) | std::uint32_t{buf[offset + 3]};
}

inline void write_be32(std::ofstream& out, std::uint32_t v) {
    const std::array<char, 4> b = {static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8),
                                   static_cast<char>(v)};
    out.write(b.data(), 4);
}

}  // namespace detail

/**
 * Reads a big-endian IDX image file (magic 0x00000803) and scales pixels to
 * [0, 1]. Keeps at most `max_images` images. When a label file is given its
 * magic and count are validated; labels are not used.
 */
inline Dataset load_mnist_idx(const std::filesystem::path& images_path,
                              const std::optional<std::filesystem::path>& labels_path = std::nullopt,
                              Eigen::Index max_images = kMnistTrainImages) {
    const std::string path = images_path.string();
    const auto buf = detail::read_file(images_path);
    const std::uint32_t magic = detail::read_be32(buf, 0, path);
    if (magic != kIdxImageMagic) {
        char hex[16];
        std::snprintf(hex, sizeof hex, "0x%08x", magic);
        throw FormatError(path, 0, std::string("bad IDX image magic ") + hex + " (expected 0x00000803)");
    }
    const std::uint32_t count = detail::read_be32(buf, 4, path);
    const std::uint32_t rows = detail::read_be32(buf, 8, path);
    const std::uint32_t cols = detail::read_be32(buf, 12, path);
    const std::size_t pixels = std::size_t{rows} * cols;
    const std::size_t needed = 16 + std::size_t{count} * pixels;
    if (buf.size() < needed)
        throw FormatError(path, buf.size(),
                          "truncated pixel data: need " + std::to_string(needed) + " bytes, have " +
                              std::to_string(buf.size()));
    if (count == 0 || pixels == 0) throw FormatError(path, 4, "empty image set");

    if (labels_path) {
        const std::string lpath = labels_path->string();
        const auto lbuf = detail::read_file(*labels_path);
        if (detail::read_be32(lbuf, 0, lpath) != kIdxLabelMagic)
            throw FormatError(lpath, 0, "bad IDX label magic (expected 0x00000801)");
        const std::uint32_t lcount = detail::read_be32(lbuf, 4, lpath);
        if (lcount != count) throw FormatError(lpath, 4, "label count does not match image count");
        if (lbuf.size() < 8 + std::size_t{lcount}) throw FormatError(lpath, lbuf.size(), "truncated labels");
    }

    const Eigen::Index keep = std::min<Eigen::Index>(count, max_images);
    Dataset ds;
    ds.provenance = Provenance::MNIST;
    ds.samples.resize(keep, static_cast<Eigen::Index>(pixels));
    for (Eigen::Index i = 0; i < ds.samples.size(); ++i) ds.samples.data()[i] = buf[16 + i] / 255.0;
    return ds;
}

/// Writes raw bytes as an IDX image file; counterpart of load_mnist_idx.
inline void write_mnist_idx(const std::filesystem::path& path, std::uint32_t count, std::uint32_t rows,
                            std::uint32_t cols, const std::vector<unsigned char>& pixels) {
    if (pixels.size() != std::size_t{count} * rows * cols)
        throw std::invalid_argument("write_mnist_idx: pixel count mismatch");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    detail::write_be32(out, kIdxImageMagic);
    detail::write_be32(out, count);
    detail::write_be32(out, rows);
    detail::write_be32(out, cols);
    out.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
}

inline constexpr std::size_t kCifarSide = 32;
inline constexpr std::size_t kCifarPlane = kCifarSide * kCifarSide;
inline constexpr std::size_t kCifarRecord = 1 + 3 * kCifarPlane;

/**
 * Random square patches from CIFAR-10 binary batches (records of one label
 * byte followed by R, G and B planes of 32x32 bytes). Each patch picks a
 * uniform image and a uniform top-left offset. Output layout per row is
 * channel-planar, n = 3 * patch^2, scaled to [0, 1].
 */
inline Dataset load_cifar10_patches(const std::vector<std::filesystem::path>& bin_paths, std::size_t patch,
                                    Eigen::Index num, Rng& rng) {
    if (patch == 0 || patch > kCifarSide) throw std::invalid_argument("patch size must be in [1, 32]");
    if (num < 1) throw std::invalid_argument("need at least one patch");
    std::vector<unsigned char> all;
    for (const auto& p : bin_paths) {
        auto buf = detail::read_file(p);
        if (buf.empty() || buf.size() % kCifarRecord != 0)
            throw FormatError(p.string(), buf.size() - buf.size() % kCifarRecord,
                              "file length " + std::to_string(buf.size()) + " is not a multiple of 3073");
        all.insert(all.end(), buf.begin(), buf.end());
    }
    if (all.empty()) throw std::invalid_argument("no CIFAR-10 batch files given");
    const std::size_t images = all.size() / kCifarRecord;
    const std::size_t span = kCifarSide - patch + 1;

    Dataset ds;
    ds.provenance = Provenance::CIFAR10_PATCHES;
    ds.samples.resize(num, static_cast<Eigen::Index>(3 * patch * patch));
    for (Eigen::Index k = 0; k < num; ++k) {
        const std::size_t img = rng.index(images);
        const std::size_t oy = rng.index(span);
        const std::size_t ox = rng.index(span);
        const unsigned char* base = all.data() + img * kCifarRecord + 1;
        Eigen::Index col = 0;
        for (std::size_t c = 0; c < 3; ++c)
            for (std::size_t y = 0; y < patch; ++y)
                for (std::size_t x = 0; x < patch; ++x)
                    ds.samples(k, col++) = base[c * kCifarPlane + (oy + y) * kCifarSide + ox + x] / 255.0;
    }
    return ds;
}

enum class StandardizeMode { PerSample, PerFeature };

/**
 * x <- (x - mean) / (std + std_floor) with population std. PerSample
 * normalizes each row, PerFeature each column. A constant slice with
 * std + std_floor == 0 maps to zeros.
 */
inline Dataset standardize(Dataset data, double std_floor, StandardizeMode mode = StandardizeMode::PerSample) {
    if (!(std_floor >= 0.0)) throw std::invalid_argument("standardize: std_floor must be >= 0");
    auto normalize = [std_floor](auto&& slice) {
        const double count = static_cast<double>(slice.size());
        const double mean = slice.sum() / count;
        slice.array() -= mean;
        const double sd = std::sqrt(slice.squaredNorm() / count);
        const double denom = sd + std_floor;
        if (denom == 0.0)
            slice.setZero();
        else
            slice /= denom;
    };
    if (mode == StandardizeMode::PerSample) {
        for (Eigen::Index i = 0; i < data.samples.rows(); ++i) normalize(data.samples.row(i));
    } else {
        for (Eigen::Index j = 0; j < data.samples.cols(); ++j) normalize(data.samples.col(j));
    }
    return data;
}

/**
 * N x n Gaussian sample transformed to zero sample mean and identity sample
 * covariance (population convention, 1/N) via the symmetric inverse square
 * root of its covariance. Ill-conditioned draws are redrawn.
 */
inline Dataset synth_whitened_gaussian(Eigen::Index n, Eigen::Index count, Rng& rng) {
    if (n < 1 || count <= n) throw std::invalid_argument("synth_whitened_gaussian: need N > n >= 1");
    for (int attempt = 0; attempt < 16; ++attempt) {
        Matrix z = rng.normal_matrix(count, n);
        z.rowwise() -= z.colwise().mean();
        const Eigen::MatrixXd cov = (z.transpose() * z) / static_cast<double>(count);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
        const Eigen::VectorXd& lambda = eig.eigenvalues();
        if (!(lambda.minCoeff() > 1e-10 * lambda.maxCoeff())) continue;
        const Eigen::MatrixXd inv_sqrt =
            eig.eigenvectors() * lambda.cwiseSqrt().cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
        Dataset ds;
        ds.provenance = Provenance::SYNTHETIC;
        ds.samples = z * inv_sqrt;
        ds.samples.rowwise() -= ds.samples.colwise().mean();
        return ds;
    }
    throw std::runtime_error("synth_whitened_gaussian: covariance stayed singular");
}

namespace detail {

inline double point_segment_distance(double px, double py, double ax, double ay, double bx, double by) {
    const double dx = bx - ax;
    const double dy = by - ay;
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0.0 ? ((px - ax) * dx + (py - ay) * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double cx = ax + t * dx - px;
    const double cy = ay + t * dy - py;
    return std::sqrt(cx * cx + cy * cy);
}

}  // namespace detail

/**
 * Handwriting-like surrogate images: 1-3 thick anti-aliased quadratic Bezier
 * strokes inside the central 20x20 box of a side x side canvas, blank
 * background, intensities in [0, 1]. Stands in for MNIST where the real files
 * are unavailable; the statistics it shares with MNIST are a sparse positive
 * foreground on a uniform background.
 */
inline Dataset synth_strokes(Eigen::Index count, Rng& rng, int side = 28) {
    if (count < 1 || side < 8) throw std::invalid_argument("synth_strokes: need count >= 1 and side >= 8");
    constexpr int kSegments = 24;
    const double margin = (side - 20) / 2.0;
    Dataset ds;
    ds.provenance = Provenance::STROKES;
    ds.samples = Matrix::Zero(count, static_cast<Eigen::Index>(side) * side);
    std::vector<std::array<double, 4>> segments;
    for (Eigen::Index k = 0; k < count; ++k) {
        const int strokes = 1 + static_cast<int>(rng.index(3));
        segments.clear();
        std::vector<double> radii;
        for (int s = 0; s < strokes; ++s) {
            std::array<double, 6> ctrl{};
            for (double& c : ctrl) c = margin + rng.uniform(0.0, 20.0);
            const double radius = rng.uniform(0.9, 1.8);
            double px = ctrl[0], py = ctrl[1];
            for (int t = 1; t <= kSegments; ++t) {
                const double u = static_cast<double>(t) / kSegments;
                const double w0 = (1 - u) * (1 - u), w1 = 2 * u * (1 - u), w2 = u * u;
                const double qx = w0 * ctrl[0] + w1 * ctrl[2] + w2 * ctrl[4];
                const double qy = w0 * ctrl[1] + w1 * ctrl[3] + w2 * ctrl[5];
                segments.push_back({px, py, qx, qy});
                radii.push_back(radius);
                px = qx;
                py = qy;
            }
        }
        for (int y = 0; y < side; ++y) {
            for (int x = 0; x < side; ++x) {
                double v = 0.0;
                for (std::size_t g = 0; g < segments.size(); ++g) {
                    const auto& sg = segments[g];
                    const double d = detail::point_segment_distance(x + 0.5, y + 0.5, sg[0], sg[1], sg[2], sg[3]);
                    v = std::max(v, std::clamp(radii[g] + 0.5 - d, 0.0, 1.0));
                    if (v >= 1.0) break;
                }
                ds.samples(k, static_cast<Eigen::Index>(y) * side + x) = v;
            }
        }
    }
    return ds;
}

/// First `count` rows of a dataset (or all of them when count exceeds N).
inline Dataset take_rows(const Dataset& data, Eigen::Index count) {
    Dataset out;
    out.provenance = data.provenance;
    out.samples = data.samples.topRows(std::min(count, data.size()));
    return out;
}

}  // namespace sparse_ae

#endif  // SPARSE_AE_DATA_HPP
