#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace chaoslab {

enum class SamplingMethod { cholesky, circulant };

std::string to_string(SamplingMethod method);
SamplingMethod parse_sampling_method(const std::string& name);

/// Uniform grid k/n on [0, 1] for an fBm with Hurst index H.
struct FbmGrid {
  double hurst = 0.5;
  std::size_t n = 1;

  void validate() const;
};

/// Correlation of unit-spaced increments at lag r.
double rho(double hurst, long long r);
/// E[B_s B_t]
double cov_rh(double hurst, double s, double t);

/// <eps_t, del_{k/n}>
double eps_del(double hurst, std::size_t n, double t, std::size_t k);
/// alpha_{k,j} = <eps_{k/n}, del_{j/n}>
double grid_alpha(double hurst, std::size_t n, std::size_t k, std::size_t j);
/// beta_{k,j} = <del_{k/n}, del_{j/n}> = n^{-2H} rho(k - j)
double grid_beta(double hurst, std::size_t n, std::size_t k, std::size_t j);

enum class GridInnerKind { eps_del, alpha, beta };
/// Dispatches to the closed forms; for eps_del the first argument is t.
double grid_inner(double hurst, std::size_t n, GridInnerKind kind, double first, std::size_t second);

/// Increment covariance matrix n^{-2H} rho(i - j), i, j < n.
Eigen::MatrixXd increment_covariance(const FbmGrid& grid);

/// Eigenvalues of the circulant embedding (size 2n) of the increment
/// autocovariance, unclipped.
std::vector<double> embedding_spectrum(const FbmGrid& grid);

struct FbmPathBatch {
  FbmGrid grid;
  std::size_t m = 0;
  std::uint64_t seed = 0;
  /// Empty for batches not produced by a sampler (synthetic or loaded).
  std::optional<SamplingMethod> method;
  std::vector<double> levels;       // m x (n + 1), row-major, B_0 = 0
  std::vector<double> increments;   // m x n, row-major

  std::span<const double> path_levels(std::size_t i) const;
  std::span<const double> path_increments(std::size_t i) const;

  /// Batch from given increments (m x n); levels are cumulative sums.
  static FbmPathBatch from_increments(const FbmGrid& grid, std::size_t m, std::vector<double> increments);
};

/// Exact sampler of fBm increments on a grid. Path i is a pure function of
/// (seed, i): paths are produced in fixed chunks of kChunk.
class FbmSampler {
 public:
  static constexpr std::size_t kChunk = 64;
  static constexpr std::size_t kMaxCholeskyN = 4096;
  static constexpr std::size_t kCirculantThreshold = 512;

  explicit FbmSampler(const FbmGrid& grid, std::optional<SamplingMethod> method = std::nullopt);
  ~FbmSampler();
  FbmSampler(const FbmSampler&) = delete;
  FbmSampler& operator=(const FbmSampler&) = delete;

  const FbmGrid& grid() const { return grid_; }
  SamplingMethod method() const { return method_; }
  /// Lower Cholesky factor (cholesky method only).
  const Eigen::MatrixXd& cholesky_factor() const;

  using Visitor = std::function<void(std::size_t path, std::span<const double> levels,
                                     std::span<const double> increments)>;

  /// Calls visit once per path index in [0, m), in parallel over chunks.
  void for_each_path(std::uint64_t seed, std::size_t m, const Visitor& visit) const;

  /// Increments of the kChunk paths in chunk c (kChunk x n, row-major).
  void chunk_increments(std::uint64_t seed, std::size_t chunk, std::span<double> out) const;

  FbmPathBatch sample(std::uint64_t seed, std::size_t m) const;

 private:
  struct Circulant;

  FbmGrid grid_;
  SamplingMethod method_;
  Eigen::MatrixXd factor_;
  std::unique_ptr<Circulant> circulant_;
};

FbmPathBatch sample_paths(const FbmGrid& grid, std::size_t m, std::uint64_t seed,
                          std::optional<SamplingMethod> method = std::nullopt);

/// Binary path export: "FBMPATH1", u64 m, n, H bits, seed, then f64 levels.
void write_fbm_file(const std::filesystem::path& path, const FbmPathBatch& batch);
FbmPathBatch read_fbm_file(const std::filesystem::path& path);

}  // namespace chaoslab
