#include "chaoslab/fbm.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include "chaoslab/parallel.hpp"
#include "chaoslab/rng.hpp"

namespace chaoslab {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwBuffer {
  explicit FftwBuffer(std::size_t size)
      : data(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * size))) {
    if (!data) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  fftw_complex* data;
};

fftw_plan make_plan(std::size_t size, fftw_complex* in, fftw_complex* out) {
  std::lock_guard lock(planner_mutex());
  fftw_plan p = fftw_plan_dft_1d(static_cast<int>(size), in, out, FFTW_FORWARD, FFTW_ESTIMATE);
  if (!p) throw std::runtime_error("fft: plan creation failed");
  return p;
}

void destroy_plan(fftw_plan p) {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(p);
}

std::vector<double> circulant_row(const FbmGrid& grid) {
  const std::size_t n = grid.n;
  const double scale = std::pow(static_cast<double>(n), -2.0 * grid.hurst);
  std::vector<double> row(2 * n);
  for (std::size_t k = 0; k <= n; ++k) row[k] = scale * rho(grid.hurst, static_cast<long long>(k));
  for (std::size_t k = n + 1; k < 2 * n; ++k) row[k] = row[2 * n - k];
  return row;
}

std::uint64_t to_le(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  std::uint64_t r = 0;
  for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffULL) << (8 * (7 - i));
  return r;
}

constexpr char kMagic[8] = {'F', 'B', 'M', 'P', 'A', 'T', 'H', '1'};

void write_u64(std::ostream& os, std::uint64_t v) {
  const std::uint64_t le = to_le(v);
  os.write(reinterpret_cast<const char*>(&le), sizeof le);
}

std::uint64_t read_u64(std::istream& is) {
  std::uint64_t le = 0;
  is.read(reinterpret_cast<char*>(&le), sizeof le);
  if (!is) throw std::runtime_error("fbm file: truncated header");
  return to_le(le);
}

}  // namespace

std::string to_string(SamplingMethod method) {
  return method == SamplingMethod::cholesky ? "cholesky" : "circulant";
}

SamplingMethod parse_sampling_method(const std::string& name) {
  if (name == "cholesky") return SamplingMethod::cholesky;
  if (name == "circulant") return SamplingMethod::circulant;
  throw std::invalid_argument("unknown sampling method '" + name + "'");
}

void FbmGrid::validate() const {
  if (!(hurst > 0.0 && hurst < 1.0)) throw std::invalid_argument("grid: Hurst index must lie in (0, 1)");
  if (n < 1) throw std::invalid_argument("grid: n must be positive");
}

double rho(double hurst, long long r) {
  const double h2 = 2.0 * hurst;
  const double a = std::abs(static_cast<double>(r));
  if (a < 32.0) return 0.5 * (std::pow(a + 1.0, h2) - 2.0 * std::pow(a, h2) + std::pow(std::abs(a - 1.0), h2));
  // Second difference expanded in 1/r to avoid cancellation at long lags.
  const double x2 = 1.0 / (a * a);
  double coef = 1.0;  // binomial(2H, 2k)
  double xp = 1.0;
  double sum = 0.0;
  for (int k = 0; k < 60; ++k) {
    coef *= (h2 - 2.0 * k) * (h2 - 2.0 * k - 1.0) / ((2.0 * k + 1.0) * (2.0 * k + 2.0));
    xp *= x2;
    const double term = coef * xp;
    sum += term;
    if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
  }
  return std::pow(a, h2) * sum;
}

double cov_rh(double hurst, double s, double t) {
  const double h2 = 2.0 * hurst;
  return 0.5 * (std::pow(t, h2) + std::pow(s, h2) - std::pow(std::abs(t - s), h2));
}

double eps_del(double hurst, std::size_t n, double t, std::size_t k) {
  if (k >= n) throw std::out_of_range("grid index out of range");
  const double h2 = 2.0 * hurst;
  const double nn = static_cast<double>(n);
  const double kk = static_cast<double>(k);
  const double nt = nn * t;
  return (std::pow(kk + 1.0, h2) - std::pow(kk, h2) - std::pow(std::abs(kk + 1.0 - nt), h2) +
          std::pow(std::abs(kk - nt), h2)) /
         (2.0 * std::pow(nn, h2));
}

double grid_alpha(double hurst, std::size_t n, std::size_t k, std::size_t j) {
  if (k >= n || j >= n) throw std::out_of_range("grid index out of range");
  return eps_del(hurst, n, static_cast<double>(k) / static_cast<double>(n), j);
}

double grid_beta(double hurst, std::size_t n, std::size_t k, std::size_t j) {
  if (k >= n || j >= n) throw std::out_of_range("grid index out of range");
  return std::pow(static_cast<double>(n), -2.0 * hurst) *
         rho(hurst, static_cast<long long>(k) - static_cast<long long>(j));
}

double grid_inner(double hurst, std::size_t n, GridInnerKind kind, double first, std::size_t second) {
  switch (kind) {
    case GridInnerKind::eps_del:
      return eps_del(hurst, n, first, second);
    case GridInnerKind::alpha:
      if (first < 0.0) throw std::out_of_range("grid index out of range");
      return grid_alpha(hurst, n, static_cast<std::size_t>(first), second);
    case GridInnerKind::beta:
      if (first < 0.0) throw std::out_of_range("grid index out of range");
      return grid_beta(hurst, n, static_cast<std::size_t>(first), second);
  }
  throw std::invalid_argument("grid_inner: unknown kind");
}

Eigen::MatrixXd increment_covariance(const FbmGrid& grid) {
  grid.validate();
  const auto n = static_cast<Eigen::Index>(grid.n);
  const double scale = std::pow(static_cast<double>(grid.n), -2.0 * grid.hurst);
  std::vector<double> r(grid.n);
  for (std::size_t k = 0; k < grid.n; ++k) r[k] = scale * rho(grid.hurst, static_cast<long long>(k));
  Eigen::MatrixXd c(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) c(i, j) = r[static_cast<std::size_t>(std::abs(i - j))];
  }
  return c;
}

std::vector<double> embedding_spectrum(const FbmGrid& grid) {
  grid.validate();
  const std::vector<double> row = circulant_row(grid);
  const std::size_t size = row.size();
  FftwBuffer in(size), out(size);
  fftw_plan plan = make_plan(size, in.data, out.data);
  for (std::size_t k = 0; k < size; ++k) {
    in.data[k][0] = row[k];
    in.data[k][1] = 0.0;
  }
  fftw_execute(plan);
  destroy_plan(plan);
  std::vector<double> eig(size);
  for (std::size_t k = 0; k < size; ++k) eig[k] = out.data[k][0];
  return eig;
}

std::span<const double> FbmPathBatch::path_levels(std::size_t i) const {
  if (i >= m) throw std::out_of_range("batch: path index out of range");
  return {levels.data() + i * (grid.n + 1), grid.n + 1};
}

std::span<const double> FbmPathBatch::path_increments(std::size_t i) const {
  if (i >= m) throw std::out_of_range("batch: path index out of range");
  return {increments.data() + i * grid.n, grid.n};
}

FbmPathBatch FbmPathBatch::from_increments(const FbmGrid& grid, std::size_t m, std::vector<double> increments) {
  grid.validate();
  if (increments.size() != m * grid.n) throw std::invalid_argument("dimension: increments must be m x n");
  FbmPathBatch b;
  b.grid = grid;
  b.m = m;
  b.increments = std::move(increments);
  b.levels.assign(m * (grid.n + 1), 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < grid.n; ++k) {
      acc += b.increments[i * grid.n + k];
      b.levels[i * (grid.n + 1) + k + 1] = acc;
    }
  }
  return b;
}

struct FbmSampler::Circulant {
  std::size_t size = 0;
  std::vector<double> amplitude;  // sqrt(lambda / M)
  fftw_plan plan = nullptr;
  ~Circulant() {
    if (plan) destroy_plan(plan);
  }
};

FbmSampler::FbmSampler(const FbmGrid& grid, std::optional<SamplingMethod> method) : grid_(grid) {
  grid_.validate();
  method_ = method.value_or(grid_.n > kCirculantThreshold ? SamplingMethod::circulant : SamplingMethod::cholesky);
  if (method_ == SamplingMethod::cholesky) {
    if (grid_.n > kMaxCholeskyN) {
      throw std::domain_error("cholesky sampling is limited to n <= 4096; use the circulant method");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(increment_covariance(grid_));
    if (llt.info() != Eigen::Success) throw std::runtime_error("cholesky: increment covariance is not positive definite");
    factor_ = llt.matrixL();
  } else {
    std::vector<double> eig = embedding_spectrum(grid_);
    const double top = *std::max_element(eig.begin(), eig.end());
    const double low = *std::min_element(eig.begin(), eig.end());
    if (low < -1e-8 * top) {
      std::ostringstream msg;
      msg << "circulant embedding failed: most negative eigenvalue " << low;
      throw std::runtime_error(msg.str());
    }
    circulant_ = std::make_unique<Circulant>();
    circulant_->size = eig.size();
    circulant_->amplitude.resize(eig.size());
    const double inv = 1.0 / static_cast<double>(eig.size());
    for (std::size_t k = 0; k < eig.size(); ++k) circulant_->amplitude[k] = std::sqrt(std::max(eig[k], 0.0) * inv);
    FftwBuffer in(eig.size()), out(eig.size());
    circulant_->plan = make_plan(eig.size(), in.data, out.data);
  }
}

FbmSampler::~FbmSampler() = default;

const Eigen::MatrixXd& FbmSampler::cholesky_factor() const {
  if (method_ != SamplingMethod::cholesky) throw std::logic_error("sampler: no cholesky factor for the circulant method");
  return factor_;
}

void FbmSampler::chunk_increments(std::uint64_t seed, std::size_t chunk, std::span<double> out) const {
  const std::size_t n = grid_.n;
  if (out.size() != kChunk * n) throw std::invalid_argument("dimension: chunk buffer must be kChunk x n");
  if (method_ == SamplingMethod::cholesky) {
    Eigen::MatrixXd z(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(kChunk));
    for (std::size_t c = 0; c < kChunk; ++c) {
      NormalStream normal(seed, chunk * kChunk + c, StreamTag::path);
      for (std::size_t k = 0; k < n; ++k) z(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c)) = normal();
    }
    Eigen::Map<Eigen::MatrixXd> x(out.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(kChunk));
    x.noalias() = factor_.triangularView<Eigen::Lower>() * z;
    return;
  }
  const std::size_t size = circulant_->size;
  FftwBuffer in(size), res(size);
  for (std::size_t pair = 0; pair < kChunk / 2; ++pair) {
    const std::size_t global_pair = chunk * (kChunk / 2) + pair;
    NormalStream normal(seed, global_pair, StreamTag::circulant_pair);
    for (std::size_t k = 0; k < size; ++k) {
      const double a = circulant_->amplitude[k];
      in.data[k][0] = a * normal();
      in.data[k][1] = a * normal();
    }
    fftw_execute_dft(circulant_->plan, in.data, res.data);
    double* re = out.data() + (2 * pair) * n;
    double* im = out.data() + (2 * pair + 1) * n;
    for (std::size_t k = 0; k < n; ++k) {
      re[k] = res.data[k][0];
      im[k] = res.data[k][1];
    }
  }
}

void FbmSampler::for_each_path(std::uint64_t seed, std::size_t m, const Visitor& visit) const {
  const std::size_t n = grid_.n;
  const std::size_t chunks = (m + kChunk - 1) / kChunk;
  parallel_for(chunks, [&](std::size_t c) {
    std::vector<double> inc(kChunk * n);
    std::vector<double> levels(n + 1);
    chunk_increments(seed, c, inc);
    const std::size_t first = c * kChunk;
    const std::size_t last = std::min(m, first + kChunk);
    for (std::size_t i = first; i < last; ++i) {
      const double* row = inc.data() + (i - first) * n;
      levels[0] = 0.0;
      for (std::size_t k = 0; k < n; ++k) levels[k + 1] = levels[k] + row[k];
      visit(i, levels, std::span<const double>(row, n));
    }
  });
}

FbmPathBatch FbmSampler::sample(std::uint64_t seed, std::size_t m) const {
  const std::size_t n = grid_.n;
  FbmPathBatch b;
  b.grid = grid_;
  b.m = m;
  b.seed = seed;
  b.method = method_;
  b.levels.assign(m * (n + 1), 0.0);
  b.increments.assign(m * n, 0.0);
  for_each_path(seed, m, [&](std::size_t i, std::span<const double> levels, std::span<const double> inc) {
    std::copy(levels.begin(), levels.end(), b.levels.begin() + static_cast<std::ptrdiff_t>(i * (n + 1)));
    std::copy(inc.begin(), inc.end(), b.increments.begin() + static_cast<std::ptrdiff_t>(i * n));
  });
  return b;
}

FbmPathBatch sample_paths(const FbmGrid& grid, std::size_t m, std::uint64_t seed,
                          std::optional<SamplingMethod> method) {
  return FbmSampler(grid, method).sample(seed, m);
}

void write_fbm_file(const std::filesystem::path& path, const FbmPathBatch& batch) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os.write(kMagic, sizeof kMagic);
  write_u64(os, batch.m);
  write_u64(os, batch.grid.n);
  write_u64(os, std::bit_cast<std::uint64_t>(batch.grid.hurst));
  write_u64(os, batch.seed);
  for (double v : batch.levels) write_u64(os, std::bit_cast<std::uint64_t>(v));
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

FbmPathBatch read_fbm_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  char magic[8];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw std::runtime_error("fbm file: bad magic");
  const std::uint64_t m = read_u64(is);
  const std::uint64_t n = read_u64(is);
  FbmGrid grid{std::bit_cast<double>(read_u64(is)), static_cast<std::size_t>(n)};
  const std::uint64_t seed = read_u64(is);
  grid.validate();
  FbmPathBatch b;
  b.grid = grid;
  b.m = static_cast<std::size_t>(m);
  b.seed = seed;
  b.levels.resize(m * (n + 1));
  b.increments.resize(m * n);
  for (double& v : b.levels) v = std::bit_cast<double>(read_u64(is));
  for (std::uint64_t i = 0; i < m; ++i) {
    const double* row = b.levels.data() + i * (n + 1);
    for (std::uint64_t k = 0; k < n; ++k) b.increments[i * n + k] = row[k + 1] - row[k];
  }
  return b;
}

}  // namespace chaoslab
