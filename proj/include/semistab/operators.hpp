#pragma once

// The model zoo. Every model is a concrete operator A on a finite coordinate
// space; T(t) = exp(-tA) and R(lambda, A) = (lambda - A)^{-1}.
//
//   dense-matrix     generic n x n complex matrix
//   diagonal-symbol  multiplication by phi(s) = s^{-a} + i s^b on a geometric s-grid,
//                    or by an explicit list of symbol values
//   jordan-sum       direct sum over n0 <= n <= N of (gamma - i n) I - S_{m(n)}
//   operator-matrix  s I - S_n for s in (0,1), either as a supremum over s or on a grid

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "semistab/contour.hpp"
#include "semistab/errors.hpp"
#include "semistab/linalg.hpp"
#include "semistab/numcore.hpp"

namespace semistab {

enum class ModelKind { dense_matrix, diagonal_symbol, jordan_sum, operator_matrix };

inline std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::dense_matrix: return "dense-matrix";
    case ModelKind::diagonal_symbol: return "diagonal-symbol";
    case ModelKind::jordan_sum: return "jordan-sum";
    case ModelKind::operator_matrix: return "operator-matrix";
  }
  return "?";
}

struct ModelMetadata {
  bool injective = true;
  bool invertible = true;
  bool sectorial = true;
  double sectorial_angle = 0.0;
  std::optional<std::pair<double, double>> known_growth;  // (alpha, beta)
};

/// Relative distance to the spectrum below which resolvents are refused.
inline constexpr double kSpectrumTolerance = 1e-10;

// ---------------------------------------------------------------------------
// Specs

struct DenseMatrixSpec {
  CMatrix entries;
};

struct DiagonalSymbolSpec {
  double a = 1.0;
  double b = 0.5;
  LogGrid grid = geometric_grid(1.0 + 1e-9, 1e8, 4096);
  bool sobolev = true;
  /// When set, the model multiplies by these values and ignores (a, b, grid).
  std::optional<std::vector<cplx>> values;

  static DiagonalSymbolSpec from_values(std::vector<cplx> v) {
    DiagonalSymbolSpec s;
    s.values = std::move(v);
    s.sobolev = false;
    return s;
  }
};

struct JordanSumSpec {
  double gamma = 0.5;
  double delta = 0.9;
  long long N = 10000;
};

enum class OperatorMatrixRepresentation { analytic_supremum, grid };

struct OperatorMatrixSpec {
  int n = 3;
  OperatorMatrixRepresentation representation = OperatorMatrixRepresentation::analytic_supremum;
  std::size_t grid_count = 256;
};

// ---------------------------------------------------------------------------
// Maps whose norms can be requested

struct SemigroupMap {
  double t = 0.0;
};
/// R(lambda, A) = (lambda - A)^{-1}.
struct ResolventMap {
  cplx lambda;
};
/// T(t) A^sigma (1 + A)^{-sigma-tau}.
struct FractionalSemigroupMap {
  double t = 0.0;
  double sigma = 0.0;
  double tau = 0.0;
};
/// T(t) A^power.
struct PowerSemigroupMap {
  double t = 0.0;
  int power = 0;
};

using NormMap = std::variant<SemigroupMap, ResolventMap, FractionalSemigroupMap, PowerSemigroupMap>;

struct NormResult {
  double value = 0.0;
  bool edge_dominated = false;  // supremum attained at a truncation edge
};

namespace detail {

inline void check_time(double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("time must be finite and >= 0");
}

inline void check_map(const NormMap& map) {
  std::visit(
      [](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (!std::is_same_v<M, ResolventMap>) check_time(m.t);
        if constexpr (std::is_same_v<M, FractionalSemigroupMap>) {
          if (m.sigma < 0 || m.tau < 0) throw DomainError("fractional indices must be >= 0");
        }
        if constexpr (std::is_same_v<M, PowerSemigroupMap>) {
          if (m.power < 0) throw DomainError("power must be >= 0");
        }
      },
      map);
}

/// Taylor jet at c of the scalar function that `map` applies to A.
inline Jet map_jet(const NormMap& map, cplx c, int degree) {
  return std::visit(
      [&](const auto& m) -> Jet {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, SemigroupMap>) {
          return jet_exp(-m.t, c, degree);
        } else if constexpr (std::is_same_v<M, ResolventMap>) {
          return jet_resolvent(m.lambda, c, degree);
        } else if constexpr (std::is_same_v<M, FractionalSemigroupMap>) {
          Jet j = jet_exp(-m.t, c, degree);
          if (m.sigma != 0.0) j = jet_mul(j, jet_pow(c, m.sigma, degree));
          if (m.sigma + m.tau != 0.0) j = jet_mul(j, jet_pow(1.0 + c, -m.sigma - m.tau, degree));
          return j;
        } else {
          return jet_mul(jet_exp(-m.t, c, degree), jet_pow(c, double(m.power), degree));
        }
      },
      map);
}

/// Maximizes f on [lo, hi] by golden-section search; returns the best value seen.
template <typename F>
double golden_max(F&& f, double lo, double hi, int iterations = 60) {
  constexpr double g = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = f(x1), f2 = f(x2);
  double best = std::max({f(lo), f(hi), f1, f2});
  for (int i = 0; i < iterations && b - a > 1e-15 * (std::abs(a) + std::abs(b)); ++i) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = f(x2);
      best = std::max(best, f2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = f(x1);
      best = std::max(best, f1);
    }
  }
  return best;
}

/// Largest spectral norm of f(c_k I - S_{m_k}) over candidate blocks, skipping
/// blocks whose coefficient-sum bound cannot beat the running maximum.
struct BlockCandidate {
  cplx center;
  int size;
};

inline std::pair<double, std::size_t> max_block_norm(const NormMap& map,
                                                     const std::vector<BlockCandidate>& blocks) {
  std::vector<Jet> jets(blocks.size());
  std::vector<double> bounds(blocks.size());
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    jets[i] = map_jet(map, blocks[i].center, blocks[i].size - 1);
    bounds[i] = toeplitz_norm_bound(jets[i], blocks[i].size);
  }
  std::vector<std::size_t> order(blocks.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return bounds[x] > bounds[y]; });
  double best = 0.0;
  std::size_t arg = order.empty() ? 0 : order.front();
  for (std::size_t i : order) {
    if (bounds[i] <= best) break;
    const double v = toeplitz_norm(jets[i], blocks[i].size);
    if (v > best) {
      best = v;
      arg = i;
    }
  }
  return {best, arg};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Dense matrices

class DenseModel {
 public:
  explicit DenseModel(DenseMatrixSpec spec) : A_(std::move(spec.entries)) {
    if (A_.rows() < 1 || A_.rows() != A_.cols()) throw ShapeError("dense model needs n x n, n >= 1");
    if (!A_.allFinite()) throw DomainError("dense model has non-finite entries");
    Eigen::ComplexEigenSolver<CMatrix> es(A_);
    if (es.info() != Eigen::Success) throw DomainError("eigen-decomposition failed");
    eig_ = es.eigenvalues();
    V_ = es.eigenvectors();
    Eigen::JacobiSVD<CMatrix> svd(V_);
    const auto& sv = svd.singularValues();
    cond_ = sv(sv.size() - 1) > 0 ? sv(0) / sv(sv.size() - 1) : kInf;
    diagonalizable_ = cond_ < 1e8;
    if (diagonalizable_) Vinv_ = V_.inverse();
    norm_ = spectral_norm(A_);
  }

  const CMatrix& matrix() const { return A_; }
  Eigen::Index dimension() const { return A_.rows(); }
  const CVector& eigenvalues() const { return eig_; }
  bool diagonalizable() const { return diagonalizable_; }
  double eigenvector_condition() const { return cond_; }
  double norm() const { return norm_; }

  double spectrum_distance(cplx z) const { return (eig_.array() - z).abs().minCoeff(); }

  /// f(A) = V f(D) V^{-1}; requires diagonalizable().
  template <typename F>
  CMatrix eigen_function(F&& f) const {
    if (!diagonalizable_) throw UnsupportedError("matrix is not (well) diagonalizable");
    CVector d(eig_.size());
    for (Eigen::Index i = 0; i < eig_.size(); ++i) d(i) = f(eig_(i));
    return V_ * d.asDiagonal() * Vinv_;
  }

  CMatrix semigroup(double t) const {
    detail::check_time(t);
    if (t == 0.0) return CMatrix::Identity(dimension(), dimension());
    return expm(-t * A_);
  }

  void check_resolvent_point(cplx lambda) const {
    const double d = spectrum_distance(lambda);
    const double scale = std::max({1.0, std::abs(lambda), norm_});
    if (!(d > kSpectrumTolerance * scale))
      throw NearSingularityError("resolvent of dense model", d);
  }

  CMatrix resolvent(cplx lambda) const {
    check_resolvent_point(lambda);
    const CMatrix M = lambda * CMatrix::Identity(dimension(), dimension()) - A_;
    return M.partialPivLu().inverse();
  }

  /// A^sigma (1 + A)^{-sigma-tau}.
  CMatrix phi(double sigma, double tau) const;

 private:
  CMatrix A_, V_, Vinv_;
  CVector eig_;
  double cond_ = 1.0;
  double norm_ = 0.0;
  bool diagonalizable_ = false;
};

// ---------------------------------------------------------------------------
// Diagonal symbols

class DiagonalSymbolModel {
 public:
  explicit DiagonalSymbolModel(DiagonalSymbolSpec spec) : spec_(std::move(spec)) {
    if (spec_.values) {
      if (spec_.values->empty()) throw ShapeError("diagonal model needs at least one value");
      values_ = *spec_.values;
      for (const cplx& v : values_)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
          throw DomainError("diagonal value is not finite");
    } else {
      if (!(spec_.a > 0.0)) throw DomainError("symbol exponent a must be > 0");
      if (!(spec_.b > 0.0 && spec_.b < 1.0)) throw DomainError("symbol exponent b must lie in (0,1)");
      if (spec_.a + spec_.b < 1.0) throw DomainError("symbol exponents need a + b >= 1");
      if (!(spec_.grid.start > 1.0)) throw DomainError("symbol grid must start above 1");
      nodes_ = spec_.grid.nodes;
      values_.reserve(nodes_.size());
      for (double s : nodes_) values_.push_back(symbol(s));
    }
  }

  bool explicit_values() const { return spec_.values.has_value(); }
  bool sobolev() const { return spec_.sobolev && !explicit_values(); }
  double a() const { return spec_.a; }
  double b() const { return spec_.b; }
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<cplx>& values() const { return values_; }
  Eigen::Index dimension() const { return Eigen::Index(values_.size()); }

  cplx symbol(double s) const { return {std::pow(s, -spec_.a), std::pow(s, spec_.b)}; }
  cplx symbol_derivative(double s) const {
    return {-spec_.a * std::pow(s, -spec_.a - 1.0), spec_.b * std::pow(s, spec_.b - 1.0)};
  }

  /// Distance from z to the symbol range: exact over the listed values, refined
  /// between grid nodes for the analytic symbol.
  double spectrum_distance(cplx z) const {
    std::size_t best = 0;
    double d = kInf;
    for (std::size_t i = 0; i < values_.size(); ++i) {
      const double v = std::abs(values_[i] - z);
      if (v < d) {
        d = v;
        best = i;
      }
    }
    if (explicit_values() || nodes_.size() < 2) return d;
    const double lo = std::log(nodes_[best == 0 ? 0 : best - 1]);
    const double hi = std::log(nodes_[std::min(best + 1, nodes_.size() - 1)]);
    const double refined =
        -detail::golden_max([&](double u) { return -std::abs(symbol(std::exp(u)) - z); }, lo, hi);
    return std::min(d, refined);
  }

  NormResult norm(const NormMap& map) const;

 private:
  DiagonalSymbolSpec spec_;
  std::vector<double> nodes_;
  std::vector<cplx> values_;
};

// ---------------------------------------------------------------------------
// Direct sums of shifted nilpotent blocks

/// Coordinates of a direct sum of blocks c_k I - S_{m_k}.
struct BlockLayout {
  std::vector<cplx> centers;
  std::vector<int> sizes;
  std::vector<Eigen::Index> offsets;
  Eigen::Index dimension = 0;

  void push(cplx c, int m) {
    centers.push_back(c);
    sizes.push_back(m);
    offsets.push_back(dimension);
    dimension += m;
  }

  /// y = f(A) x where f is described blockwise by its Taylor jet.
  CMatrix apply(const NormMap& map, const CMatrix& x) const {
    if (x.rows() != dimension) throw ShapeError("vector length does not match the model");
    CMatrix y(x.rows(), x.cols());
    for (std::size_t k = 0; k < centers.size(); ++k) {
      const Jet jet = detail::map_jet(map, centers[k], sizes[k] - 1);
      for (Eigen::Index c = 0; c < x.cols(); ++c)
        toeplitz_apply(jet, x.col(c).data() + offsets[k], y.col(c).data() + offsets[k], sizes[k]);
    }
    return y;
  }

  CMatrix apply_operator(const CMatrix& x) const {
    if (x.rows() != dimension) throw ShapeError("vector length does not match the model");
    CMatrix y(x.rows(), x.cols());
    for (std::size_t k = 0; k < centers.size(); ++k) {
      const Eigen::Index o = offsets[k];
      const int m = sizes[k];
      for (int i = 0; i < m; ++i) {
        y.row(o + i) = centers[k] * x.row(o + i);
        if (i + 1 < m) y.row(o + i) -= x.row(o + i + 1);
      }
    }
    return y;
  }

  double center_distance(cplx z) const {
    double d = kInf;
    for (const cplx& c : centers) d = std::min(d, std::abs(c - z));
    return d;
  }
};

class JordanSumModel {
 public:
  struct Group {
    int m;
    long long n_lo, n_hi;
  };

  explicit JordanSumModel(JordanSumSpec spec) : spec_(spec) {
    if (!(spec.gamma > 0.0 && spec.gamma < 1.0)) throw DomainError("gamma must lie in (0,1)");
    if (!(spec.delta > 0.0 && spec.delta < 1.0)) throw DomainError("delta must lie in (0,1)");
    n0_ = 1;
    while (block_size(n0_) < 2) ++n0_;
    if (spec.N < n0_)
      throw DomainError("truncation N = " + std::to_string(spec.N) + " is below n0 = " +
                        std::to_string(n0_));
    for (long long n = n0_; n <= spec.N; ++n) {
      const int m = block_size(n);
      if (groups_.empty() || groups_.back().m != m) groups_.push_back({m, n, n});
      groups_.back().n_hi = n;
      layout_.push(center(n), m);
    }
  }

  /// m(n) = floor(log n / log(1/delta)).
  int block_size(long long n) const {
    return int(std::floor(std::log(double(n)) / std::log(1.0 / spec_.delta) + 1e-12));
  }
  cplx center(long long n) const { return {spec_.gamma, -double(n)}; }
  double gamma() const { return spec_.gamma; }
  double delta() const { return spec_.delta; }
  long long n0() const { return n0_; }
  long long N() const { return spec_.N; }
  int max_block_size() const { return groups_.back().m; }
  const std::vector<Group>& groups() const { return groups_; }
  const BlockLayout& layout() const { return layout_; }
  Eigen::Index dimension() const { return layout_.dimension; }
  /// Offset of block n in the coordinate vector.
  Eigen::Index block_offset(long long n) const { return layout_.offsets[std::size_t(n - n0_)]; }

  double spectrum_distance(cplx z) const {
    const long long n = std::clamp<long long>(std::llround(-z.imag()), n0_, spec_.N);
    double d = kInf;
    for (long long k = std::max(n0_, n - 1); k <= std::min(spec_.N, n + 1); ++k)
      d = std::min(d, std::abs(z - center(k)));
    return d;
  }

  NormResult norm(const NormMap& map) const {
    std::vector<detail::BlockCandidate> cand;
    if (std::holds_alternative<SemigroupMap>(map)) {
      // |jet| is independent of n and norms grow with block size: the last group decides.
      const auto& g = groups_.back();
      cand.push_back({center(g.n_lo), g.m});
    } else if (const auto* r = std::get_if<ResolventMap>(&map)) {
      // Per-block norm depends only on |lambda - c_n| and m: take the nearest n in each group.
      const double target = -r->lambda.imag();
      for (const auto& g : groups_) {
        const long long n =
            std::clamp<long long>(std::llround(target), g.n_lo, g.n_hi);
        cand.push_back({center(n), g.m});
      }
    } else {
      for (const auto& g : groups_) {
        cand.push_back({center(g.n_lo), g.m});
        if (g.n_hi != g.n_lo) cand.push_back({center(g.n_hi), g.m});
      }
    }
    const auto [v, arg] = detail::max_block_norm(map, cand);
    return {v, cand[arg].size == groups_.back().m && groups_.size() > 1};
  }

 private:
  JordanSumSpec spec_;
  long long n0_ = 1;
  std::vector<Group> groups_;
  BlockLayout layout_;
};

class OperatorMatrixModel {
 public:
  explicit OperatorMatrixModel(OperatorMatrixSpec spec) : spec_(spec) {
    if (spec.n < 2) throw DomainError("operator-matrix size n must be >= 2");
    if (spec.grid_count < 1) throw DomainError("operator-matrix grid needs >= 1 node");
    for (std::size_t j = 0; j < spec.grid_count; ++j)
      layout_.push((double(j) + 0.5) / double(spec.grid_count), spec.n);
  }

  int n() const { return spec_.n; }
  OperatorMatrixRepresentation representation() const { return spec_.representation; }
  const BlockLayout& layout() const { return layout_; }
  Eigen::Index dimension() const { return layout_.dimension; }

  double spectrum_distance(cplx z) const {
    if (spec_.representation == OperatorMatrixRepresentation::grid)
      return layout_.center_distance(z);
    const double x = std::clamp(z.real(), 0.0, 1.0);
    return std::abs(z - cplx(x, 0.0));
  }

  NormResult norm(const NormMap& map) const {
    const int m = spec_.n;
    if (spec_.representation == OperatorMatrixRepresentation::grid) {
      std::vector<detail::BlockCandidate> cand;
      for (const cplx& c : layout_.centers) cand.push_back({c, m});
      return {detail::max_block_norm(map, cand).first, false};
    }
    // Supremum over s in (0,1): geometric scan towards 0, then golden refinement.
    auto f = [&](double u) {
      const Jet j = detail::map_jet(map, cplx(std::exp(u), 0.0), m - 1);
      return toeplitz_norm(j, m);
    };
    const LogGrid g = geometric_grid(1e-12, 1.0, 481);
    std::size_t best_i = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < g.count(); ++i) {
      const double v = f(std::log(g[i]));
      if (v > best) {
        best = v;
        best_i = i;
      }
    }
    const double lo = std::log(g[best_i == 0 ? 0 : best_i - 1]);
    const double hi = std::log(g[std::min(best_i + 1, g.count() - 1)]);
    if (hi > lo) best = std::max(best, detail::golden_max(f, lo, hi));
    return {best, false};
  }

 private:
  OperatorMatrixSpec spec_;
  BlockLayout layout_;
};

// ---------------------------------------------------------------------------
// Diagonal norms

inline NormResult DiagonalSymbolModel::norm(const NormMap& map) const {
  if (explicit_values()) {
    double best = 0.0;
    for (const cplx& v : values_) best = std::max(best, std::abs(detail::map_jet(map, v, 0)[0]));
    return {best, false};
  }
  // Component 0: |g(s)|, component 1: |g'(s)| with g = f(phi(s)).
  auto comp = [&](double u, int k) {
    const double s = std::exp(u);
    const cplx ph = symbol(s);
    const Jet j = detail::map_jet(map, ph, k);
    return k == 0 ? std::abs(j[0]) : std::abs(j[1] * symbol_derivative(s));
  };
  const int ncomp = sobolev() ? 2 : 1;
  double total = 0.0;
  bool edge = false;
  for (int k = 0; k < ncomp; ++k) {
    std::size_t best_i = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const double v = comp(std::log(nodes_[i]), k);
      if (v > best) {
        best = v;
        best_i = i;
      }
    }
    const bool at_edge = best_i + 1 == nodes_.size();
    const double lo = std::log(nodes_[best_i == 0 ? 0 : best_i - 1]);
    const double hi = std::log(nodes_[std::min(best_i + 1, nodes_.size() - 1)]);
    best = std::max(best, detail::golden_max([&](double u) { return comp(u, k); }, lo, hi));
    if (const auto* r = std::get_if<ResolventMap>(&map)) {
      // Narrow peak where Im phi(s) = Im lambda.
      const double im = r->lambda.imag();
      if (im > 0.0) {
        const double s_star = std::pow(im, 1.0 / spec_.b);
        if (s_star > nodes_.front() && s_star < nodes_.back()) {
          const double width = std::max(std::abs(r->lambda.real() - std::pow(s_star, -spec_.a)),
                                        1e-300) /
                               std::abs(symbol_derivative(s_star).imag());
          const double lo_s = std::max(nodes_.front(), s_star - 8.0 * width);
          const double hi_s = std::min(nodes_.back(), s_star + 8.0 * width);
          best = std::max(best, detail::golden_max(
                                    [&](double s) { return comp(std::log(s), k); }, lo_s, hi_s));
        }
      }
    }
    if (best > total) {
      total = best;
      edge = at_edge;
    }
  }
  return {total, edge};
}

// ---------------------------------------------------------------------------
// The tagged model

class OperatorModel {
 public:
  using Variant = std::variant<DenseModel, DiagonalSymbolModel, JordanSumModel, OperatorMatrixModel>;

  explicit OperatorModel(DenseMatrixSpec s) : impl_(DenseModel(std::move(s))) { init_dense(); }
  explicit OperatorModel(DiagonalSymbolSpec s) : impl_(DiagonalSymbolModel(std::move(s))) {
    init_diagonal();
  }
  explicit OperatorModel(JordanSumSpec s) : impl_(JordanSumModel(s)) {
    const auto& j = std::get<JordanSumModel>(impl_);
    meta_.injective = meta_.invertible = true;
    meta_.sectorial = true;
    meta_.sectorial_angle = kPi / 2;
    meta_.known_growth = std::pair{0.0, std::log(1.0 / j.gamma()) / std::log(1.0 / j.delta())};
  }
  explicit OperatorModel(OperatorMatrixSpec s) : impl_(OperatorMatrixModel(s)) {
    meta_.injective = true;
    meta_.invertible = false;
    meta_.sectorial = false;
    meta_.sectorial_angle = kPi;
  }

  static OperatorModel dense(CMatrix m) { return OperatorModel(DenseMatrixSpec{std::move(m)}); }

  ModelKind kind() const { return ModelKind(impl_.index()); }
  const ModelMetadata& metadata() const { return meta_; }
  const Variant& impl() const { return impl_; }
  Eigen::Index dimension() const {
    return std::visit([](const auto& m) { return m.dimension(); }, impl_);
  }
  double spectrum_distance(cplx z) const {
    return std::visit([&](const auto& m) { return m.spectrum_distance(z); }, impl_);
  }
  /// Imaginary-axis coordinates xi at which lambda = eta + i xi comes closest to -sigma(A).
  std::vector<double> spectral_landmarks() const {
    std::vector<double> out;
    if (const auto* d = std::get_if<DenseModel>(&impl_)) {
      for (Eigen::Index i = 0; i < d->eigenvalues().size(); ++i)
        out.push_back(-d->eigenvalues()(i).imag());
    } else if (const auto* j = std::get_if<JordanSumModel>(&impl_)) {
      for (long long n = j->n0(); n <= j->N(); ++n) out.push_back(double(n));
    } else if (std::holds_alternative<OperatorMatrixModel>(impl_)) {
      out.push_back(0.0);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  void init_dense() {
    const auto& d = std::get<DenseModel>(impl_);
    const double scale = std::max(1.0, d.norm());
    double min_abs = kInf, angle = 0.0;
    for (Eigen::Index i = 0; i < d.eigenvalues().size(); ++i) {
      const cplx mu = d.eigenvalues()(i);
      min_abs = std::min(min_abs, std::abs(mu));
      if (std::abs(mu) > kSpectrumTolerance * scale) angle = std::max(angle, std::abs(std::arg(mu)));
    }
    meta_.injective = meta_.invertible = min_abs > kSpectrumTolerance * scale;
    meta_.sectorial_angle = angle;
    meta_.sectorial = angle < kPi * (1.0 - 1e-12);
  }
  void init_diagonal() {
    const auto& d = std::get<DiagonalSymbolModel>(impl_);
    double min_abs = kInf, angle = 0.0;
    for (const cplx& v : d.values()) {
      min_abs = std::min(min_abs, std::abs(v));
      if (v != cplx(0.0)) angle = std::max(angle, std::abs(std::arg(v)));
    }
    meta_.injective = meta_.invertible = min_abs > 0.0;
    meta_.sectorial_angle = angle;
    meta_.sectorial = angle < kPi * (1.0 - 1e-12);
    if (!d.explicit_values()) {
      // phi(s) approaches the imaginary axis as s grows.
      meta_.sectorial_angle = kPi / 2;
      meta_.known_growth = std::pair{0.0, (d.b() - 1.0 + 2.0 * d.a()) / d.b()};
    }
  }

  Variant impl_;
  ModelMetadata meta_;
};

// ---------------------------------------------------------------------------
// Operations

namespace detail {

inline void check_vector(const OperatorModel& m, const CMatrix& x) {
  if (x.rows() != m.dimension())
    throw ShapeError("vector has " + std::to_string(x.rows()) + " rows, model dimension is " +
                     std::to_string(m.dimension()));
}

inline CMatrix diagonal_apply(const DiagonalSymbolModel& d, const NormMap& map, const CMatrix& x) {
  CMatrix y(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    y.row(i) = map_jet(map, d.values()[std::size_t(i)], 0)[0] * x.row(i);
  return y;
}

inline CMatrix dense_map_matrix(const DenseModel& d, const NormMap& map);

}  // namespace detail

/// Applies the function that `map` names (T(t), R(lambda), ...) to x.
inline CMatrix apply_map(const OperatorModel& model, const NormMap& map, const CMatrix& x) {
  detail::check_vector(model, x);
  detail::check_map(map);
  if (const auto* r = std::get_if<ResolventMap>(&map)) {
    const double d = model.spectrum_distance(r->lambda);
    const double scale = std::max(1.0, std::abs(r->lambda));
    if (!(d > kSpectrumTolerance * scale)) throw NearSingularityError("resolvent", d);
  }
  return std::visit(
      [&](const auto& m) -> CMatrix {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, DenseModel>) {
          if (const auto* r = std::get_if<ResolventMap>(&map)) {
            m.check_resolvent_point(r->lambda);
            const CMatrix L = r->lambda * CMatrix::Identity(m.dimension(), m.dimension()) - m.matrix();
            return L.partialPivLu().solve(x);
          }
          return detail::dense_map_matrix(m, map) * x;
        } else if constexpr (std::is_same_v<M, DiagonalSymbolModel>) {
          return detail::diagonal_apply(m, map, x);
        } else {
          return m.layout().apply(map, x);
        }
      },
      model.impl());
}

inline CMatrix semigroup_apply(const OperatorModel& model, double t, const CMatrix& x) {
  detail::check_time(t);
  if (t == 0.0) {
    detail::check_vector(model, x);
    return x;
  }
  return apply_map(model, SemigroupMap{t}, x);
}

inline CMatrix resolvent_apply(const OperatorModel& model, cplx lambda, const CMatrix& x) {
  return apply_map(model, ResolventMap{lambda}, x);
}

/// A x.
inline CMatrix apply_operator(const OperatorModel& model, const CMatrix& x) {
  detail::check_vector(model, x);
  return std::visit(
      [&](const auto& m) -> CMatrix {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, DenseModel>) {
          return m.matrix() * x;
        } else if constexpr (std::is_same_v<M, DiagonalSymbolModel>) {
          CMatrix y(x.rows(), x.cols());
          for (Eigen::Index i = 0; i < x.rows(); ++i) y.row(i) = m.values()[std::size_t(i)] * x.row(i);
          return y;
        } else {
          return m.layout().apply_operator(x);
        }
      },
      model.impl());
}

inline NormResult operator_norm(const OperatorModel& model, const NormMap& map) {
  detail::check_map(map);
  if (const auto* f = std::get_if<FractionalSemigroupMap>(&map)) {
    if (f->sigma > 0.0 && !model.metadata().injective)
      throw DomainError("fractional norm with sigma > 0 needs an injective model");
  }
  if (const auto* r = std::get_if<ResolventMap>(&map)) {
    const double d = model.spectrum_distance(r->lambda);
    const double scale = std::max(1.0, std::abs(r->lambda));
    if (!(d > kSpectrumTolerance * scale)) throw NearSingularityError("resolvent norm", d);
  }
  return std::visit(
      [&](const auto& m) -> NormResult {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, DenseModel>) {
          return {spectral_norm(detail::dense_map_matrix(m, map)), false};
        } else {
          return m.norm(map);
        }
      },
      model.impl());
}

/// ||T(t) Phi^sigma_tau(A)||.
inline NormResult fractional_norm(const OperatorModel& model, double t, double sigma, double tau) {
  return operator_norm(model, FractionalSemigroupMap{t, sigma, tau});
}

// ---------------------------------------------------------------------------
// Dense functional calculus

inline CMatrix DenseModel::phi(double sigma, double tau) const {
  if (sigma < 0 || tau < 0) throw DomainError("fractional indices must be >= 0");
  const auto n = dimension();
  const CMatrix I = CMatrix::Identity(n, n);
  if (sigma == 0.0 && tau == 0.0) return I;
  const bool integral = sigma == std::floor(sigma) && tau == std::floor(tau) && sigma <= 64 && tau <= 64;
  if (integral) {
    CMatrix P = I;
    for (int k = 0; k < int(sigma); ++k) P = P * A_;
    const auto lu = (I + A_).partialPivLu();
    for (int k = 0; k < int(sigma + tau); ++k) P = lu.solve(P);
    return P;
  }
  if (diagonalizable_)
    return eigen_function([&](cplx mu) { return std::pow(mu, sigma) * std::pow(1.0 + mu, -sigma - tau); });
  // Contour representation; a bounded operator needs decay at infinity, so for tau = 0
  // use Phi^sigma_0 = Phi^sigma_1 (1 + A).
  const double beta = tau > 0 ? tau : 1.0;
  ContourScales sc;
  sc.large = std::max(1.0, norm_);
  double min_abs = kInf;
  for (Eigen::Index i = 0; i < eig_.size(); ++i) min_abs = std::min(min_abs, std::abs(eig_(i)));
  sc.invertible = min_abs > kSpectrumTolerance * std::max(1.0, norm_);
  sc.inverse = sc.invertible ? spectral_norm(A_.partialPivLu().inverse()) : 1.0;
  ContourSpec spec;
  const auto res = contour_integrate(
      spec, sigma, beta, 1.0, [&](cplx z) { return resolvent(z); }, sc);
  return tau > 0 ? res.value : CMatrix(res.value * (I + A_));
}

namespace detail {

inline CMatrix dense_map_matrix(const DenseModel& d, const NormMap& map) {
  return std::visit(
      [&](const auto& m) -> CMatrix {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, SemigroupMap>) {
          return d.semigroup(m.t);
        } else if constexpr (std::is_same_v<M, ResolventMap>) {
          return d.resolvent(m.lambda);
        } else if constexpr (std::is_same_v<M, FractionalSemigroupMap>) {
          return d.semigroup(m.t) * d.phi(m.sigma, m.tau);
        } else {
          CMatrix P = d.semigroup(m.t);
          for (int k = 0; k < m.power; ++k) P = P * d.matrix();
          return P;
        }
      },
      map);
}

}  // namespace detail

}  // namespace semistab
