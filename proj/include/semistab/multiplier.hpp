#pragma once

// Operator-valued Fourier multipliers on a periodic time window: sampled transforms with
// the convention Ff(xi) = int e^{-i xi t} f(t) dt, the convolution operators S_k, the
// Laplace identity for semigroup orbits, and (L^p, L^q) norm estimates.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "semistab/errors.hpp"
#include "semistab/linalg.hpp"
#include "semistab/numcore.hpp"
#include "semistab/operators.hpp"
#include "semistab/parallel.hpp"

namespace semistab {

/// Samples t_j = -L/2 + j L/N and frequencies xi_k = 2 pi k / L, k in [-N/2, N/2).
/// Sampled functions are d x N matrices, one column per node; transforms use the
/// same layout with column i holding wavenumber i - N/2.
struct FourierGridSpec {
  double period = 100.0;
  std::size_t samples = 1u << 14;

  void validate() const {
    if (!(period > 0.0) || !std::isfinite(period)) throw DomainError("period must be positive");
    if (samples < 2 || (samples & (samples - 1)) != 0)
      throw DomainError("samples must be a power of two >= 2, got " + std::to_string(samples));
  }
  double step() const { return period / double(samples); }
  double time(std::size_t j) const { return -0.5 * period + double(j) * step(); }
  long long wavenumber(std::size_t i) const { return (long long)i - (long long)(samples / 2); }
  double frequency(std::size_t i) const { return 2.0 * kPi * double(wavenumber(i)) / period; }
  double frequency_step() const { return 2.0 * kPi / period; }
};

namespace detail {

inline void check_samples(const CMatrix& f, const FourierGridSpec& g) {
  g.validate();
  if (std::size_t(f.cols()) != g.samples)
    throw ShapeError("sampled function has " + std::to_string(f.cols()) + " columns, grid has " +
                     std::to_string(g.samples));
}

inline std::size_t fft_slot(long long k, std::size_t n) {
  return std::size_t((k % (long long)n + (long long)n) % (long long)n);
}

}  // namespace detail

inline CMatrix fourier_transform(const CMatrix& f, const FourierGridSpec& g) {
  detail::check_samples(f, g);
  const std::size_t n = g.samples;
  Eigen::FFT<double> fft;
  std::vector<cplx> in(n), out(n);
  CMatrix F(f.rows(), Eigen::Index(n));
  for (Eigen::Index r = 0; r < f.rows(); ++r) {
    for (std::size_t j = 0; j < n; ++j) in[j] = f(r, Eigen::Index(j));
    fft.fwd(out, in);
    for (std::size_t i = 0; i < n; ++i) {
      const long long k = g.wavenumber(i);
      F(r, Eigen::Index(i)) = g.step() * ((k & 1) ? -1.0 : 1.0) * out[detail::fft_slot(k, n)];
    }
  }
  return F;
}

inline CMatrix inverse_fourier_transform(const CMatrix& F, const FourierGridSpec& g) {
  detail::check_samples(F, g);
  const std::size_t n = g.samples;
  Eigen::FFT<double> fft;
  std::vector<cplx> in(n), out(n);
  CMatrix f(F.rows(), Eigen::Index(n));
  for (Eigen::Index r = 0; r < F.rows(); ++r) {
    for (std::size_t i = 0; i < n; ++i) {
      const long long k = g.wavenumber(i);
      in[detail::fft_slot(k, n)] = F(r, Eigen::Index(i)) * ((k & 1) ? -1.0 : 1.0) / g.step();
    }
    fft.inv(out, in);
    for (std::size_t j = 0; j < n; ++j) f(r, Eigen::Index(j)) = out[j];
  }
  return f;
}

// ---------------------------------------------------------------------------
// Symbols

/// xi -> rows x cols matrix. Symbols singular at 0 get the value 0 at the xi = 0 node.
struct Symbol {
  std::function<CMatrix(double)> matrix;
  Eigen::Index rows = 1;
  Eigen::Index cols = 1;
  bool singular_at_zero = false;
  std::string label;
};

inline Symbol scalar_symbol(std::function<cplx(double)> m, std::string label = "scalar",
                            bool singular_at_zero = false) {
  Symbol s;
  s.matrix = [m = std::move(m)](double xi) { return CMatrix::Constant(1, 1, m(xi)); };
  s.singular_at_zero = singular_at_zero;
  s.label = std::move(label);
  return s;
}

inline Symbol identity_symbol(Eigen::Index dim, cplx c = 1.0) {
  Symbol s;
  s.matrix = [dim, c](double) { return CMatrix(c * CMatrix::Identity(dim, dim)); };
  s.rows = s.cols = dim;
  s.label = "identity";
  return s;
}

namespace detail {

/// Explicit matrix of a dense or explicit-valued diagonal model.
inline CMatrix matrix_of(const OperatorModel& model) {
  if (const auto* d = std::get_if<DenseModel>(&model.impl())) return d->matrix();
  if (const auto* g = std::get_if<DiagonalSymbolModel>(&model.impl()); g && g->explicit_values()) {
    const auto& v = g->values();
    CMatrix m = CMatrix::Zero(Eigen::Index(v.size()), Eigen::Index(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) m(Eigen::Index(i), Eigen::Index(i)) = v[i];
    return m;
  }
  throw UnsupportedError("multipliers need an explicit matrix; " + to_string(model.kind()) +
                         " models do not provide one");
}

inline CMatrix resolvent_power(const CMatrix& A, double xi, int k) {
  const Eigen::Index n = A.rows();
  const CMatrix I = CMatrix::Identity(n, n);
  const Eigen::PartialPivLU<CMatrix> lu(cplx(0.0, xi) * I + A);
  if (!(lu.rcond() > 1e-14)) throw SingularityError("i xi + A is not invertible", xi);
  CMatrix P = I;
  for (int j = 0; j <= k; ++j) P = lu.solve(P);
  return P;
}

}  // namespace detail

/// (i xi + A)^{-k-1}.
inline Symbol resolvent_power_symbol(const OperatorModel& model, int k = 0) {
  if (k < 0) throw DomainError("resolvent power index must be >= 0");
  const CMatrix A = detail::matrix_of(model);
  Symbol s;
  s.rows = s.cols = A.rows();
  s.matrix = [A, k](double xi) { return detail::resolvent_power(A, xi, k); };
  s.label = "resolvent^" + std::to_string(k + 1);
  return s;
}

/// Symbol values at every grid frequency.
struct SymbolTable {
  std::vector<CMatrix> values;
  Eigen::Index rows = 1;
  Eigen::Index cols = 1;
};

inline SymbolTable tabulate(const Symbol& s, const FourierGridSpec& g, unsigned threads = 1) {
  g.validate();
  SymbolTable t;
  t.rows = s.rows;
  t.cols = s.cols;
  t.values.resize(g.samples);
  parallel_for(g.samples, threads, [&](std::size_t i) {
    const double xi = g.frequency(i);
    if (s.singular_at_zero && g.wavenumber(i) == 0) {
      t.values[i] = CMatrix::Zero(s.rows, s.cols);
      return;
    }
    CMatrix m = s.matrix(xi);
    if (m.rows() != s.rows || m.cols() != s.cols) throw ShapeError("symbol returned a wrong shape");
    if (!m.allFinite()) throw SingularityError("non-finite symbol value", xi);
    t.values[i] = std::move(m);
  });
  return t;
}

inline CMatrix apply_multiplier(const SymbolTable& t, const CMatrix& f, const FourierGridSpec& g) {
  detail::check_samples(f, g);
  if (f.rows() != t.cols) throw ShapeError("function dimension does not match the symbol");
  const CMatrix F = fourier_transform(f, g);
  CMatrix G(t.rows, F.cols());
  for (Eigen::Index i = 0; i < F.cols(); ++i) G.col(i) = t.values[std::size_t(i)] * F.col(i);
  return inverse_fourier_transform(G, g);
}

inline CMatrix apply_multiplier(const Symbol& s, const CMatrix& f, const FourierGridSpec& g) {
  return apply_multiplier(tabulate(s, g), f, g);
}

// ---------------------------------------------------------------------------
// Semigroup convolutions

namespace detail {

/// T(t_m) = e^{-t_m A} for t_m = m h, m = 0..count-1.
inline std::vector<CMatrix> semigroup_samples(const CMatrix& A, double h, std::size_t count) {
  std::vector<CMatrix> out(count);
  const CMatrix E = expm(CMatrix(-h * A));
  out[0] = CMatrix::Identity(A.rows(), A.cols());
  for (std::size_t m = 1; m < count; ++m) out[m] = E * out[m - 1];
  return out;
}

}  // namespace detail

/// S_k f(s) = int_0^inf t^k T(t) f(s - t) dt by the trapezoidal rule on the grid, with f
/// taken as zero before the window.
inline CMatrix convolution_S_k(const OperatorModel& model, int k, const CMatrix& f,
                               const FourierGridSpec& g) {
  if (k < 0) throw DomainError("k must be >= 0");
  detail::check_samples(f, g);
  const CMatrix A = detail::matrix_of(model);
  const Eigen::Index d = A.rows();
  if (f.rows() != d) throw ShapeError("function dimension does not match the model");
  const std::size_t n = g.samples;
  const double h = g.step();
  auto kernel = detail::semigroup_samples(A, h, n);
  double peak = 0.0;
  for (std::size_t m = 0; m < n; ++m) {
    kernel[m] *= std::pow(double(m) * h, k) * (m == 0 ? 0.5 * h : h);
    peak = std::max(peak, kernel[m].cwiseAbs().maxCoeff());
  }
  const double tail = kernel[n - 1].cwiseAbs().maxCoeff();
  if (tail > 1e-6 * peak)
    throw WindowError("t^k T(t) has not decayed over the window (tail ratio " +
                      std::to_string(tail / peak) + ")");

  // linear convolution via zero-padded FFTs of length 2N
  const std::size_t n2 = 2 * n;
  Eigen::FFT<double> fft;
  std::vector<std::vector<cplx>> fhat(static_cast<std::size_t>(d));
  std::vector<cplx> buf(n2), spec(n2);
  for (Eigen::Index c = 0; c < d; ++c) {
    std::fill(buf.begin(), buf.end(), cplx(0.0));
    for (std::size_t j = 0; j < n; ++j) buf[j] = f(c, Eigen::Index(j));
    fft.fwd(fhat[std::size_t(c)], buf);
  }
  CMatrix out(d, Eigen::Index(n));
  std::vector<cplx> acc(n2), res(n2);
  for (Eigen::Index r = 0; r < d; ++r) {
    std::fill(acc.begin(), acc.end(), cplx(0.0));
    for (Eigen::Index c = 0; c < d; ++c) {
      std::fill(buf.begin(), buf.end(), cplx(0.0));
      for (std::size_t m = 0; m < n; ++m) buf[m] = kernel[m](r, c);
      fft.fwd(spec, buf);
      for (std::size_t i = 0; i < n2; ++i) acc[i] += spec[i] * fhat[std::size_t(c)][i];
    }
    fft.inv(res, acc);
    for (std::size_t j = 0; j < n; ++j) out(r, Eigen::Index(j)) = res[j];
  }
  return out;
}

/// Transform of a function on [0, inf) from samples g_j = g(j h), j = 0..M, negligible
/// beyond M h: trapezoidal sum plus Euler-Maclaurin end corrections at t = 0, built from
/// scaled derivatives d_j = h^j g^{(j)}(0).
inline CMatrix corrected_half_line_transform(const CMatrix& samples, const std::vector<CMatrix>& scaled_derivs,
                                             const FourierGridSpec& g) {
  static constexpr double kBernoulli[] = {1.0 / 6,   -1.0 / 30,     1.0 / 42, -1.0 / 30,
                                          5.0 / 66, -691.0 / 2730, 7.0 / 6,  -3617.0 / 510};
  g.validate();
  const std::size_t n = g.samples;
  const std::size_t M = std::size_t(samples.cols()) - 1;
  if (M + 1 > n) throw ShapeError("too many samples for the grid");
  const int order = std::min<int>(2 * 8, int(scaled_derivs.size()));
  const double h = g.step();
  Eigen::FFT<double> fft;
  std::vector<cplx> in(n), out(n);
  CMatrix F(samples.rows(), Eigen::Index(n));
  std::vector<cplx> powers(std::size_t(order) + 1);
  for (Eigen::Index r = 0; r < samples.rows(); ++r) {
    std::fill(in.begin(), in.end(), cplx(0.0));
    for (std::size_t j = 0; j <= M; ++j) in[j] = samples(r, Eigen::Index(j));
    fft.fwd(out, in);
    for (std::size_t i = 0; i < n; ++i) {
      const long long k = g.wavenumber(i);
      const cplx c(0.0, -g.frequency(i) * h);  // h times d/dt of e^{-i xi t}
      powers[0] = 1.0;
      for (int m = 1; m <= order; ++m) powers[std::size_t(m)] = powers[std::size_t(m - 1)] * c;
      cplx value = out[detail::fft_slot(k, n)] - 0.5 * samples(r, 0);
      double fact = 2.0;  // (2k)!
      for (int kk = 1; 2 * kk <= order; ++kk) {
        if (kk > 1) fact *= double(2 * kk - 1) * double(2 * kk);
        // h^{2k-1} phi^{(2k-1)}(0) = sum_j C(2k-1, j) c^{2k-1-j} d_j
        const int m = 2 * kk - 1;
        cplx dphi = 0.0;
        double binom = 1.0;
        for (int j = 0; j <= m; ++j) {
          dphi += binom * powers[std::size_t(m - j)] * scaled_derivs[std::size_t(j)](r, 0);
          binom = binom * double(m - j) / double(j + 1);
        }
        value += kBernoulli[kk - 1] / fact * dphi;
      }
      F(r, Eigen::Index(i)) = h * value;
    }
  }
  return F;
}

struct LaplaceCheck {
  double max_rel_error = 0.0;
  double worst_xi = 0.0;
  double tail_ratio = 0.0;
  std::size_t frequencies = 0;
};

/// Transform of t -> t^n T(t) x against n! (i xi + A)^{-n-1} x for |xi| <= 2 pi N / (4L);
/// errors are vector-norm relative errors, maximised over frequencies.
inline LaplaceCheck verify_laplace_identity(const OperatorModel& model, int n, const CMatrix& x,
                                            const FourierGridSpec& g) {
  if (n < 0) throw DomainError("n must be >= 0");
  g.validate();
  const CMatrix A = detail::matrix_of(model);
  if (x.rows() != A.rows() || x.cols() != 1) throw ShapeError("x must be a column of the model dimension");
  const std::size_t half = g.samples / 2;
  const double h = g.step();
  const auto T = detail::semigroup_samples(A, h, half);
  CMatrix orbit(A.rows(), Eigen::Index(half));
  double peak = 0.0;
  for (std::size_t j = 0; j < half; ++j) {
    orbit.col(Eigen::Index(j)) = std::pow(double(j) * h, n) * (T[j] * x);
    peak = std::max(peak, orbit.col(Eigen::Index(j)).norm());
  }
  LaplaceCheck out;
  out.tail_ratio = peak > 0 ? orbit.col(Eigen::Index(half - 1)).norm() / peak : 0.0;
  if (out.tail_ratio > 1e-6)
    throw WindowError("orbit has not decayed by t = L/2 (tail ratio " + std::to_string(out.tail_ratio) + ")");
  // d_j = h^j g^{(j)}(0) = j!/(j-n)! h^n (-hA)^{j-n} x for g(t) = t^n T(t) x
  std::vector<CMatrix> derivs(16, CMatrix::Zero(A.rows(), 1));
  CMatrix v = std::pow(h, n) * x;
  for (int j = n; j < 16; ++j) {
    double ff = 1.0;
    for (int q = j - n + 1; q <= j; ++q) ff *= q;
    derivs[std::size_t(j)] = ff * v;
    v = -h * (A * v);
  }
  const CMatrix F = corrected_half_line_transform(orbit, derivs, g);
  const double limit = 2.0 * kPi * double(g.samples) / (4.0 * g.period);
  double fact = 1.0;
  for (int j = 2; j <= n; ++j) fact *= j;
  for (std::size_t i = 0; i < g.samples; ++i) {
    const double xi = g.frequency(i);
    if (std::abs(xi) > limit) continue;
    const CMatrix exact = fact * (detail::resolvent_power(A, xi, n) * x);
    const double e = (F.col(Eigen::Index(i)) - exact).norm() / exact.norm();
    ++out.frequencies;
    if (e > out.max_rel_error) {
      out.max_rel_error = e;
      out.worst_xi = xi;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Norm estimates

struct PQNormEstimate {
  double p = 2.0;
  double q = 2.0;
  double lower_bound = 0.0;
  std::optional<double> upper_bound;
  std::string method;
};

/// Discrete L^p norm with left-endpoint weights h; p = inf is the max.
inline double lebesgue_norm(const CMatrix& f, double p, double h) {
  if (std::isinf(p)) return f.colwise().norm().maxCoeff();
  double s = 0.0;
  for (Eigen::Index j = 0; j < f.cols(); ++j) s += std::pow(f.col(j).norm(), p);
  return std::pow(s * h, 1.0 / p);
}

/// sup over grid frequencies of ||m(xi)||.
inline double exact_l2_norm(const SymbolTable& t) {
  double best = 0.0;
  for (const auto& m : t.values) best = std::max(best, spectral_norm(m));
  return best;
}

inline double exact_l2_norm(const Symbol& s, const FourierGridSpec& g) { return exact_l2_norm(tabulate(s, g)); }

/// Fourier-type constant of a Hilbert space for p in {1, 2} under this transform.
inline double hilbert_fourier_constant(double p) {
  if (p == 1.0) return 1.0;
  if (p == 2.0) return std::sqrt(2.0 * kPi);
  throw DomainError("Hilbert Fourier-type constants are provided for p = 1 and p = 2 only");
}

/// (1/2 pi) F_p F_{q'} ||m||_{L^r}, 1/r = 1/p - 1/q, with the L^r norm taken over the
/// sampled frequencies (weight 2 pi / L).
inline double upper_bound_pq_norm_fourier_type(const std::vector<double>& symbol_norms, double p,
                                               double q, std::pair<double, double> constants,
                                               double frequency_step) {
  if (!(p >= 1.0) || !(q >= p)) throw DomainError("need 1 <= p <= q");
  const double inv_r = 1.0 / p - (std::isinf(q) ? 0.0 : 1.0 / q);
  double lr = 0.0;
  if (inv_r == 0.0) {
    for (double v : symbol_norms) lr = std::max(lr, v);
  } else {
    const double r = 1.0 / inv_r;
    for (double v : symbol_norms) lr += std::pow(v, r);
    lr = std::pow(lr * frequency_step, inv_r);
  }
  return constants.first * constants.second * lr / (2.0 * kPi);
}

inline std::vector<double> symbol_norms(const SymbolTable& t) {
  std::vector<double> v;
  v.reserve(t.values.size());
  for (const auto& m : t.values) v.push_back(spectral_norm(m));
  return v;
}

struct WitnessOptions {
  std::size_t trials = 32;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

/// max of ||T_m f||_q / ||f||_p over a fixed family (Gaussian bumps at 8 scales x 8
/// modulations along the top singular direction) plus `trials` random band-limited draws.
inline PQNormEstimate estimate_pq_norm_lower(const SymbolTable& t, double p, double q,
                                             const FourierGridSpec& g, const WitnessOptions& opt = {}) {
  if (!(p >= 1.0) || std::isinf(p) || !(q >= p)) throw DomainError("need 1 <= p <= q, p finite");
  g.validate();
  const std::size_t n = g.samples;
  const double h = g.step();
  std::size_t peak_i = 0;
  double peak = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = spectral_norm(t.values[i]);
    if (v > peak) {
      peak = v;
      peak_i = i;
    }
  }
  const double xi_max = 2.0 * kPi * double(n) / (4.0 * g.period);
  std::vector<double> omegas{g.frequency(peak_i), 0.0};
  for (int j = 1; j <= 6; ++j) omegas.push_back(xi_max * std::pow(2.0, -j));
  std::vector<double> scales;
  for (int j = 0; j < 8; ++j) scales.push_back(4.0 * h * std::pow(g.period / (32.0 * h), j / 7.0));

  auto direction = [&](double omega) {
    const long long k = std::llround(omega / g.frequency_step()) + (long long)(n / 2);
    const std::size_t i = std::size_t(std::clamp<long long>(k, 0, (long long)n - 1));
    Eigen::JacobiSVD<CMatrix> svd(t.values[i], Eigen::ComputeFullV);
    return CMatrix(svd.matrixV().col(0));
  };

  const std::size_t fixed = omegas.size() * scales.size();
  std::vector<double> ratios(fixed + opt.trials, 0.0);
  parallel_for(ratios.size(), opt.threads, [&](std::size_t w) {
    CMatrix f(t.cols, Eigen::Index(n));
    if (w < fixed) {
      const double omega = omegas[w / scales.size()];
      const double s = scales[w % scales.size()];
      const CMatrix v = direction(omega);
      for (std::size_t j = 0; j < n; ++j) {
        const double tj = g.time(j);
        f.col(Eigen::Index(j)) = std::exp(-0.5 * tj * tj / (s * s)) * std::polar(1.0, omega * tj) * v;
      }
    } else {
      std::seed_seq seq{std::uint64_t(opt.seed), std::uint64_t(w - fixed)};
      std::mt19937_64 rng(seq);
      std::normal_distribution<double> gauss;
      const std::size_t band = std::size_t(4) << (rng() % 8);
      CMatrix F = CMatrix::Zero(t.cols, Eigen::Index(n));
      for (std::size_t i = n / 2 - std::min(band, n / 2); i < std::min(n, n / 2 + band); ++i)
        for (Eigen::Index r = 0; r < t.cols; ++r) F(r, Eigen::Index(i)) = cplx(gauss(rng), gauss(rng));
      f = inverse_fourier_transform(F, g);
    }
    const double fn = lebesgue_norm(f, p, h);
    if (fn > 0) ratios[w] = lebesgue_norm(apply_multiplier(t, f, g), q, h) / fn;
  });
  PQNormEstimate e;
  e.p = p;
  e.q = q;
  e.method = "witness-search";
  for (double r : ratios) e.lower_bound = std::max(e.lower_bound, r);
  return e;
}

}  // namespace semistab
