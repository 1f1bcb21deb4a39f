#include "fklab/circle.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

#include "fklab/errors.hpp"

namespace fklab {

namespace {

constexpr double kPi = std::numbers::pi;

double parse_double(std::string_view token, std::string_view record) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw InvalidInput("bad number '" + std::string(token) + "' in profile record '" +
                       std::string(record) + "'");
  }
  return value;
}

void check_dim(int dim) {
  if (dim < 2) throw InvalidInput("dimension must be >= 2, got " + std::to_string(dim));
}

}  // namespace

BoundaryProfile::BoundaryProfile(double constant, std::vector<double> cosines,
                                 std::vector<double> sines)
    : a0(constant), cos_coeffs(std::move(cosines)), sin_coeffs(std::move(sines)) {
  const auto k = std::max(cos_coeffs.size(), sin_coeffs.size());
  cos_coeffs.resize(k, 0.0);
  sin_coeffs.resize(k, 0.0);
}

BoundaryProfile BoundaryProfile::cosine(int k, double amp) {
  if (k < 0) throw InvalidInput("mode index must be >= 0");
  if (k == 0) return constant(amp);
  BoundaryProfile p;
  p.resize(k);
  p.cos_coeffs[k - 1] = amp;
  return p;
}

BoundaryProfile BoundaryProfile::sine(int k, double amp) {
  if (k < 1) throw InvalidInput("sine mode index must be >= 1");
  BoundaryProfile p;
  p.resize(k);
  p.sin_coeffs[k - 1] = amp;
  return p;
}

BoundaryProfile BoundaryProfile::constant(double value) {
  BoundaryProfile p;
  p.a0 = value;
  return p;
}

double BoundaryProfile::a(int k) const {
  if (k == 0) return a0;
  return (k >= 1 && k <= max_mode()) ? cos_coeffs[k - 1] : 0.0;
}

double BoundaryProfile::b(int k) const {
  return (k >= 1 && k <= max_mode()) ? sin_coeffs[k - 1] : 0.0;
}

double BoundaryProfile::operator()(double theta) const {
  // cos k theta, sin k theta by repeated rotation
  const double c1 = std::cos(theta), s1 = std::sin(theta);
  double ck = 1.0, sk = 0.0;
  double value = a0;
  for (int k = 1; k <= max_mode(); ++k) {
    const double c = ck * c1 - sk * s1;
    sk = sk * c1 + ck * s1;
    ck = c;
    value += cos_coeffs[k - 1] * ck + sin_coeffs[k - 1] * sk;
  }
  return value;
}

double BoundaryProfile::derivative(double theta) const {
  const double c1 = std::cos(theta), s1 = std::sin(theta);
  double ck = 1.0, sk = 0.0;
  double value = 0.0;
  for (int k = 1; k <= max_mode(); ++k) {
    const double c = ck * c1 - sk * s1;
    sk = sk * c1 + ck * s1;
    ck = c;
    value += k * (-cos_coeffs[k - 1] * sk + sin_coeffs[k - 1] * ck);
  }
  return value;
}

double BoundaryProfile::sup_bound() const {
  double s = std::abs(a0);
  for (int k = 0; k < max_mode(); ++k) s += std::abs(cos_coeffs[k]) + std::abs(sin_coeffs[k]);
  return s;
}

double BoundaryProfile::sup_on_grid(int min_points) const {
  const int n = std::max(4 * max_mode() + 1, min_points);
  double s = 0.0;
  for (int j = 0; j < n; ++j) s = std::max(s, std::abs((*this)(2.0 * kPi * j / n)));
  return s;
}

bool BoundaryProfile::is_zero() const {
  if (a0 != 0.0) return false;
  for (int k = 0; k < max_mode(); ++k)
    if (cos_coeffs[k] != 0.0 || sin_coeffs[k] != 0.0) return false;
  return true;
}

bool BoundaryProfile::all_finite() const {
  if (!std::isfinite(a0)) return false;
  for (int k = 0; k < max_mode(); ++k)
    if (!std::isfinite(cos_coeffs[k]) || !std::isfinite(sin_coeffs[k])) return false;
  return true;
}

void BoundaryProfile::resize(int k) {
  if (k < max_mode()) throw InvalidInput("resize would truncate a profile");
  cos_coeffs.resize(k, 0.0);
  sin_coeffs.resize(k, 0.0);
}

void BoundaryProfile::trim() {
  int k = max_mode();
  while (k > 0 && cos_coeffs[k - 1] == 0.0 && sin_coeffs[k - 1] == 0.0) --k;
  cos_coeffs.resize(k);
  sin_coeffs.resize(k);
}

BoundaryProfile& BoundaryProfile::operator+=(const BoundaryProfile& other) {
  resize(std::max(max_mode(), other.max_mode()));
  a0 += other.a0;
  for (int k = 0; k < other.max_mode(); ++k) {
    cos_coeffs[k] += other.cos_coeffs[k];
    sin_coeffs[k] += other.sin_coeffs[k];
  }
  return *this;
}

BoundaryProfile& BoundaryProfile::operator-=(const BoundaryProfile& other) {
  resize(std::max(max_mode(), other.max_mode()));
  a0 -= other.a0;
  for (int k = 0; k < other.max_mode(); ++k) {
    cos_coeffs[k] -= other.cos_coeffs[k];
    sin_coeffs[k] -= other.sin_coeffs[k];
  }
  return *this;
}

BoundaryProfile& BoundaryProfile::operator*=(double c) {
  a0 *= c;
  for (auto& v : cos_coeffs) v *= c;
  for (auto& v : sin_coeffs) v *= c;
  return *this;
}

BoundaryProfile operator+(BoundaryProfile lhs, const BoundaryProfile& rhs) { return lhs += rhs; }
BoundaryProfile operator-(BoundaryProfile lhs, const BoundaryProfile& rhs) { return lhs -= rhs; }
BoundaryProfile operator*(double c, BoundaryProfile p) { return p *= c; }
BoundaryProfile operator*(BoundaryProfile p, double c) { return p *= c; }

BoundaryProfile multiply(const BoundaryProfile& p, const BoundaryProfile& q) {
  // Complex coefficients c_k with phi = sum_{|k|<=K} c_k e^{ik theta}.
  const int kp = p.max_mode();
  const int kq = q.max_mode();
  const int kr = kp + kq;
  auto complex_coeffs = [](const BoundaryProfile& f, int K) {
    std::vector<double> re(2 * K + 1, 0.0), im(2 * K + 1, 0.0);
    re[K] = f.a0;
    for (int k = 1; k <= K; ++k) {
      re[K + k] = 0.5 * f.a(k);
      im[K + k] = -0.5 * f.b(k);
      re[K - k] = 0.5 * f.a(k);
      im[K - k] = 0.5 * f.b(k);
    }
    return std::pair{re, im};
  };
  const auto [pr, pi] = complex_coeffs(p, kp);
  const auto [qr, qi] = complex_coeffs(q, kq);
  std::vector<double> rr(2 * kr + 1, 0.0), ri(2 * kr + 1, 0.0);
  for (int i = -kp; i <= kp; ++i) {
    for (int j = -kq; j <= kq; ++j) {
      const double ar = pr[kp + i], ai = pi[kp + i];
      const double br = qr[kq + j], bi = qi[kq + j];
      rr[kr + i + j] += ar * br - ai * bi;
      ri[kr + i + j] += ar * bi + ai * br;
    }
  }
  BoundaryProfile out;
  out.resize(kr);
  out.a0 = rr[kr];
  for (int k = 1; k <= kr; ++k) {
    out.cos_coeffs[k - 1] = 2.0 * rr[kr + k];
    out.sin_coeffs[k - 1] = -2.0 * ri[kr + k];
  }
  return out;
}

BoundaryProfile parse_profile(std::string_view record) {
  std::istringstream in{std::string(record)};
  std::string token;
  if (!(in >> token)) throw InvalidInput("empty profile record");
  BoundaryProfile p;
  p.a0 = parse_double(token, record);
  while (in >> token) {
    const auto c1 = token.find(':');
    const auto c2 = c1 == std::string::npos ? c1 : token.find(':', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos ||
        token.find(':', c2 + 1) != std::string::npos) {
      throw InvalidInput("expected k:a_k:b_k, got '" + token + "'");
    }
    const std::string_view tv(token);
    int k = 0;
    auto [ptr, ec] = std::from_chars(tv.data(), tv.data() + c1, k);
    if (ec != std::errc() || ptr != tv.data() + c1 || k < 1) {
      throw InvalidInput("bad mode index in '" + token + "'");
    }
    if (k > 4096) throw InvalidInput("mode index too large in '" + token + "'");
    const double ak = parse_double(tv.substr(c1 + 1, c2 - c1 - 1), record);
    const double bk = parse_double(tv.substr(c2 + 1), record);
    if (k > p.max_mode()) p.resize(k);
    p.cos_coeffs[k - 1] += ak;
    p.sin_coeffs[k - 1] += bk;
  }
  if (!p.all_finite()) throw InvalidInput("profile record has non-finite coefficients");
  return p;
}

std::string format_profile(const BoundaryProfile& p) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.17g", p.a0);
  std::string out = buf;
  for (int k = 1; k <= p.max_mode(); ++k) {
    if (p.a(k) == 0.0 && p.b(k) == 0.0) continue;
    std::snprintf(buf, sizeof buf, " %d:%.17g:%.17g", k, p.a(k), p.b(k));
    out += buf;
  }
  return out;
}

std::vector<double> sample_profile(const BoundaryProfile& p, int n) {
  std::vector<double> s(n);
  for (int j = 0; j < n; ++j) s[j] = p(2.0 * kPi * j / n);
  return s;
}

BoundaryProfile fit_fourier(const std::vector<double>& samples, int max_mode) {
  const int n = static_cast<int>(samples.size());
  if (n < 2 * max_mode + 1) throw InvalidInput("too few samples for the requested mode count");
  BoundaryProfile p;
  p.resize(max_mode);
  double sum = 0.0;
  for (double s : samples) sum += s;
  p.a0 = sum / n;
  for (int k = 1; k <= max_mode; ++k) {
    double ck = 0.0, sk = 0.0;
    for (int j = 0; j < n; ++j) {
      const double arg = 2.0 * kPi * static_cast<double>(k) * j / n;
      ck += samples[j] * std::cos(arg);
      sk += samples[j] * std::sin(arg);
    }
    p.cos_coeffs[k - 1] = 2.0 * ck / n;
    p.sin_coeffs[k - 1] = 2.0 * sk / n;
  }
  return p;
}

double boundary_l2_sq(const BoundaryProfile& p) {
  double s = 2.0 * kPi * p.a0 * p.a0;
  for (int k = 1; k <= p.max_mode(); ++k) s += kPi * (p.a(k) * p.a(k) + p.b(k) * p.b(k));
  return s;
}

double extension_energy(const BoundaryProfile& p) {
  // The harmonic extension of cos k theta is r^k cos k theta.
  double s = 0.0;
  for (int k = 1; k <= p.max_mode(); ++k) s += kPi * k * (p.a(k) * p.a(k) + p.b(k) * p.b(k));
  return s;
}

double h_half_norm_sq(const BoundaryProfile& p) { return boundary_l2_sq(p) + extension_energy(p); }

double h_half_inner(const BoundaryProfile& p, const BoundaryProfile& q) {
  const int K = std::max(p.max_mode(), q.max_mode());
  double s = 2.0 * kPi * p.a0 * q.a0;
  for (int k = 1; k <= K; ++k) s += kPi * (1.0 + k) * (p.a(k) * q.a(k) + p.b(k) * q.b(k));
  return s;
}

double hessian_from_degree_masses(const std::vector<double>& masses, int dim) {
  check_dim(dim);
  double s = 0.0;
  for (std::size_t l = 0; l < masses.size(); ++l) s += (static_cast<double>(l) - 1.0) * masses[l];
  return s / (static_cast<double>(dim) * dim);
}

double hessian_form(const BoundaryProfile& p, int dim) {
  check_dim(dim);
  std::vector<double> masses(p.max_mode() + 1, 0.0);
  masses[0] = 2.0 * kPi * p.a0 * p.a0;
  for (int k = 1; k <= p.max_mode(); ++k) masses[k] = kPi * (p.a(k) * p.a(k) + p.b(k) * p.b(k));
  return hessian_from_degree_masses(masses, dim);
}

double hessian_bilinear(const BoundaryProfile& p, const BoundaryProfile& q, int dim) {
  check_dim(dim);
  const int K = std::max(p.max_mode(), q.max_mode());
  double s = -2.0 * kPi * p.a0 * q.a0;
  for (int k = 1; k <= K; ++k) s += kPi * (k - 1.0) * (p.a(k) * q.a(k) + p.b(k) * q.b(k));
  return s / (static_cast<double>(dim) * dim);
}

ProjectionSplit low_mode_projection(const BoundaryProfile& p) {
  ProjectionSplit split;
  split.low.a0 = p.a0;
  if (p.max_mode() >= 1) {
    split.low.resize(1);
    split.low.cos_coeffs[0] = p.a(1);
    split.low.sin_coeffs[0] = p.b(1);
  }
  split.high = p;
  split.high.a0 = 0.0;
  if (split.high.max_mode() >= 1) {
    split.high.cos_coeffs[0] = 0.0;
    split.high.sin_coeffs[0] = 0.0;
  }
  return split;
}

double m_delta_defect(const BoundaryProfile& p) {
  if (p.is_zero()) throw InvalidInput("m_delta_defect is undefined for the zero profile");
  const double mean = std::abs(2.0 * kPi * p.a0);
  const double moment = std::abs(kPi * p.a(1)) + std::abs(kPi * p.b(1));
  return (mean + moment) / std::sqrt(h_half_norm_sq(p));
}

double steklov_min_rayleigh(int max_mode, int min_mode) {
  if (max_mode < 2) throw InvalidInput("steklov_min_rayleigh needs max_mode >= 2");
  if (min_mode < 0 || min_mode > max_mode) throw InvalidInput("min_mode outside [0, max_mode]");
  // Both quadratic forms are diagonal in the Fourier basis, so the generalized
  // Rayleigh minimum is the smallest diagonal ratio.
  double best = std::numeric_limits<double>::infinity();
  for (int k = min_mode; k <= max_mode; ++k) {
    for (const auto& mode : {BoundaryProfile::cosine(k), k == 0 ? BoundaryProfile::constant(1.0)
                                                                : BoundaryProfile::sine(k)}) {
      best = std::min(best, extension_energy(mode) / boundary_l2_sq(mode));
    }
  }
  return best;
}

double coercivity_margin(const BoundaryProfile& p, int dim) {
  if (p.is_zero()) throw InvalidInput("coercivity_margin is undefined for the zero profile");
  return hessian_form(p, dim) / h_half_norm_sq(p);
}

}  // namespace fklab
