#pragma once

#include <gmpxx.h>

#include <memory>
#include <utility>
#include <vector>

#include "gka/errors.hpp"
#include "gka/util.hpp"

namespace gka {

// Parameters of the prime field GF(p). All identities, contributions and
// polynomial coefficients live in this field; w is the fixed byte width
// used for every field element on the wire.
class FieldParams {
 public:
  static std::shared_ptr<const FieldParams> make(const mpz_class& p) {
    if (p < 2 || !is_prime(p)) throw Error(Err::NotPrime, p.get_str());
    return std::shared_ptr<const FieldParams>(new FieldParams(p));
  }

  const mpz_class& p() const { return p_; }
  std::size_t bits() const { return bits_; }
  std::size_t width() const { return w_; }

  bool operator==(const FieldParams& o) const { return p_ == o.p_; }

 private:
  explicit FieldParams(const mpz_class& p)
      : p_(p), bits_(mpz_sizeinbase(p.get_mpz_t(), 2)), w_((bits_ + 7) / 8) {}

  static bool is_prime(const mpz_class& p) {
    if (p < (1 << 20)) {
      // exhaustive trial division for small moduli
      unsigned long v = p.get_ui();
      if (v < 2) return false;
      for (unsigned long d = 2; d * d <= v; ++d)
        if (v % d == 0) return false;
      return true;
    }
    return mpz_probab_prime_p(p.get_mpz_t(), 30) >= 1;
  }

  mpz_class p_;
  std::size_t bits_;
  std::size_t w_;
};

using FieldParamsPtr = std::shared_ptr<const FieldParams>;

inline FieldParamsPtr field_params(const mpz_class& p) { return FieldParams::make(p); }

// p = 2^61 - 1, the default test field.
inline FieldParamsPtr mersenne61_params() {
  return field_params((mpz_class(1) << 61) - 1);
}

// The secp256k1 base field prime, used as the published 256-bit demo field.
inline FieldParamsPtr demo256_params() {
  mpz_class p = (mpz_class(1) << 256) - (mpz_class(1) << 32) - 977;
  return field_params(p);
}

class FieldElement {
 public:
  FieldElement(mpz_class v, FieldParamsPtr params) : v_(std::move(v)), params_(std::move(params)) {
    mpz_mod(v_.get_mpz_t(), v_.get_mpz_t(), params_->p().get_mpz_t());
  }

  const mpz_class& value() const { return v_; }
  const FieldParamsPtr& params() const { return params_; }

  bool is_zero() const { return v_ == 0; }

  FieldElement operator+(const FieldElement& o) const {
    check_same(o);
    mpz_class r = v_ + o.v_;
    if (r >= params_->p()) r -= params_->p();
    return raw(std::move(r), params_);
  }

  FieldElement operator-(const FieldElement& o) const {
    check_same(o);
    mpz_class r = v_ - o.v_;
    if (r < 0) r += params_->p();
    return raw(std::move(r), params_);
  }

  FieldElement operator*(const FieldElement& o) const {
    check_same(o);
    ++op_counters().field_mults;
    mpz_class r = (v_ * o.v_) % params_->p();
    return raw(std::move(r), params_);
  }

  bool operator==(const FieldElement& o) const { return *params_ == *o.params_ && v_ == o.v_; }
  bool operator!=(const FieldElement& o) const { return !(*this == o); }

  // w-octet big-endian encoding.
  Bytes to_bytes() const {
    Bytes out(params_->width(), 0);
    if (v_ != 0) {
      std::size_t nbytes = (mpz_sizeinbase(v_.get_mpz_t(), 2) + 7) / 8;
      std::size_t count = 0;
      mpz_export(out.data() + out.size() - nbytes, &count, 1, 1, 1, 0, v_.get_mpz_t());
    }
    return out;
  }

  static FieldElement from_bytes(BytesView b, const FieldParamsPtr& params) {
    mpz_class v;
    if (!b.empty()) mpz_import(v.get_mpz_t(), b.size(), 1, 1, 1, 0, b.data());
    if (v >= params->p()) throw Error(Err::MalformedSecret, "chunk not below modulus");
    return raw(std::move(v), params);
  }

 private:
  static FieldElement raw(mpz_class v, FieldParamsPtr params) {
    FieldElement e;
    e.v_ = std::move(v);
    e.params_ = std::move(params);
    return e;
  }

  void check_same(const FieldElement& o) const {
    if (!(*params_ == *o.params_)) throw Error(Err::MixedModulus);
  }

  FieldElement() = default;

  mpz_class v_;
  FieldParamsPtr params_;
};

// Modular inverse by extended Euclid.
inline FieldElement fe_inv(const FieldElement& a) {
  if (a.is_zero()) throw Error(Err::ZeroInverse);
  mpz_class r;
  mpz_invert(r.get_mpz_t(), a.value().get_mpz_t(), a.params()->p().get_mpz_t());
  return FieldElement(std::move(r), a.params());
}

// Coefficients [a_0, a_1, ..., a_n], low order first. Length equals the
// number of interpolation points; leading zeros are kept.
class SecretPolynomial {
 public:
  explicit SecretPolynomial(std::vector<FieldElement> coeffs) : coeffs_(std::move(coeffs)) {}

  const std::vector<FieldElement>& coeffs() const { return coeffs_; }
  std::size_t size() const { return coeffs_.size(); }

  bool operator==(const SecretPolynomial& o) const { return coeffs_ == o.coeffs_; }

 private:
  std::vector<FieldElement> coeffs_;
};

// Nested evaluation: a_0 + x(a_1 + x(a_2 + ...)). Costs exactly
// (len - 1) field multiplications.
inline FieldElement poly_eval_horner(const SecretPolynomial& poly, const FieldElement& x) {
  const auto& c = poly.coeffs();
  FieldElement acc = c.back();
  for (std::size_t i = c.size() - 1; i-- > 0;) {
    acc = acc * x + c[i];
  }
  return acc;
}

// Lagrange basis accumulation over the coefficient vectors. The result
// always has exactly points.size() coefficients.
inline SecretPolynomial lagrange_interpolate(
    const std::vector<std::pair<FieldElement, FieldElement>>& points) {
  const std::size_t k = points.size();
  const FieldParamsPtr& params = points.front().first.params();
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j)
      if (points[i].first == points[j].first)
        throw Error(Err::DuplicateAbscissa, points[i].first.value().get_str());

  const FieldElement zero(0, params);
  const FieldElement one(1, params);
  std::vector<FieldElement> result(k, zero);

  std::vector<FieldElement> basis;
  basis.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    // basis(x) = prod_{j != i} (x - x_j), built incrementally
    basis.assign(1, one);
    FieldElement denom = one;
    for (std::size_t j = 0; j < k; ++j) {
      if (j == i) continue;
      const FieldElement& xj = points[j].first;
      basis.push_back(zero);
      for (std::size_t d = basis.size() - 1; d > 0; --d) {
        basis[d] = basis[d - 1] - basis[d] * xj;
      }
      basis[0] = zero - basis[0] * xj;
      denom = denom * (points[i].first - xj);
    }
    FieldElement scale = points[i].second * fe_inv(denom);
    for (std::size_t d = 0; d < basis.size(); ++d) {
      result[d] = result[d] + basis[d] * scale;
    }
  }
  return SecretPolynomial(std::move(result));
}

// Uniform draw via rejection sampling on bit-masked fixed-width randoms.
inline FieldElement sample_field_element(Rng& rng, const FieldParamsPtr& params,
                                         bool exclude_zero = false) {
  const std::size_t w = params->width();
  const unsigned top_bits = static_cast<unsigned>(params->bits() % 8);
  for (;;) {
    Bytes raw = rng.bytes(w);
    if (top_bits != 0) raw[0] &= static_cast<std::uint8_t>(0xFF >> (8 - top_bits));
    mpz_class v;
    mpz_import(v.get_mpz_t(), raw.size(), 1, 1, 1, 0, raw.data());
    if (v >= params->p()) continue;
    if (exclude_zero && v == 0) continue;
    return FieldElement(std::move(v), params);
  }
}

}  // namespace gka
