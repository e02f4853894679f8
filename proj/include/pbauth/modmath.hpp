#pragma once

// Arbitrary-precision modular arithmetic and probable-prime generation.
// All modular results are canonicalized into [0, modulus).

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "pbauth/errors.hpp"

namespace pbauth::modmath {

using pbauth::Bigint;

// ---------------------------------------------------------------------------
// Randomness

/// Source of uniform random bits. Single-owner; everything downstream takes
/// it by reference so tests can swap in the deterministic implementation.
class RandomSource {
 public:
  virtual ~RandomSource() = default;

  /// Uniform value in [0, 2^bits).
  virtual Bigint draw_bits(std::size_t bits) = 0;

  /// Uniform value in [0, bound) by rejection sampling.
  Bigint draw_below(const Bigint& bound) {
    if (bound < 1) throw ParameterError("draw_below: bound must be >= 1");
    const std::size_t k = mpz_sizeinbase(bound.get_mpz_t(), 2);
    for (;;) {
      Bigint v = draw_bits(k);
      if (v < bound) return v;
    }
  }
};

/// OS-backed source reading /dev/urandom. Default for anything secret.
class SystemRandom final : public RandomSource {
 public:
  SystemRandom() : dev_("/dev/urandom", std::ios::binary) {
    if (!dev_) throw IoError("cannot open /dev/urandom");
  }

  Bigint draw_bits(std::size_t bits) override {
    if (bits == 0) return 0;
    const std::size_t nbytes = (bits + 7) / 8;
    std::vector<unsigned char> buf(nbytes);
    dev_.read(reinterpret_cast<char*>(buf.data()),
              static_cast<std::streamsize>(nbytes));
    if (!dev_) throw IoError("short read from /dev/urandom");
    if (bits % 8 != 0) buf[0] &= static_cast<unsigned char>((1u << (bits % 8)) - 1);
    Bigint v;
    mpz_import(v.get_mpz_t(), nbytes, 1, 1, 0, 0, buf.data());
    return v;
  }

 private:
  std::ifstream dev_;
};

/// Deterministic Mersenne-twister stream. NOT cryptographic; exists solely
/// for reproducible tests and demos, and must be requested explicitly
/// (the CLI gates it behind --insecure-seeded-rng).
class InsecureSeededRandom final : public RandomSource {
 public:
  explicit InsecureSeededRandom(std::uint64_t seed) : gen_(gmp_randinit_mt) {
    gen_.seed(Bigint(static_cast<unsigned long>(seed)));
  }

  Bigint draw_bits(std::size_t bits) override {
    if (bits == 0) return 0;
    return gen_.get_z_bits(static_cast<unsigned long>(bits));
  }

 private:
  gmp_randclass gen_;
};

// ---------------------------------------------------------------------------
// Modular arithmetic

/// base^exp mod modulus.
inline Bigint mod_pow(const Bigint& base, const Bigint& exp, const Bigint& modulus) {
  if (modulus < 2) throw InvalidModulusError("mod_pow: modulus must be >= 2");
  if (exp < 0) throw ParameterError("mod_pow: negative exponent");
  Bigint out;
  mpz_powm(out.get_mpz_t(), base.get_mpz_t(), exp.get_mpz_t(), modulus.get_mpz_t());
  return out;
}

/// a^-1 mod modulus; throws NotInvertibleError (carrying the gcd) otherwise.
inline Bigint mod_inv(const Bigint& a, const Bigint& modulus) {
  if (modulus < 2) throw InvalidModulusError("mod_inv: modulus must be >= 2");
  Bigint out;
  if (mpz_invert(out.get_mpz_t(), a.get_mpz_t(), modulus.get_mpz_t()) == 0) {
    Bigint g;
    mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), modulus.get_mpz_t());
    throw NotInvertibleError("mod_inv: gcd(a, modulus) = " + g.get_str() + " != 1",
                             g);
  }
  return out;
}

inline Bigint gcd(const Bigint& a, const Bigint& b) {
  Bigint g;
  mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return g;
}

inline Bigint lcm(const Bigint& a, const Bigint& b) {
  if (a < 1 || b < 1) throw ParameterError("lcm: inputs must be >= 1");
  Bigint out;
  mpz_lcm(out.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return out;
}

/// Uniform unit of [1, modulus): rejection-sample until gcd = 1.
inline Bigint sample_unit(const Bigint& modulus, RandomSource& rng) {
  if (modulus < 2) throw InvalidModulusError("sample_unit: modulus must be >= 2");
  for (;;) {
    Bigint v = rng.draw_below(modulus);
    if (v >= 1 && gcd(v, modulus) == 1) return v;
  }
}

// ---------------------------------------------------------------------------
// Primality

namespace detail {

inline const std::vector<unsigned long>& small_primes() {
  static const std::vector<unsigned long> primes = [] {
    std::vector<unsigned long> out;
    std::vector<bool> sieve(1001, true);
    for (unsigned long i = 2; i <= 1000; ++i) {
      if (!sieve[i]) continue;
      out.push_back(i);
      for (unsigned long j = i * i; j <= 1000; j += i) sieve[j] = false;
    }
    return out;
  }();
  return primes;
}

/// One Miller-Rabin round: true if `n` is a strong probable prime to base `a`.
inline bool mr_round(const Bigint& n, const Bigint& a, const Bigint& n_minus_1,
                     const Bigint& odd_part, unsigned long two_exponent) {
  Bigint y = mod_pow(a, odd_part, n);
  if (y == 1 || y == n_minus_1) return true;
  for (unsigned long i = 1; i < two_exponent; ++i) {
    y = y * y % n;
    if (y == n_minus_1) return true;
    if (y == 1) return false;
  }
  return false;
}

}  // namespace detail

/// Miller-Rabin with `rounds` random bases. Composite inputs survive with
/// probability <= 4^-rounds.
inline bool is_probable_prime(const Bigint& n, RandomSource& rng, int rounds = 40) {
  if (n < 2) return false;
  for (unsigned long p : detail::small_primes()) {
    if (mpz_divisible_ui_p(n.get_mpz_t(), p)) return n == p;
  }
  Bigint n_minus_1 = n - 1;
  unsigned long s = mpz_scan1(n_minus_1.get_mpz_t(), 0);
  Bigint odd_part = n_minus_1 >> s;
  for (int i = 0; i < rounds; ++i) {
    Bigint a = 2 + rng.draw_below(n - 3);  // base in [2, n-2]
    if (!detail::mr_round(n, a, n_minus_1, odd_part, s)) return false;
  }
  return true;
}

/// Odd probable prime of exactly `bits` bits (top and bottom bits forced,
/// then 40 Miller-Rabin rounds).
inline Bigint gen_probable_prime(int bits, RandomSource& rng) {
  if (bits < 8) throw ParameterError("gen_probable_prime: bits must be >= 8");
  for (;;) {
    Bigint cand = rng.draw_bits(static_cast<std::size_t>(bits));
    mpz_setbit(cand.get_mpz_t(), static_cast<mp_bitcnt_t>(bits - 1));
    mpz_setbit(cand.get_mpz_t(), 0);
    if (is_probable_prime(cand, rng)) return cand;
  }
}

// ---------------------------------------------------------------------------
// Hex encoding (wire and key files use lowercase hex, no leading zeros)

inline std::string to_hex(const Bigint& v) {
  if (v < 0) throw ParameterError("to_hex: negative value");
  return v.get_str(16);
}

inline Bigint from_hex(const std::string& s) {
  if (s.empty()) throw ParameterError("from_hex: empty string");
  if (s.size() > 1 && s[0] == '0')
    throw ParameterError("from_hex: leading zeros not canonical: " + s);
  for (char c : s) {
    const bool ok = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
    if (!ok) throw ParameterError("from_hex: invalid character in: " + s);
  }
  Bigint v;
  if (mpz_set_str(v.get_mpz_t(), s.c_str(), 16) != 0)
    throw ParameterError("from_hex: unparsable: " + s);
  return v;
}

}  // namespace pbauth::modmath
