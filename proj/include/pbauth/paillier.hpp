#pragma once

// Paillier cryptosystem over Z*_{n^2} with g fixed to n+1:
//   keygen : n = p q, lambda = lcm(p-1, q-1), mu = lambda^-1 mod n
//   enc    : c = g^m r^n = (1 + m n) r^n  mod n^2,  r a fresh unit
//   dec    : m = L(c^lambda mod n^2) mu mod n,  L(u) = (u - 1) / n
// The r^n blinding factor vanishes at decryption since r^(n lambda) = 1 mod n^2.
// Ciphertext multiplication adds plaintexts, division subtracts, and
// exponentiation by k scales by k, all mod n.

#include <string>
#include <utility>

#include <json.hpp>

#include "pbauth/errors.hpp"
#include "pbauth/modmath.hpp"

namespace pbauth::paillier {

using modmath::RandomSource;

struct PublicKey {
  Bigint n;
  Bigint g;          // always n + 1
  Bigint n_squared;  // cached n^2

  static PublicKey from_n(Bigint modulus) {
    PublicKey pk;
    pk.n = std::move(modulus);
    pk.g = pk.n + 1;
    pk.n_squared = pk.n * pk.n;
    return pk;
  }

  bool operator==(const PublicKey&) const = default;
};

struct PrivateKey {
  Bigint lambda;     // lcm(p-1, q-1)
  Bigint mu;         // lambda^-1 mod n
  Bigint n;
  Bigint n_squared;  // cached n^2

  bool operator==(const PrivateKey&) const = default;
};

struct Plaintext {
  Bigint value;
  bool operator==(const Plaintext&) const = default;
};

struct Ciphertext {
  Bigint value;
  bool operator==(const Ciphertext&) const = default;
};

namespace detail {

inline std::pair<PublicKey, PrivateKey> make_pair_from(const Bigint& p,
                                                       const Bigint& q) {
  Bigint n = p * q;
  Bigint lambda = modmath::lcm(p - 1, q - 1);
  if (modmath::gcd(lambda, n) != 1)
    throw ParameterError("keygen: lambda not invertible mod n");
  PublicKey pk = PublicKey::from_n(n);
  PrivateKey sk;
  sk.lambda = lambda;
  sk.mu = modmath::mod_inv(lambda, n);
  sk.n = n;
  sk.n_squared = pk.n_squared;
  return {pk, sk};
}

}  // namespace detail

/// Test hook: build a key pair from caller-supplied primes (hand-checkable
/// toy keys such as p=3, q=5 or p=5, q=7).
inline std::pair<PublicKey, PrivateKey> keypair_from_primes(const Bigint& p,
                                                            const Bigint& q) {
  if (p < 2 || q < 2) throw ParameterError("keypair_from_primes: primes must be >= 2");
  if (p == q) throw ParameterError("keypair_from_primes: primes must be distinct");
  return detail::make_pair_from(p, q);
}

/// Generate a key pair whose modulus n has exactly `bits` bits
/// (each prime gets bits/2).
inline std::pair<PublicKey, PrivateKey> keygen(int bits, RandomSource& rng) {
  if (bits < 16 || bits % 2 != 0)
    throw ParameterError("keygen: bits must be even and >= 16");
  for (;;) {
    Bigint p = modmath::gen_probable_prime(bits / 2, rng);
    Bigint q = modmath::gen_probable_prime(bits / 2, rng);
    if (p == q) continue;
    Bigint n = p * q;
    if (mpz_sizeinbase(n.get_mpz_t(), 2) != static_cast<std::size_t>(bits)) continue;
    if (modmath::gcd(modmath::lcm(p - 1, q - 1), n) != 1) continue;
    return detail::make_pair_from(p, q);
  }
}

/// c = (1 + m n) r^n mod n^2 with caller-supplied blinding r (must be a unit).
inline Ciphertext encrypt_with_r(const PublicKey& pk, const Plaintext& m,
                                 const Bigint& r) {
  if (m.value < 0 || m.value >= pk.n)
    throw PlaintextRangeError("encrypt: plaintext not in [0, n)");
  Bigint rc = r % pk.n_squared;
  if (rc < 0) rc += pk.n_squared;
  if (modmath::gcd(rc, pk.n) != 1)
    throw ParameterError("encrypt: blinding r is not a unit");
  Bigint gm = (1 + m.value * pk.n) % pk.n_squared;  // g = n+1, so g^m = 1 + m n
  return Ciphertext{gm * modmath::mod_pow(rc, pk.n, pk.n_squared) % pk.n_squared};
}

inline Ciphertext encrypt(const PublicKey& pk, const Plaintext& m,
                          RandomSource& rng) {
  return encrypt_with_r(pk, m, modmath::sample_unit(pk.n_squared, rng));
}

inline Plaintext decrypt(const PrivateKey& sk, const Ciphertext& c) {
  Bigint cv = c.value % sk.n_squared;
  if (cv < 0) cv += sk.n_squared;
  if (modmath::gcd(cv, sk.n) != 1)
    throw MalformedCiphertextError("decrypt: ciphertext shares a factor with n");
  Bigint u = modmath::mod_pow(cv, sk.lambda, sk.n_squared) - 1;
  if (!mpz_divisible_p(u.get_mpz_t(), sk.n.get_mpz_t()))
    throw MalformedCiphertextError("decrypt: c^lambda not of 1 + kn form");
  return Plaintext{u / sk.n * sk.mu % sk.n};
}

/// Dec(hom_add(c1, c2)) = m1 + m2 mod n.
inline Ciphertext hom_add(const PublicKey& pk, const Ciphertext& c1,
                          const Ciphertext& c2) {
  return Ciphertext{c1.value * c2.value % pk.n_squared};
}

/// Dec(hom_sub(c1, c2)) = m1 - m2 mod n.
inline Ciphertext hom_sub(const PublicKey& pk, const Ciphertext& c1,
                          const Ciphertext& c2) {
  try {
    return Ciphertext{c1.value * modmath::mod_inv(c2.value, pk.n_squared) %
                      pk.n_squared};
  } catch (const NotInvertibleError&) {
    throw MalformedCiphertextError("hom_sub: subtrahend is not invertible");
  }
}

/// Dec(hom_scale(c, k)) = k m mod n.
inline Ciphertext hom_scale(const PublicKey& pk, const Ciphertext& c,
                            const Bigint& k) {
  return Ciphertext{modmath::mod_pow(c.value, k, pk.n_squared)};
}

// ---------------------------------------------------------------------------
// Key serialization: lowercase hex strings, {"n","g"} / {"lambda","mu","n"}.

inline nlohmann::json to_json(const PublicKey& pk) {
  return {{"n", modmath::to_hex(pk.n)}, {"g", modmath::to_hex(pk.g)}};
}

inline nlohmann::json to_json(const PrivateKey& sk) {
  return {{"lambda", modmath::to_hex(sk.lambda)},
          {"mu", modmath::to_hex(sk.mu)},
          {"n", modmath::to_hex(sk.n)}};
}

inline PublicKey public_key_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("n") || !j.contains("g"))
    throw ParameterError("public key json: expected fields n, g");
  PublicKey pk = PublicKey::from_n(modmath::from_hex(j.at("n").get<std::string>()));
  if (modmath::from_hex(j.at("g").get<std::string>()) != pk.g)
    throw ParameterError("public key json: g != n + 1");
  if (pk.n < 3) throw ParameterError("public key json: modulus too small");
  return pk;
}

inline PrivateKey private_key_from_json(const nlohmann::json& j) {
  for (const char* field : {"lambda", "mu", "n"}) {
    if (!j.is_object() || !j.contains(field))
      throw ParameterError(std::string("private key json: missing field ") + field);
  }
  PrivateKey sk;
  sk.lambda = modmath::from_hex(j.at("lambda").get<std::string>());
  sk.mu = modmath::from_hex(j.at("mu").get<std::string>());
  sk.n = modmath::from_hex(j.at("n").get<std::string>());
  sk.n_squared = sk.n * sk.n;
  if (sk.n < 3 || sk.lambda < 1) throw ParameterError("private key json: bad values");
  if (sk.mu * sk.lambda % sk.n != 1)
    throw ParameterError("private key json: mu * lambda != 1 mod n");
  return sk;
}

}  // namespace pbauth::paillier
