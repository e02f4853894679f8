#pragma once

// Three-round blinded inner-product authentication between a user device and
// an authentication server (AS) holding the Paillier private key.
//
//   enrollment : c_j  = g^(a_j + x_j) r_j^n           mod n^2
//   round 1    : c*_j = (g^(b_j) r*_j^n)^(x_j)        mod n^2   user -> AS
//   round 2    : c'_j = c_j^(r'_j)                    mod n^2   AS -> user
//   round 3    : d_j  = c'_j^(b_j)                    mod n^2   user -> AS
//   decision   : t_j  = d_j^(r'_j^-1 mod n lambda) / c*_j, T = prod t_j,
//                T' = Dec(T) = sum a_j b_j,  accept iff T' >= T_S
//
// a is the enrolled reference template, b the freshly sampled features, x and
// r the user's long-term key vectors (units mod n^2; only x mod n ever
// affects a plaintext since g has order n). Feature bounds keep the inner
// product below n, so T' is exact, never wrapped.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pbauth/errors.hpp"
#include "pbauth/features.hpp"
#include "pbauth/modmath.hpp"
#include "pbauth/paillier.hpp"
#include "pbauth/wire.hpp"

namespace pbauth::protocol {

using modmath::RandomSource;
using paillier::Ciphertext;
using paillier::PrivateKey;
using paillier::PublicKey;
using wire::Decision;
using wire::Round1Message;
using wire::Round2Message;
using wire::Round3Message;

/// Long-term user key vectors; every element a unit mod n^2.
struct UserSecrets {
  std::vector<Bigint> x;
  std::vector<Bigint> r;

  std::size_t size() const { return x.size(); }
  bool operator==(const UserSecrets&) const = default;

  static UserSecrets sample(const PublicKey& pk, std::size_t t, RandomSource& rng) {
    if (t == 0) throw ParameterError("t must be >= 1");
    UserSecrets s;
    s.x.reserve(t);
    s.r.reserve(t);
    for (std::size_t j = 0; j < t; ++j) s.x.push_back(modmath::sample_unit(pk.n_squared, rng));
    for (std::size_t j = 0; j < t; ++j) s.r.push_back(modmath::sample_unit(pk.n_squared, rng));
    return s;
  }
};

struct EnrollmentRecord {
  std::string user_id;
  std::vector<Ciphertext> c;

  std::size_t size() const { return c.size(); }
  bool operator==(const EnrollmentRecord&) const = default;
};

/// User-side carryover between rounds 1 and 3.
struct Round1State {
  FeatureVector b;
};

/// Server-side per-session state; r_prime elements are units mod n*lambda so
/// the decision step can invert them.
struct ServerSession {
  std::string user_id;
  std::vector<Bigint> r_prime;
  Round1Message c_star;

  std::size_t size() const { return r_prime.size(); }
};

namespace detail {

inline void check_features(const PublicKey& pk, const FeatureVector& f) {
  if (f.size() == 0) throw ParameterError("feature vector must have t >= 1");
  for (std::uint64_t v : f.elements)
    if (v >= f.bound) throw ParameterError("feature out of bound");
  // Elements reach at most bound-1, so t * (bound-1)^2 < n keeps the inner
  // product below n and the decision exact.
  Bigint top = Bigint(static_cast<unsigned long>(f.bound)) - 1;
  Bigint cap = Bigint(static_cast<unsigned long>(f.size())) * top * top;
  if (cap >= pk.n)
    throw ParameterError("t * (bound-1)^2 must stay below n for an exact inner product");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Enrollment

inline EnrollmentRecord enroll_with_secrets(const PublicKey& pk,
                                            const std::string& user_id,
                                            const FeatureVector& a,
                                            const UserSecrets& secrets) {
  detail::check_features(pk, a);
  if (secrets.x.size() != a.size() || secrets.r.size() != a.size())
    throw ProtocolError("enroll: secrets and features disagree on t");
  EnrollmentRecord record;
  record.user_id = user_id;
  record.c.reserve(a.size());
  for (std::size_t j = 0; j < a.size(); ++j) {
    Bigint exponent = Bigint(static_cast<unsigned long>(a.elements[j])) + secrets.x[j];
    Bigint value = modmath::mod_pow(pk.g, exponent, pk.n_squared) *
                   modmath::mod_pow(secrets.r[j], pk.n, pk.n_squared) % pk.n_squared;
    record.c.push_back(Ciphertext{std::move(value)});
  }
  return record;
}

inline std::pair<UserSecrets, EnrollmentRecord> enroll(const PublicKey& pk,
                                                       const std::string& user_id,
                                                       const FeatureVector& a,
                                                       RandomSource& rng) {
  detail::check_features(pk, a);
  UserSecrets secrets = UserSecrets::sample(pk, a.size(), rng);
  return {secrets, enroll_with_secrets(pk, user_id, a, secrets)};
}

// ---------------------------------------------------------------------------
// Round 1 (user): encrypt the sampled features under x with fresh blinding r*.

inline Round1Message user_round1_with_ephemerals(const PublicKey& pk,
                                                 const UserSecrets& secrets,
                                                 const FeatureVector& b,
                                                 const std::vector<Bigint>& r_star) {
  detail::check_features(pk, b);
  if (b.size() != secrets.size())
    throw ProtocolError("round1: feature vector length differs from enrolled t");
  if (r_star.size() != b.size())
    throw ProtocolError("round1: ephemeral vector length differs from t");
  Round1Message msg;
  msg.c_star.reserve(b.size());
  for (std::size_t j = 0; j < b.size(); ++j) {
    Bigint base = modmath::mod_pow(pk.g, Bigint(static_cast<unsigned long>(b.elements[j])),
                                   pk.n_squared) *
                  modmath::mod_pow(r_star[j], pk.n, pk.n_squared) % pk.n_squared;
    msg.c_star.push_back(modmath::mod_pow(base, secrets.x[j], pk.n_squared));
  }
  return msg;
}

inline std::pair<Round1Message, Round1State> user_round1(const PublicKey& pk,
                                                         const UserSecrets& secrets,
                                                         const FeatureVector& b,
                                                         RandomSource& rng) {
  detail::check_features(pk, b);
  if (b.size() != secrets.size())
    throw ProtocolError("round1: feature vector length differs from enrolled t");
  std::vector<Bigint> r_star;
  r_star.reserve(b.size());
  for (std::size_t j = 0; j < b.size(); ++j)
    r_star.push_back(modmath::sample_unit(pk.n_squared, rng));
  return {user_round1_with_ephemerals(pk, secrets, b, r_star), Round1State{b}};
}

// ---------------------------------------------------------------------------
// Round 2 (server): blind the enrolled template with ephemeral exponents r'.

inline std::pair<Round2Message, ServerSession> server_round2_with_blinding(
    const PublicKey& pk, const PrivateKey& sk, const EnrollmentRecord& record,
    const Round1Message& msg, std::vector<Bigint> r_prime) {
  if (msg.c_star.size() != record.size())
    throw ProtocolError("round2: message length differs from enrolled t");
  if (r_prime.size() != record.size())
    throw ProtocolError("round2: blinding vector length differs from t");
  wire::validate_entries(pk, msg.c_star);
  Bigint n_lambda = sk.n * sk.lambda;
  for (const Bigint& rp : r_prime)
    if (modmath::gcd(rp, n_lambda) != 1)
      throw ParameterError("round2: blinding exponent not a unit mod n lambda");
  Round2Message out;
  out.c_prime.reserve(record.size());
  for (std::size_t j = 0; j < record.size(); ++j) {
    if (modmath::gcd(record.c[j].value, pk.n) != 1)
      throw MalformedMessageError("round2: enrolled ciphertext is not a unit");
    out.c_prime.push_back(modmath::mod_pow(record.c[j].value, r_prime[j], pk.n_squared));
  }
  ServerSession session{record.user_id, std::move(r_prime), msg};
  return {out, std::move(session)};
}

inline std::pair<Round2Message, ServerSession> server_round2(
    const PublicKey& pk, const PrivateKey& sk, const EnrollmentRecord& record,
    const Round1Message& msg, RandomSource& rng) {
  if (msg.c_star.size() != record.size())
    throw ProtocolError("round2: message length differs from enrolled t");
  Bigint n_lambda = sk.n * sk.lambda;
  std::vector<Bigint> r_prime;
  r_prime.reserve(record.size());
  for (std::size_t j = 0; j < record.size(); ++j)
    r_prime.push_back(modmath::sample_unit(n_lambda, rng));
  return server_round2_with_blinding(pk, sk, record, msg, std::move(r_prime));
}

// ---------------------------------------------------------------------------
// Round 3 (user): raise each blinded template element to the sampled feature.

inline Round3Message user_round3(const PublicKey& pk, const Round1State& state,
                                 const Round2Message& msg) {
  if (msg.c_prime.size() != state.b.size())
    throw ProtocolError("round3: message length differs from t");
  wire::validate_entries(pk, msg.c_prime);
  Round3Message out;
  out.d.reserve(msg.c_prime.size());
  for (std::size_t j = 0; j < msg.c_prime.size(); ++j)
    out.d.push_back(modmath::mod_pow(
        msg.c_prime[j], Bigint(static_cast<unsigned long>(state.b.elements[j])),
        pk.n_squared));
  return out;
}

// ---------------------------------------------------------------------------
// Decision: strip both blindings, aggregate, decrypt the inner product.

inline Decision server_decide(const PrivateKey& sk, const ServerSession& session,
                              const Round3Message& msg, const Bigint& threshold) {
  if (session.c_star.c_star.size() != session.r_prime.size())
    throw ProtocolError("decide: inconsistent session state");
  if (msg.d.size() != session.size())
    throw ProtocolError("decide: message length differs from session t");
  PublicKey pk = PublicKey::from_n(sk.n);
  wire::validate_entries(pk, msg.d);
  Bigint n_lambda = sk.n * sk.lambda;
  Bigint aggregate = 1;
  for (std::size_t j = 0; j < msg.d.size(); ++j) {
    Bigint inv_r;
    try {
      inv_r = modmath::mod_inv(session.r_prime[j], n_lambda);
    } catch (const NotInvertibleError&) {
      throw Error("decide: session blinding not invertible mod n lambda");
    }
    // t_j = d_j^(r'_j^-1) / c*_j; both user blindings collapse into an
    // encryption factor that decryption removes.
    Bigint t_j = modmath::mod_pow(msg.d[j], inv_r, sk.n_squared) *
                 modmath::mod_inv(session.c_star.c_star[j], sk.n_squared) %
                 sk.n_squared;
    aggregate = aggregate * t_j % sk.n_squared;
  }
  Decision decision;
  decision.inner_product = paillier::decrypt(sk, Ciphertext{aggregate}).value;
  decision.threshold = threshold;
  decision.accepted = decision.inner_product >= threshold;
  return decision;
}

// ---------------------------------------------------------------------------
// Honest composition of rounds 1-3 plus the decision, with a verbatim
// transcript of every message.

struct HonestRun {
  Decision decision;
  wire::Transcript transcript;
  ServerSession session;  // retained ephemerals; replay and attacks need them
};

inline HonestRun run_honest_session(const PublicKey& pk, const PrivateKey& sk,
                                    const EnrollmentRecord& record,
                                    const UserSecrets& secrets,
                                    const FeatureVector& b, const Bigint& threshold,
                                    RandomSource& rng,
                                    const std::string& session_id = "") {
  wire::Transcript transcript;
  transcript.session_id =
      session_id.empty() ? record.user_id + "-session" : session_id;

  auto [msg1, state] = user_round1(pk, secrets, b, rng);
  transcript.append(wire::kDirUserToServer,
                    wire::ProtocolMessage{wire::MessageType::round1, record.user_id,
                                          msg1.c_star}
                        .dump());

  auto [msg2, session] = server_round2(pk, sk, record, msg1, rng);
  transcript.append(wire::kDirServerToUser,
                    wire::ProtocolMessage{wire::MessageType::round2, record.user_id,
                                          msg2.c_prime}
                        .dump());

  Round3Message msg3 = user_round3(pk, state, msg2);
  transcript.append(wire::kDirUserToServer,
                    wire::ProtocolMessage{wire::MessageType::round3, record.user_id,
                                          msg3.d}
                        .dump());

  Decision decision = server_decide(sk, session, msg3, threshold);
  transcript.outcome = decision;
  return HonestRun{decision, std::move(transcript), std::move(session)};
}

// ---------------------------------------------------------------------------
// Enrollment store: one JSON file keyed by user_id.

inline nlohmann::json enrollment_store_to_json(
    const std::vector<EnrollmentRecord>& records) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& rec : records) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& c : rec.c) entries.push_back(modmath::to_hex(c.value));
    j[rec.user_id] = {{"c", entries}};
  }
  return j;
}

inline std::vector<EnrollmentRecord> enrollment_store_from_json(
    const nlohmann::json& j) {
  if (!j.is_object()) throw ParameterError("enrollment store: expected an object");
  std::vector<EnrollmentRecord> records;
  for (const auto& [user_id, body] : j.items()) {
    if (!body.is_object() || !body.contains("c") || !body.at("c").is_array())
      throw ParameterError("enrollment store: user entry lacks ciphertext list");
    EnrollmentRecord rec;
    rec.user_id = user_id;
    for (const auto& e : body.at("c"))
      rec.c.push_back(Ciphertext{modmath::from_hex(e.get<std::string>())});
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace pbauth::protocol
