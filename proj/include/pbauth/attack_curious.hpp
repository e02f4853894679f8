#pragma once

// Honest-but-curious server attack. The server never deviates from the
// protocol; it only decrypts what it legitimately receives and divides:
//
//   s_j = Dec(c_j)                    = a_j + x_j   mod n   (enrollment)
//   D_j = Dec(d_j^(r'_j^-1 mod n L))  = s_j b_j     mod n   (round 3)
//   b_j = D_j / s_j                                 mod n
//   Dec(c*_j)                         = b_j x_j     mod n   (round 1)
//   x_j = (b_j x_j) / b_j                           mod n
//   a_j = s_j - x_j                                 mod n
//
// Every quantity the chain needs sits in the server's own storage: the key,
// the enrollment record, both user->server messages, and its round-2
// ephemerals. The user's secret vectors appear nowhere in this interface.
// Divisions are multiplications by modular inverses; a coordinate whose
// denominator is not a unit mod n is flagged unrecoverable rather than
// guessed. x is recovered mod n, which is its complete effective value
// (g has order n, so exponents of g only matter mod n).

#include <string>
#include <utility>
#include <vector>

#include "pbauth/attack_report.hpp"
#include "pbauth/errors.hpp"
#include "pbauth/modmath.hpp"
#include "pbauth/paillier.hpp"
#include "pbauth/protocol.hpp"
#include "pbauth/wire.hpp"

namespace pbauth::attacks {

/// Exactly the data a legitimate server holds after one honest session.
struct CuriousServerView {
  paillier::PrivateKey sk;
  protocol::EnrollmentRecord record;
  wire::Round1Message round1;
  wire::Round3Message round3;
  std::vector<Bigint> r_prime;

  std::size_t size() const { return record.size(); }
};

/// s_j = a_j + x_j mod n, by plain Paillier decryption of the enrollment.
inline std::vector<Bigint> curious_recover_sums(
    const paillier::PrivateKey& sk, const protocol::EnrollmentRecord& record) {
  std::vector<Bigint> sums;
  sums.reserve(record.size());
  for (const auto& c : record.c) sums.push_back(paillier::decrypt(sk, c).value);
  return sums;
}

/// b_j = Dec(d_j^(r'_j^-1)) / s_j mod n; flagged where s_j is not a unit.
inline std::vector<RecoveredValue> curious_recover_b(
    const paillier::PrivateKey& sk, const CuriousServerView& view) {
  if (view.round3.d.size() != view.size() || view.r_prime.size() != view.size())
    throw ProtocolError("curious attack: view components disagree on t");
  const std::vector<Bigint> sums = curious_recover_sums(sk, view.record);
  const Bigint n_lambda = sk.n * sk.lambda;
  std::vector<RecoveredValue> out;
  out.reserve(view.size());
  for (std::size_t j = 0; j < view.size(); ++j) {
    Bigint unblinded = modmath::mod_pow(
        view.round3.d[j], modmath::mod_inv(view.r_prime[j], n_lambda), sk.n_squared);
    Bigint product = paillier::decrypt(sk, paillier::Ciphertext{unblinded}).value;
    if (modmath::gcd(sums[j], sk.n) != 1) {
      out.push_back(RecoveredValue::unrecoverable());
      continue;
    }
    out.push_back({product * modmath::mod_inv(sums[j], sk.n) % sk.n, true});
  }
  return out;
}

struct RecoveredKeyAndTemplate {
  std::vector<RecoveredValue> x_mod_n;
  std::vector<RecoveredValue> a;
};

/// x_j = Dec(c*_j) / b_j mod n and a_j = s_j - x_j mod n; coordinates whose
/// recovered b_j is missing, zero, or not a unit are flagged through.
inline RecoveredKeyAndTemplate curious_recover_x_and_a(
    const paillier::PrivateKey& sk, const CuriousServerView& view,
    const std::vector<Bigint>& sums, const std::vector<RecoveredValue>& b) {
  if (view.round1.c_star.size() != view.size() || sums.size() != view.size() ||
      b.size() != view.size())
    throw ProtocolError("curious attack: view components disagree on t");
  RecoveredKeyAndTemplate out;
  out.x_mod_n.reserve(view.size());
  out.a.reserve(view.size());
  for (std::size_t j = 0; j < view.size(); ++j) {
    Bigint bx =
        paillier::decrypt(sk, paillier::Ciphertext{view.round1.c_star[j]}).value;
    if (!b[j].recoverable || b[j].value == 0 ||
        modmath::gcd(b[j].value, sk.n) != 1) {
      out.x_mod_n.push_back(RecoveredValue::unrecoverable());
      out.a.push_back(RecoveredValue::unrecoverable());
      continue;
    }
    Bigint x = bx * modmath::mod_inv(b[j].value, sk.n) % sk.n;
    Bigint a = ((sums[j] - x) % sk.n + sk.n) % sk.n;
    out.x_mod_n.push_back({std::move(x), true});
    out.a.push_back({std::move(a), true});
  }
  return out;
}

/// The full recovery chain; `verified` stays false until the harness
/// compares the report against ground truth.
inline AttackReport curious_attack(const CuriousServerView& view) {
  AttackReport report;
  report.attack = kCuriousServerAttack;
  report.recovered_b = curious_recover_b(view.sk, view);
  auto xa = curious_recover_x_and_a(view.sk, view,
                                    curious_recover_sums(view.sk, view.record),
                                    report.recovered_b);
  report.recovered_x_mod_n = std::move(xa.x_mod_n);
  report.recovered_a = std::move(xa.a);
  return report;
}

}  // namespace pbauth::attacks
