#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <regex>
#include <sstream>

#include "pbauth/attacks.hpp"
#include "pbauth/protocol.hpp"
#include "support/oracles.hpp"

using namespace pbauth;
using namespace pbauth::attacks;
using namespace pbauth::protocol;
using modmath::InsecureSeededRandom;

namespace {

// Toy curious-server view for p=3, q=5, t=1, a=(3), x=(8), r=(2), b=(2),
// r*=(2), r'=(7). The wire values 113 / 16 / 214 are the hand-checked
// protocol outputs frozen in test_protocol.cpp.
CuriousServerView make_toy_view() {
  auto [pk, sk] = paillier::keypair_from_primes(3, 5);
  CuriousServerView view;
  view.sk = sk;
  view.record =
      enroll_with_secrets(pk, "toy", FeatureVector{{3}, 4}, UserSecrets{{8}, {2}});
  view.round1 =
      user_round1_with_ephemerals(pk, UserSecrets{{8}, {2}}, FeatureVector{{2}, 4}, {2});
  auto [msg2, session] =
      server_round2_with_blinding(pk, sk, view.record, view.round1, {7});
  view.round3 = user_round3(pk, Round1State{FeatureVector{{2}, 4}}, msg2);
  view.r_prime = session.r_prime;
  return view;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool mentions_identifier(const std::string& text, const std::string& ident) {
  return std::regex_search(text, std::regex("\\b" + ident + "\\b"));
}

}  // namespace

TEST_CASE("curious server reads a+x straight out of the enrollment", "[attacks]") {
  CuriousServerView view = make_toy_view();
  CHECK(curious_recover_sums(view.sk, view.record) == std::vector<Bigint>{11});
}

TEST_CASE("curious sums wrap mod n", "[attacks]") {
  auto [pk, sk] = paillier::keypair_from_primes(3, 5);
  // x = 14 = n - 1, so s = (3 + 14) mod 15 = 2.
  auto record =
      enroll_with_secrets(pk, "toy", FeatureVector{{3}, 4}, UserSecrets{{14}, {2}});
  CHECK(curious_recover_sums(sk, record) == std::vector<Bigint>{2});
}

TEST_CASE("curious sums equal x for an all-zero template", "[attacks]") {
  InsecureSeededRandom rng(101);
  auto [pk, sk] = paillier::keygen(128, rng);
  FeatureVector a{{0, 0, 0}, 16};
  auto [secrets, record] = enroll(pk, "u", a, rng);
  auto sums = curious_recover_sums(sk, record);
  for (std::size_t j = 0; j < 3; ++j) CHECK(sums[j] == secrets.x[j] % pk.n);
}

TEST_CASE("curious recovery of b on the toy instance", "[attacks]") {
  CuriousServerView view = make_toy_view();
  // D = Dec(214^43 mod 225) = 7, then 7 * 11^-1 = 7 * 11 = 77 = 2 mod 15.
  CHECK(oracles::naive_pow_mod(214, 43, 225) == 169);
  auto b = curious_recover_b(view.sk, view);
  REQUIRE(b.size() == 1);
  CHECK(b[0].recoverable);
  CHECK(b[0].value == 2);
}

TEST_CASE("curious recovery flags a non-unit denominator", "[attacks]") {
  auto [pk, sk] = paillier::keypair_from_primes(3, 5);
  // a=(1), x=(11): s = 12, gcd(12, 15) = 3, so b is unrecoverable.
  UserSecrets secrets{{11}, {2}};
  FeatureVector a{{1}, 2};
  FeatureVector b{{1}, 2};
  CuriousServerView view;
  view.sk = sk;
  view.record = enroll_with_secrets(pk, "toy", a, secrets);
  view.round1 = user_round1_with_ephemerals(pk, secrets, b, {2});
  auto [msg2, session] =
      server_round2_with_blinding(pk, sk, view.record, view.round1, {7});
  view.round3 = user_round3(pk, Round1State{b}, msg2);
  view.r_prime = session.r_prime;

  CHECK(curious_recover_sums(sk, view.record) == std::vector<Bigint>{12});
  auto recovered = curious_recover_b(sk, view);
  REQUIRE(recovered.size() == 1);
  CHECK_FALSE(recovered[0].recoverable);

  AttackReport report = curious_attack(view);
  CHECK(report.flags() == std::vector<std::string>{"b[0]", "x[0]", "a[0]"});
}

TEST_CASE("zero sampled feature propagates and blocks x and a", "[attacks]") {
  auto [pk, sk] = paillier::keypair_from_primes(3, 5);
  UserSecrets secrets{{8}, {2}};
  FeatureVector a{{3}, 4};
  FeatureVector b{{0}, 4};
  CuriousServerView view;
  view.sk = sk;
  view.record = enroll_with_secrets(pk, "toy", a, secrets);
  view.round1 = user_round1_with_ephemerals(pk, secrets, b, {2});
  auto [msg2, session] =
      server_round2_with_blinding(pk, sk, view.record, view.round1, {7});
  view.round3 = user_round3(pk, Round1State{b}, msg2);
  view.r_prime = session.r_prime;

  auto recovered_b = curious_recover_b(sk, view);
  REQUIRE(recovered_b.size() == 1);
  CHECK(recovered_b[0].recoverable);
  CHECK(recovered_b[0].value == 0);

  auto xa = curious_recover_x_and_a(sk, view, curious_recover_sums(sk, view.record),
                                    recovered_b);
  CHECK_FALSE(xa.x_mod_n[0].recoverable);
  CHECK_FALSE(xa.a[0].recoverable);
}

TEST_CASE("recovered b that shares a factor with n blocks x and a", "[attacks]") {
  auto [pk, sk] = paillier::keypair_from_primes(3, 5);
  UserSecrets secrets{{2}, {2}};  // s = 2 + 2 = 4, a unit mod 15
  FeatureVector a{{2}, 4};
  FeatureVector b{{3}, 4};  // gcd(3, 15) = 3
  CuriousServerView view;
  view.sk = sk;
  view.record = enroll_with_secrets(pk, "toy", a, secrets);
  view.round1 = user_round1_with_ephemerals(pk, secrets, b, {2});
  auto [msg2, session] =
      server_round2_with_blinding(pk, sk, view.record, view.round1, {7});
  view.round3 = user_round3(pk, Round1State{b}, msg2);
  view.r_prime = session.r_prime;

  auto recovered_b = curious_recover_b(sk, view);
  CHECK(recovered_b[0].recoverable);
  CHECK(recovered_b[0].value == 3);
  auto xa = curious_recover_x_and_a(sk, view, curious_recover_sums(sk, view.record),
                                    recovered_b);
  CHECK_FALSE(xa.x_mod_n[0].recoverable);
  CHECK_FALSE(xa.a[0].recoverable);
}

TEST_CASE("curious recovery of x and a on the toy instance", "[attacks]") {
  CuriousServerView view = make_toy_view();
  auto sums = curious_recover_sums(view.sk, view.record);
  auto b = curious_recover_b(view.sk, view);
  auto xa = curious_recover_x_and_a(view.sk, view, sums, b);
  REQUIRE(xa.x_mod_n.size() == 1);
  CHECK(xa.x_mod_n[0].value == 8);
  CHECK(xa.a[0].value == 3);
}

TEST_CASE("full curious attack matches ground truth at working sizes", "[attacks]") {
  InsecureSeededRandom rng(103);
  for (int i = 0; i < 5; ++i) {
    auto [pk, sk] = paillier::keygen(256, rng);
    FeatureVector a = FeatureVector::sample(6, 1u << 16, 1, rng);
    FeatureVector b = FeatureVector::sample(6, 1u << 16, 1, rng);
    auto [secrets, record] = enroll(pk, "u", a, rng);
    auto [msg1, state] = user_round1(pk, secrets, b, rng);
    auto [msg2, session] = server_round2(pk, sk, record, msg1, rng);
    Round3Message msg3 = user_round3(pk, state, msg2);

    CuriousServerView view{sk, record, msg1, msg3, session.r_prime};
    AttackReport report = curious_attack(view);
    CHECK(report.flags().empty());
    for (std::size_t j = 0; j < 6; ++j) {
      CHECK(report.recovered_b[j].value == b.elements[j]);
      CHECK((*report.recovered_x_mod_n)[j].value == secrets.x[j] % pk.n);
      CHECK((*report.recovered_a)[j].value == a.elements[j]);
    }
  }
}

TEST_CASE("forged round-2 entries are valid encryptions of the exponents",
          "[attacks]") {
  InsecureSeededRandom rng(107);
  auto [pk, sk] = paillier::keygen(128, rng);
  auto [forged, state] = mitm_forge_round2(pk, 5, rng);
  REQUIRE(forged.c_prime.size() == 5);
  wire::validate_entries(pk, forged.c_prime);
  for (std::size_t j = 0; j < 5; ++j) {
    CHECK(forged.c_prime[j] % pk.n == 1);
    CHECK(paillier::decrypt(sk, paillier::Ciphertext{forged.c_prime[j]}).value ==
          state.r_double_prime[j] % pk.n);
  }
  CHECK_THROWS_AS(mitm_forge_round2(pk, 0, rng), ParameterError);
}

TEST_CASE("toy forgery value", "[attacks]") {
  auto [pk, sk] = paillier::keypair_from_primes(3, 5);
  MitmState state{pk, {2}, {}, {}};
  // c'' = 1 + 15*2 = 31; the victim with b=4 replies 31^4 mod 225 = 121.
  CHECK(oracles::naive_pow_mod(31, 4, 225) == 121);
  FeatureVector recovered = mitm_recover_b(state, wire::Round3Message{{121}});
  REQUIRE(recovered.size() == 1);
  CHECK(recovered.elements[0] == 4);
}

TEST_CASE("mitm recovery handles zero features and rejects foreign replies",
          "[attacks]") {
  auto [pk, sk] = paillier::keypair_from_primes(3, 5);
  MitmState state{pk, {2}, {}, {}};
  CHECK(mitm_recover_b(state, wire::Round3Message{{1}}).elements[0] == 0);
  // d=2: d-1 is not divisible by n, so the reply was not built on the forgery.
  CHECK_THROWS_AS(mitm_recover_b(state, wire::Round3Message{{2}}),
                  ForgeryMismatchError);
  CHECK_THROWS_AS(mitm_recover_b(state, wire::Round3Message{{1, 1}}),
                  ProtocolError);
}

TEST_CASE("mitm end to end: recovery exact, server decision untouched",
          "[attacks]") {
  InsecureSeededRandom rng(109);
  auto [pk, sk] = paillier::keygen(256, rng);
  FeatureVector a = FeatureVector::sample(4, 1u << 16, 0, rng);
  FeatureVector b = FeatureVector::sample(4, 1u << 16, 0, rng);
  auto [secrets, record] = enroll(pk, "u", a, rng);

  auto [msg1, state1] = user_round1(pk, secrets, b, rng);
  auto [real_c_prime, session] = server_round2(pk, sk, record, msg1, rng);

  // Adversary swaps in the forgery; the victim cannot tell.
  auto [forged, mitm] = mitm_forge_round2(pk, 4, rng);
  wire::validate_entries(pk, forged.c_prime);
  Round3Message victim_reply = user_round3(pk, state1, forged);

  mitm.intercepted_c_prime = real_c_prime;
  mitm.recovered_b = mitm_recover_b(mitm, victim_reply);
  CHECK(mitm.recovered_b.elements == b.elements);

  Round3Message cover = mitm_cover_forward(mitm, real_c_prime);
  Decision attacked = server_decide(sk, session, cover, 0);

  // Honest counterfactual: same session and r', the victim's own reply.
  Round3Message honest_reply = user_round3(pk, state1, real_c_prime);
  CHECK(cover == honest_reply);
  Decision honest = server_decide(sk, session, honest_reply, 0);
  CHECK(attacked == honest);
  CHECK(attacked.inner_product == oracles::inner_product(a.elements, b.elements));

  // Negative control: a wrong recovery would be visible in the decision.
  MitmState faulty = mitm;
  faulty.recovered_b.elements[0] += 1;
  faulty.recovered_b.bound = std::max(faulty.recovered_b.bound,
                                      faulty.recovered_b.elements[0] + 1);
  Decision corrupted = server_decide(sk, session, mitm_cover_forward(faulty, real_c_prime), 0);
  CHECK(corrupted.inner_product != honest.inner_product);
}

TEST_CASE("mitm cover forward preconditions", "[attacks]") {
  auto [pk, sk] = paillier::keypair_from_primes(3, 5);
  MitmState state{pk, {2}, {}, {}};
  CHECK_THROWS_AS(mitm_cover_forward(state, wire::Round2Message{{31}}), StateError);
  state.recovered_b = FeatureVector{{1}, 4};
  CHECK_THROWS_AS(mitm_cover_forward(state, wire::Round2Message{{31, 31}}),
                  ProtocolError);
}

TEST_CASE("attack report json shape", "[attacks]") {
  AttackReport curious;
  curious.attack = kCuriousServerAttack;
  curious.recovered_b = {{Bigint(2), true}};
  curious.recovered_x_mod_n = {{std::vector<RecoveredValue>{{Bigint(8), true}}}};
  curious.recovered_a = {{std::vector<RecoveredValue>{RecoveredValue::unrecoverable()}}};
  curious.verified = true;
  CHECK(curious.to_json().dump() ==
        R"({"attack":"curious-server","flags":["a[0]"],"recovered_a":[null],)"
        R"("recovered_b":["2"],"recovered_x_mod_n":["8"],"verified":true})");

  AttackReport mitm;
  mitm.attack = kActiveMitmAttack;
  mitm.recovered_b = {{Bigint(4), true}};
  auto j = mitm.to_json();
  CHECK(j.at("recovered_x_mod_n").is_null());
  CHECK(j.at("recovered_a").is_null());
  CHECK(j.at("verified") == false);
}

TEST_CASE("knowledge boundary: attack interfaces never name foreign secrets",
          "[attacks]") {
  const std::string src_dir = PBAUTH_SOURCE_DIR;
  const std::string mitm_header =
      read_file(src_dir + "/include/pbauth/attack_mitm.hpp");
  // The on-path adversary's whole interface must live off the wire: no
  // private key, no decryption, no user key vectors.
  for (const std::string ident :
       {"PrivateKey", "UserSecrets", "lambda", "mu", "decrypt", "sk"}) {
    INFO("forbidden identifier in attack_mitm.hpp: " << ident);
    CHECK_FALSE(mentions_identifier(mitm_header, ident));
  }
  const std::string curious_header =
      read_file(src_dir + "/include/pbauth/attack_curious.hpp");
  for (const std::string ident : {"UserSecrets", "Round1State", "r_star"}) {
    INFO("forbidden identifier in attack_curious.hpp: " << ident);
    CHECK_FALSE(mentions_identifier(curious_header, ident));
  }
}
