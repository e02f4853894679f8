#pragma once

// Serialized artifacts shared by the protocol, the attacks, and the harness:
// protocol messages ({"type","user_id","payload"} with lowercase-hex entries),
// the authentication decision, and session transcripts (JSON Lines, one
// message per line plus a trailing outcome record).

#include <cstddef>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pbauth/errors.hpp"
#include "pbauth/modmath.hpp"
#include "pbauth/paillier.hpp"

namespace pbauth::wire {

enum class MessageType { enroll, round1, round2, round3 };

inline std::string to_string(MessageType t) {
  switch (t) {
    case MessageType::enroll: return "enroll";
    case MessageType::round1: return "round1";
    case MessageType::round2: return "round2";
    case MessageType::round3: return "round3";
  }
  throw Error("unreachable message type");
}

inline MessageType message_type_from_string(const std::string& s) {
  if (s == "enroll") return MessageType::enroll;
  if (s == "round1") return MessageType::round1;
  if (s == "round2") return MessageType::round2;
  if (s == "round3") return MessageType::round3;
  throw MalformedMessageError("unknown message type: " + s);
}

struct ProtocolMessage {
  MessageType type{};
  std::string user_id;
  std::vector<Bigint> payload;

  bool operator==(const ProtocolMessage&) const = default;

  nlohmann::json to_json() const {
    nlohmann::json entries = nlohmann::json::array();
    for (const Bigint& v : payload) entries.push_back(modmath::to_hex(v));
    return {{"type", to_string(type)}, {"user_id", user_id}, {"payload", entries}};
  }

  std::string dump() const { return to_json().dump(); }

  static ProtocolMessage from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("type") || !j.contains("user_id") ||
        !j.contains("payload") || !j.at("payload").is_array())
      throw MalformedMessageError("message json: expected type/user_id/payload");
    ProtocolMessage msg;
    msg.type = message_type_from_string(j.at("type").get<std::string>());
    msg.user_id = j.at("user_id").get<std::string>();
    for (const auto& e : j.at("payload")) {
      if (!e.is_string()) throw MalformedMessageError("message payload entries must be hex strings");
      try {
        msg.payload.push_back(modmath::from_hex(e.get<std::string>()));
      } catch (const ParameterError& err) {
        throw MalformedMessageError(std::string("message payload: ") + err.what());
      }
    }
    return msg;
  }

  static ProtocolMessage parse(const std::string& raw) {
    nlohmann::json j = nlohmann::json::parse(raw, nullptr, false);
    if (j.is_discarded()) throw MalformedMessageError("message is not valid json");
    return from_json(j);
  }
};

// Typed round payloads.
struct Round1Message {
  std::vector<Bigint> c_star;
  bool operator==(const Round1Message&) const = default;
};
struct Round2Message {
  std::vector<Bigint> c_prime;
  bool operator==(const Round2Message&) const = default;
};
struct Round3Message {
  std::vector<Bigint> d;
  bool operator==(const Round3Message&) const = default;
};

/// Every payload entry must be in [1, n^2) and coprime to n.
inline void validate_entries(const paillier::PublicKey& pk,
                             std::span<const Bigint> entries) {
  for (const Bigint& v : entries) {
    if (v < 1 || v >= pk.n_squared)
      throw MalformedMessageError("payload entry out of [1, n^2)");
    if (modmath::gcd(v, pk.n) != 1)
      throw MalformedMessageError("payload entry shares a factor with n");
  }
}

struct Decision {
  Bigint inner_product;  // T' recovered by the server
  Bigint threshold;      // T_S
  bool accepted = false;

  bool operator==(const Decision&) const = default;

  nlohmann::json to_json() const {
    return {{"accepted", accepted},
            {"inner_product", modmath::to_hex(inner_product)},
            {"threshold", modmath::to_hex(threshold)}};
  }

  static Decision from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("accepted") || !j.contains("inner_product") ||
        !j.contains("threshold"))
      throw MalformedMessageError("decision json: missing fields");
    Decision d;
    d.accepted = j.at("accepted").get<bool>();
    d.inner_product = modmath::from_hex(j.at("inner_product").get<std::string>());
    d.threshold = modmath::from_hex(j.at("threshold").get<std::string>());
    return d;
  }
};

// ---------------------------------------------------------------------------
// Transcript: append-only log of delivered messages plus the outcome.
// `seq` is a logical clock so replays and re-runs are byte-identical.

inline constexpr const char* kDirUserToServer = "user->server";
inline constexpr const char* kDirServerToUser = "server->user";

struct TranscriptEntry {
  std::size_t seq = 0;
  std::string direction;
  std::string raw;  // exact bytes of the delivered message json

  bool operator==(const TranscriptEntry&) const = default;
};

struct Transcript {
  std::string session_id;
  std::vector<TranscriptEntry> entries;
  std::optional<Decision> outcome;

  bool operator==(const Transcript&) const = default;

  void append(std::string direction, std::string raw) {
    entries.push_back({entries.size(), std::move(direction), std::move(raw)});
  }

  /// Messages delivered to the server, in order (the set the stealth
  /// property quantifies over).
  std::vector<std::string> delivered_to_server() const {
    std::vector<std::string> out;
    for (const auto& e : entries)
      if (e.direction == kDirUserToServer) out.push_back(e.raw);
    return out;
  }

  std::string to_jsonl() const {
    std::ostringstream os;
    for (const auto& e : entries) {
      nlohmann::json line = {{"seq", e.seq},
                             {"direction", e.direction},
                             {"message", nlohmann::json::parse(e.raw)}};
      os << line.dump() << "\n";
    }
    if (outcome) {
      nlohmann::json line = {{"session_id", session_id},
                             {"outcome", outcome->to_json()}};
      os << line.dump() << "\n";
    }
    return os.str();
  }

  static Transcript from_jsonl(const std::string& text) {
    Transcript t;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded()) throw ReplayError("transcript line is not valid json");
      if (j.contains("outcome")) {
        if (t.outcome) throw ReplayError("transcript has two outcome records");
        t.outcome = Decision::from_json(j.at("outcome"));
        t.session_id = j.value("session_id", "");
      } else if (j.contains("message")) {
        if (t.outcome) throw ReplayError("transcript message after outcome");
        TranscriptEntry e;
        e.seq = j.value("seq", t.entries.size());
        e.direction = j.value("direction", "");
        e.raw = j.at("message").dump();
        t.entries.push_back(std::move(e));
      } else {
        throw ReplayError("transcript line is neither message nor outcome");
      }
    }
    return t;
  }

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write transcript: " + path);
    out << to_jsonl();
  }

  static Transcript load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read transcript: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_jsonl(buf.str());
  }
};

}  // namespace pbauth::wire
