#pragma once

// Attack outcome with per-coordinate recoverability. The divisions behind a
// recovery silently assume invertibility mod n; at toy moduli that can fail,
// so each coordinate carries its own flag instead of failing the whole run.
// `verified` is set by the harness after comparing against ground truth the
// attack itself never sees.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pbauth/errors.hpp"
#include "pbauth/modmath.hpp"

namespace pbauth::attacks {

inline constexpr const char* kCuriousServerAttack = "curious-server";
inline constexpr const char* kActiveMitmAttack = "active-mitm";

struct RecoveredValue {
  Bigint value;
  bool recoverable = true;

  static RecoveredValue unrecoverable() { return {Bigint(0), false}; }
  bool operator==(const RecoveredValue&) const = default;
};

struct AttackReport {
  std::string attack;
  std::vector<RecoveredValue> recovered_b;
  // Absent (never just empty) for the active-mitm report: the template and
  // key vectors stay protected from an adversary without the private key.
  std::optional<std::vector<RecoveredValue>> recovered_x_mod_n;
  std::optional<std::vector<RecoveredValue>> recovered_a;
  bool verified = false;

  std::vector<std::string> flags() const {
    std::vector<std::string> out;
    auto collect = [&out](const char* name,
                          const std::vector<RecoveredValue>& values) {
      for (std::size_t j = 0; j < values.size(); ++j)
        if (!values[j].recoverable)
          out.push_back(std::string(name) + "[" + std::to_string(j) + "]");
    };
    collect("b", recovered_b);
    if (recovered_x_mod_n) collect("x", *recovered_x_mod_n);
    if (recovered_a) collect("a", *recovered_a);
    return out;
  }

  nlohmann::json to_json() const {
    auto values_json = [](const std::vector<RecoveredValue>& values) {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& v : values) {
        if (v.recoverable)
          arr.push_back(modmath::to_hex(v.value));
        else
          arr.push_back(nullptr);
      }
      return arr;
    };
    nlohmann::json j = {{"attack", attack},
                        {"recovered_b", values_json(recovered_b)},
                        {"recovered_x_mod_n", nullptr},
                        {"recovered_a", nullptr},
                        {"verified", verified},
                        {"flags", flags()}};
    if (recovered_x_mod_n) j["recovered_x_mod_n"] = values_json(*recovered_x_mod_n);
    if (recovered_a) j["recovered_a"] = values_json(*recovered_a);
    return j;
  }
};

}  // namespace pbauth::attacks
