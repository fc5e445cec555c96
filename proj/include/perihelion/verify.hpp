#pragma once

// Invariant suites run by `perihelion verify`.

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace perihelion {

struct VerifyConfig {
  std::uint64_t seed = 20240601;
  std::size_t nodes = 4096;       ///< quadrature nodes for U
  int nu_max = 10;                ///< series order for the parity and series checks
  std::size_t bracket_points = 1000;
  std::size_t identity_samples = 1000;
  double drift_time = 1e4;
  double drift_tol = 1e-12;
  bool inject_q2_sign_fault = false;  ///< mutation check: flips the cos 2g term
};

struct CheckResult {
  std::string suite;
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string detail;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool all_pass() const;
  bool suite_pass(const std::string& suite) const;
  nlohmann::json to_json() const;
};

/// Known suites: brackets, renormalizability, parity, identities.
const std::vector<std::string>& verify_suite_names();

/// Throws DomainError for an unknown suite name.
void run_suite(const std::string& suite, const VerifyConfig& cfg, VerifyReport& report);

/// Closed form of q_2 for beta = betabar; `flip` negates the cos 2g term.
double q2_closed_form(double G, double g, bool flip = false);

}  // namespace perihelion
