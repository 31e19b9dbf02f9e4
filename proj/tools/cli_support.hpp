#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>

#include "json.hpp"

#include "whitemetric/fourier.hpp"
#include "whitemetric/whitening.hpp"

namespace whitemetric::cli {

using nlohmann::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;

/// Bad flags, bad config keys or values.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Settings shared by every subcommand. Config file first, flags on top.
struct RunConfig {
  std::uint64_t seed = 0;
  std::size_t n_starts = 64;
  double radius = 10.0;
  std::size_t max_iter = 200;
  double sup_tol = 1e-10;
  std::size_t dense_limit = 4'000'000;
  double sinkhorn_epsilon = 1e-2;
  std::size_t sinkhorn_max_iter = 10'000;
  double sinkhorn_tol = 1e-9;
  std::size_t mc_draws = 100'000;
  std::string format = "json";
  std::string whitening = "zca-cor";

  /// Throws UsageError for unknown keys or unparsable values.
  void set(const std::string& key, const std::string& value);
  /// `key = value` lines, '#' comments, blank lines ignored.
  void load_file(const std::string& path);

  SupSearchConfig search() const;
  WhiteningProcess whitening_process() const;

  /// Every setting in canonical text form, sorted by key.
  std::map<std::string, std::string> canonical() const;
  /// FNV-1a over the canonical form, 16 hex digits.
  std::string digest() const;
};

const char* version();

/// JSON text with every floating-point number printed to 17 significant
/// digits. Keys keep nlohmann's sorted order.
std::string dump(const json& j, int indent = 2);

/// {version, seed, config_digest} merged into an object.
json with_meta(json body, const RunConfig& cfg);

/// Comment lines for CSV outputs.
std::string meta_comment(const RunConfig& cfg);

json error_json(const std::string& code, const std::string& message, int exit_code);

}  // namespace whitemetric::cli
