#include "cli_support.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "whitemetric/io.hpp"
#include "whitemetric/random.hpp"

#ifndef WHITEMETRIC_VERSION
#define WHITEMETRIC_VERSION "0.0.0"
#endif

namespace whitemetric::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_unsigned(const std::string& key, const std::string& v) {
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
    throw UsageError("config '" + key + "': expected a nonnegative integer, got '" + v + "'");
  }
  return out;
}

double parse_real(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw UsageError("config '" + key + "': expected a number, got '" + v + "'");
  }
  return out;
}

double parse_positive(const std::string& key, const std::string& v) {
  const double x = parse_real(key, v);
  if (!(x > 0.0)) throw UsageError("config '" + key + "' must be positive");
  return x;
}

std::size_t parse_count(const std::string& key, const std::string& v) {
  const auto x = parse_unsigned<std::size_t>(key, v);
  if (x == 0) throw UsageError("config '" + key + "' must be positive");
  return x;
}

void write_json(std::ostringstream& out, const json& j, int indent, int depth) {
  const std::string pad = indent > 0 ? std::string(static_cast<std::size_t>(indent * (depth + 1)), ' ') : "";
  const std::string close = indent > 0 ? std::string(static_cast<std::size_t>(indent * depth), ' ') : "";
  const char* nl = indent > 0 ? "\n" : "";
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out << "{}";
        return;
      }
      out << '{' << nl;
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out << ',' << nl;
        first = false;
        out << pad << json(it.key()).dump() << (indent > 0 ? ": " : ":");
        write_json(out, it.value(), indent, depth + 1);
      }
      out << nl << close << '}';
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out << "[]";
        return;
      }
      out << '[' << nl;
      bool first = true;
      for (const json& v : j) {
        if (!first) out << ',' << nl;
        first = false;
        out << pad;
        write_json(out, v, indent, depth + 1);
      }
      out << nl << close << ']';
      return;
    }
    case json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        out << "null";
      } else {
        out << format_number(v);
      }
      return;
    }
    default:
      out << j.dump();
  }
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  if (key == "seed") {
    seed = parse_unsigned<std::uint64_t>(key, v);
  } else if (key == "n_starts") {
    n_starts = parse_count(key, v);
  } else if (key == "radius") {
    radius = parse_positive(key, v);
  } else if (key == "max_iter") {
    max_iter = parse_count(key, v);
  } else if (key == "sup_tol") {
    sup_tol = parse_positive(key, v);
  } else if (key == "dense_limit") {
    dense_limit = parse_count(key, v);
  } else if (key == "sinkhorn_epsilon") {
    sinkhorn_epsilon = parse_positive(key, v);
  } else if (key == "sinkhorn_max_iter") {
    sinkhorn_max_iter = parse_count(key, v);
  } else if (key == "sinkhorn_tol") {
    sinkhorn_tol = parse_positive(key, v);
  } else if (key == "mc_draws") {
    mc_draws = parse_count(key, v);
    if (mc_draws < 2) throw UsageError("config 'mc_draws' must be at least 2");
  } else if (key == "format") {
    if (v != "json" && v != "csv") throw UsageError("config 'format' must be json or csv");
    format = v;
  } else if (key == "whitening") {
    if (!parse_whitening_process(v)) {
      throw UsageError("config 'whitening' must be zca-cor, cholesky or identity");
    }
    whitening = std::string(to_string(*parse_whitening_process(v)));
  } else {
    throw UsageError("unknown config key '" + key + "'");
  }
}

void RunConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const std::string body = trim(line.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw UsageError(path + ":" + std::to_string(lineno) + ": expected key = value");
    }
    set(trim(body.substr(0, eq)), body.substr(eq + 1));
  }
}

SupSearchConfig RunConfig::search() const {
  SupSearchConfig c;
  c.n_starts = n_starts;
  c.radius = radius;
  c.max_iter = max_iter;
  c.seed = seed;
  c.tol = sup_tol;
  return c;
}

WhiteningProcess RunConfig::whitening_process() const {
  return *parse_whitening_process(whitening);
}

std::map<std::string, std::string> RunConfig::canonical() const {
  return {
      {"dense_limit", std::to_string(dense_limit)},
      {"format", format},
      {"max_iter", std::to_string(max_iter)},
      {"mc_draws", std::to_string(mc_draws)},
      {"n_starts", std::to_string(n_starts)},
      {"radius", format_number(radius)},
      {"seed", std::to_string(seed)},
      {"sinkhorn_epsilon", format_number(sinkhorn_epsilon)},
      {"sinkhorn_max_iter", std::to_string(sinkhorn_max_iter)},
      {"sinkhorn_tol", format_number(sinkhorn_tol)},
      {"sup_tol", format_number(sup_tol)},
      {"whitening", whitening},
  };
}

std::string RunConfig::digest() const {
  std::string text;
  for (const auto& [k, v] : canonical()) text += k + "=" + v + "\n";
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(text)));
  return buf;
}

const char* version() { return WHITEMETRIC_VERSION; }

std::string dump(const json& j, int indent) {
  std::ostringstream out;
  write_json(out, j, indent, 0);
  return out.str();
}

json with_meta(json body, const RunConfig& cfg) {
  body["version"] = version();
  body["seed"] = cfg.seed;
  body["config_digest"] = cfg.digest();
  return body;
}

std::string meta_comment(const RunConfig& cfg) {
  return std::string("whitemetric ") + version() + " seed=" + std::to_string(cfg.seed) +
         " config_digest=" + cfg.digest();
}

json error_json(const std::string& code, const std::string& message, int exit_code) {
  return json{{"error", {{"code", code}, {"message", message}, {"exit_code", exit_code}}},
              {"version", version()}};
}

}  // namespace whitemetric::cli
