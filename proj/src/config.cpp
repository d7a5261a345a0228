#include "nestlab/config.hpp"

#include "nestlab/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace nestlab {

namespace {

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t at = s.find(sep, start);
    const std::string item = trim(s.substr(start, at == std::string_view::npos ? std::string_view::npos : at - start));
    if (!item.empty()) out.push_back(item);
    if (at == std::string_view::npos) break;
    start = at + 1;
  }
  return out;
}

double to_double(const std::string& v) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) throw UsageError("expected a number, got '" + v + "'");
  return out;
}

long long to_int(const std::string& v) {
  long long out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) throw UsageError("expected an integer, got '" + v + "'");
  return out;
}

std::uint64_t to_u64(const std::string& v) {
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw UsageError("expected an unsigned integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw UsageError("expected a boolean, got '" + v + "'");
}

std::vector<double> to_doubles(const std::string& v) {
  std::vector<double> out;
  for (const auto& s : split(v, ',')) out.push_back(to_double(s));
  return out;
}

std::vector<int> to_ints(const std::string& v) {
  std::vector<int> out;
  for (const auto& s : split(v, ',')) out.push_back(static_cast<int>(to_int(s)));
  return out;
}

template <class T>
std::string join(const std::vector<T>& xs, const std::function<std::string(const T&)>& fmt) {
  std::string out;
  for (const auto& x : xs) out += (out.empty() ? "" : ", ") + fmt(x);
  return out;
}

std::string join_d(const std::vector<double>& xs) {
  return join<double>(xs, [](const double& v) { return format_double(v); });
}

std::string join_i(const std::vector<int>& xs) {
  return join<int>(xs, [](const int& v) { return std::to_string(v); });
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"fractal.name", [](RunConfig& c, const std::string& v) { c.check.fractal = v; }},
      {"fractal.ifs_file", [](RunConfig& c, const std::string& v) { c.check.ifs_file = v; }},
      {"fractal.level", [](RunConfig& c, const std::string& v) { c.check.level = static_cast<int>(to_int(v)); }},
      {"fractal.truncation",
       [](RunConfig& c, const std::string& v) { c.check.truncation = static_cast<int>(to_int(v)); }},
      {"budget.max_cells", [](RunConfig& c, const std::string& v) { c.check.budget.max_cells = to_int(v); }},
      {"budget.dense_limit", [](RunConfig& c, const std::string& v) { c.check.budget.dense_limit = to_int(v); }},
      {"functions.suite",
       [](RunConfig& c, const std::string& v) {
         c.check.suite.clear();
         for (const auto& s : split(v, ',')) c.check.suite.push_back(parse_suite_item(s));
       }},
      {"functions.random_count",
       [](RunConfig& c, const std::string& v) { c.check.random_count = static_cast<int>(to_int(v)); }},
      {"functions.seed", [](RunConfig& c, const std::string& v) { c.check.seed = to_u64(v); }},
      {"spectral.heat_level",
       [](RunConfig& c, const std::string& v) { c.check.heat_level = static_cast<int>(to_int(v)); }},
      {"spectral.time_count",
       [](RunConfig& c, const std::string& v) { c.check.time_count = static_cast<int>(to_int(v)); }},
      {"spectral.times", [](RunConfig& c, const std::string& v) { c.check.times = to_doubles(v); }},
      {"heat.times", [](RunConfig& c, const std::string& v) { c.heat_times = to_doubles(v); }},
      {"heat.vertex", [](RunConfig& c, const std::string& v) { c.heat_vertex = to_int(v); }},
      {"variation.kind",
       [](RunConfig& c, const std::string& v) {
         if (v == "ks")
           c.variation_kind = VariationKind::KS;
         else if (v == "subgaussian")
           c.variation_kind = VariationKind::SubGaussian;
         else
           throw UsageError("variation kind must be ks or subgaussian, got '" + v + "'");
       }},
      {"variation.k_min", [](RunConfig& c, const std::string& v) { c.variation_kmin = static_cast<int>(to_int(v)); }},
      {"variation.maximal", [](RunConfig& c, const std::string& v) { c.write_maximal = to_bool(v); }},
      {"checks.names", [](RunConfig& c, const std::string& v) { c.checks = split(v, ','); }},
      {"checks.p", [](RunConfig& c, const std::string& v) { c.ps = to_doubles(v); }},
      {"checks.A", [](RunConfig& c, const std::string& v) { c.check.A = to_double(v); }},
      {"checks.fit_tolerance", [](RunConfig& c, const std::string& v) { c.check.fit_tolerance = to_double(v); }},
      {"checks.stability_factor",
       [](RunConfig& c, const std::string& v) { c.check.stability_factor = to_double(v); }},
      {"checks.spread_factor", [](RunConfig& c, const std::string& v) { c.check.spread_factor = to_double(v); }},
      {"checks.pair_doubling_factor",
       [](RunConfig& c, const std::string& v) { c.check.pair_doubling_factor = to_double(v); }},
      {"checks.pairs", [](RunConfig& c, const std::string& v) { c.check.pairs = static_cast<int>(to_int(v)); }},
      {"checks.simplex_levels", [](RunConfig& c, const std::string& v) { c.check.simplex_levels = to_ints(v); }},
      {"checks.ball_levels", [](RunConfig& c, const std::string& v) { c.check.ball_levels = to_ints(v); }},
      {"checks.ball_centers",
       [](RunConfig& c, const std::string& v) { c.check.ball_centers = static_cast<int>(to_int(v)); }},
      {"checks.coarea_level",
       [](RunConfig& c, const std::string& v) { c.check.coarea_level = static_cast<int>(to_int(v)); }},
      {"checks.truncation_level",
       [](RunConfig& c, const std::string& v) { c.check.truncation_level = static_cast<int>(to_int(v)); }},
      {"checks.subgaussian_kmin",
       [](RunConfig& c, const std::string& v) { c.check.subgaussian_kmin = static_cast<int>(to_int(v)); }},
      {"checks.chain_lengths", [](RunConfig& c, const std::string& v) { c.check.chain_lengths = to_ints(v); }},
      {"checks.chain_levels", [](RunConfig& c, const std::string& v) { c.check.chain_levels = to_ints(v); }},
      {"checks.regularity_times",
       [](RunConfig& c, const std::string& v) { c.check.regularity_times = to_doubles(v); }},
      {"checks.q_grid", [](RunConfig& c, const std::string& v) { c.check.q_grid = to_doubles(v); }},
      {"output.dir", [](RunConfig& c, const std::string& v) { c.out_dir = v; }},
      {"output.cache_dir", [](RunConfig& c, const std::string& v) { c.cache_dir = v; }},
  };
  return table;
}

std::string suite_text(const SuiteItem& s) {
  const auto& p = s.params;
  if (s.kind == "harmonic") {
    std::string out = "harmonic";
    for (double b : p.boundary) out += ":" + format_double(b);
    return out;
  }
  if (s.kind == "random-cellwise") return "random:" + std::to_string(p.seed) + ":" + std::to_string(p.cell_level);
  if (s.kind == "indicator") return "indicator:" + std::to_string(p.simplex_level) + ":" + std::to_string(p.simplex_index);
  if (s.kind == "eigenfunction") return "eigenfunction:" + std::to_string(p.eigen_index);
  if (s.kind == "coordinate") return "coordinate:" + std::to_string(p.axis);
  return s.kind;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

SuiteItem parse_suite_item(std::string_view text) {
  const auto parts = split(text, ':');
  if (parts.empty()) throw UsageError("empty suite entry");
  SuiteItem it;
  const std::string& k = parts[0];
  auto need = [&](std::size_t lo, std::size_t hi) {
    if (parts.size() < lo || parts.size() > hi) throw UsageError("malformed suite entry '" + std::string(text) + "'");
  };
  if (k == "harmonic") {
    it.kind = "harmonic";
    for (std::size_t i = 1; i < parts.size(); ++i) it.params.boundary.push_back(to_double(parts[i]));
  } else if (k == "random") {
    need(2, 3);
    it.kind = "random-cellwise";
    it.params.seed = to_u64(parts[1]);
    if (parts.size() == 3) it.params.cell_level = static_cast<int>(to_int(parts[2]));
  } else if (k == "indicator") {
    need(3, 3);
    it.kind = "indicator";
    it.params.simplex_level = static_cast<int>(to_int(parts[1]));
    it.params.simplex_index = to_int(parts[2]);
  } else if (k == "eigenfunction") {
    need(2, 2);
    it.kind = "eigenfunction";
    it.params.eigen_index = static_cast<int>(to_int(parts[1]));
  } else if (k == "coordinate") {
    need(2, 2);
    it.kind = "coordinate";
    it.params.axis = static_cast<int>(to_int(parts[1]));
  } else {
    throw UsageError("unknown suite kind '" + k + "' (expected harmonic, random, indicator, eigenfunction, coordinate)");
  }
  it.id = suite_text(it);
  for (char& c : it.id)
    if (c == ':') c = '-';
  return it;
}

RunConfig parse_config(std::istream& in) {
  RunConfig cfg;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const std::string s = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ParseError(lineno, "unterminated section header");
      section = trim(std::string_view(s).substr(1, s.size() - 2));
      static const char* known[] = {"fractal", "budget", "functions", "spectral", "heat", "variation", "checks", "output"};
      if (std::find(std::begin(known), std::end(known), section) == std::end(known))
        throw ParseError(lineno, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ParseError(lineno, "expected key = value");
    if (section.empty()) throw ParseError(lineno, "key outside of any section");
    const std::string key = section + "." + trim(std::string_view(s).substr(0, eq));
    const std::string value = trim(std::string_view(s).substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ParseError(lineno, "unknown key '" + key + "'");
    try {
      it->second(cfg, value);
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(lineno, key + ": " + e.what());
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config '" + path + "'");
  return parse_config(in);
}

std::string canonical_config(const RunConfig& c) {
  const CheckConfig& k = c.check;
  std::ostringstream o;
  auto kv = [&](const char* key, const std::string& v) { o << key << " = " << v << '\n'; };
  kv("fractal.name", k.ifs_file.empty() ? k.fractal : "");
  kv("fractal.ifs_file", k.ifs_file);
  kv("fractal.level", std::to_string(k.level));
  kv("fractal.truncation", std::to_string(k.truncation));
  kv("budget.max_cells", std::to_string(k.budget.max_cells));
  kv("budget.dense_limit", std::to_string(k.budget.dense_limit));
  kv("functions.suite", join<SuiteItem>(k.suite, suite_text));
  kv("functions.random_count", std::to_string(k.random_count));
  kv("functions.seed", std::to_string(k.seed));
  kv("spectral.heat_level", std::to_string(k.heat_level));
  kv("spectral.time_count", std::to_string(k.time_count));
  kv("spectral.times", join_d(k.times));
  kv("heat.times", join_d(c.heat_times));
  kv("heat.vertex", std::to_string(c.heat_vertex));
  kv("variation.kind", c.variation_kind == VariationKind::KS ? "ks" : "subgaussian");
  kv("variation.k_min", std::to_string(c.variation_kmin));
  kv("variation.maximal", c.write_maximal ? "true" : "false");
  kv("checks.names", join<std::string>(c.checks, [](const std::string& s) { return s; }));
  kv("checks.p", join_d(c.ps));
  kv("checks.A", format_double(k.A));
  kv("checks.fit_tolerance", format_double(k.fit_tolerance));
  kv("checks.stability_factor", format_double(k.stability_factor));
  kv("checks.spread_factor", format_double(k.spread_factor));
  kv("checks.pair_doubling_factor", format_double(k.pair_doubling_factor));
  kv("checks.pairs", std::to_string(k.pairs));
  kv("checks.simplex_levels", join_i(k.simplex_levels));
  kv("checks.ball_levels", join_i(k.ball_levels));
  kv("checks.ball_centers", std::to_string(k.ball_centers));
  kv("checks.coarea_level", std::to_string(k.coarea_level));
  kv("checks.truncation_level", std::to_string(k.truncation_level));
  kv("checks.subgaussian_kmin", std::to_string(k.subgaussian_kmin));
  kv("checks.chain_lengths", join_i(k.chain_lengths));
  kv("checks.chain_levels", join_i(k.chain_levels));
  kv("checks.regularity_times", join_d(k.regularity_times));
  kv("checks.q_grid", join_d(k.q_grid));
  return o.str();
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::uint64_t config_hash(const RunConfig& cfg) { return fnv1a(canonical_config(cfg)); }

std::uint64_t spectral_hash(const RunConfig& cfg, const FractalSpec& spec, int heat_level) {
  std::ostringstream o;
  o << "spectral-v1\n" << spec.name << '\n' << spec.dim << '\n';
  for (const auto& m : spec.maps) {
    o << format_double(m.contraction);
    for (Index i = 0; i < m.unitary.size(); ++i) o << ',' << format_double(m.unitary.data()[i]);
    for (Index i = 0; i < m.translation.size(); ++i) o << ',' << format_double(m.translation[i]);
    o << '\n';
  }
  o << format_double(spec.rho) << '\n'
    << heat_level << '\n'
    << cfg.check.truncation << '\n'
    << cfg.check.budget.dense_limit << '\n';
  return fnv1a(o.str());
}

}  // namespace nestlab
