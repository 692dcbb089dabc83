#include "qcat/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

#include "qcat/text.hpp"

namespace qcat {
namespace {

std::vector<std::string_view> split_commas(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    out.push_back(text::trim(s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <std::size_t N>
std::array<Complex, N> parse_complex_list(const std::string& key, std::string_view value) {
  const auto parts = split_commas(value);
  if (parts.size() != N) {
    throw ConfigError(key, "expected " + std::to_string(N) + " comma-separated values, got " +
                               std::to_string(parts.size()));
  }
  std::array<Complex, N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    try {
      out[i] = text::parse_complex(parts[i]);
    } catch (const ValidationError& e) {
      throw ConfigError(key, e.what());
    }
  }
  return out;
}

double parse_real(const std::string& key, std::string_view value) {
  try {
    return text::parse_double(value);
  } catch (const ValidationError& e) {
    throw ConfigError(key, e.what());
  }
}

std::uint64_t parse_count(const std::string& key, std::string_view value) {
  const std::string s(text::trim(value));
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
    throw ConfigError(key, "expected a non-negative integer, got '" + s + "'");
  }
  try {
    return std::stoull(s);
  } catch (const std::exception&) {
    throw ConfigError(key, "integer out of range: '" + s + "'");
  }
}

bool parse_bool(const std::string& key, std::string_view value) {
  const auto v = text::trim(value);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(key, "expected true or false");
}

template <std::size_t N>
std::string join(const std::array<Complex, N>& values) {
  std::string out;
  for (std::size_t i = 0; i < N; ++i) {
    if (i) out += ", ";
    out += text::format_complex(values[i]);
  }
  return out;
}

std::array<Complex, 4> normalized(const std::string& key, std::array<Complex, 4> v) {
  double n2 = 0.0;
  for (const auto& z : v) n2 += std::norm(z);
  if (!(n2 > 0.0)) throw ConfigError(key, "zero vector cannot be normalized");
  const double n = std::sqrt(n2);
  for (auto& z : v) z /= n;
  return v;
}

}  // namespace

void ExperimentConfig::validate() const {
  try {
    (void)PhotonKet(prep);
  } catch (const ValidationError& e) {
    throw ConfigError("prep", e.what());
  }
  if (post.has_value() == effect.has_value()) throw ConfigError("post", "exactly one of 'post' or 'effect' is required");
  if (post) {
    try {
      (void)PhotonKet(*post);
    } catch (const ValidationError& e) {
      throw ConfigError("post", e.what());
    }
  } else {
    try {
      (void)PhotonEffect(*effect);
    } catch (const ValidationError& e) {
      throw ConfigError("effect", e.what());
    }
  }
  const auto check_nonneg = [](const char* key, double v) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError(key, "must be finite and >= 0");
  };
  check_nonneg("g_a", g_a);
  check_nonneg("g_b", g_b);
  check_nonneg("noise_a", noise_a);
  check_nonneg("noise_b", noise_b);
  try {
    grid.validate();
  } catch (const ValidationError& e) {
    throw ConfigError("grid_points", e.what());
  }
  try {
    const GridMeter meter = GridMeter::gaussian(grid);
    (void)meter.shifted(std::max(g_a, g_b));
  } catch (const GridTooSmall& e) {
    throw ConfigError("grid_max", e.what());
  } catch (const ValidationError& e) {
    throw ConfigError("grid_points", e.what());
  }
}

PhotonKet ExperimentConfig::prep_ket() const { return PhotonKet(prep); }

PhotonKet ExperimentConfig::post_ket() const {
  if (!post) throw ConfigError("post", "this command needs a pure postselection ('post'), not an effect");
  return PhotonKet(*post);
}

PhotonEffect ExperimentConfig::post_effect() const {
  return post ? PhotonEffect::projector(PhotonKet(*post)) : PhotonEffect(*effect);
}

bool ExperimentConfig::operator==(const ExperimentConfig& o) const {
  const bool effects_equal = effect.has_value() == o.effect.has_value() && (!effect || *effect == *o.effect);
  return prep == o.prep && post == o.post && effects_equal && g_a == o.g_a && g_b == o.g_b &&
         noise_a == o.noise_a && noise_b == o.noise_b && n_trials == o.n_trials && seed == o.seed &&
         grid.x_min == o.grid.x_min && grid.x_max == o.grid.x_max && grid.points == o.grid.points;
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig c;
  std::set<std::string> seen;
  bool normalize = false;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto body = text::trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(lineno), "expected key = value");
    }
    const std::string key(text::trim(body.substr(0, eq)));
    const auto value = text::trim(body.substr(eq + 1));
    if (!seen.insert(key).second) throw ConfigError(key, "duplicate key");

    if (key == "prep") {
      c.prep = parse_complex_list<4>(key, value);
    } else if (key == "post") {
      c.post = parse_complex_list<4>(key, value);
    } else if (key == "effect") {
      const auto entries = parse_complex_list<16>(key, value);
      Mat4 m;
      for (Eigen::Index i = 0; i < 16; ++i) m(i / 4, i % 4) = entries[static_cast<std::size_t>(i)];
      c.effect = m;
    } else if (key == "g_a") {
      c.g_a = parse_real(key, value);
    } else if (key == "g_b") {
      c.g_b = parse_real(key, value);
    } else if (key == "noise_a") {
      c.noise_a = parse_real(key, value);
    } else if (key == "noise_b") {
      c.noise_b = parse_real(key, value);
    } else if (key == "n_trials") {
      c.n_trials = parse_count(key, value);
    } else if (key == "seed") {
      c.seed = parse_count(key, value);
    } else if (key == "grid_min") {
      c.grid.x_min = parse_real(key, value);
    } else if (key == "grid_max") {
      c.grid.x_max = parse_real(key, value);
    } else if (key == "grid_points") {
      c.grid.points = static_cast<std::size_t>(parse_count(key, value));
    } else if (key == "normalize") {
      normalize = parse_bool(key, value);
    } else {
      throw ConfigError(key, "unknown key");
    }
  }
  if (!seen.count("prep")) throw ConfigError("prep", "missing");
  if (normalize) {
    c.prep = normalized("prep", c.prep);
    if (c.post) c.post = normalized("post", *c.post);
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open " + path.string());
  return parse_config(in);
}

std::string dump_config(const ExperimentConfig& c) {
  std::ostringstream os;
  os << "prep = " << join(c.prep) << '\n';
  if (c.post) {
    os << "post = " << join(*c.post) << '\n';
  } else if (c.effect) {
    std::array<Complex, 16> entries{};
    for (Eigen::Index i = 0; i < 16; ++i) entries[static_cast<std::size_t>(i)] = (*c.effect)(i / 4, i % 4);
    os << "effect = " << join(entries) << '\n';
  }
  os << "g_a = " << text::format_double(c.g_a) << '\n'
     << "g_b = " << text::format_double(c.g_b) << '\n'
     << "noise_a = " << text::format_double(c.noise_a) << '\n'
     << "noise_b = " << text::format_double(c.noise_b) << '\n'
     << "n_trials = " << c.n_trials << '\n'
     << "seed = " << c.seed << '\n'
     << "grid_min = " << text::format_double(c.grid.x_min) << '\n'
     << "grid_max = " << text::format_double(c.grid.x_max) << '\n'
     << "grid_points = " << c.grid.points << '\n';
  return os.str();
}

}  // namespace qcat
