#include "config_io.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "bohmctx/errors.hpp"

namespace bohmctx::cli {

namespace {

void flatten_node(const YAML::Node& node, const std::string& prefix, std::map<std::string, std::string>& out) {
  if (node.IsMap()) {
    for (const auto& kv : node) {
      const std::string key = kv.first.as<std::string>();
      flatten_node(kv.second, prefix.empty() ? key : prefix + "." + key, out);
    }
    return;
  }
  if (prefix.empty()) throw InvalidInput("config: top level must be a map of keys");
  if (out.contains(prefix)) throw InvalidInput("config: duplicate key '" + prefix + "'");
  YAML::Emitter e;
  e << YAML::Flow << node;
  out[prefix] = e.c_str();
}

std::string format_double(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  std::string s(buf, r.ptr);
  // Keep floats recognisable as floats.
  if (s.find_first_of(".einn") == std::string::npos) s += ".0";
  return s;
}

std::string to_text(double x) { return format_double(x); }
std::string to_text(std::size_t x) { return std::to_string(x); }
std::string to_text(bool x) { return x ? "true" : "false"; }
std::string to_text(pointer::VelocityForm f) {
  return f == pointer::VelocityForm::coherent ? "coherent" : "internal_state";
}
template <class T>
std::string to_text(const std::vector<T>& xs) {
  std::string s = "[";
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ", " : "") + to_text(xs[i]);
  return s + "]";
}

template <class T>
void from_node(const YAML::Node& n, T& out) {
  out = n.as<T>();
}
void from_node(const YAML::Node& n, pointer::VelocityForm& out) {
  const auto s = n.as<std::string>();
  if (s == "internal_state") {
    out = pointer::VelocityForm::internal_state;
  } else if (s == "coherent") {
    out = pointer::VelocityForm::coherent;
  } else {
    throw InvalidInput("expected internal_state or coherent, got '" + s + "'");
  }
}

struct Loader {
  const std::map<std::string, std::string>& values;
  std::set<std::string> used;

  template <class T>
  void operator()(const std::string& key, T& field, const char*) {
    const auto it = values.find(key);
    if (it == values.end()) return;
    used.insert(key);
    try {
      from_node(YAML::Load(it->second), field);
    } catch (const YAML::Exception& e) {
      throw InvalidInput("config key '" + key + "': cannot read '" + it->second + "'");
    } catch (const InvalidInput& e) {
      throw InvalidInput("config key '" + key + "': " + e.what());
    }
  }
};

struct Collector {
  std::vector<std::pair<std::string, std::string>> pairs;
  std::vector<std::string> docs;

  template <class T>
  void operator()(const std::string& key, T& field, const char* doc) {
    pairs.emplace_back(key, to_text(field));
    docs.emplace_back(doc);
  }
};

}  // namespace

ConfigSource ConfigSource::from_text(const std::string& text) {
  ConfigSource source;
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw InvalidInput(std::string("config: ") + e.what());
  }
  if (root.IsNull()) return source;
  flatten_node(root, "", source.values_);
  return source;
}

ConfigSource ConfigSource::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("config file not found or unreadable: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return from_text(ss.str());
  } catch (const InvalidInput& e) {
    throw InvalidInput(path.string() + ": " + e.what());
  }
}

std::string ConfigSource::take_scenario() {
  const auto it = values_.find("scenario");
  if (it == values_.end()) return "";
  std::string s = YAML::Load(it->second).as<std::string>();
  values_.erase(it);
  return s;
}

template <class Config>
void ConfigSource::apply(Config& config) const {
  Loader loader{values_, {}};
  bind(loader, config);
  for (const auto& [key, value] : values_) {
    if (!loader.used.contains(key)) throw InvalidInput("config: unknown key '" + key + "'");
  }
}

template <class Config>
std::vector<std::pair<std::string, std::string>> flatten(Config config) {
  Collector c;
  bind(c, config);
  return c.pairs;
}

template <class Config>
std::string serialize(Config config) {
  Collector c;
  bind(c, config);
  std::string out = "scenario: " + scenario_of(config) + "\n";
  for (std::size_t i = 0; i < c.pairs.size(); ++i) {
    out += "# " + c.docs[i] + "\n" + c.pairs[i].first + ": " + c.pairs[i].second + "\n";
  }
  return out;
}

#define BOHMCTX_CONFIG_INSTANTIATE(T)                                       \
  template void ConfigSource::apply<T>(T&) const;                           \
  template std::vector<std::pair<std::string, std::string>> flatten<T>(T); \
  template std::string serialize<T>(T);

BOHMCTX_CONFIG_INSTANTIATE(BeamSplitterConfig)
BOHMCTX_CONFIG_INSTANTIATE(SternGerlachConfig)
BOHMCTX_CONFIG_INSTANTIATE(OpticalSgConfig)
BOHMCTX_CONFIG_INSTANTIATE(AncillaConfig)

#undef BOHMCTX_CONFIG_INSTANTIATE

}  // namespace bohmctx::cli
