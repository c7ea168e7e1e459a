#include "toa/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace toa {

std::string to_string(ResidualCentering c) {
  return c == ResidualCentering::AllAnchors ? "all-anchors" : "fitted-set";
}

std::string to_string(InitStrategy s) {
  return s == InitStrategy::PreviousEstimate ? "previous-estimate" : "anchor-centroid";
}

ResidualCentering centering_from_string(const std::string& s) {
  if (s == "all-anchors") return ResidualCentering::AllAnchors;
  if (s == "fitted-set") return ResidualCentering::FittedSet;
  throw InvalidInput("unknown centering '" + s + "' (expected all-anchors or fitted-set)");
}

InitStrategy init_strategy_from_string(const std::string& s) {
  if (s == "previous-estimate") return InitStrategy::PreviousEstimate;
  if (s == "anchor-centroid") return InitStrategy::AnchorCentroid;
  throw InvalidInput("unknown init_strategy '" + s +
                     "' (expected previous-estimate or anchor-centroid)");
}

namespace {

std::string where(const std::string& origin, const YAML::Node& node) {
  const YAML::Mark mark = node.Mark();
  if (mark.line < 0) return origin;
  return origin + ":" + std::to_string(mark.line + 1);
}

[[noreturn]] void fail(const std::string& origin, const YAML::Node& node,
                       const std::string& field, const std::string& msg) {
  throw ConfigError(where(origin, node) + ": field '" + field + "': " + msg);
}

template <typename T>
T scalar(const std::string& origin, const YAML::Node& node, const std::string& field,
         const char* kind) {
  if (!node.IsScalar()) fail(origin, node, field, std::string("expected ") + kind);
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    fail(origin, node, field, std::string("expected ") + kind + ", got '" + node.Scalar() + "'");
  }
}

std::pair<double, double> range(const std::string& origin, const YAML::Node& node,
                                const std::string& field) {
  if (!node.IsSequence() || node.size() != 2) {
    fail(origin, node, field, "expected a two-element list [lo, hi]");
  }
  return {scalar<double>(origin, node[0], field, "a number"),
          scalar<double>(origin, node[1], field, "a number")};
}

using Setter = std::function<void(ScenarioConfig&, const YAML::Node&, const std::string&)>;

const std::map<std::string, std::map<std::string, Setter>>& schema() {
  auto num = [](double ScenarioConfig::*f) -> Setter {
    return [f](ScenarioConfig& c, const YAML::Node& n, const std::string& o) {
      c.*f = scalar<double>(o, n, "", "a number");
    };
  };
  auto integer = [](int ScenarioConfig::*f) -> Setter {
    return [f](ScenarioConfig& c, const YAML::Node& n, const std::string& o) {
      c.*f = scalar<int>(o, n, "", "an integer");
    };
  };
  auto rng = [](std::pair<double, double> ScenarioConfig::*f) -> Setter {
    return [f](ScenarioConfig& c, const YAML::Node& n, const std::string& o) {
      c.*f = range(o, n, "");
    };
  };
  auto text = [](auto parse, auto ScenarioConfig::*f) -> Setter {
    return [parse, f](ScenarioConfig& c, const YAML::Node& n, const std::string& o) {
      c.*f = parse(scalar<std::string>(o, n, "", "a string"));
    };
  };
  static const std::map<std::string, std::map<std::string, Setter>> s = {
      {"scenario",
       {{"m", integer(&ScenarioConfig::m)},
        {"n_agents", integer(&ScenarioConfig::n_agents)},
        {"area_side", num(&ScenarioConfig::area_side)},
        {"anchor_height", num(&ScenarioConfig::anchor_height)},
        {"agent_height", num(&ScenarioConfig::agent_height)}}},
      {"noise",
       {{"sigma", num(&ScenarioConfig::sigma)},
        {"nlos_fraction", num(&ScenarioConfig::nlos_fraction)},
        {"nlos_range", rng(&ScenarioConfig::nlos_range)},
        {"offset_range", rng(&ScenarioConfig::offset_range)},
        {"tx_time_range", rng(&ScenarioConfig::tx_time_range)}}},
      {"algorithm",
       {{"lambda", num(&ScenarioConfig::lambda)},
        {"alpha", num(&ScenarioConfig::alpha)},
        {"selection_mode", text(selection_mode_from_string, &ScenarioConfig::selection_mode)},
        {"k_max", integer(&ScenarioConfig::k_max)},
        {"k_ne", integer(&ScenarioConfig::k_ne)},
        {"grad_tol", num(&ScenarioConfig::grad_tol)},
        {"fix_height",
         [](ScenarioConfig& c, const YAML::Node& n, const std::string& o) {
           c.fix_height = scalar<bool>(o, n, "", "true or false");
         }},
        {"centering", text(centering_from_string, &ScenarioConfig::centering)},
        {"init_strategy", text(init_strategy_from_string, &ScenarioConfig::init_strategy)}}},
      {"run",
       {{"t_max", integer(&ScenarioConfig::t_max)},
        {"trials", integer(&ScenarioConfig::trials)},
        {"seed",
         [](ScenarioConfig& c, const YAML::Node& n, const std::string& o) {
           c.seed = scalar<std::uint64_t>(o, n, "", "an unsigned integer");
         }}}},
  };
  return s;
}

}  // namespace

ScenarioConfig parse_config(const std::string& text, const std::string& origin,
                            ScenarioConfig base) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(origin + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  if (root.IsNull()) {
    base.validate();
    return base;
  }
  if (!root.IsMap()) throw ConfigError(where(origin, root) + ": top level must be a mapping");

  ScenarioConfig cfg = base;
  const auto& sections = schema();
  for (const auto& sec : root) {
    const std::string sec_name = sec.first.as<std::string>();
    const auto it = sections.find(sec_name);
    if (it == sections.end()) fail(origin, sec.first, sec_name, "unknown section");
    if (sec.second.IsNull()) continue;
    if (!sec.second.IsMap()) fail(origin, sec.second, sec_name, "expected a mapping");
    for (const auto& kv : sec.second) {
      const std::string key = kv.first.as<std::string>();
      const std::string field = sec_name + "." + key;
      const auto setter = it->second.find(key);
      if (setter == it->second.end()) fail(origin, kv.first, field, "unknown key");
      try {
        setter->second(cfg, kv.second, origin);
      } catch (const ConfigError& e) {
        // Re-tag with the full field name.
        std::string msg = e.what();
        const std::string blank = "field '': ";
        const auto pos = msg.find(blank);
        if (pos != std::string::npos) msg.replace(pos, blank.size(), "field '" + field + "': ");
        throw ConfigError(msg);
      } catch (const InvalidInput& e) {
        fail(origin, kv.second, field, e.what());
      }
    }
  }
  try {
    cfg.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return cfg;
}

ScenarioConfig load_config(const std::string& path, ScenarioConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path, std::move(base));
}

}  // namespace toa
