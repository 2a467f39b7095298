#include "prefopt/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "prefopt/errors.hpp"

namespace prefopt {

std::string to_string(EnvKind e) {
  switch (e) {
    case EnvKind::linear_matched: return "linear_matched";
    case EnvKind::linear_flipped: return "linear_flipped";
    case EnvKind::neural: return "neural";
  }
  return "unknown";
}

EnvKind env_kind_from_string(const std::string& s) {
  if (s == "linear_matched") return EnvKind::linear_matched;
  if (s == "linear_flipped") return EnvKind::linear_flipped;
  if (s == "neural") return EnvKind::neural;
  throw std::invalid_argument("unknown env '" + s + "' (expected linear_matched, linear_flipped or neural)");
}

std::string to_string(Method m) {
  switch (m) {
    case Method::dpo: return "dpo";
    case Method::rmf_po: return "rmf_po";
    case Method::rmb_po: return "rmb_po";
    case Method::rmb_po_plus: return "rmb_po_plus";
  }
  return "unknown";
}

Method method_from_string(const std::string& s) {
  for (Method m : all_methods()) {
    if (to_string(m) == s) return m;
  }
  throw std::invalid_argument("unknown method '" + s + "' (expected dpo, rmf_po, rmb_po or rmb_po_plus)");
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> methods{Method::dpo, Method::rmf_po, Method::rmb_po, Method::rmb_po_plus};
  return methods;
}

bool is_linear(EnvKind e) { return e != EnvKind::neural; }

ExperimentConfig ExperimentConfig::defaults(EnvKind env) {
  ExperimentConfig c;
  c.env = env;
  c.seeds = parse_seed_list("2021-2030");
  c.methods = all_methods();
  if (is_linear(env)) {
    c.n = 20;
    c.m_values = {200};
    c.policy = PolicyOptConfig::linear_default();
  } else {
    c.n = 50;
    c.m_values = {50, 100, 250, 500, 1000};
    c.policy = PolicyOptConfig::neural_default();
  }
  return c;
}

bool ExperimentConfig::has_method(Method m) const {
  return std::find(methods.begin(), methods.end(), m) != methods.end();
}

int ExperimentConfig::max_m() const {
  return m_values.empty() ? 0 : *std::max_element(m_values.begin(), m_values.end());
}

void ExperimentConfig::validate() const {
  if (n < 1) throw ConfigError("n", 0, "n must be >= 1");
  if (m_values.empty()) throw ConfigError("m", 0, "m needs at least one value");
  for (int m : m_values) {
    if (m < 0) throw ConfigError("m", 0, "m values must be >= 0");
  }
  if (seeds.empty()) throw ConfigError("seeds", 0, "seeds must be nonempty");
  for (auto s : seeds) {
    if (s < 0) throw ConfigError("seeds", 0, "seeds must be non-negative");
  }
  if (eval_states < 1) throw ConfigError("eval_states", 0, "eval_states must be >= 1");
  if (methods.empty()) throw ConfigError("methods", 0, "methods must be nonempty");
  if (profile_grid < 2) throw ConfigError("profile_grid", 0, "profile_grid must be >= 2");
  if (reward.steps < 1) throw ConfigError("reward_steps", 0, "reward_steps must be >= 1");
  if (reward.max_iters < 1) throw ConfigError("max_iters", 0, "max_iters must be >= 1");
  if (!(reward.step_size > 0.0)) throw ConfigError("reward_step_size", 0, "reward_step_size must be > 0");
  if (!(reward.ridge >= 0.0)) throw ConfigError("ridge", 0, "ridge must be >= 0");
  if (policy.rmbpo_plus_state_pool == StatePool::prompts_only && has_method(Method::rmb_po_plus)) {
    for (int m : m_values) {
      if (m < 1) throw ConfigError("m", 0, "prompts_only state pool needs m >= 1");
    }
  }
  policy.validate();
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

const std::map<std::string, std::string>& key_sections() {
  static const std::map<std::string, std::string> keys{
      {"env", "experiment"},       {"n", "experiment"},          {"m", "experiment"},
      {"beta", "experiment"},      {"seeds", "experiment"},      {"eval_states", "experiment"},
      {"methods", "experiment"},   {"state_pool", "experiment"}, {"profile_grid", "experiment"},
      {"optimizer", "policy"},     {"step_size", "policy"},      {"max_steps", "policy"},
      {"tol", "policy"},           {"patience", "policy"},       {"ridge", "reward"},
      {"max_iters", "reward"},     {"reward_steps", "reward"},   {"reward_step_size", "reward"},
  };
  return keys;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

template <typename T>
T parse_number(const std::string& s) {
  T v{};
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) throw std::invalid_argument("not a number: '" + s + "'");
  return v;
}

struct Entry {
  std::string value;
  int line = 0;
};

// Qualified "section.key" or bare key -> bare key; throws for unknown keys.
std::string canonical_key(const std::string& key, int line) {
  std::string bare = key;
  std::string section;
  if (const auto dot = key.find('.'); dot != std::string::npos) {
    section = key.substr(0, dot);
    bare = key.substr(dot + 1);
  }
  const auto it = key_sections().find(bare);
  if (it == key_sections().end()) throw ConfigError(key, line, "unknown config key '" + key + "'");
  if (!section.empty() && section != it->second) {
    throw ConfigError(key, line, "key '" + bare + "' belongs to section [" + it->second + "]");
  }
  return bare;
}

void apply(ExperimentConfig& c, const std::string& key, const Entry& e) {
  const std::string& v = e.value;
  try {
    if (key == "env") {
      c.env = env_kind_from_string(v);
    } else if (key == "n") {
      c.n = parse_number<int>(v);
    } else if (key == "m") {
      c.m_values.clear();
      for (const auto& t : split_list(v)) c.m_values.push_back(parse_number<int>(t));
    } else if (key == "beta") {
      c.policy.beta = parse_number<double>(v);
    } else if (key == "seeds") {
      c.seeds = parse_seed_list(v);
    } else if (key == "eval_states") {
      c.eval_states = parse_number<int>(v);
    } else if (key == "methods") {
      c.methods.clear();
      for (const auto& t : split_list(v)) {
        const Method m = method_from_string(t);
        if (!c.has_method(m)) c.methods.push_back(m);
      }
    } else if (key == "state_pool") {
      c.policy.rmbpo_plus_state_pool = state_pool_from_string(v);
    } else if (key == "profile_grid") {
      c.profile_grid = parse_number<int>(v);
    } else if (key == "optimizer") {
      c.policy.optimizer.kind = optimizer_kind_from_string(v);
    } else if (key == "step_size") {
      c.policy.optimizer.step_size = parse_number<double>(v);
    } else if (key == "max_steps") {
      c.policy.max_steps = parse_number<int>(v);
    } else if (key == "tol") {
      c.policy.convergence_tol = parse_number<double>(v);
    } else if (key == "patience") {
      c.policy.patience = parse_number<int>(v);
    } else if (key == "ridge") {
      c.reward.ridge = parse_number<double>(v);
    } else if (key == "max_iters") {
      c.reward.max_iters = parse_number<int>(v);
    } else if (key == "reward_steps") {
      c.reward.steps = parse_number<int>(v);
    } else if (key == "reward_step_size") {
      c.reward.step_size = parse_number<double>(v);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& ex) {
    throw ConfigError(key, e.line, "bad value for '" + key + "': " + ex.what());
  }
}

}  // namespace

ConfigOverride parse_override(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw ConfigError(text, 0, "override '" + text + "' is not key=value");
  return {trim(text.substr(0, eq)), trim(text.substr(eq + 1))};
}

std::vector<std::int64_t> parse_seed_list(const std::string& text) {
  std::vector<std::int64_t> seeds;
  for (const auto& tok : split_list(text)) {
    const auto dash = tok.find('-', 1);
    if (dash == std::string::npos) {
      seeds.push_back(parse_number<std::int64_t>(tok));
      continue;
    }
    const auto lo = parse_number<std::int64_t>(tok.substr(0, dash));
    const auto hi = parse_number<std::int64_t>(tok.substr(dash + 1));
    if (hi < lo) throw std::invalid_argument("empty seed range '" + tok + "'");
    for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
  }
  if (seeds.empty()) throw std::invalid_argument("no seeds given");
  return seeds;
}

std::string format_seed_list(const std::vector<std::int64_t>& seeds) {
  bool contiguous = seeds.size() > 1;
  for (std::size_t i = 1; i < seeds.size(); ++i) contiguous = contiguous && seeds[i] == seeds[i - 1] + 1;
  if (contiguous) return std::to_string(seeds.front()) + "-" + std::to_string(seeds.back());
  std::string out;
  for (std::size_t i = 0; i < seeds.size(); ++i) out += (i ? ", " : "") + std::to_string(seeds[i]);
  return out;
}

ExperimentConfig parse_config(const std::string& text, const std::vector<ConfigOverride>& overrides) {
  std::map<std::string, Entry> entries;
  std::vector<std::string> order;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(line, line_no, "malformed section header '" + line + "'");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "experiment" && section != "policy" && section != "reward") {
        throw ConfigError(section, line_no, "unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(line, line_no, "line " + std::to_string(line_no) + " is not key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string bare = canonical_key(key, line_no);
    if (!section.empty() && key_sections().at(bare) != section) {
      throw ConfigError(key, line_no, "key '" + bare + "' belongs to section [" + key_sections().at(bare) + "]");
    }
    if (entries.count(bare)) throw ConfigError(key, line_no, "duplicate key '" + bare + "'");
    entries[bare] = {trim(line.substr(eq + 1)), line_no};
    order.push_back(bare);
  }
  for (const auto& o : overrides) {
    const std::string bare = canonical_key(o.key, 0);
    if (!entries.count(bare)) order.push_back(bare);
    entries[bare] = {o.value, 0};
  }

  EnvKind env = EnvKind::linear_matched;
  if (const auto it = entries.find("env"); it != entries.end()) {
    try {
      env = env_kind_from_string(it->second.value);
    } catch (const std::exception& ex) {
      throw ConfigError("env", it->second.line, ex.what());
    }
  }
  ExperimentConfig cfg = ExperimentConfig::defaults(env);
  for (const auto& key : order) apply(cfg, key, entries.at(key));
  try {
    cfg.validate();
  } catch (const ConfigError& ex) {
    const auto it = entries.find(ex.key());
    throw ConfigError(ex.key(), it == entries.end() ? 0 : it->second.line, ex.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path, const std::vector<ConfigOverride>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", 0, "cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), overrides);
}

std::string to_config_text(const ExperimentConfig& cfg) {
  std::ostringstream out;
  auto join_m = [&] {
    std::string s;
    for (std::size_t i = 0; i < cfg.m_values.size(); ++i) s += (i ? ", " : "") + std::to_string(cfg.m_values[i]);
    return s;
  };
  std::string methods;
  for (std::size_t i = 0; i < cfg.methods.size(); ++i) methods += (i ? ", " : "") + to_string(cfg.methods[i]);
  out << "[experiment]\n"
      << "env = " << to_string(cfg.env) << "\n"
      << "n = " << cfg.n << "\n"
      << "m = " << join_m() << "\n"
      << "beta = " << format_double(cfg.policy.beta) << "\n"
      << "seeds = " << format_seed_list(cfg.seeds) << "\n"
      << "eval_states = " << cfg.eval_states << "\n"
      << "methods = " << methods << "\n"
      << "state_pool = " << to_string(cfg.policy.rmbpo_plus_state_pool) << "\n"
      << "profile_grid = " << cfg.profile_grid << "\n"
      << "\n[policy]\n"
      << "optimizer = " << to_string(cfg.policy.optimizer.kind) << "\n"
      << "step_size = " << format_double(cfg.policy.optimizer.step_size) << "\n"
      << "max_steps = " << cfg.policy.max_steps << "\n"
      << "tol = " << format_double(cfg.policy.convergence_tol) << "\n"
      << "patience = " << cfg.policy.patience << "\n"
      << "\n[reward]\n"
      << "ridge = " << format_double(cfg.reward.ridge) << "\n"
      << "max_iters = " << cfg.reward.max_iters << "\n"
      << "reward_steps = " << cfg.reward.steps << "\n"
      << "reward_step_size = " << format_double(cfg.reward.step_size) << "\n";
  return out.str();
}

nlohmann::ordered_json to_json(const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["env"] = to_string(cfg.env);
  j["n"] = cfg.n;
  j["m"] = cfg.m_values;
  j["beta"] = cfg.policy.beta;
  j["seeds"] = cfg.seeds;
  j["eval_states"] = cfg.eval_states;
  std::vector<std::string> methods;
  for (Method m : cfg.methods) methods.push_back(to_string(m));
  j["methods"] = methods;
  j["state_pool"] = to_string(cfg.policy.rmbpo_plus_state_pool);
  j["profile_grid"] = cfg.profile_grid;
  j["policy"] = {{"optimizer", to_string(cfg.policy.optimizer.kind)},
                 {"step_size", cfg.policy.optimizer.step_size},
                 {"max_steps", cfg.policy.max_steps},
                 {"tol", cfg.policy.convergence_tol},
                 {"patience", cfg.policy.patience}};
  j["reward"] = {{"ridge", cfg.reward.ridge},
                 {"max_iters", cfg.reward.max_iters},
                 {"reward_steps", cfg.reward.steps},
                 {"reward_step_size", cfg.reward.step_size}};
  return j;
}

}  // namespace prefopt
