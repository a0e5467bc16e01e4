#include "twfr/config.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <set>
#include <string>
#include <utility>

#include "twfr/error.h"
#include "twfr/gmm.h"

namespace twfr {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

void reject_unknown(const nlohmann::json& obj, std::initializer_list<const char*> allowed,
                    std::string_view where) {
  if (!obj.is_object()) throw ConfigError(std::string(where) + ": expected an object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [key, _] : obj.items()) {
    if (!keys.contains(key)) throw ConfigError(std::string(where) + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read(const nlohmann::json& obj, const char* key, T& out, std::string_view where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string(where) + "." + key + ": wrong type (" + obj.at(key).dump() + ")");
  }
}

std::string_view window_name(WindowType w) { return w == WindowType::kHann ? "hann" : "rectangular"; }

void validate_spectrogram(const SpectrogramConfig& s) {
  // Sample-rate dependent checks happen when audio is processed.
  if (s.window_size < 2) throw ConfigError("spectrogram.window_size must be >= 2");
  if (s.hop_size <= 0 || s.hop_size > s.window_size) {
    throw ConfigError("spectrogram.hop_size must satisfy 0 < hop_size <= window_size");
  }
  if (s.n_mels < 1) throw ConfigError("spectrogram.n_mels must be >= 1");
  if (!(s.f_min >= 0.0 && s.f_min < s.f_max)) throw ConfigError("spectrogram needs 0 <= f_min < f_max");
  if (!(s.log_floor > 0.0)) throw ConfigError("spectrogram.log_floor must be > 0");
}

}  // namespace

void MachineConfig::validate() const {
  if (!(r >= 0.0 && r <= 1.0)) throw ConfigError("r must lie in [0, 1], got " + std::to_string(r));
  if (k < 1) throw ConfigError("k must be >= 1");
  if (smote && smote->k_neighbors < 1) throw ConfigError("smote.k_neighbors must be >= 1");
  validate_spectrogram(spectrogram);
  FitOptions{k, em.reg_covar, em.tol, em.max_iter, em.n_init, 0}.validate();
}

std::optional<double> preset_r(std::string_view machine) {
  static const std::array<std::pair<const char*, double>, 7> presets = {{
      {"toycar", 0.99},
      {"toytrain", 0.81},
      {"fan", 1.00},
      {"gearbox", 0.99},
      {"bearing", 1.00},
      {"slider", 0.88},
      {"valve", 0.45},
  }};
  const std::string key = lower(machine);
  for (const auto& [name, r] : presets) {
    if (key == name) return r;
  }
  return std::nullopt;
}

nlohmann::json to_json(const MachineConfig& cfg) {
  nlohmann::json smote = nullptr;
  if (cfg.smote) {
    smote = {{"k_neighbors", cfg.smote->k_neighbors}, {"target_count", cfg.smote->target_count}};
  }
  const SpectrogramConfig& s = cfg.spectrogram;
  return {
      {"r", cfg.r},
      {"k", cfg.k},
      {"smote", smote},
      {"spectrogram",
       {{"window_size", s.window_size},
        {"hop_size", s.hop_size},
        {"n_mels", s.n_mels},
        {"f_min", s.f_min},
        {"f_max", s.f_max},
        {"log_floor", s.log_floor},
        {"window", window_name(s.window)}}},
      {"em",
       {{"reg_covar", cfg.em.reg_covar},
        {"tol", cfg.em.tol},
        {"max_iter", cfg.em.max_iter},
        {"n_init", cfg.em.n_init}}},
      {"include_component_weight", cfg.include_component_weight},
  };
}

void apply_machine_block(MachineConfig& cfg, const nlohmann::json& block, std::string_view where) {
  const std::string w(where);
  reject_unknown(block, {"r", "k", "smote", "spectrogram", "em", "include_component_weight"}, w);
  read(block, "r", cfg.r, w);
  read(block, "k", cfg.k, w);
  read(block, "include_component_weight", cfg.include_component_weight, w);

  if (block.contains("smote")) {
    const nlohmann::json& sm = block.at("smote");
    if (sm.is_null() || (sm.is_boolean() && !sm.get<bool>())) {
      cfg.smote.reset();
    } else if (sm.is_boolean()) {
      if (!cfg.smote) cfg.smote.emplace();
    } else {
      const std::string ws = w + ".smote";
      reject_unknown(sm, {"k_neighbors", "target_count"}, ws);
      SmoteOptions opts = cfg.smote.value_or(SmoteOptions{});
      read(sm, "k_neighbors", opts.k_neighbors, ws);
      read(sm, "target_count", opts.target_count, ws);
      cfg.smote = opts;
    }
  }

  if (block.contains("spectrogram")) {
    const nlohmann::json& sp = block.at("spectrogram");
    const std::string ws = w + ".spectrogram";
    reject_unknown(sp, {"window_size", "hop_size", "n_mels", "f_min", "f_max", "log_floor", "window"}, ws);
    SpectrogramConfig& s = cfg.spectrogram;
    read(sp, "window_size", s.window_size, ws);
    read(sp, "hop_size", s.hop_size, ws);
    read(sp, "n_mels", s.n_mels, ws);
    read(sp, "f_min", s.f_min, ws);
    read(sp, "f_max", s.f_max, ws);
    read(sp, "log_floor", s.log_floor, ws);
    if (sp.contains("window")) {
      std::string name;
      read(sp, "window", name, ws);
      if (name == "hann") {
        s.window = WindowType::kHann;
      } else if (name == "rectangular") {
        s.window = WindowType::kRectangular;
      } else {
        throw ConfigError(ws + ".window: expected 'hann' or 'rectangular', got '" + name + "'");
      }
    }
  }

  if (block.contains("em")) {
    const nlohmann::json& em = block.at("em");
    const std::string ws = w + ".em";
    reject_unknown(em, {"reg_covar", "tol", "max_iter", "n_init"}, ws);
    read(em, "reg_covar", cfg.em.reg_covar, ws);
    read(em, "tol", cfg.em.tol, ws);
    read(em, "max_iter", cfg.em.max_iter, ws);
    read(em, "n_init", cfg.em.n_init, ws);
  }

  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(w + ": " + e.what());
  }
}

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j) {
  reject_unknown(j, {"seed", "p", "defaults", "machines"}, "config");
  PipelineConfig cfg;
  read(j, "seed", cfg.seed, "config");
  read(j, "p", cfg.p, "config");
  if (!(cfg.p > 0.0 && cfg.p <= 1.0)) throw ConfigError("config.p must lie in (0, 1]");
  if (j.contains("defaults")) {
    cfg.defaults_ = j.at("defaults");
    MachineConfig probe;
    apply_machine_block(probe, cfg.defaults_, "defaults");
  }
  if (j.contains("machines")) {
    const nlohmann::json& machines = j.at("machines");
    if (!machines.is_object()) throw ConfigError("config.machines: expected an object");
    for (const auto& [name, block] : machines.items()) {
      MachineConfig probe;
      apply_machine_block(probe, cfg.defaults_, "defaults");
      apply_machine_block(probe, block, "machines." + name);
      cfg.machines_[lower(name)] = block;
    }
  }
  return cfg;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return from_json(j);
}

MachineConfig PipelineConfig::machine(std::string_view name) const {
  MachineConfig cfg;
  if (const auto r = preset_r(name)) cfg.r = *r;
  apply_machine_block(cfg, defaults_, "defaults");
  if (const auto it = machines_.find(lower(name)); it != machines_.end()) {
    apply_machine_block(cfg, it->second, "machines." + std::string(name));
  }
  return cfg;
}

}  // namespace twfr
