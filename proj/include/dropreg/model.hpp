#pragma once

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dropreg/glm.hpp"
#include "dropreg/noising.hpp"

namespace dropreg {

/// Trained model as stored on disk: the family, the training noise (kind
/// "none" for un-noised penalties), coefficients, and the column scaling
/// factors to apply to evaluation rows (empty when no normalization ran).
struct GlmModel {
  Family family = Family::logistic;
  bool noised = false;
  NoiseModel noise{};
  std::vector<double> beta;
  std::vector<double> scaling;
  std::string vocabulary_path;

  std::uint32_t dim() const { return static_cast<std::uint32_t>(beta.size()); }
};

inline const char* noise_kind_name(const NoiseModel& noise) {
  return noise.kind == NoiseKind::dropout ? "dropout" : "additive_gaussian";
}

inline void save_model(const GlmModel& model, const std::string& path) {
  nlohmann::json j;
  j["family"] = family_name(model.family);
  if (model.noised) {
    j["noise"] = {{"kind", noise_kind_name(model.noise)}, {"param", model.noise.param}};
  } else {
    j["noise"] = {{"kind", "none"}, {"param", 0.0}};
  }
  j["dim"] = model.dim();
  j["beta"] = model.beta;
  j["scaling"] = model.scaling;
  if (!model.vocabulary_path.empty()) j["vocabulary_path"] = model.vocabulary_path;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error("write failed for " + path);
}

inline GlmModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path + ": invalid model file: " + e.what());
  }
  GlmModel model;
  try {
    model.family = family_from_name(j.at("family").get<std::string>());
    std::string kind = j.at("noise").at("kind").get<std::string>();
    double param = j.at("noise").at("param").get<double>();
    if (kind == "none") {
      model.noised = false;
    } else if (kind == "dropout") {
      model.noised = true;
      model.noise = NoiseModel::dropout(param);
    } else if (kind == "additive_gaussian") {
      model.noised = true;
      model.noise = NoiseModel::additive(param);
    } else {
      throw std::runtime_error("unknown noise kind: " + kind);
    }
    model.beta = j.at("beta").get<std::vector<double>>();
    model.scaling = j.at("scaling").get<std::vector<double>>();
    if (j.contains("vocabulary_path"))
      model.vocabulary_path = j.at("vocabulary_path").get<std::string>();
    if (j.at("dim").get<std::size_t>() != model.beta.size())
      throw std::runtime_error("model dim disagrees with beta length");
    if (!model.scaling.empty() && model.scaling.size() != model.beta.size())
      throw std::runtime_error("model scaling length disagrees with beta length");
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path + ": invalid model file: " + e.what());
  }
  return model;
}

}  // namespace dropreg
