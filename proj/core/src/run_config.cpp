#include "ntkm/run_config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ntkm/errors.hpp"

namespace ntkm::bench {

using nlohmann::json;

const char* to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::MlpUnfrozen: return "MlpUnfrozen";
    case ModelKind::MlpFrozen: return "MlpFrozen";
    case ModelKind::KernelSgd: return "KernelSgd";
    case ModelKind::KernelAdamStar: return "KernelAdamStar";
    case ModelKind::MlpFrozenAdam: return "MlpFrozenAdam";
    case ModelKind::MlpFrozenAdamStar: return "MlpFrozenAdamStar";
  }
  return "?";
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "MlpUnfrozen") return ModelKind::MlpUnfrozen;
  if (name == "MlpFrozen") return ModelKind::MlpFrozen;
  if (name == "KernelSgd") return ModelKind::KernelSgd;
  if (name == "KernelAdamStar") return ModelKind::KernelAdamStar;
  if (name == "MlpFrozenAdam") return ModelKind::MlpFrozenAdam;
  if (name == "MlpFrozenAdamStar") return ModelKind::MlpFrozenAdamStar;
  throw InvalidArgumentError("unknown model kind '" + name + "'");
}

bool is_kernel_kind(ModelKind kind) {
  return kind == ModelKind::KernelSgd || kind == ModelKind::KernelAdamStar;
}

void RunConfig::validate() const {
  if (widths.empty()) throw InvalidArgumentError("config: widths is empty");
  if (model_kinds.empty()) throw InvalidArgumentError("config: model_kinds is empty");
  for (std::size_t i = 0; i < widths.size(); ++i) {
    const WidthSpec& w = widths[i];
    if (!w.infinite && w.h < 1) throw InvalidArgumentError("config: widths must be >= 1");
    if (i > 0) {
      const WidthSpec& prev = widths[i - 1];
      if (prev.infinite) throw InvalidArgumentError("config: 'inf' must be the last width");
      if (!w.infinite && w.h <= prev.h) {
        throw InvalidArgumentError("config: widths must be strictly ascending");
      }
    }
  }
  const bool has_inf = widths.back().infinite;
  if (has_inf) {
    for (ModelKind kind : model_kinds) {
      if (!is_kernel_kind(kind)) {
        throw InvalidArgumentError(
            "config: width 'inf' is only valid for kernel model kinds");
      }
    }
  }
  if (n_train < 1) throw InvalidArgumentError("config: n_train must be >= 1");
  if (n_eval < 0) throw InvalidArgumentError("config: n_eval must be >= 0");
  if (input_dim < 1 || output_dim < 1) throw InvalidArgumentError("config: bad dims");
  if (n_seeds < 1) throw InvalidArgumentError("config: n_seeds must be >= 1");
  if (eval_every < 1) throw InvalidArgumentError("config: eval_every must be >= 1");
  if (!(train.alpha_sgd > 0.0) || !(train.alpha_adam > 0.0)) {
    throw InvalidArgumentError("config: step sizes must be > 0");
  }
  if (!(train.beta1 >= 0.0 && train.beta1 < 1.0) ||
      !(train.beta2 >= 0.0 && train.beta2 < 1.0)) {
    throw InvalidArgumentError("config: betas must be in [0, 1)");
  }
  if (!(train.epsilon >= 0.0)) throw InvalidArgumentError("config: epsilon must be >= 0");
  if (train.steps < 1) throw InvalidArgumentError("config: steps must be >= 1");
}

std::string RunConfig::canonical_json() const {
  json j;
  j["task"] = to_string(task);
  json jw = json::array();
  for (const WidthSpec& w : widths) {
    if (w.infinite) {
      jw.push_back("inf");
    } else {
      jw.push_back(w.h);
    }
  }
  j["widths"] = jw;
  json jk = json::array();
  for (ModelKind kind : model_kinds) jk.push_back(to_string(kind));
  j["model_kinds"] = jk;
  j["train"] = {{"alpha_sgd", train.alpha_sgd}, {"alpha_adam", train.alpha_adam},
                {"beta1", train.beta1},         {"beta2", train.beta2},
                {"epsilon", train.epsilon},     {"steps", train.steps},
                {"seed", train.seed}};
  j["data"] = {{"n_train", n_train},
               {"n_eval", n_eval},
               {"input_dim", input_dim},
               {"output_dim", output_dim}};
  j["n_seeds"] = n_seeds;
  j["eval_every"] = eval_every;
  j["output_dir"] = output_dir;
  return j.dump();
}

namespace {

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) {
      throw InvalidArgumentError("config: unknown key '" + key + "' in " + where);
    }
  }
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw InvalidArgumentError(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw InvalidArgumentError("config: top level must be an object");

  reject_unknown_keys(j, {"task", "widths", "model_kinds", "train", "data",
                          "n_seeds", "eval_every", "output_dir"},
                      "top level");

  RunConfig config;
  if (!j.contains("task") || !j.contains("widths") || !j.contains("model_kinds")) {
    throw InvalidArgumentError("config: task, widths and model_kinds are required");
  }
  config.task = task_from_string(j.at("task").get<std::string>());

  for (const json& w : j.at("widths")) {
    if (w.is_string()) {
      if (w.get<std::string>() != "inf") {
        throw InvalidArgumentError("config: width strings must be 'inf'");
      }
      config.widths.push_back(WidthSpec::inf());
    } else if (w.is_number_integer()) {
      config.widths.push_back(WidthSpec::finite(w.get<int>()));
    } else {
      throw InvalidArgumentError("config: widths must be integers or 'inf'");
    }
  }

  for (const json& k : j.at("model_kinds")) {
    config.model_kinds.push_back(model_kind_from_string(k.get<std::string>()));
  }

  if (j.contains("train")) {
    const json& t = j.at("train");
    reject_unknown_keys(t, {"alpha_sgd", "alpha_adam", "beta1", "beta2", "epsilon",
                            "steps", "seed"},
                        "train");
    if (t.contains("alpha_sgd")) config.train.alpha_sgd = t.at("alpha_sgd").get<double>();
    if (t.contains("alpha_adam")) config.train.alpha_adam = t.at("alpha_adam").get<double>();
    if (t.contains("beta1")) config.train.beta1 = t.at("beta1").get<double>();
    if (t.contains("beta2")) config.train.beta2 = t.at("beta2").get<double>();
    if (t.contains("epsilon")) config.train.epsilon = t.at("epsilon").get<double>();
    if (t.contains("steps")) config.train.steps = t.at("steps").get<long>();
    if (t.contains("seed")) config.train.seed = t.at("seed").get<std::uint64_t>();
  }

  if (j.contains("data")) {
    const json& d = j.at("data");
    reject_unknown_keys(d, {"n_train", "n_eval", "input_dim", "output_dim"}, "data");
    if (d.contains("n_train")) config.n_train = d.at("n_train").get<long>();
    if (d.contains("n_eval")) config.n_eval = d.at("n_eval").get<long>();
    if (d.contains("input_dim")) config.input_dim = d.at("input_dim").get<int>();
    if (d.contains("output_dim")) config.output_dim = d.at("output_dim").get<int>();
  }

  if (j.contains("n_seeds")) config.n_seeds = j.at("n_seeds").get<int>();
  if (j.contains("eval_every")) config.eval_every = j.at("eval_every").get<long>();
  if (j.contains("output_dir")) config.output_dir = j.at("output_dir").get<std::string>();

  config.validate();
  return config;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InvalidArgumentError("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_run_config(ss.str());
}

}  // namespace ntkm::bench
