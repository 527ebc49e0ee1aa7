#include "boxdistill/config.hpp"

#include <fstream>

#include "boxdistill/error.hpp"
#include "boxdistill/json_io.hpp"
#include "boxdistill/rng.hpp"

namespace boxdistill {

namespace {

template <typename T>
void get_to_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) j.at(key).get_to(out);
}

std::uint64_t derive_seed(std::uint64_t master, const char* tag) {
  return RngStream(master).fork(tag).next_u64();
}

}  // namespace

ExperimentConfig::ExperimentConfig() {
  // Zero seeds are "derive from master" markers.
  data.synthetic.seed = 0;
  source_model.init_seed = 0;
  target_model.init_seed = 0;
  student_model.init_seed = 0;
  source_model.out_classes = 0;
  target_model.out_classes = 0;
  student_model.out_classes = 0;
  target_model.architecture = "small-encdec";
  student_model.architecture = "small-encdec";
  opt_source.epochs = 200;
  opt_stage1.epochs = 100;
  opt_stage2.epochs = 100;
  opt_source.seed = 0;
  opt_stage1.seed = 0;
  opt_stage2.seed = 0;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  if (j.contains("data")) {
    const auto& d = j.at("data");
    get_to_if(d, "kind", c.data.kind);
    if (d.contains("synthetic")) d.at("synthetic").get_to(c.data.synthetic);
    get_to_if(d, "image_size", c.data.image_size);
    get_to_if(d, "n_train", c.data.n_train);
    get_to_if(d, "n_test", c.data.n_test);
    get_to_if(d, "source_train_dir", c.data.source_train_dir);
    get_to_if(d, "source_test_dir", c.data.source_test_dir);
    get_to_if(d, "target_train_dir", c.data.target_train_dir);
    get_to_if(d, "target_test_dir", c.data.target_test_dir);
    get_to_if(d, "class_count", c.data.class_count);
    if (c.data.kind == "synthetic") c.data.class_count = c.data.synthetic.class_count;
  }
  if (j.contains("source_model")) j.at("source_model").get_to(c.source_model);
  if (j.contains("target_model")) j.at("target_model").get_to(c.target_model);
  if (j.contains("student_model"))
    j.at("student_model").get_to(c.student_model);
  if (j.contains("optimizer")) {
    const auto& o = j.at("optimizer");
    if (o.contains("source")) o.at("source").get_to(c.opt_source);
    if (o.contains("stage1")) o.at("stage1").get_to(c.opt_stage1);
    if (o.contains("stage2")) o.at("stage2").get_to(c.opt_stage2);
  }
  if (j.contains("augmentation")) {
    const auto& a = j.at("augmentation");
    if (a.contains("weak")) a.at("weak").get_to(c.weak);
    if (a.contains("strong")) a.at("strong").get_to(c.strong);
  }
  if (j.contains("stage2"))
    get_to_if(j.at("stage2"), "use_strong_aug", c.stage2.use_strong_aug);
  if (j.contains("stages")) {
    const auto& s = j.at("stages");
    get_to_if(s, "source", c.stages.source);
    get_to_if(s, "stage1", c.stages.stage1);
    get_to_if(s, "stage2", c.stages.stage2);
  }
  if (j.contains("seeds")) get_to_if(j.at("seeds"), "master", c.seeds.master);
  get_to_if(j, "output_dir", c.output_dir);
  get_to_if(j, "blackbox_endpoint", c.blackbox_endpoint);
  return c;
}

nlohmann::json ExperimentConfig::to_json() const {
  json j;
  j["data"]["kind"] = data.kind;
  j["data"]["synthetic"] = data.synthetic;
  j["data"]["image_size"] = data.image_size;
  j["data"]["n_train"] = data.n_train;
  j["data"]["n_test"] = data.n_test;
  j["data"]["source_train_dir"] = data.source_train_dir;
  j["data"]["source_test_dir"] = data.source_test_dir;
  j["data"]["target_train_dir"] = data.target_train_dir;
  j["data"]["target_test_dir"] = data.target_test_dir;
  j["data"]["class_count"] = data.class_count;
  j["source_model"] = source_model;
  j["target_model"] = target_model;
  j["student_model"] = student_model;
  j["optimizer"]["source"] = opt_source;
  j["optimizer"]["stage1"] = opt_stage1;
  j["optimizer"]["stage2"] = opt_stage2;
  j["augmentation"]["weak"] = weak;
  j["augmentation"]["strong"] = strong;
  j["stage2"]["use_strong_aug"] = stage2.use_strong_aug;
  j["stages"]["source"] = stages.source;
  j["stages"]["stage1"] = stages.stage1;
  j["stages"]["stage2"] = stages.stage2;
  j["seeds"]["master"] = seeds.master;
  j["output_dir"] = output_dir;
  j["blackbox_endpoint"] = blackbox_endpoint;
  return j;
}

ExperimentConfig ExperimentConfig::resolved() const {
  ExperimentConfig c = *this;
  const std::uint64_t master = c.seeds.master;
  if (c.data.synthetic.seed == 0)
    c.data.synthetic.seed = derive_seed(master, "data");
  if (c.source_model.init_seed == 0)
    c.source_model.init_seed = derive_seed(master, "init/source");
  if (c.target_model.init_seed == 0)
    c.target_model.init_seed = derive_seed(master, "init/target");
  if (c.student_model.init_seed == 0)
    c.student_model.init_seed = derive_seed(master, "init/student");
  if (c.opt_source.seed == 0)
    c.opt_source.seed = derive_seed(master, "opt/source");
  if (c.opt_stage1.seed == 0)
    c.opt_stage1.seed = derive_seed(master, "opt/stage1");
  if (c.opt_stage2.seed == 0)
    c.opt_stage2.seed = derive_seed(master, "opt/stage2");

  const int k = c.data.kind == "synthetic" ? c.data.synthetic.class_count
                                           : c.data.class_count;
  for (ModelSpec* spec :
       {&c.source_model, &c.target_model, &c.student_model}) {
    if (spec->out_classes == 0) spec->out_classes = k;
    *spec = spec->resolved();
  }
  return c;
}

std::vector<std::string> ExperimentConfig::validate() const {
  std::vector<std::string> errors;
  auto check = [&errors](bool ok, const std::string& msg) {
    if (!ok) errors.push_back(msg);
  };

  check(data.kind == "synthetic" || data.kind == "directory",
        "data.kind must be 'synthetic' or 'directory'");
  if (data.kind == "synthetic") {
    try {
      data.synthetic.validate();
    } catch (const ConfigError& e) {
      errors.emplace_back(e.what());
    }
    check(data.n_train >= 1, "data.n_train must be >= 1");
    check(data.n_test >= 1, "data.n_test must be >= 1");
    check(data.image_size >= 16, "data.image_size must be >= 16");
  } else {
    check(!data.source_train_dir.empty(), "data.source_train_dir missing");
    check(!data.source_test_dir.empty(), "data.source_test_dir missing");
    check(!data.target_train_dir.empty(), "data.target_train_dir missing");
    check(!data.target_test_dir.empty(), "data.target_test_dir missing");
    check(data.class_count >= 2, "data.class_count must be >= 2");
  }

  const int k = data.kind == "synthetic" ? data.synthetic.class_count
                                         : data.class_count;
  auto check_model = [&](const ModelSpec& spec, const char* name) {
    try {
      const ModelSpec r = spec.resolved();
      if (r.out_classes != 0 && r.out_classes != k)
        errors.push_back(std::string(name) +
                         ".out_classes does not match dataset class count");
    } catch (const ConfigError& e) {
      errors.push_back(std::string(name) + ": " + e.what());
    }
  };
  // out_classes == 0 resolves to the dataset class count.
  if (source_model.out_classes != 0) check_model(source_model, "source_model");
  if (target_model.out_classes != 0) check_model(target_model, "target_model");
  if (student_model.out_classes != 0)
    check_model(student_model, "student_model");
  for (const auto& [spec, name] :
       {std::pair{&source_model, "source_model"},
        std::pair{&target_model, "target_model"},
        std::pair{&student_model, "student_model"}}) {
    if (spec->out_classes == 0) {
      ModelSpec probe = *spec;
      probe.out_classes = k;
      try {
        probe.resolved();
      } catch (const ConfigError& e) {
        errors.push_back(std::string(name) + ": " + e.what());
      }
    }
  }

  for (const auto& [opt, name] : {std::pair{&opt_source, "optimizer.source"},
                                  std::pair{&opt_stage1, "optimizer.stage1"},
                                  std::pair{&opt_stage2, "optimizer.stage2"}}) {
    try {
      opt->validate();
    } catch (const ConfigError& e) {
      errors.push_back(std::string(name) + ": " + e.what());
    }
  }

  try {
    weak.validate();
    if (weak.kind != AugmentationPolicy::Kind::weak)
      errors.emplace_back("augmentation.weak must have kind 'weak'");
  } catch (const ConfigError& e) {
    errors.emplace_back(std::string("augmentation.weak: ") + e.what());
  }
  try {
    strong.validate();
    if (strong.kind != AugmentationPolicy::Kind::strong)
      errors.emplace_back("augmentation.strong must have kind 'strong'");
  } catch (const ConfigError& e) {
    errors.emplace_back(std::string("augmentation.strong: ") + e.what());
  }

  check(!output_dir.empty(), "output_dir must not be empty");
  check(stages.source || stages.stage1 || stages.stage2,
        "at least one stage must be enabled");
  return errors;
}

ExperimentConfig load_config(const std::filesystem::path& file) {
  std::ifstream is(file);
  if (!is) throw ConfigError("cannot open config: " + file.string());
  json j = json::parse(is, nullptr, false);
  if (j.is_discarded())
    throw ConfigError("config is not valid json: " + file.string());
  try {
    return ExperimentConfig::from_json(j);
  } catch (const json::exception& e) {
    throw ConfigError("config parse error: " + std::string(e.what()));
  }
}

void apply_overrides(nlohmann::json& j,
                     const std::vector<std::string>& overrides) {
  for (const std::string& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ConfigError("override must look like key.path=value: '" + ov + "'");
    const std::string path = ov.substr(0, eq);
    const std::string value = ov.substr(eq + 1);

    json* node = &j;
    std::size_t start = 0;
    while (true) {
      const auto dot = path.find('.', start);
      const std::string key = path.substr(
          start, dot == std::string::npos ? std::string::npos : dot - start);
      if (key.empty())
        throw ConfigError("override has empty key segment: '" + ov + "'");
      if (dot == std::string::npos) {
        json parsed = json::parse(value, nullptr, false);
        (*node)[key] = parsed.is_discarded() ? json(value) : parsed;
        break;
      }
      node = &(*node)[key];
      start = dot + 1;
    }
  }
}

}  // namespace boxdistill
