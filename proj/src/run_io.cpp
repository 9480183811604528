#include "ird/run_io.hpp"

#include <fstream>

#include "ird/config.hpp"
#include "ird/container.hpp"
#include "ird/dataset.hpp"
#include "ird/png_io.hpp"

namespace ird {

namespace {

using nlohmann::json;

json trajectory_to_json(const AttackTrajectory& trajectory) {
  json steps = json::array();
  for (const auto& s : trajectory.steps) {
    steps.push_back({{"step", s.step},
                     {"beta", s.weights.beta},
                     {"gamma", s.weights.gamma},
                     {"eta", s.weights.eta},
                     {"sampled", s.sampled},
                     {"loss_before", s.loss_before},
                     {"loss_after", s.loss_after},
                     {"linf", s.linf_to_clean}});
  }
  return steps;
}

AttackTrajectory trajectory_from_json(const json& steps) {
  AttackTrajectory trajectory;
  for (const auto& s : steps) {
    StepRecord record;
    record.step = s.at("step").get<int>();
    record.weights = SimplexWeights{s.at("beta").get<double>(), s.at("gamma").get<double>(),
                                    s.at("eta").get<double>()};
    record.sampled = s.at("sampled").get<bool>();
    record.loss_before = s.at("loss_before").get<double>();
    record.loss_after = s.at("loss_after").get<double>();
    record.linf_to_clean = s.at("linf").get<double>();
    trajectory.steps.push_back(record);
  }
  return trajectory;
}

ArrayF64 image_array(const ImageTensor& image) {
  const auto& s = image.shape();
  return ArrayF64{{static_cast<std::uint64_t>(s.height), static_cast<std::uint64_t>(s.width),
                   static_cast<std::uint64_t>(s.channels)},
                  image.pixels()};
}

ImageTensor image_from_array(const ArrayF64& a, const std::string& what) {
  if (a.dims.size() != 3) {
    throw ContainerError("run image container: " + what + " is not rank 3");
  }
  return ImageTensor(
      ImageShape{static_cast<int>(a.dims[0]), static_cast<int>(a.dims[1]),
                 static_cast<int>(a.dims[2])},
      a.data);
}

}  // namespace

void save_run(const std::vector<AdversarialRecord>& records, const std::filesystem::path& dir,
              const std::string& config_hash) {
  if (records.empty()) {
    throw std::invalid_argument("save_run: no records");
  }
  const auto run_json_path = dir / "run.json";
  if (std::filesystem::exists(run_json_path)) {
    std::ifstream existing(run_json_path);
    json old;
    existing >> old;
    if (old.value("config_hash", "") != config_hash) {
      throw InvariantViolation("save_run: " + dir.string() +
                               " holds a run with a different config hash; refusing to overwrite");
    }
  }
  std::filesystem::create_directories(dir / "images");
  std::filesystem::create_directories(dir / "previews");

  json meta;
  meta["config_hash"] = config_hash;
  meta["surrogate"] = records.front().surrogate_model_id;
  meta["method"] = std::string(to_string(records.front().config.method));
  meta["attack"] = attack_config_to_json(records.front().config);
  meta["num_examples"] = records.size();
  {
    std::ofstream out(run_json_path, std::ios::trunc);
    out << meta.dump(2) << "\n";
  }

  std::ofstream index(dir / "index.jsonl", std::ios::trunc);
  if (!index) {
    throw std::runtime_error("save_run: cannot write index under " + dir.string());
  }
  for (const auto& r : records) {
    const std::string image_ref = "images/" + r.example_id + ".tde";
    Container container;
    container.tag = "adv:" + r.example_id;
    container.arrays.push_back(image_array(r.adv_image));
    container.arrays.push_back(image_array(r.adv_prev_image));
    write_container(dir / image_ref, container);
    write_png_preview(dir / "previews" / (r.example_id + ".png"), r.adv_image);

    json line;
    line["example_id"] = r.example_id;
    line["clean_image_ref"] = r.clean_image_ref;
    line["image"] = image_ref;
    line["config_hash"] = config_hash;
    line["surrogate"] = r.surrogate_model_id;
    line["clean_tokens"] = r.clean_caption.tokens();
    if (r.adv_caption) {
      line["adv_tokens"] = r.adv_caption->tokens();
      line["substituted_positions"] = r.substituted_positions;
      line["objective_before"] = r.text_objective_before;
      line["objective_after"] = r.text_objective_after;
    } else {
      line["adv_tokens"] = nullptr;
    }
    line["loss_clean"] = r.loss_clean;
    line["loss_initial"] = r.loss_initial;
    line["loss_final"] = r.loss_final;
    line["trajectory"] = trajectory_to_json(r.trajectory);
    index << line.dump() << "\n";
  }
}

LoadedRun load_run(const std::filesystem::path& dir) {
  std::ifstream meta_in(dir / "run.json");
  if (!meta_in) {
    throw std::runtime_error("load_run: cannot open " + (dir / "run.json").string());
  }
  json meta;
  meta_in >> meta;

  LoadedRun run;
  run.config_hash = meta.at("config_hash").get<std::string>();
  run.surrogate_model_id = meta.at("surrogate").get<std::string>();
  run.method = meta.at("method").get<std::string>();
  const AttackConfig config = attack_config_from_json(meta.at("attack"));

  std::ifstream index(dir / "index.jsonl");
  if (!index) {
    throw std::runtime_error("load_run: cannot open " + (dir / "index.jsonl").string());
  }
  std::string text;
  while (std::getline(index, text)) {
    if (text.empty()) continue;
    const json line = json::parse(text);
    AdversarialRecord r;
    r.example_id = line.at("example_id").get<std::string>();
    r.clean_image_ref = line.at("clean_image_ref").get<std::string>();
    r.surrogate_model_id = line.at("surrogate").get<std::string>();
    r.clean_caption = TokenSequence(line.at("clean_tokens").get<std::vector<std::string>>());
    if (!line.at("adv_tokens").is_null()) {
      r.adv_caption = TokenSequence(line.at("adv_tokens").get<std::vector<std::string>>());
      r.substituted_positions = line.at("substituted_positions").get<std::vector<std::size_t>>();
      r.text_objective_before = line.at("objective_before").get<double>();
      r.text_objective_after = line.at("objective_after").get<double>();
    }
    r.loss_clean = line.at("loss_clean").get<double>();
    r.loss_initial = line.at("loss_initial").get<double>();
    r.loss_final = line.at("loss_final").get<double>();
    r.trajectory = trajectory_from_json(line.at("trajectory"));
    r.config = config;

    const Container container = read_container(dir / line.at("image").get<std::string>());
    if (container.arrays.size() != 2) {
      throw ContainerError("run image container must hold [adv, adv_prev]: " + r.example_id);
    }
    r.adv_image = image_from_array(container.arrays[0], "adv image");
    r.adv_prev_image = image_from_array(container.arrays[1], "previous iterate");
    run.records.push_back(std::move(r));
  }
  if (run.records.empty()) {
    throw std::runtime_error("load_run: empty index in " + dir.string());
  }
  return run;
}

}  // namespace ird
