#include "ird/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_map>

namespace ird {

std::string_view to_string(AsrConvention convention) {
  return convention == AsrConvention::All ? "all" : "correct_only";
}

AsrConvention asr_convention_from_string(std::string_view name) {
  if (name == "all") return AsrConvention::All;
  if (name == "correct_only") return AsrConvention::CorrectOnly;
  throw std::invalid_argument("unknown ASR convention: " + std::string(name));
}

namespace {

template <typename Id>
std::vector<Id> rank_ids(const Embedding& query,
                         const std::vector<std::pair<Id, Embedding>>& gallery) {
  if (gallery.empty()) {
    throw std::invalid_argument("rank: empty gallery");
  }
  std::vector<std::pair<double, const Id*>> scored;
  scored.reserve(gallery.size());
  for (const auto& [id, emb] : gallery) {
    scored.emplace_back(cosine_similarity(query, emb), &id);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return *a.second < *b.second;
  });
  std::vector<Id> out;
  out.reserve(scored.size());
  for (const auto& [score, id] : scored) out.push_back(*id);
  return out;
}

}  // namespace

std::vector<std::string> rank_images(const Embedding& query, const RetrievalGallery& gallery) {
  return rank_ids(query, gallery.image_embeddings);
}

std::vector<TextId> rank_texts(const Embedding& query, const RetrievalGallery& gallery) {
  return rank_ids(query, gallery.text_embeddings);
}

namespace {

// Sorted ordering of gallery indices by descending score, ties by the id
// order the indices already follow (ids are built ascending).
std::vector<std::size_t> argsort_desc(const std::vector<double>& scores) {
  std::vector<std::size_t> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });
  return order;
}

}  // namespace

RetrievalEvaluation::RetrievalEvaluation(const EncoderModel& target,
                                         const std::vector<EvalExample>& gallery,
                                         const std::vector<AttackedExample>& attacked) {
  if (gallery.size() < 2) {
    throw std::invalid_argument("RetrievalEvaluation: gallery needs at least 2 examples");
  }
  if (gallery.size() != attacked.size()) {
    throw std::invalid_argument("RetrievalEvaluation: clean/adversarial record count mismatch");
  }
  std::unordered_map<std::string, std::size_t> adv_index;
  for (std::size_t i = 0; i < attacked.size(); ++i) {
    adv_index.emplace(attacked[i].example_id, i);
  }

  const std::size_t n = gallery.size();
  order_.resize(n);

  std::vector<Embedding> clean_img(n), adv_img(n);
  std::vector<Embedding> clean_text, post_text;  // flat caption galleries
  std::vector<Embedding> attacked_pre(n), attacked_post(n);
  text_owner_.clear();
  attacked_text_.assign(n, 0);

  for (std::size_t i = 0; i < n; ++i) {
    order_[i] = i;
    const auto it = adv_index.find(gallery[i].example_id);
    if (it == adv_index.end()) {
      throw std::invalid_argument("RetrievalEvaluation: no adversarial record for " +
                                  gallery[i].example_id);
    }
    const AttackedExample& adv = attacked[it->second];
    clean_img[i] = target.encode_image(gallery[i].image);
    adv_img[i] = target.encode_image(adv.adv_image);

    const int attacked_caption = adv.attacked_caption;
    if (attacked_caption < 0 ||
        attacked_caption >= static_cast<int>(gallery[i].captions.size())) {
      throw std::invalid_argument("RetrievalEvaluation: attacked caption index out of range");
    }
    for (std::size_t j = 0; j < gallery[i].captions.size(); ++j) {
      const Embedding clean_emb = target.encode_text(gallery[i].captions[j]);
      Embedding post_emb = clean_emb;
      if (static_cast<int>(j) == attacked_caption && adv.adv_caption) {
        post_emb = target.encode_text(*adv.adv_caption);
      }
      if (static_cast<int>(j) == attacked_caption) {
        attacked_text_[i] = text_owner_.size();
        attacked_pre[i] = clean_emb;
        attacked_post[i] = post_emb;
      }
      clean_text.push_back(clean_emb);
      post_text.push_back(post_emb);
      text_owner_.push_back(i);
    }
  }

  auto rank_against_texts = [&](const Embedding& query, const std::vector<Embedding>& texts) {
    std::vector<double> scores(texts.size());
    for (std::size_t t = 0; t < texts.size(); ++t) {
      scores[t] = cosine_similarity(query, texts[t]);
    }
    return argsort_desc(scores);
  };
  auto rank_against_images = [&](const Embedding& query, const std::vector<Embedding>& images) {
    std::vector<double> scores(images.size());
    for (std::size_t t = 0; t < images.size(); ++t) {
      scores[t] = cosine_similarity(query, images[t]);
    }
    return argsort_desc(scores);
  };

  tr_pre_rank_.resize(n);
  tr_post_rank_.resize(n);
  ir_pre_rank_.resize(n);
  ir_post_rank_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    tr_pre_rank_[i] = rank_against_texts(clean_img[i], clean_text);
    tr_post_rank_[i] = rank_against_texts(adv_img[i], post_text);
    ir_pre_rank_[i] = rank_against_images(attacked_pre[i], clean_img);
    ir_post_rank_[i] = rank_against_images(attacked_post[i], adv_img);
  }
}

RetrievalEvaluation::Asr RetrievalEvaluation::asr_at_k(int k, AsrConvention convention) const {
  if (k < 1) {
    throw std::invalid_argument("asr_at_k: k must be >= 1");
  }
  const std::size_t n = order_.size();
  const std::size_t kk = static_cast<std::size_t>(k);

  Asr out;
  for (std::size_t i = 0; i < n; ++i) {
    auto own_text_in_top_k = [&](const std::vector<std::size_t>& rank) {
      const std::size_t top = std::min(kk, rank.size());
      for (std::size_t r = 0; r < top; ++r) {
        if (text_owner_[rank[r]] == i) return true;
      }
      return false;
    };
    auto own_image_in_top_k = [&](const std::vector<std::size_t>& rank) {
      const std::size_t top = std::min(kk, rank.size());
      for (std::size_t r = 0; r < top; ++r) {
        if (rank[r] == i) return true;
      }
      return false;
    };

    const bool tr_pre_correct = own_text_in_top_k(tr_pre_rank_[i]);
    const bool tr_success = !own_text_in_top_k(tr_post_rank_[i]);
    if (convention == AsrConvention::All || tr_pre_correct) {
      ++out.tr.denominator;
      if (tr_success) ++out.tr.successes;
    }

    const bool ir_pre_correct = own_image_in_top_k(ir_pre_rank_[i]);
    const bool ir_success = !own_image_in_top_k(ir_post_rank_[i]);
    if (convention == AsrConvention::All || ir_pre_correct) {
      ++out.ir.denominator;
      if (ir_success) ++out.ir.successes;
    }
  }
  if (out.tr.denominator > 0) {
    out.tr.percent = 100.0 * out.tr.successes / out.tr.denominator;
  }
  if (out.ir.denominator > 0) {
    out.ir.percent = 100.0 * out.ir.successes / out.ir.denominator;
  }
  return out;
}

void TransferReport::check_invariants() const {
  auto check_side = [&](const std::map<int, AsrValue>& side, const char* name) {
    std::optional<double> prev;
    for (const auto& [k, value] : side) {  // std::map iterates ascending K
      if (value.percent) {
        if (*value.percent < 0.0 || *value.percent > 100.0) {
          throw InvariantViolation(std::string("TransferReport: ") + name +
                                   " percentage out of range");
        }
        if (convention == AsrConvention::CorrectOnly && prev && *value.percent > *prev + 1e-9) {
          throw InvariantViolation(std::string("TransferReport: ") + name +
                                   " ASR increased with K under correct_only");
        }
        prev = value.percent;
      }
    }
  };
  check_side(tr_asr, "TR");
  check_side(ir_asr, "IR");
}

TransferReport evaluate_run(const EncoderModel& target, const AttackRun& run,
                            const std::vector<EvalExample>& gallery,
                            const std::vector<int>& k_list, AsrConvention convention) {
  TransferReport report;
  report.source_model_id = run.surrogate_model_id;
  report.target_model_id = target.model_id();
  report.attack_label = run.attack_label;
  report.convention = convention;
  report.config_hash = run.config_hash;
  report.num_examples = static_cast<int>(run.examples.size());

  const RetrievalEvaluation eval(target, gallery, run.examples);
  for (int k : k_list) {
    const auto asr = eval.asr_at_k(k, convention);
    report.tr_asr[k] = asr.tr;
    report.ir_asr[k] = asr.ir;
  }
  report.check_invariants();
  return report;
}

std::vector<TransferReport> transfer_matrix(const std::vector<const EncoderModel*>& models,
                                            const std::vector<AttackRun>& runs,
                                            const std::vector<EvalExample>& gallery,
                                            const std::vector<int>& k_list,
                                            AsrConvention convention) {
  std::vector<TransferReport> grid;
  for (const EncoderModel* source : models) {
    const AttackRun* run = nullptr;
    for (const auto& r : runs) {
      if (r.surrogate_model_id == source->model_id()) {
        run = &r;
        break;
      }
    }
    for (const EncoderModel* target : models) {
      if (run == nullptr) {
        TransferReport missing;
        missing.source_model_id = source->model_id();
        missing.target_model_id = target->model_id();
        missing.convention = convention;
        missing.missing = true;
        grid.push_back(std::move(missing));
        continue;
      }
      grid.push_back(evaluate_run(*target, *run, gallery, k_list, convention));
    }
  }
  return grid;
}

std::optional<double> mean_off_diagonal(const std::vector<TransferReport>& grid, int k,
                                        bool text_retrieval) {
  double sum = 0.0;
  int count = 0;
  for (const auto& cell : grid) {
    if (cell.missing || cell.source_model_id == cell.target_model_id) continue;
    const auto& side = text_retrieval ? cell.tr_asr : cell.ir_asr;
    const auto it = side.find(k);
    if (it == side.end() || !it->second.percent) continue;
    sum += *it->second.percent;
    ++count;
  }
  if (count == 0) return std::nullopt;
  return sum / count;
}

std::vector<std::array<double, 3>> default_weight_grid() {
  std::vector<std::array<double, 3>> grid;
  for (int li = 2; li <= 8; li += 2) {
    for (int mi = 0; li + mi <= 10; mi += 2) {
      const int ni = 10 - li - mi;
      if (mi == 0 && ni == 0) continue;  // both adversarial weights zero
      grid.push_back({li / 10.0, mi / 10.0, ni / 10.0});
    }
  }
  return grid;
}

SweepReport sweep_parameters(const EncoderModel& surrogate,
                             const std::vector<const EncoderModel*>& targets,
                             const std::vector<EvalExample>& gallery, const AttackConfig& base,
                             const std::string& kind, const std::vector<int>& sample_grid,
                             const std::vector<std::array<double, 3>>& weight_grid,
                             const std::vector<int>& k_list, AsrConvention convention,
                             int jobs) {
  SweepReport report;
  report.kind = kind;

  std::vector<SweepRow> rows;
  char label[96];
  if (kind == "samples") {
    if (sample_grid.empty()) {
      throw std::invalid_argument("sweep: empty sample grid");
    }
    for (int n : sample_grid) {
      AttackConfig cfg = base;
      cfg.num_samples = n;
      std::snprintf(label, sizeof(label), "N=%d", n);
      rows.push_back(SweepRow{label, cfg, {}});
    }
  } else if (kind == "weights") {
    const auto grid = weight_grid.empty() ? default_weight_grid() : weight_grid;
    for (const auto& [l, m, nvw] : grid) {
      if (!(l > 0.0)) {
        throw std::invalid_argument("sweep: lambda must be > 0 in every weight row");
      }
      if (m == 0.0 && nvw == 0.0) {
        throw std::invalid_argument("sweep: at most one of mu, nu may be zero");
      }
      AttackConfig cfg = base;
      cfg.lambda_w = l;
      cfg.mu_w = m;
      cfg.nu_w = nvw;
      std::snprintf(label, sizeof(label), "[l,m,n]=[%.1f,%.1f,%.1f]", l, m, nvw);
      rows.push_back(SweepRow{label, cfg, {}});
    }
  } else {
    throw std::invalid_argument("sweep: kind must be 'samples' or 'weights'");
  }

  for (auto& row : rows) {
    const std::vector<AdversarialRecord> records =
        attack_examples(surrogate, gallery, row.config, jobs);
    AttackRun run{surrogate.model_id(), std::string(to_string(row.config.method)), "",
                  to_attacked_examples(records)};
    for (const EncoderModel* target : targets) {
      row.reports.push_back(evaluate_run(*target, run, gallery, k_list, convention));
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::string_view to_string(AblationSetting setting) {
  switch (setting) {
    case AblationSetting::Full: return "full";
    case AblationSetting::Setting1: return "setting1";
    case AblationSetting::Setting2: return "setting2";
    case AblationSetting::SgaBaseline: return "sga_baseline";
  }
  throw std::logic_error("unreachable");
}

AblationSetting ablation_setting_from_string(std::string_view name) {
  if (name == "full") return AblationSetting::Full;
  if (name == "setting1") return AblationSetting::Setting1;
  if (name == "setting2") return AblationSetting::Setting2;
  if (name == "sga_baseline") return AblationSetting::SgaBaseline;
  throw std::invalid_argument("unknown ablation setting: " + std::string(name));
}

AttackConfig ablation_config(const AttackConfig& base, AblationSetting setting) {
  AttackConfig cfg = base;
  cfg.sga_augmentation = true;
  switch (setting) {
    case AblationSetting::Full:
      cfg.method = AttackMethod::IRD;
      cfg.text_region = true;
      break;
    case AblationSetting::Setting1:
      cfg.method = AttackMethod::SGA;
      cfg.text_region = true;
      break;
    case AblationSetting::Setting2:
      cfg.method = AttackMethod::IRD;
      cfg.text_region = false;
      break;
    case AblationSetting::SgaBaseline:
      cfg.method = AttackMethod::SGA;
      cfg.text_region = false;
      break;
  }
  return cfg;
}

AblationReport ablation_run(const EncoderModel& surrogate,
                            const std::vector<const EncoderModel*>& targets,
                            const std::vector<EvalExample>& gallery, const AttackConfig& base,
                            const std::vector<AblationSetting>& settings,
                            const std::vector<int>& k_list, AsrConvention convention,
                            int jobs) {
  AblationReport report;
  for (const AblationSetting setting : settings) {
    const AttackConfig cfg = ablation_config(base, setting);
    const std::vector<AdversarialRecord> records = attack_examples(surrogate, gallery, cfg, jobs);
    AttackRun run{surrogate.model_id(), std::string(to_string(setting)), "",
                  to_attacked_examples(records)};
    AblationRow row;
    row.setting = setting;
    for (const EncoderModel* target : targets) {
      row.reports.push_back(evaluate_run(*target, run, gallery, k_list, convention));
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace ird
