// Copyright 2026 The mmfeat Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "mmf/cli.h"
#include "mmf/errors.h"
#include "mmf/intervene.h"
#include "mmf/mds.h"
#include "mmf/mono.h"
#include "mmf/ncl.h"
#include "mmf/sae.h"
#include "mmf/synthgen.h"
#include "mmf/tensorio.h"
#include "mmf/train.h"

namespace mmf::cli {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

// Output directory that refuses to overwrite any file the command read.
class Outputs {
 public:
  explicit Outputs(const Params& p) : dir_(p.str("out")) {
    for (const char* key : {"data", "model", "report", "indices", "ref", "config"}) {
      if (auto v = p.opt_str(key)) inputs_.push_back(fs::weakly_canonical(*v));
    }
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create " + dir_.string() + ": " + ec.message());
  }

  const fs::path& dir() const { return dir_; }

  fs::path file(const std::string& name) const {
    fs::path path = dir_ / name;
    const fs::path canon = fs::weakly_canonical(path);
    for (const auto& in : inputs_) {
      // A dataset or model directory given as input must not receive output.
      if (canon == in || canon.parent_path() == in) {
        throw UsageError("output " + path.string() + " would overwrite an input");
      }
    }
    return path;
  }

 private:
  fs::path dir_;
  std::vector<fs::path> inputs_;
};

TrainConfig train_config(const Params& p) {
  TrainConfig cfg;
  cfg.steps = p.count("steps", cfg.steps, 1);
  cfg.batch_size = p.count("batch", cfg.batch_size, 2);
  cfg.learning_rate = p.real("lr", cfg.learning_rate);
  cfg.seed = p.seed();
  cfg.plateau_window = p.count("plateau_window", cfg.plateau_window);
  cfg.plateau_tolerance = p.count("plateau_tolerance", cfg.plateau_tolerance);
  cfg.checkpoint_every = p.count("checkpoint_every", cfg.checkpoint_every, 1);
  cfg.validate();
  return cfg;
}

std::string model_kind(const fs::path& dir) {
  try {
    return nlohmann::json::parse(read_text_file(dir / "model.json"))
        .at("kind")
        .get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(dir.string() + "/model.json: " + e.what());
  }
}

// Raw embeddings, or the SAE latents / NCL projections when a model is given.
std::pair<Matrix, Matrix> analysis_space(const PairedEmbeddingDataset& ds,
                                         const Params& p) {
  auto model = p.opt_str("model");
  if (!model) return {ds.img, ds.txt};
  const std::string kind = model_kind(*model);
  if (kind == "sae") {
    SaeModel m = load_sae_model(*model);
    if (m.w_enc.cols() != ds.img.cols()) {
      throw ShapeError("model expects d=" + std::to_string(m.w_enc.cols()) +
                       ", data has d=" + std::to_string(ds.img.cols()));
    }
    return {sae_encode_rows(m, ds.img), sae_encode_rows(m, ds.txt)};
  }
  if (kind == "ncl") {
    NclProjector m = load_ncl_projector(*model);
    if (m.dim() != ds.img.cols()) {
      throw ShapeError("projector expects d=" + std::to_string(m.dim()) +
                       ", data has d=" + std::to_string(ds.img.cols()));
    }
    return {ncl_project_rows(m, ds.img), ncl_project_rows(m, ds.txt)};
  }
  throw FormatError("unknown model kind '" + kind + "'");
}

MdsReport load_report(const Params& p) {
  return MdsReport::from_json(read_text_file(p.str("report")));
}

Json category_counts(const MdsReport& rep) {
  Json j;
  for (Category c : {Category::kTextD, Category::kCrossD, Category::kImgD}) {
    j[to_string(c)] = rep.features_in(c).size();
  }
  return j;
}

Json run_gen(const Params& p) {
  SynthConfig cfg;
  cfg.num_samples = p.count("num_samples", cfg.num_samples, 1);
  cfg.dim = p.count("dim", cfg.dim, 1);
  cfg.n_img_only = p.count("n_img_only", cfg.n_img_only);
  cfg.n_txt_only = p.count("n_txt_only", cfg.n_txt_only);
  cfg.n_shared = p.count("n_shared", cfg.n_shared);
  cfg.noise_sigma = p.real("noise_sigma", cfg.noise_sigma);
  cfg.n_clusters = p.count("n_clusters", cfg.n_clusters, 1);
  cfg.mix = p.flag("mix", cfg.mix);
  cfg.shared_active = p.count("shared_active", cfg.shared_active);
  cfg.class_signal = p.flag("class_signal", cfg.class_signal);
  cfg.validate();
  Outputs out(p);
  auto [ds, gt] = generate_synthetic(cfg, p.seed());
  save_paired_dataset(ds, out.dir());
  write_text_file(out.file("ground_truth.json"), gt.to_json());
  write_text_file(out.file("manifest.json"), manifest_json(summarize(ds)));
  return {{"M", ds.img.rows()}, {"d", ds.img.cols()}, {"seed", p.seed()},
          {"mix", cfg.mix}, {"noise_sigma", cfg.noise_sigma}};
}

void write_history(const Outputs& out, const TrainHistory& h) {
  write_text_file(out.file("loss.csv"), h.loss_csv());
  write_text_file(out.file("checkpoints.csv"), h.checkpoints_csv());
}

Json run_train_sae(const Params& p) {
  PairedEmbeddingDataset ds = load_paired_dataset(p.str("data"));
  TrainConfig cfg = train_config(p);
  const std::size_t n = p.count("latent_dim", ds.img.cols(), 1);
  const std::size_t k = p.has("topk") ? p.count("topk", 0, 1)
                                      : std::min(kDefaultTopK, n);
  Outputs out(p);
  auto [model, hist] = sae_train(ds, cfg, k, n);
  save_sae_model(model, out.dir());
  write_history(out, hist);
  const Matrix li = sae_encode_rows(model, ds.img);
  const Matrix lt = sae_encode_rows(model, ds.txt);
  return {{"steps_run", hist.loss.size()},
          {"final_loss", hist.loss.back()},
          {"stopped_on_plateau", hist.stopped_on_plateau},
          {"k", k},
          {"n", n},
          {"relative_error", relative_reconstruction_error(model, ds)},
          {"nonzero_fraction_img", nonzero_fraction(li)},
          {"nonzero_fraction_txt", nonzero_fraction(lt)},
          {"live_latents", prune_dead_latents(model, ds).live.size()}};
}

Json run_train_ncl(const Params& p) {
  PairedEmbeddingDataset ds = load_paired_dataset(p.str("data"));
  TrainConfig cfg = train_config(p);
  NclOptions opts;
  opts.temperature = p.real("temperature", opts.temperature);
  if (!(opts.temperature > 0.0)) throw UsageError("temperature must be > 0");
  opts.symmetric = p.flag("symmetric", opts.symmetric);
  Outputs out(p);
  auto [proj, hist] = ncl_train(ds, cfg, opts);
  save_ncl_projector(proj, out.dir());
  write_history(out, hist);
  const Matrix gi = ncl_project_rows(proj, ds.img);
  return {{"steps_run", hist.loss.size()},
          {"final_loss", hist.loss.back()},
          {"stopped_on_plateau", hist.stopped_on_plateau},
          {"temperature", opts.temperature},
          {"in_batch_top1", in_batch_top1(proj, ds.img, ds.txt,
                                          std::min(cfg.batch_size, ds.img.rows()))},
          {"nonzero_fraction_img", nonzero_fraction(gi)}};
}

Json run_mds(const Params& p) {
  PairedEmbeddingDataset ds = load_paired_dataset(p.str("data"));
  const std::size_t bins = p.count("bins", 20, 1);
  auto [li, lt] = analysis_space(ds, p);
  MdsReport rep = categorize_features(modality_dominance_scores(li, lt));
  Outputs out(p);
  write_text_file(out.file("report.json"), rep.to_json());
  write_text_file(out.file("histogram.csv"),
                  histogram_csv(mds_histogram(rep, bins)));
  std::size_t live = std::count(rep.live.begin(), rep.live.end(), true);
  return {{"D", rep.r.size()},   {"live", live},
          {"mu", rep.mu},        {"sigma", rep.sigma},
          {"counts", category_counts(rep)}};
}

// Up to three live features per category, lowest index first.
std::vector<std::size_t> default_listing(const MdsReport& rep) {
  std::vector<std::size_t> out;
  for (Category c : {Category::kImgD, Category::kTextD, Category::kCrossD}) {
    auto f = rep.features_in(c);
    out.insert(out.end(), f.begin(), f.begin() + std::min<std::size_t>(3, f.size()));
  }
  std::sort(out.begin(), out.end());
  return out;
}

Json run_eval_mono(const Params& p) {
  PairedEmbeddingDataset ds = load_paired_dataset(p.str("data"));
  auto [li, lt] = analysis_space(ds, p);
  MdsReport rep = p.has("report")
                      ? load_report(p)
                      : categorize_features(modality_dominance_scores(li, lt));
  if (rep.r.size() != li.cols()) {
    throw ShapeError("report covers " + std::to_string(rep.r.size()) +
                     " features, latents have " + std::to_string(li.cols()));
  }
  const std::size_t m = p.count("m", kDefaultTopM, 2);
  const Matrix& ei = ds.eval_img ? *ds.eval_img : ds.img;
  const Matrix& et = ds.eval_txt ? *ds.eval_txt : ds.txt;
  MonoReport mono = mono_report(li, lt, ei, et, rep, m, p.seed());

  std::vector<std::size_t> listed =
      p.has("indices")
          ? IndexSet::from_json(read_text_file(p.str("indices")), li.cols()).indices
          : default_listing(rep);
  Outputs out(p);
  write_text_file(out.file("mono_report.json"), mono.to_json());
  for (std::size_t k : listed) {
    write_text_file(out.file("listing_" + std::to_string(k) + ".jsonl"),
                    feature_listing_jsonl(ds, li, lt, k, m));
  }
  auto opt = [](const std::optional<double>& v) {
    return v ? Json(*v) : Json(nullptr);
  };
  return {{"features", mono.features.size()},
          {"m", m},
          {"visual_mono", opt(mono.visual_mono)},
          {"textual_mono", opt(mono.textual_mono)},
          {"mean_mono_img", opt(mono.mean_mono_img)},
          {"mean_mono_txt", opt(mono.mean_mono_txt)},
          {"listings", listed.size()}};
}

IndexSet load_indices(const Params& p, std::size_t dim) {
  return IndexSet::from_json(read_text_file(p.str("indices")), dim);
}

Matrix mask_rows(const Matrix& z, const IndexSet& set) {
  Matrix out(z.rows(), z.cols());
  for (std::size_t r = 0; r < z.rows(); ++r) {
    Vector row = zero_mask(z.row(r), set);
    std::copy(row.begin(), row.end(), out.row(r).begin());
  }
  return out;
}

Json run_mask(const Params& p) {
  if (p.has("indices")) {
    Matrix z = read_tensor(p.str("data"));
    IndexSet set = load_indices(p, z.cols());
    Outputs out(p);
    write_tensor(mask_rows(z, set), out.file("masked.mmtf"));
    return {{"rows", z.rows()}, {"masked", set.indices.size()}};
  }
  if (!p.has("report")) throw UsageError("intervene mask needs --indices or --report");
  MdsReport rep = load_report(p);
  BalancedMasks masks = balanced_masks(rep, p.seed());
  std::optional<Matrix> z;
  if (p.has("data")) z = read_tensor(p.str("data"));
  Outputs out(p);
  for (const auto& [name, set] : {std::pair{"img", &masks.img},
                                  std::pair{"txt", &masks.txt},
                                  std::pair{"random", &masks.random}}) {
    write_text_file(out.file(std::string("mask_") + name + ".json"), set->to_json());
    if (z) write_tensor(mask_rows(*z, *set), out.file(std::string("masked_") + name + ".mmtf"));
  }
  return {{"size", masks.img.indices.size()}, {"seed", p.seed()},
          {"masked_data", z.has_value()}};
}

// Row r of the reference, or its only row when it is a single vector.
std::span<const double> ref_row(const Matrix& ref, std::size_t r) {
  return ref.row(ref.rows() == 1 ? 0 : r);
}

void check_ref(const Matrix& ref, const Matrix& target) {
  if (ref.cols() != target.cols() ||
      (ref.rows() != 1 && ref.rows() != target.rows())) {
    throw ShapeError("--ref must have one row or as many rows as --data");
  }
}

Json run_detox(const Params& p) {
  Matrix adv = read_tensor(p.str("data"));
  Matrix ben = read_tensor(p.str("ref"));
  check_ref(ben, adv);
  IndexSet set = load_indices(p, adv.cols());
  const std::size_t steps = p.count("steps", 100);
  const double lr = p.real("lr", 0.1);
  Outputs out(p);
  Matrix result(adv.rows(), adv.cols());
  std::ostringstream curve;
  curve << "row,step,loss\n";
  curve.precision(17);
  double worst = 0.0;
  for (std::size_t r = 0; r < adv.rows(); ++r) {
    DetoxResult d = align_detox(adv.row(r), ref_row(ben, r), set, steps, lr);
    std::copy(d.output.begin(), d.output.end(), result.row(r).begin());
    for (std::size_t t = 0; t < d.loss_curve.size(); ++t) {
      curve << r << ',' << t << ',' << d.loss_curve[t] << '\n';
    }
    worst = std::max(worst, d.loss_curve.back());
  }
  write_tensor(result, out.file("detox.mmtf"));
  write_text_file(out.file("loss_curve.csv"), curve.str());
  return {{"rows", adv.rows()}, {"steps", steps}, {"max_final_loss", worst}};
}

std::string alpha_name(double alpha) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "interp_alpha_%.2f.mmtf", alpha);
  return buf;
}

Json run_interp(const Params& p) {
  Matrix t = read_tensor(p.str("data"));
  Matrix ref = read_tensor(p.str("ref"));
  check_ref(ref, t);
  IndexSet set = load_indices(p, t.cols());
  const std::vector<double> alphas =
      p.has("alpha") ? std::vector<double>{p.real("alpha", 0.0)} : default_alpha_grid();
  Outputs out(p);
  Json files = Json::array();
  for (double alpha : alphas) {
    Matrix res(t.rows(), t.cols());
    for (std::size_t r = 0; r < t.rows(); ++r) {
      Vector v = interpolate_features(t.row(r), ref_row(ref, r), set, alpha);
      std::copy(v.begin(), v.end(), res.row(r).begin());
    }
    const std::string name = alpha_name(alpha);
    write_tensor(res, out.file(name));
    files.push_back(name);
  }
  return {{"rows", t.rows()}, {"alphas", alphas}, {"files", files}};
}

Json run_histogram(const Params& p) {
  MdsReport rep = load_report(p);
  const std::size_t bins = p.count("bins", 20, 1);
  Outputs out(p);
  write_text_file(out.file("histogram.csv"), histogram_csv(mds_histogram(rep, bins)));
  return {{"bins", bins}, {"counts", category_counts(rep)}};
}

struct Key {
  std::string name;
  bool flag;  // also exposed as --name (underscores become dashes)
};

struct Command {
  std::vector<std::string> path;
  std::string help;
  std::vector<Key> keys;
  std::function<Json(const Params&)> run;
};

std::vector<Key> train_keys(std::vector<Key> extra) {
  std::vector<Key> keys = {{"data", true},           {"out", true},
                           {"seed", true},           {"steps", true},
                           {"lr", true},             {"batch", true},
                           {"plateau_window", false}, {"plateau_tolerance", false},
                           {"checkpoint_every", false}};
  keys.insert(keys.end(), extra.begin(), extra.end());
  return keys;
}

std::vector<Command> command_table() {
  return {
      {{"gen"},
       "Generate a synthetic paired dataset with planted modality structure",
       {{"out", true}, {"seed", true}, {"num_samples", false}, {"dim", false},
        {"n_img_only", false}, {"n_txt_only", false}, {"n_shared", false},
        {"noise_sigma", false}, {"n_clusters", false}, {"mix", false},
        {"shared_active", false}, {"class_signal", false}},
       run_gen},
      {{"train", "sae"},
       "Train a TopK sparse autoencoder shared by both modalities",
       train_keys({{"topk", true}, {"latent_dim", true}}),
       run_train_sae},
      {{"train", "ncl"},
       "Train a non-negative contrastive projector",
       train_keys({{"temperature", true}, {"symmetric", false}}),
       run_train_ncl},
      {{"mds"},
       "Modality dominance scores and TextD/CrossD/ImgD categories",
       {{"data", true}, {"model", true}, {"out", true}, {"bins", true}},
       run_mds},
      {{"eval", "mono"},
       "EmbSim / WinRate monosemanticity scores and top-activated listings",
       {{"data", true}, {"model", true}, {"report", true}, {"out", true},
        {"seed", true}, {"m", true}, {"indices", true}},
       run_eval_mono},
      {{"intervene", "mask"},
       "Zero-mask an index set, or draw balanced masks from an MDS report",
       {{"data", true}, {"indices", true}, {"report", true}, {"out", true},
        {"seed", true}},
       run_mask},
      {{"intervene", "detox"},
       "Align selected coordinates of --data towards --ref",
       {{"data", true}, {"ref", true}, {"indices", true}, {"out", true},
        {"steps", true}, {"lr", true}},
       run_detox},
      {{"intervene", "interp"},
       "Interpolate selected coordinates of --data towards --ref",
       {{"data", true}, {"ref", true}, {"indices", true}, {"out", true},
        {"alpha", true}},
       run_interp},
      {{"report", "histogram"},
       "MDS histogram CSV from a report.json",
       {{"report", true}, {"out", true}, {"bins", true}},
       run_histogram},
  };
}

std::string dashed(std::string s) {
  std::replace(s.begin(), s.end(), '_', '-');
  return s;
}

std::string joined(const std::vector<std::string>& path) {
  std::string s;
  for (const auto& w : path) s += (s.empty() ? "" : " ") + w;
  return s;
}

struct Bound {
  const Command* cmd;
  CLI::App* app;
  std::map<std::string, std::string> values;
  std::string config;
};

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err) {
  const std::vector<Command> table = command_table();
  CLI::App app{"Multimodal feature analysis toolkit", "mmf"};
  app.require_subcommand(1);
  std::map<std::string, CLI::App*> groups;
  std::vector<std::unique_ptr<Bound>> bound;
  for (const Command& cmd : table) {
    CLI::App* parent = &app;
    if (cmd.path.size() == 2) {
      auto& g = groups[cmd.path[0]];
      if (!g) {
        g = app.add_subcommand(cmd.path[0]);
        g->require_subcommand(1);
      }
      parent = g;
    }
    auto b = std::make_unique<Bound>();
    b->cmd = &cmd;
    b->app = parent->add_subcommand(cmd.path.back(), cmd.help);
    b->app->add_option("--config", b->config, "key=value config file");
    for (const Key& key : cmd.keys) {
      if (key.flag) b->app->add_option("--" + dashed(key.name), b->values[key.name]);
    }
    bound.push_back(std::move(b));
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return static_cast<int>(ErrorKind::kUsage);
  }

  const Bound* active = nullptr;
  for (const auto& b : bound) {
    if (b->app->parsed()) active = b.get();
  }
  const Command& cmd = *active->cmd;
  const std::string name = joined(cmd.path);
  try {
    Params params;
    for (const Key& key : cmd.keys) {
      if (key.flag && active->app->get_option("--" + dashed(key.name))->count() > 0) {
        params.set(key.name, active->values.at(key.name));
      }
    }
    if (!active->config.empty()) {
      params.set("config", active->config);
      for (const auto& [k, v] : parse_config(read_text_file(active->config))) {
        bool known = std::any_of(cmd.keys.begin(), cmd.keys.end(),
                                 [&](const Key& key) { return key.name == k; });
        if (!known) throw ConfigError("unknown key '" + k + "' for " + name);
        params.set_default(k, v);
      }
    }
    Json summary = {{"command", name}};
    summary.update(cmd.run(params));
    out << summary.dump() << '\n';
    return 0;
  } catch (const Error& e) {
    err << "mmf " << name << ": " << e.what() << '\n';
    return e.exit_code();
  } catch (const nlohmann::json::exception& e) {
    err << "mmf " << name << ": format error: " << e.what() << '\n';
    return static_cast<int>(ErrorKind::kData);
  } catch (const fs::filesystem_error& e) {
    err << "mmf " << name << ": io error: " << e.what() << '\n';
    return static_cast<int>(ErrorKind::kData);
  }
}

int dispatch(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dispatch(args, std::cout, std::cerr);
}

}  // namespace mmf::cli
