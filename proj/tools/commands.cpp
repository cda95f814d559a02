#include "commands.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "ctsum/checkpoint.hpp"
#include "ctsum/dataset.hpp"
#include "ctsum/error.hpp"
#include "ctsum/evaluate.hpp"
#include "ctsum/parallel.hpp"
#include "ctsum/pipeline.hpp"
#include "ctsum/refine.hpp"
#include "ctsum/summarize.hpp"
#include "ctsum/synth.hpp"

namespace ctsum::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

// Flag-level validation failures are input errors.
template <typename Fn>
void check_flags(Fn&& fn) {
  try {
    fn();
  } catch (const DomainError& e) {
    throw InputError(std::string("invalid flags: ") + e.what());
  }
}

const ShotSegmentation& shots_or_default(const VideoRecord& v, std::size_t shot_length,
                                         std::optional<ShotSegmentation>& fallback) {
  if (v.shots) return *v.shots;
  fallback = default_shots(v.features.frames(), shot_length);
  return *fallback;
}

// Scoring flags shared by score and eval.
struct ScoringFlags {
  std::string metrics = "align,uniform";
  ScoringOptions options;
  bool raw_filter = false;

  void add(CLI::App* app) {
    app->add_option("--metrics", metrics, "Comma list drawn from align, uniform, filter")
        ->capture_default_str();
    app->add_option("--neighbor-ratio", options.neighbor_ratio,
                    "Neighbourhood size as a fraction of the video length")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
    app->add_option("--epsilon", options.epsilon, "Offset added to the product of scaled metrics")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    app->add_option("--sigma", options.sigma, "Gaussian smoothing width in frames (0 disables)")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    app->add_flag("--raw-filter", raw_filter, "Use filter outputs without min-max scaling");
    app->add_flag("--normalize-length", options.normalize_length,
                  "Score a length-normalized copy and map scores back");
    app->add_option("--length-target", options.length_target,
                    "Frame count used by --normalize-length")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
  }

  ScoringOptions resolve(std::uint64_t seed) const {
    ScoringOptions o = options;
    o.metrics = parse_metrics(metrics);
    o.scale_filter = !raw_filter;
    o.seed = seed;
    return o;
  }
};

// Training flags shared by train and eval --refine.
struct TrainFlags {
  TrainConfig config;

  void add(CLI::App* app) {
    app->add_option("--lambda1", config.lambda1, "Weight of the uniformity term")
        ->capture_default_str();
    app->add_option("--lambda2", config.lambda2, "Weight of the uniqueness term")
        ->capture_default_str();
    app->add_option("--lambda3", config.lambda3, "Weight of the filter term")
        ->capture_default_str();
    app->add_option("--train-neighbor-ratio", config.neighbor_ratio,
                    "Neighbourhood fraction for the alignment term")
        ->capture_default_str();
    app->add_option("--lr", config.lr, "Adam learning rate")->capture_default_str();
    app->add_option("--weight-decay", config.weight_decay, "L2 weight decay")
        ->capture_default_str();
    app->add_option("--batch-size", config.batch_size, "Videos per batch")->capture_default_str();
    app->add_option("--epochs", config.epochs, "Training epochs")->capture_default_str();
    app->add_option("--segment-length", config.segment_length,
                    "Frames per segment feature in the uniqueness term")
        ->capture_default_str();
    app->add_option("--proj-dim", config.proj_dim, "Projector output width")
        ->capture_default_str();
    app->add_option("--hidden-dim", config.hidden_dim, "Projector hidden width")
        ->capture_default_str();
    app->add_option("--filter-hidden-dim", config.filter_hidden_dim, "Filter hidden width")
        ->capture_default_str();
    app->add_option("--train-length", config.length_target,
                    "Training videos are resampled to this many frames (0 keeps them)")
        ->capture_default_str();
  }

  TrainConfig resolve(std::uint64_t seed) const {
    TrainConfig c = config;
    c.seed = seed;
    check_flags([&] { c.validate(); });
    return c;
  }
};

void print_table(std::ostream& out, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& r : rows) {
    width.resize(std::max(width.size(), r.size()), 0);
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  }
  for (std::size_t k = 0; k < rows.size(); ++k) {
    for (std::size_t i = 0; i < rows[k].size(); ++i) {
      out << (i ? "  " : "") << std::left << std::setw(static_cast<int>(width[i])) << rows[k][i];
    }
    out << '\n';
    if (k == 0) {
      for (std::size_t i = 0; i < width.size(); ++i) {
        out << (i ? "  " : "") << std::string(width[i], '-');
      }
      out << '\n';
    }
  }
}

// synth ----------------------------------------------------------------------

Command add_synth(CLI::App& root) {
  auto* app = root.add_subcommand("synth", "Write a planted-structure dataset");
  auto spec = std::make_shared<SynthSpec>();
  auto out = std::make_shared<std::string>();
  app->add_option("--out", *out, "Output directory")->required();
  app->add_option("--videos", spec->n_videos, "Evaluation videos")->capture_default_str();
  app->add_option("--train-only", spec->n_train_only, "Extra train-only videos")
      ->capture_default_str();
  app->add_option("--frames", spec->frames, "Frames per video")->capture_default_str();
  app->add_option("--dim", spec->dim, "Feature dimension")->capture_default_str();
  app->add_option("--clusters", spec->n_clusters, "Themes per video")->capture_default_str();
  app->add_option("--redundancy", spec->redundancy, "Near-duplicate frames per theme")
      ->capture_default_str();
  app->add_option("--noise", spec->noise_sigma, "Per-axis noise of near-duplicates")
      ->capture_default_str();
  app->add_option("--key-fraction", spec->key_fraction, "Share of key frames")
      ->capture_default_str();
  app->add_option("--key-spread", spec->key_spread, "Tangent offset of key frames")
      ->capture_default_str();
  app->add_option("--background-spread", spec->background_spread,
                  "Tangent offset of background frames")
      ->capture_default_str();
  app->add_option("--pool", spec->background_pool_size, "Background vectors shared by all videos")
      ->capture_default_str();
  app->add_option("--block-length", spec->block_length, "Frames per shot")->capture_default_str();
  app->add_option("--annotators", spec->n_annotators, "Simulated annotators per video")
      ->capture_default_str();
  app->add_option("--annotator-noise", spec->annotator_noise,
                  "Standard deviation of annotator score noise")
      ->capture_default_str();
  app->add_option("--seed", spec->seed, "Random seed")->capture_default_str();

  return {app, [spec, out] {
            const SynthDataset data = generate(*spec);
            const fs::path dir(*out);
            const fs::path manifest = write_synth(data, dir);
            std::cout << "wrote " << data.videos.size() << " videos, manifest "
                      << manifest.string() << '\n';
            return dir / "config.toml";
          }};
}

// score ----------------------------------------------------------------------

Command add_score(CLI::App& root) {
  auto* app = root.add_subcommand("score", "Per-frame importance scores for every video");
  struct Flags {
    std::string manifest, out, checkpoint, csv_dir;
    ScoringFlags scoring;
    std::uint64_t seed = 0;
    std::size_t workers = 1;
  };
  auto f = std::make_shared<Flags>();
  app->add_option("--manifest", f->manifest, "Dataset manifest")->required();
  app->add_option("--out", f->out, "Output JSON mapping video id to scores")->required();
  app->add_option("--checkpoint", f->checkpoint, "Trained projector and filter");
  app->add_option("--csv-dir", f->csv_dir, "Also write <id>.csv per video here");
  f->scoring.add(app);
  app->add_option("--seed", f->seed, "Random seed")->capture_default_str();
  app->add_option("--workers", f->workers, "Parallel workers")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  return {app, [f] {
            const ScoringOptions options = f->scoring.resolve(f->seed);
            const Dataset data = load_dataset(fs::path(f->manifest));
            std::optional<TrainedModel> model;
            if (!f->checkpoint.empty()) model = load_checkpoint(f->checkpoint).model;
            for (Metric m : options.metrics) {
              if (m == Metric::kFilter && !model) {
                throw InputError("--metrics filter needs --checkpoint");
              }
            }

            std::vector<ScoreSeries> scores(data.videos.size());
            parallel_for(data.videos.size(), f->workers, [&](std::size_t i) {
              scores[i] = importance_scores(data.videos[i].features, options,
                                            model ? &*model : nullptr);
            });

            json doc = json::object();
            for (std::size_t i = 0; i < scores.size(); ++i) doc[data.videos[i].id] = scores[i].values;
            write_text(f->out, doc.dump() + "\n");
            if (!f->csv_dir.empty()) {
              for (std::size_t i = 0; i < scores.size(); ++i) {
                std::ostringstream csv;
                csv << "frame_index,score\n";
                for (std::size_t t = 0; t < scores[i].size(); ++t) {
                  csv << t << ',' << fixed(scores[i][t], 9) << '\n';
                }
                write_text(fs::path(f->csv_dir) / (data.videos[i].id + ".csv"), csv.str());
              }
            }
            std::cout << "scored " << scores.size() << " videos -> " << f->out << '\n';
            return fs::path(f->out + ".config.toml");
          }};
}

// train ----------------------------------------------------------------------

Command add_train(CLI::App& root) {
  auto* app = root.add_subcommand("train", "Train the projector and uniqueness filter");
  struct Flags {
    std::string manifest, out, history, setting;
    int fold = -1;
    TrainFlags train;
    std::uint64_t seed = 0;
  };
  auto f = std::make_shared<Flags>();
  app->add_option("--manifest", f->manifest, "Dataset manifest")->required();
  app->add_option("--out", f->out, "Checkpoint path")->required();
  app->add_option("--history", f->history, "Loss history CSV (default <out>.history.csv)");
  app->add_option("--fold", f->fold, "Train on this fold's training split (-1: every video)")
      ->capture_default_str();
  app->add_option("--setting", f->setting, "Setting used with --fold (default: manifest)");
  f->train.add(app);
  app->add_option("--seed", f->seed, "Random seed")->capture_default_str();

  return {app, [f] {
            const TrainConfig config = f->train.resolve(f->seed);
            const Dataset data = load_dataset(fs::path(f->manifest));
            std::vector<FeatureMatrix> videos;
            if (f->fold < 0) {
              for (const auto& v : data.videos) videos.push_back(v.features);
            } else {
              const Setting setting = f->setting.empty() ? data.setting : parse_setting(f->setting);
              const auto folds = make_folds(data, setting);
              if (static_cast<std::size_t>(f->fold) >= folds.size()) {
                throw InputError("--fold " + std::to_string(f->fold) + " out of range, " +
                                 std::to_string(folds.size()) + " folds");
              }
              for (const auto* v : folds[static_cast<std::size_t>(f->fold)].train) {
                videos.push_back(v->features);
              }
            }
            if (videos.size() < 2) throw InputError("training needs at least two videos");

            const TrainResult result = train(videos, config);
            save_checkpoint(f->out, Checkpoint{{result.projector, result.filter}, config});
            std::ostringstream csv;
            csv << "epoch,mean_loss\n";
            for (std::size_t e = 0; e < result.history.epoch_loss.size(); ++e) {
              csv << e + 1 << ',' << fixed(result.history.epoch_loss[e], 9) << '\n';
            }
            write_text(f->history.empty() ? fs::path(f->out + ".history.csv") : fs::path(f->history),
                       csv.str());
            std::cout << "trained on " << videos.size() << " videos for " << config.epochs
                      << " epochs -> " << f->out << '\n';
            return fs::path(f->out + ".config.toml");
          }};
}

// summarize ------------------------------------------------------------------

std::vector<std::pair<std::string, ScoreSeries>> read_scores(const fs::path& path) {
  const json doc = read_json(path);
  if (!doc.is_object()) throw FormatError(path.string() + ": expected an object of score arrays");
  std::vector<std::pair<std::string, ScoreSeries>> out;
  for (const auto& [id, values] : doc.items()) {
    try {
      out.emplace_back(id, ScoreSeries{values.get<std::vector<double>>(), ScoreKind::kImportance});
    } catch (const json::exception& e) {
      throw FormatError(path.string() + ": video '" + id + "': " + e.what());
    }
  }
  return out;
}

Command add_summarize(CLI::App& root) {
  auto* app = root.add_subcommand("summarize", "Knapsack summaries from importance scores");
  struct Flags {
    std::string manifest, scores, out;
    double ratio = kDefaultSummaryRatio;
    std::size_t shot_length = kDefaultShotLength;
    std::uint64_t seed = 0;
    std::size_t workers = 1;
  };
  auto f = std::make_shared<Flags>();
  app->add_option("--manifest", f->manifest, "Dataset manifest")->required();
  app->add_option("--scores", f->scores, "Scores JSON written by score")->required();
  app->add_option("--out", f->out, "Output summaries JSON")->required();
  app->add_option("--ratio", f->ratio, "Summary length as a fraction of the video")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  app->add_option("--shot-length", f->shot_length, "Shot length when the manifest has no shots")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app->add_option("--seed", f->seed, "Random seed (unused by the knapsack; recorded)")
      ->capture_default_str();
  app->add_option("--workers", f->workers, "Parallel workers")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  return {app, [f] {
            if (!(f->ratio > 0.0)) throw InputError("--ratio must be in (0, 1]");
            const Dataset data = load_dataset(fs::path(f->manifest));
            const FixedScorer scorer(read_scores(f->scores));
            std::vector<SummarySelection> picks(data.videos.size());
            parallel_for(data.videos.size(), f->workers, [&](std::size_t i) {
              const VideoRecord& v = data.videos[i];
              const ScoreSeries s = scorer.score(v);
              if (s.size() != v.features.frames()) {
                throw FormatError("scores for '" + v.id + "' have " + std::to_string(s.size()) +
                                  " entries, video has " + std::to_string(v.features.frames()));
              }
              std::optional<ShotSegmentation> fallback;
              picks[i] = make_summary(s, shots_or_default(v, f->shot_length, fallback), f->ratio);
            });
            json doc = json::object();
            for (std::size_t i = 0; i < picks.size(); ++i) {
              doc[data.videos[i].id] = {{"budget", picks[i].budget},
                                        {"selected_shots", picks[i].selected_indices()},
                                        {"frame_mask", picks[i].frame_mask}};
            }
            write_text(f->out, doc.dump() + "\n");
            std::cout << "summarized " << picks.size() << " videos -> " << f->out << '\n';
            return fs::path(f->out + ".config.toml");
          }};
}

// eval -----------------------------------------------------------------------

Command add_eval(CLI::App& root) {
  auto* app = root.add_subcommand("eval", "Cross-validated F1, Kendall tau and Spearman rho");
  struct Flags {
    std::string manifest, out, per_video, setting, aggregation, scores;
    bool refine = false;
    ScoringFlags scoring;
    TrainFlags train;
    double ratio = kDefaultSummaryRatio;
    std::size_t shot_length = kDefaultShotLength;
    std::uint64_t seed = 0;
    std::size_t workers = 1;
  };
  auto f = std::make_shared<Flags>();
  app->add_option("--manifest", f->manifest, "Dataset manifest")->required();
  app->add_option("--out", f->out, "Results CSV (setting,fold,f1,tau,rho)")->required();
  app->add_option("--per-video", f->per_video, "Per-video results CSV");
  app->add_option("--setting", f->setting, "canonical, augmented or transfer (default: manifest)");
  app->add_option("--aggregation", f->aggregation, "F1 over references: mean or max (default: manifest)");
  app->add_option("--scores", f->scores, "Evaluate fixed scores from a JSON file");
  app->add_flag("--refine", f->refine, "Train a projector and filter per fold");
  f->scoring.add(app);
  f->train.add(app);
  app->add_option("--ratio", f->ratio, "Summary length as a fraction of the video")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  app->add_option("--shot-length", f->shot_length, "Shot length when the manifest has no shots")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app->add_option("--seed", f->seed, "Random seed")->capture_default_str();
  app->add_option("--workers", f->workers, "Parallel workers")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  return {app, [f] {
            if (!(f->ratio > 0.0)) throw InputError("--ratio must be in (0, 1]");
            Dataset data = load_dataset(fs::path(f->manifest));
            const Setting setting = f->setting.empty() ? data.setting : parse_setting(f->setting);
            if (!f->aggregation.empty()) data.aggregation = parse_aggregation(f->aggregation);

            if (!f->scores.empty() && f->refine) {
              throw InputError("--scores and --refine are mutually exclusive");
            }
            std::unique_ptr<Scorer> scorer;
            if (!f->scores.empty()) {
              scorer = std::make_unique<FixedScorer>(read_scores(f->scores));
            } else if (f->refine) {
              scorer = std::make_unique<RefinedScorer>(f->train.resolve(f->seed),
                                                       f->scoring.resolve(f->seed));
            } else {
              const ScoringOptions o = f->scoring.resolve(f->seed);
              for (Metric m : o.metrics) {
                if (m == Metric::kFilter) throw InputError("--metrics filter needs --refine");
              }
              scorer = std::make_unique<TrainingFreeScorer>(o);
            }

            EvalOptions options;
            options.ratio = f->ratio;
            options.default_shot_length = f->shot_length;
            options.workers = f->workers;
            const SettingResult result = run_setting(data, setting, *scorer, options);

            const std::string name(to_string(setting));
            std::vector<std::vector<std::string>> rows{{"setting", "fold", "f1", "tau", "rho"}};
            for (std::size_t k = 0; k < result.folds.size(); ++k) {
              const auto& r = result.folds[k];
              rows.push_back({name, std::to_string(k), fixed(r.f1), fixed(r.tau), fixed(r.rho)});
            }
            rows.push_back({name, "mean", fixed(result.f1), fixed(result.tau), fixed(result.rho)});

            std::ostringstream csv;
            for (const auto& r : rows) {
              for (std::size_t i = 0; i < r.size(); ++i) csv << (i ? "," : "") << r[i];
              csv << '\n';
            }
            write_text(f->out, csv.str());
            if (!f->per_video.empty()) {
              std::ostringstream pv;
              pv << "fold,video,f1,tau,rho\n";
              for (const auto& fold : result.folds) {
                for (const auto& v : fold.per_video) {
                  pv << v.fold << ',' << v.id << ',' << (v.has_f1 ? fixed(v.f1) : "") << ','
                     << (v.has_correlation ? fixed(v.tau) : "") << ','
                     << (v.has_correlation ? fixed(v.rho) : "") << '\n';
                }
              }
              write_text(f->per_video, pv.str());
            }
            print_table(std::cout, rows);
            return fs::path(f->out + ".config.toml");
          }};
}

}  // namespace

std::vector<Command> register_commands(CLI::App& app) {
  return {add_synth(app), add_score(app), add_train(app), add_summarize(app), add_eval(app)};
}

}  // namespace ctsum::cli
