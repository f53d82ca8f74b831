// Command-line driver: preprocess -> train -> predict -> ensemble ->
// evaluate/analyze, plus the synthetic data generator and the ablation
// sweep. Exit codes: 0 ok, 2 usage, 3 data format, 4 numerical failure.

#include <CLI11.hpp>

#include <atomic>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

#include "iest/analysis.hpp"
#include "iest/checkpoint.hpp"
#include "iest/config.hpp"
#include "iest/dataset.hpp"
#include "iest/ensemble.hpp"
#include "iest/metrics.hpp"
#include "iest/synth.hpp"
#include "iest/training.hpp"

namespace fs = std::filesystem;
using namespace iest;

namespace {

constexpr const char* kToolVersion = "1.0.0";

const EmojiDatabase& emoji_db(const std::string& path) {
  static EmojiDatabase from_file;
  if (!path.empty()) {
    from_file = EmojiDatabase::load_file(path);
    return from_file;
  }
  return EmojiDatabase::builtin();
}

std::string fmt4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

void lowercase_tokens(Dataset& ds) {
  for (auto& ex : ds.examples) {
    for (auto& t : ex.tokens) {
      if (t.kind == TokenKind::word || t.kind == TokenKind::hashtag) {
        for (auto& c : t.text)
          c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      }
    }
  }
}

struct TrainArgs {
  std::string train_path, val_path, config_path, out_path, history_path;
  std::string word_vectors_path, emoji_db_path;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::size_t num_seeds = 1;
  unsigned jobs = 1;
  bool strip = false;
};

FullConfig resolve_config(const std::string& config_path,
                          const std::vector<std::string>& overrides) {
  KV kv;
  if (!config_path.empty()) {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config: " + config_path);
    std::ostringstream ss;
    ss << in.rdbuf();
    kv = parse_kv(ss.str());
  }
  for (const auto& o : overrides) apply_override(kv, o);
  std::set<std::string> consumed;
  FullConfig fc;
  fc.model = model_config_from_kv(kv, &consumed);
  fc.train = train_config_from_kv(kv, &consumed);
  for (const auto& [k, v] : kv) {
    if (!consumed.count(k)) throw std::runtime_error("config: unknown key '" + k + "'");
  }
  return fc;
}

struct TrainedRun {
  std::uint64_t seed;
  FitResult<float> result;
  Model<float> model;
};

TrainedRun train_one(const Dataset& train, const Dataset& val, ModelConfig mcfg,
                     TrainConfig tcfg, std::uint64_t seed,
                     const std::string& word_vectors_path) {
  tcfg.seed = seed;
  if (mcfg.encoder == ModelConfig::Encoder::embedding_lookup && mcfg.word_vocab == 0) {
    std::vector<std::vector<Token>> toks;
    for (const auto& e : train.examples) toks.push_back(e.tokens);
    auto vocab = build_word_vocab(toks, 20000);
    mcfg.word_vocab = vocab.size();
    Rng init_rng = Rng::split(seed, "init");
    auto model = build_model<float>(mcfg, init_rng);
    model.word_vocab = vocab;
    model.rebuild_word_index();
    if (!word_vectors_path.empty()) {
      apply_word_vectors(model, load_word_vectors(word_vectors_path));
    }
    auto res = fit(model, train, val, tcfg);
    model.params = res.best_params;
    return {seed, std::move(res), std::move(model)};
  }
  Rng init_rng = Rng::split(seed, "init");
  auto model = build_model<float>(mcfg, init_rng);
  auto res = fit(model, train, val, tcfg);
  model.params = res.best_params;
  return {seed, std::move(res), std::move(model)};
}

void write_history(const FitResult<float>& res, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write history: " + path);
  out << "epoch,train_loss,val_accuracy\n";
  for (const auto& h : res.history) {
    out << h.epoch << ',' << format_double(h.train_loss) << ','
        << format_double(h.val_accuracy) << '\n';
  }
}

void write_manifest(const std::string& ckpt_path, const TrainArgs& args,
                    const FullConfig& fc, const std::vector<std::uint64_t>& seeds,
                    const std::vector<std::string>& artifacts) {
  nlohmann::ordered_json j;
  j["tool_version"] = kToolVersion;
  KV kv = model_config_to_kv(fc.model);
  for (const auto& [k, v] : train_config_to_kv(fc.train)) kv[k] = v;
  j["config"] = kv;
  j["seeds"] = seeds;
  j["dataset_digests"] = {{"train", file_digest(args.train_path)},
                          {"val", file_digest(args.val_path)}};
  j["artifacts"] = artifacts;
  std::ofstream out(ckpt_path + ".manifest.json", std::ios::binary);
  out << j.dump(2) << '\n';
}

int cmd_train(const TrainArgs& args) {
  FullConfig fc = resolve_config(args.config_path, args.overrides);
  if (args.seed_given) fc.train.seed = args.seed;
  const auto& db = emoji_db(args.emoji_db_path);
  Dataset train = load_dataset(args.train_path, db, true, args.strip);
  Dataset val = load_dataset(args.val_path, db, true, args.strip);

  std::vector<std::uint64_t> seeds;
  for (std::size_t i = 0; i < args.num_seeds; ++i) seeds.push_back(fc.train.seed + i);

  std::vector<TrainedRun> runs(seeds.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex err_mu;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= seeds.size()) return;
      try {
        runs[i] = train_one(train, val, fc.model, fc.train, seeds[i],
                            args.word_vectors_path);
      } catch (...) {
        std::lock_guard lock(err_mu);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(args.jobs, seeds.size()));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < jobs; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  std::vector<std::string> artifacts;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    std::string path = args.out_path;
    if (seeds.size() > 1) {
      path = args.out_path + "." + std::to_string(i);
    }
    save_model(runs[i].model, path);
    artifacts.push_back(path);
    if (!args.history_path.empty()) {
      std::string hpath = seeds.size() > 1
                              ? args.history_path + "." + std::to_string(i)
                              : args.history_path;
      write_history(runs[i].result, hpath);
    }
    std::cout << "seed " << seeds[i] << ": best epoch " << runs[i].result.best_epoch
              << ", val accuracy " << fmt4(runs[i].result.best_val_accuracy) << '\n';
  }
  write_manifest(args.out_path, args, fc, seeds, artifacts);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"implicit-emotion classifier pipeline"};
  app.require_subcommand(1);

  // ---- preprocess ----
  auto* pre = app.add_subcommand("preprocess", "substitute markers and tokenize");
  std::string pre_in, pre_out, pre_db;
  bool pre_strip = false, pre_lower = false;
  pre->add_option("--in", pre_in)->required();
  pre->add_option("--out", pre_out)->required();
  pre->add_option("--emoji-db", pre_db);
  pre->add_flag("--strip-emoji", pre_strip);
  pre->add_flag("--lower", pre_lower, "ASCII case folding (off by default)");

  // ---- gen-data ----
  auto* gen = app.add_subcommand("gen-data", "generate a synthetic dataset");
  SynthSpec spec;
  std::string gen_out, gen_db;
  gen->add_option("--out", gen_out)->required();
  gen->add_option("--num", spec.num_examples)->required();
  gen->add_option("--seed", spec.seed);
  gen->add_option("--cue-signal", spec.cue_signal);
  gen->add_option("--emoji-signal", spec.emoji_signal);
  gen->add_option("--hashtag-rate", spec.hashtag_rate);
  gen->add_option("--un-trigger-share", spec.un_trigger_share);
  gen->add_option("--un-trigger-noise", spec.un_trigger_noise);
  gen->add_option("--emoji-db", gen_db);

  // ---- train ----
  auto* tr = app.add_subcommand("train", "fit one or more models");
  TrainArgs targs;
  tr->add_option("--train", targs.train_path)->required();
  tr->add_option("--val", targs.val_path)->required();
  tr->add_option("--config", targs.config_path);
  tr->add_option("--out", targs.out_path)->required();
  tr->add_option("--history", targs.history_path);
  tr->add_option("--word-vectors", targs.word_vectors_path);
  tr->add_option("--emoji-db", targs.emoji_db_path);
  auto* seed_opt = tr->add_option("--seed", targs.seed);
  tr->add_option("--num-seeds", targs.num_seeds, "train N models, seed+i each");
  tr->add_option("--jobs", targs.jobs);
  tr->add_flag("--strip-emoji", targs.strip);
  tr->add_option("--set", targs.overrides, "config override key=value");

  // ---- predict ----
  auto* pr = app.add_subcommand("predict", "label a dataset with a checkpoint");
  std::string pr_model, pr_in, pr_out, pr_probs, pr_db;
  pr->add_option("--model", pr_model)->required();
  pr->add_option("--in", pr_in)->required();
  pr->add_option("--out", pr_out);
  pr->add_option("--probs", pr_probs, "write a probability cache");
  pr->add_option("--emoji-db", pr_db);

  // ---- ensemble ----
  auto* en = app.add_subcommand("ensemble", "exhaustive subset search over cached probabilities");
  std::string en_dir, en_gold;
  std::size_t en_top = 10;
  unsigned en_jobs = 1;
  en->add_option("--probs", en_dir)->required();
  en->add_option("--gold", en_gold)->required();
  en->add_option("--top", en_top);
  en->add_option("--jobs", en_jobs);

  // ---- evaluate ----
  auto* ev = app.add_subcommand("evaluate", "classification report");
  std::string ev_pred, ev_gold, ev_report = "tsv";
  ev->add_option("--pred", ev_pred)->required();
  ev->add_option("--gold", ev_gold)->required();
  ev->add_option("--report", ev_report)->check(CLI::IsMember({"tsv", "json"}));

  // ---- analyze ----
  auto* an = app.add_subcommand("analyze", "emoji/hashtag/pattern/pca analyses");
  an->require_subcommand(1);
  std::string an_data, an_pred, an_model, an_out, an_db, an_train, an_eval, an_cfg;
  std::size_t an_min_count = 1;
  std::string an_fractions = "0.25,0.5,1.0";
  std::vector<std::string> an_overrides;
  auto* an_emoji = an->add_subcommand("emoji", "presence effect and per-alias removal deltas");
  an_emoji->add_option("--data", an_data)->required();
  an_emoji->add_option("--pred", an_pred);
  an_emoji->add_option("--model", an_model);
  an_emoji->add_option("--min-count", an_min_count);
  an_emoji->add_option("--emoji-db", an_db);
  auto* an_hash = an->add_subcommand("hashtag", "presence effect");
  an_hash->add_option("--data", an_data)->required();
  an_hash->add_option("--pred", an_pred)->required();
  an_hash->add_option("--emoji-db", an_db);
  auto* an_pat = an->add_subcommand("pattern", "un __TRIGGERWORD__ report");
  an_pat->add_option("--data", an_data)->required();
  an_pat->add_option("--pred", an_pred)->required();
  an_pat->add_option("--model", an_model, "enable the 3d-projection cluster check");
  an_pat->add_option("--emoji-db", an_db);
  auto* an_pca = an->add_subcommand("pca", "3d projection of sentence representations");
  an_pca->add_option("--data", an_data)->required();
  an_pca->add_option("--model", an_model)->required();
  an_pca->add_option("--out", an_out)->required();
  an_pca->add_option("--emoji-db", an_db);
  auto* an_amt = an->add_subcommand("data-amount", "accuracy vs training-set size");
  an_amt->add_option("--train", an_train)->required();
  an_amt->add_option("--eval", an_eval)->required();
  an_amt->add_option("--fractions", an_fractions);
  an_amt->add_option("--config", an_cfg);
  an_amt->add_option("--set", an_overrides);
  an_amt->add_option("--emoji-db", an_db);

  // ---- sweep ----
  auto* sw = app.add_subcommand("sweep", "ablation grid against a base run");
  std::string sw_train, sw_val, sw_cfg, sw_out, sw_db;
  std::vector<std::string> sw_variants, sw_overrides;
  unsigned sw_jobs = 1;
  sw->add_option("--train", sw_train)->required();
  sw->add_option("--val", sw_val)->required();
  sw->add_option("--config", sw_cfg);
  sw->add_option("--set", sw_overrides, "base config override key=value");
  sw->add_option("--variant", sw_variants,
                 "named override set, e.g. 'lstm64:lstm_hidden=64,fc_hidden=32'");
  sw->add_option("--out", sw_out);
  sw->add_option("--jobs", sw_jobs);
  sw->add_option("--emoji-db", sw_db);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*pre) {
      const auto& db = emoji_db(pre_db);
      Dataset ds = load_dataset(pre_in, db, true, pre_strip);
      if (pre_lower) lowercase_tokens(ds);
      save_dataset(ds, pre_out);
      std::cout << ds.size() << " examples written to " << pre_out << '\n';
    } else if (*gen) {
      write_synthetic(spec, gen_out, emoji_db(gen_db));
      std::cout << spec.num_examples << " examples written to " << gen_out << '\n';
    } else if (*tr) {
      targs.seed_given = seed_opt->count() > 0;
      return cmd_train(targs);
    } else if (*pr) {
      auto model = load_model(pr_model);
      const auto& db = emoji_db(pr_db);
      Dataset ds = load_dataset(pr_in, db);
      std::vector<std::vector<Token>> toks;
      for (const auto& e : ds.examples) toks.push_back(e.tokens);
      auto probs = predict_proba(model, toks);
      if (!pr_out.empty()) save_label_file(argmax_rows(probs), pr_out);
      if (!pr_probs.empty())
        save_probability_matrix(probs, file_digest(pr_in), pr_probs);
      if (pr_out.empty() && pr_probs.empty()) {
        for (int c : argmax_rows(probs))
          std::cout << label_name(static_cast<EmotionLabel>(c)) << '\n';
      }
    } else if (*en) {
      std::vector<ProbabilityMatrix> members;
      std::vector<fs::path> files;
      for (const auto& entry : fs::directory_iterator(en_dir)) {
        if (entry.is_regular_file()) files.push_back(entry.path());
      }
      std::sort(files.begin(), files.end());
      for (const auto& f : files) {
        ProbabilityMatrix m;
        m.model_id = f.filename().string();
        m.probs = load_probability_matrix(f.string());
        members.push_back(std::move(m));
      }
      auto gold = load_label_file(en_gold);
      auto results = search_best_subset(members, gold, en_jobs);
      std::cout << "rank\taccuracy\tsize\tmembers\n";
      for (std::size_t i = 0; i < std::min(en_top, results.size()); ++i) {
        const auto& r = results[i];
        std::cout << i + 1 << '\t' << fmt4(r.accuracy) << '\t' << r.size << '\t';
        bool first = true;
        for (std::size_t m = 0; m < members.size(); ++m) {
          if (r.bitmask & (1u << m)) {
            if (!first) std::cout << ',';
            std::cout << members[m].model_id;
            first = false;
          }
        }
        std::cout << '\n';
      }
    } else if (*ev) {
      auto report = compute_metrics(load_label_file(ev_gold), load_label_file(ev_pred));
      std::cout << (ev_report == "json" ? metrics_to_json(report)
                                        : metrics_to_tsv(report));
      if (ev_report == "json") std::cout << '\n';
    } else if (*an) {
      const auto& db = emoji_db(an_db);
      if (*an_emoji) {
        Dataset ds = load_dataset(an_data, db);
        if (!an_pred.empty()) {
          auto preds = load_label_file(an_pred);
          std::vector<bool> present;
          for (const auto& e : ds.examples) present.push_back(e.features.has_emoji);
          auto eff = group_effect("emoji", present, ds.labels(), preds);
          std::cout << "group\tpresent_n\tpresent_acc\tabsent_n\tabsent_acc\n";
          std::cout << eff.group << '\t' << eff.count_present << '\t'
                    << fmt4(eff.accuracy_present) << '\t' << eff.count_absent
                    << '\t' << fmt4(eff.accuracy_absent) << '\n';
        }
        if (!an_model.empty()) {
          auto model = load_model(an_model);
          auto effects = emoji_removal_effects(model, ds, db, an_min_count);
          std::cout << "alias\tn\tacc_with\tacc_without\tdelta\n";
          for (const auto& e : effects) {
            std::cout << e.alias << '\t' << e.n << '\t' << fmt4(e.accuracy_with)
                      << '\t' << fmt4(e.accuracy_without) << '\t' << fmt4(e.delta)
                      << '\n';
          }
        }
      } else if (*an_hash) {
        Dataset ds = load_dataset(an_data, db);
        auto preds = load_label_file(an_pred);
        std::vector<bool> present;
        for (const auto& e : ds.examples) present.push_back(e.features.has_hashtag);
        auto eff = group_effect("hashtag", present, ds.labels(), preds);
        std::cout << "group\tpresent_n\tpresent_acc\tabsent_n\tabsent_acc\n";
        std::cout << eff.group << '\t' << eff.count_present << '\t'
                  << fmt4(eff.accuracy_present) << '\t' << eff.count_absent << '\t'
                  << fmt4(eff.accuracy_absent) << '\n';
      } else if (*an_pat) {
        Dataset ds = load_dataset(an_data, db);
        auto preds = load_label_file(an_pred);
        TriggerPatternReport rep;
        if (!an_model.empty()) {
          auto model = load_model(an_model);
          std::vector<std::vector<Token>> toks;
          for (const auto& e : ds.examples) toks.push_back(e.tokens);
          auto proj = pca_project(sentence_representations(model, toks), 3);
          rep = trigger_pattern_report(ds, preds, &proj, 0);
        } else {
          rep = trigger_pattern_report(ds, preds);
        }
        std::cout << "pattern_count\t" << rep.pattern_count << '\n';
        for (int c = 0; c < kNumClasses; ++c) {
          std::cout << "gold_" << label_name(static_cast<EmotionLabel>(c)) << '\t'
                    << rep.gold_histogram[c] << '\n';
        }
        std::cout << "accuracy\t" << fmt4(rep.accuracy) << '\n';
        if (rep.cluster_checked) {
          std::cout << "pattern_in_cluster\t" << rep.pattern_in_majority_cluster
                    << '\n';
          std::cout << "cluster_size\t" << rep.majority_cluster_size << '\n';
          std::cout << "cluster_purity\t" << fmt4(rep.cluster_purity) << '\n';
        }
      } else if (*an_pca) {
        Dataset ds = load_dataset(an_data, db);
        auto model = load_model(an_model);
        std::vector<std::vector<Token>> toks;
        for (const auto& e : ds.examples) toks.push_back(e.tokens);
        auto proj = pca_project(sentence_representations(model, toks), 3);
        std::ofstream out(an_out, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + an_out);
        out << "# explained_variance";
        for (double v : proj.explained_variance) out << '\t' << fmt4(v);
        out << '\n';
        for (std::size_t i = 0; i < proj.coords.rows(); ++i) {
          if (ds.examples[i].tweet.label)
            out << label_name(*ds.examples[i].tweet.label);
          for (std::size_t c = 0; c < proj.components; ++c)
            out << '\t' << fmt4(proj.coords.at(i, c));
          out << '\n';
        }
        std::cout << "wrote " << proj.coords.rows() << " projected points to "
                  << an_out << '\n';
      } else if (*an_amt) {
        FullConfig fc = resolve_config(an_cfg, an_overrides);
        Dataset train = load_dataset(an_train, db);
        Dataset eval = load_dataset(an_eval, db);
        std::vector<double> fractions;
        std::istringstream ss(an_fractions);
        std::string part;
        while (std::getline(ss, part, ',')) fractions.push_back(std::stod(part));
        auto curve = data_amount_curve(train, fractions, eval, fc.model, fc.train);
        std::cout << "fraction\taccuracy\tmacro_f1\n";
        for (const auto& p : curve) {
          std::cout << fmt4(p.fraction) << '\t' << fmt4(p.accuracy) << '\t'
                    << fmt4(p.macro_f1) << '\n';
        }
      }
    } else if (*sw) {
      FullConfig base = resolve_config(sw_cfg, sw_overrides);
      const auto& db = emoji_db(sw_db);
      Dataset train = load_dataset(sw_train, db);
      Dataset val = load_dataset(sw_val, db);

      struct Cell {
        std::string name;
        std::vector<std::string> overrides;
        double accuracy = 0.0;
      };
      std::vector<Cell> cells;
      cells.push_back({"base", {}, 0.0});
      for (const auto& v : sw_variants) {
        auto colon = v.find(':');
        Cell c;
        c.name = colon == std::string::npos ? v : v.substr(0, colon);
        std::string ovs = colon == std::string::npos ? v : v.substr(colon + 1);
        std::istringstream ss(ovs);
        std::string part;
        while (std::getline(ss, part, ',')) c.overrides.push_back(part);
        cells.push_back(std::move(c));
      }

      std::atomic<std::size_t> next{0};
      std::exception_ptr first_error;
      std::mutex err_mu;
      auto worker = [&] {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= cells.size()) return;
          try {
            KV kv = model_config_to_kv(base.model);
            for (const auto& [k, v] : train_config_to_kv(base.train)) kv[k] = v;
            for (const auto& o : cells[i].overrides) apply_override(kv, o);
            std::set<std::string> consumed;
            ModelConfig mcfg = model_config_from_kv(kv, &consumed);
            TrainConfig tcfg = train_config_from_kv(kv, &consumed);
            for (const auto& [k, v] : kv) {
              if (!consumed.count(k))
                throw std::runtime_error("sweep: unknown override key '" + k + "'");
            }
            auto run = train_one(train, val, mcfg, tcfg, tcfg.seed, "");
            cells[i].accuracy = run.result.best_val_accuracy;
          } catch (...) {
            std::lock_guard lock(err_mu);
            if (!first_error) first_error = std::current_exception();
            return;
          }
        }
      };
      const unsigned jobs = std::max(1u, std::min<unsigned>(sw_jobs, cells.size()));
      if (jobs == 1) {
        worker();
      } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < jobs; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
      }
      if (first_error) std::rethrow_exception(first_error);

      std::ostringstream table;
      table << "variant\taccuracy\tdelta\n";
      const double base_acc = cells[0].accuracy;
      for (const auto& c : cells) {
        table << c.name << '\t' << fmt4(100.0 * c.accuracy) << '\t'
              << fmt4(100.0 * (c.accuracy - base_acc)) << '\n';
      }
      std::cout << table.str();
      if (!sw_out.empty()) {
        std::ofstream out(sw_out, std::ios::binary);
        out << table.str();
      }
    }
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 4;
  } catch (const ShapeError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
