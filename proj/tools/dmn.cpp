// Command-line front end: train, eval, gradcheck, ablate, synth.
#include "dmn/ablation.hpp"
#include "dmn/data.hpp"
#include "dmn/model.hpp"
#include "dmn/serialize.hpp"
#include "dmn/synth.hpp"
#include "dmn/train.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>

namespace fs = std::filesystem;
using namespace dmn;

namespace {

std::vector<MultiChoiceExample> load_examples(const std::string& path, const std::string& format) {
  IngestStats stats;
  std::vector<MultiChoiceExample> out;
  if (format == "race")
    out = read_race_dir(path, &stats, &std::cerr);
  else if (format == "jsonl")
    out = read_jsonl(path, &stats, &std::cerr);
  else
    throw std::invalid_argument("unknown data format '" + format + "'");
  std::cerr << "loaded " << stats.examples << " examples from " << path;
  if (stats.skipped_files) std::cerr << " (" << stats.skipped_files << " files skipped)";
  if (stats.skipped_lines) std::cerr << " (" << stats.skipped_lines << " lines skipped)";
  if (stats.rejected_examples) std::cerr << " (" << stats.rejected_examples << " examples rejected)";
  std::cerr << '\n';
  if (format == "race")
    for (const auto& [subset, count] : stats.per_subset)
      std::cerr << "  subset " << subset << ": " << count << " examples\n";
  return out;
}

Vocabulary vocab_over(std::span<const MultiChoiceExample> examples) {
  std::vector<std::string> texts;
  for (const MultiChoiceExample& ex : examples) {
    texts.push_back(ex.passage);
    texts.push_back(ex.question);
    for (const std::string& c : ex.candidates) texts.push_back(c);
  }
  return Vocabulary::build(texts);
}

// Deterministic 90/10 split for inputs that arrive as a single pool.
void split_train_dev(std::vector<MultiChoiceExample> all, std::uint64_t seed,
                     std::vector<MultiChoiceExample>& train_out,
                     std::vector<MultiChoiceExample>& dev_out) {
  std::mt19937_64 rng(seed);
  std::shuffle(all.begin(), all.end(), rng);
  const std::size_t dev_count = std::max<std::size_t>(1, all.size() / 10);
  dev_out.assign(all.end() - static_cast<std::ptrdiff_t>(dev_count), all.end());
  train_out.assign(all.begin(), all.end() - static_cast<std::ptrdiff_t>(dev_count));
}

struct CommonModelFlags {
  int hidden = 32;
  int max_len = 64;
  std::string attention = "dual";
  std::string fusion = "gated";
  std::string direction = "bi";
  bool no_qa_pair = false;
  std::string encoder = "lookup";

  ModelConfig to_config(Scalar dropout) const {
    ModelConfig cfg;
    cfg.hidden = hidden;
    cfg.max_seq_len = max_len;
    cfg.encoder = encoder_from_string(encoder);
    cfg.match.attention = attention_from_string(attention);
    cfg.match.fusion = fusion_from_string(fusion);
    cfg.match.direction = direction_from_string(direction);
    cfg.match.use_qa_pair = !no_qa_pair;
    cfg.match.matching_dropout = dropout;
    cfg.validate();
    return cfg;
  }
};

void add_model_flags(CLI::App& cmd, CommonModelFlags& flags) {
  cmd.add_option("--hidden", flags.hidden, "hidden size l");
  cmd.add_option("--max-len", flags.max_len, "max sequence length");
  cmd.add_option("--attention", flags.attention, "attention normalization: dual|literal");
  cmd.add_option("--fusion", flags.fusion, "fusion: gated|concat");
  cmd.add_option("--direction", flags.direction, "matching direction: bi|uni");
  cmd.add_flag("--no-qa-pair", flags.no_qa_pair, "drop the question-answer matching pair");
  cmd.add_option("--encoder", flags.encoder, "encoder: lookup|precomputed");
}

void add_synth_flags(CLI::App& cmd, SynthTaskSpec& spec) {
  cmd.add_option("--vocab", spec.vocab_size, "synthetic vocabulary size");
  cmd.add_option("--candidates", spec.num_candidates, "candidates per example");
  cmd.add_option("--passage-len", spec.passage_len, "passage length in tokens");
  cmd.add_option("--answer-len", spec.answer_len, "candidate length in tokens");
  cmd.add_option("--overlap", spec.distractor_overlap, "distractor/passage token overlap [0,1]");
  cmd.add_option("--train-size", spec.train_size, "training split size");
  cmd.add_option("--dev-size", spec.dev_size, "dev split size");
  cmd.add_option("--test-size", spec.test_size, "test split size");
}

int cmd_train(const std::string& data, const std::string& format, const std::string& dev_path,
              const CommonModelFlags& flags, const TrainConfig& tcfg,
              const SynthTaskSpec& synth_spec, const std::string& embeddings_path,
              const std::string& out_path) {
  std::vector<MultiChoiceExample> train_set, dev_set;
  if (format == "synth") {
    SynthTaskSpec spec = synth_spec;
    spec.seed = tcfg.seed;
    SynthDatasets data_sets = generate_synthetic(spec);
    train_set = std::move(data_sets.train);
    dev_set = std::move(data_sets.dev);
  } else {
    if (data.empty()) throw std::invalid_argument("--data is required for format " + format);
    if (format == "race" && fs::is_directory(fs::path(data) / "train") &&
        fs::is_directory(fs::path(data) / "dev")) {
      train_set = load_examples((fs::path(data) / "train").string(), format);
      dev_set = load_examples((fs::path(data) / "dev").string(), format);
    } else if (!dev_path.empty()) {
      train_set = load_examples(data, format);
      dev_set = load_examples(dev_path, format);
    } else {
      split_train_dev(load_examples(data, format), tcfg.seed, train_set, dev_set);
      std::cerr << "split: " << train_set.size() << " train / " << dev_set.size() << " dev\n";
    }
  }

  const ModelConfig mcfg = flags.to_config(tcfg.matching_dropout);
  PrecomputedEmbeddings pre;
  const PrecomputedEmbeddings* pre_ptr = nullptr;
  Vocabulary vocab;
  if (mcfg.encoder == EncoderKind::lookup) {
    std::vector<MultiChoiceExample> all = train_set;
    all.insert(all.end(), dev_set.begin(), dev_set.end());
    vocab = vocab_over(all);
  } else {
    if (embeddings_path.empty())
      throw std::invalid_argument("--embeddings is required for the precomputed encoder");
    pre = PrecomputedEmbeddings::load(embeddings_path);
    pre_ptr = &pre;
  }

  Model model = init_model(mcfg, vocab, tcfg.seed);
  OptimizerState opt;
  const TrainResult result = train(model, train_set, dev_set, tcfg, &std::cout, pre_ptr, &opt);
  std::cout << "best_epoch=" << result.best_epoch
            << " best_dev_acc=" << result.best_dev_accuracy << '\n';

  if (!out_path.empty()) {
    save_model(model, out_path, &opt);
    std::cout << "saved model to " << out_path << '\n';
  }
  return 0;
}

int cmd_eval(const std::string& model_path, const std::string& data, const std::string& format,
             const std::string& embeddings_path) {
  const ModelBundle bundle = load_model(model_path);
  const std::vector<MultiChoiceExample> examples = load_examples(data, format);
  PrecomputedEmbeddings pre;
  const PrecomputedEmbeddings* pre_ptr = nullptr;
  if (bundle.model.config.encoder == EncoderKind::precomputed) {
    if (embeddings_path.empty())
      throw std::invalid_argument("--embeddings is required for the precomputed encoder");
    pre = PrecomputedEmbeddings::load(embeddings_path);
    pre_ptr = &pre;
  }
  const EvalResult result = evaluate(bundle.model, examples, pre_ptr);
  int correct = 0;
  for (std::size_t i = 0; i < examples.size(); ++i)
    if (result.predictions[i] == examples[i].gold) ++correct;
  std::cout << "examples=" << examples.size() << " correct=" << correct
            << " accuracy=" << result.accuracy << '\n';
  return 0;
}

int cmd_gradcheck(int hidden, std::uint64_t seed, Scalar tol, Scalar step) {
  SynthTaskSpec spec;
  spec.vocab_size = 32;
  spec.passage_len = 6;
  spec.answer_len = 3;
  spec.train_size = 1;
  spec.dev_size = 1;
  spec.test_size = 0;
  spec.seed = seed;
  const SynthDatasets data = generate_synthetic(spec);
  const MultiChoiceExample& ex = data.train.front();

  ModelConfig cfg;
  cfg.hidden = hidden;
  cfg.max_seq_len = 64;
  Model model = init_model(cfg, vocab_over(data.train), seed);

  const GradReport report = model_gradient_check(model, ex, step, tol);
  for (const GroupErrorStat& group : report.groups)
    std::cout << "group " << group.name << ": max_rel_error=" << group.max_rel_error << '\n';
  std::cout << "max_rel_error=" << report.max_rel_error << " tolerance=" << report.tolerance
            << " worst=" << report.worst << " pass=" << (report.pass ? "yes" : "no") << '\n';
  return report.pass ? 0 : 1;
}

int cmd_ablate(const std::string& data, const std::string& format, int seeds,
               const CommonModelFlags& flags, const TrainConfig& tcfg,
               const SynthTaskSpec& synth_spec, const std::string& json_out) {
  std::vector<MultiChoiceExample> train_set, dev_set;
  if (format == "synth") {
    SynthTaskSpec spec = synth_spec;
    spec.seed = tcfg.seed;
    SynthDatasets data_sets = generate_synthetic(spec);
    train_set = std::move(data_sets.train);
    dev_set = std::move(data_sets.dev);
  } else {
    if (data.empty()) throw std::invalid_argument("--data is required for format " + format);
    split_train_dev(load_examples(data, format), tcfg.seed, train_set, dev_set);
  }
  const ModelConfig mcfg = flags.to_config(tcfg.matching_dropout);
  const AblationReport report =
      run_ablation_suite(mcfg, tcfg, train_set, dev_set, seeds, &std::cerr);
  std::cout << format_ablation_text(report);
  if (!json_out.empty()) {
    std::ofstream out(json_out);
    out << format_ablation_json(report) << '\n';
    if (!out) throw std::runtime_error("cannot write " + json_out);
    std::cout << "wrote " << json_out << '\n';
  }
  return 0;
}

int cmd_synth(const SynthTaskSpec& spec, const std::string& out_dir) {
  const SynthDatasets data = generate_synthetic(spec);
  fs::create_directories(out_dir);
  write_jsonl((fs::path(out_dir) / "train.jsonl").string(), data.train);
  write_jsonl((fs::path(out_dir) / "dev.jsonl").string(), data.dev);
  write_jsonl((fs::path(out_dir) / "test.jsonl").string(), data.test);
  std::cout << "wrote " << data.train.size() << "/" << data.dev.size() << "/" << data.test.size()
            << " examples to " << out_dir << '\n';
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"dual co-matching network for multi-choice reading comprehension"};
  app.require_subcommand(1);

  std::string data, format = "jsonl", dev_path, embeddings_path, model_path, out_path;
  CommonModelFlags flags;
  TrainConfig tcfg;
  SynthTaskSpec synth_spec;
  int seeds = 5;
  int gc_hidden = 8;
  std::uint64_t gc_seed = 1;
  Scalar gc_tol = 1e-4, gc_step = 1e-5;

  CLI::App* train_cmd = app.add_subcommand("train", "train a model");
  train_cmd->add_option("--data", data, "dataset path (directory for race, file for jsonl)");
  train_cmd->add_option("--format", format, "data format: race|jsonl|synth");
  train_cmd->add_option("--dev", dev_path, "held-out dev file (jsonl); default 90/10 split");
  train_cmd->add_option("--lr", tcfg.learning_rate, "learning rate");
  train_cmd->add_option("--epochs", tcfg.epochs, "training epochs");
  train_cmd->add_option("--batch", tcfg.batch_size, "batch size");
  train_cmd->add_option("--seed", tcfg.seed, "random seed");
  train_cmd->add_option("--warmup", tcfg.warmup_fraction, "warmup fraction of total steps");
  train_cmd->add_option("--clip", tcfg.gradient_clip_norm, "gradient clip norm (0 disables)");
  train_cmd->add_option("--dropout-match", tcfg.matching_dropout, "matching-layer dropout");
  train_cmd->add_option("--embeddings", embeddings_path, "precomputed embeddings path");
  train_cmd->add_option("--out", out_path, "output model path");
  add_model_flags(*train_cmd, flags);
  add_synth_flags(*train_cmd, synth_spec);

  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a saved model");
  eval_cmd->add_option("--model", model_path, "model path")->required();
  eval_cmd->add_option("--data", data, "dataset path")->required();
  eval_cmd->add_option("--format", format, "data format: race|jsonl");
  eval_cmd->add_option("--embeddings", embeddings_path, "precomputed embeddings path");

  CLI::App* gradcheck_cmd = app.add_subcommand("gradcheck", "finite-difference gradient check");
  gradcheck_cmd->add_option("--hidden", gc_hidden, "hidden size l");
  gradcheck_cmd->add_option("--seed", gc_seed, "random seed");
  gradcheck_cmd->add_option("--tol", gc_tol, "max relative error tolerance");
  gradcheck_cmd->add_option("--step", gc_step, "finite-difference step h");

  CLI::App* ablate_cmd = app.add_subcommand("ablate", "run the ablation suite");
  ablate_cmd->add_option("--data", data, "dataset path (omit with --format synth)");
  ablate_cmd->add_option("--format", format, "data format: race|jsonl|synth");
  ablate_cmd->add_option("--seeds", seeds, "seeds per variant");
  ablate_cmd->add_option("--lr", tcfg.learning_rate, "learning rate");
  ablate_cmd->add_option("--epochs", tcfg.epochs, "training epochs");
  ablate_cmd->add_option("--batch", tcfg.batch_size, "batch size");
  ablate_cmd->add_option("--seed", tcfg.seed, "base random seed");
  ablate_cmd->add_option("--dropout-match", tcfg.matching_dropout, "matching-layer dropout");
  ablate_cmd->add_option("--out", out_path, "JSON report path");
  add_model_flags(*ablate_cmd, flags);
  add_synth_flags(*ablate_cmd, synth_spec);

  CLI::App* synth_cmd = app.add_subcommand("synth", "generate a synthetic dataset");
  synth_cmd->add_option("--seed", synth_spec.seed, "random seed");
  synth_cmd->add_option("--out", out_path, "output directory")->required();
  add_synth_flags(*synth_cmd, synth_spec);

  CLI11_PARSE(app, argc, argv);

  try {
    if (train_cmd->parsed())
      return cmd_train(data, format, dev_path, flags, tcfg, synth_spec, embeddings_path, out_path);
    if (eval_cmd->parsed()) return cmd_eval(model_path, data, format, embeddings_path);
    if (gradcheck_cmd->parsed()) return cmd_gradcheck(gc_hidden, gc_seed, gc_tol, gc_step);
    if (ablate_cmd->parsed()) return cmd_ablate(data, format, seeds, flags, tcfg, synth_spec, out_path);
    if (synth_cmd->parsed()) return cmd_synth(synth_spec, out_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
