#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "sgim/audio/waveform.h"
#include "sgim/data/catalog.h"
#include "sgim/errors.h"
#include "sgim/gen/render.h"
#include "sgim/io/checkpoint.h"
#include "sgim/io/config.h"
#include "sgim/io/ppm.h"
#include "sgim/pipeline.h"
#include "sgim/seed.h"

using namespace sgim;
namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kUsage = 1, kIo = 2, kNumerical = 3 };

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  std::string data;
  std::string checkpoint;
  std::string task;
  std::string audio;
  std::optional<std::size_t> guide_class;
  std::string text;
  std::optional<std::size_t> split;
  std::optional<std::uint64_t> source_seed;
  std::optional<std::size_t> source_class;
};

class UsageError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

io::Config load_config(const Options& o) {
  auto cfg = o.config.empty() ? io::Config{} : io::Config::load(o.config);
  if (o.seed) cfg.set_seed(*o.seed);
  return cfg;
}

std::string header(const std::string& command, const io::Config& cfg) {
  std::string h = "# sgim " + command + "\n";
  std::istringstream lines(cfg.serialize());
  for (std::string line; std::getline(lines, line);) h += "# " + line + "\n";
  return h;
}

fs::path out_dir(const Options& o) {
  std::error_code ec;
  fs::create_directories(o.out, ec);
  if (ec) throw IoError("cannot create " + o.out + ": " + ec.message());
  return o.out;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path.string());
  return f;
}

std::vector<data::Example> examples_for(const Options& o, const io::Config& cfg) {
  if (!o.data.empty()) return pipeline::load_dataset(o.data, cfg.data);
  return data::synth_dataset(cfg.data, cfg.seed);
}

void require_class(std::size_t k, const io::Config& cfg) {
  if (k >= cfg.data.classes) {
    throw UsageError("class " + std::to_string(k) + " out of range [0, " + std::to_string(cfg.data.classes) + ")");
  }
}

model::Embedding audio_target(const Options& o, const io::Config& cfg, const pipeline::Models& m,
                              std::uint64_t source_seed) {
  if (!o.audio.empty()) {
    if (!fs::exists(o.audio)) throw IoError("audio file " + o.audio + " not found");
    return model::embed_audio(audio::log_mel(audio::load_wav(o.audio), cfg.data.mel), m.encoders);
  }
  require_class(*o.guide_class, cfg);
  const auto ex = data::synth_example(*o.guide_class, derive_seed(source_seed, 2), cfg.data);
  return model::embed_audio(ex.mel, m.encoders);
}

struct Source {
  std::uint64_t seed;
  std::size_t class_id;
  ad::Tensor w;
};

Source source_for(const Options& o, const io::Config& cfg, const pipeline::Models& m) {
  Source s;
  s.seed = o.source_seed.value_or(cfg.seed);
  s.class_id = o.source_class.value_or(s.seed % cfg.data.classes);
  require_class(s.class_id, cfg);
  s.w = pipeline::source_code(m.generator, s.class_id, derive_seed(s.seed, 1));
  return s;
}

int cmd_synth_data(const Options& o) {
  const auto cfg = load_config(o);
  const auto dir = out_dir(o);
  const auto examples = data::synth_dataset(cfg.data, cfg.seed);
  pipeline::write_dataset(dir, examples, header("synth-data", cfg) + "# stem class seed\n");
  std::printf("wrote %zu items to %s\n", examples.size(), dir.c_str());
  return kOk;
}

int cmd_train_embed(const Options& o) {
  const auto cfg = load_config(o);
  const auto examples = pipeline::load_dataset(o.data, cfg.data);
  const auto dir = out_dir(o);
  auto log = open_out(dir / "train_log.txt");
  log << header("train-embed", cfg) << "# step total audio_image audio_text self lr\n";
  const auto run = pipeline::train_embedding(cfg, examples, [&](const train::StepLog& s) {
    log << train::format_log_line(s) << "\n";
  });
  pipeline::save_encoders(dir, run.result.state.params, run.result.state.tau(), run.vocab);
  const double final_loss = run.result.trace.empty() ? 0.0 : run.result.trace.back().loss;
  std::printf("trained %zu steps on %zu items, final loss %.6f, tau %.6f\n", cfg.train.steps,
              run.split.train.size(), final_loss, run.result.state.tau());
  return kOk;
}

int cmd_train_gen(const Options& o) {
  const auto cfg = load_config(o);
  const auto dir = out_dir(o);
  auto log = open_out(dir / "pretrain_log.txt");
  log << header("train-gen", cfg) << "# step loss\n";
  const auto r = gen::pretrain_generator(cfg.generator, cfg.pretrain, [&](std::size_t step, double loss) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%zu %.6f\n", step, loss);
    log << buf;
  });
  pipeline::save_generator(dir, r.generator);
  std::printf("generator reconstruction mse %.6f\n", r.final_mse);
  return kOk;
}

void write_gates(const fs::path& path, const std::string& head, const std::vector<float>& gate) {
  auto f = open_out(path);
  f << head << "# layer gate\n";
  char buf[64];
  for (std::size_t l = 0; l < gate.size(); ++l) {
    std::snprintf(buf, sizeof buf, "%zu %.6f\n", l, gate[l]);
    f << buf;
  }
}

int cmd_manipulate(const Options& o) {
  const auto cfg = load_config(o);
  const auto m = pipeline::load_models(o.checkpoint);
  const auto src = source_for(o, cfg, m);
  const auto target = o.text.empty() ? audio_target(o, cfg, m, src.seed)
                                     : model::embed_text(text::tokenize(o.text), m.vocab, m.encoders);
  const auto r = manip::optimize_latent(src.w, target, cfg.manip, m.generator, m.encoders);
  const auto dir = out_dir(o);
  const auto head = header("manipulate", cfg) + "# source_seed " + std::to_string(src.seed) +
                    " source_class " + std::to_string(src.class_id) + "\n";
  io::write_ppm(dir / "source.ppm", gen::generate_image(src.w, m.generator));
  io::write_ppm(dir / "manipulated.ppm", gen::generate_image(r.w_a, m.generator));
  write_gates(dir / "gates.txt", head, r.gate);
  auto trace = open_out(dir / "trace.txt");
  trace << head << "# step total cosine identity penalty\n";
  for (const auto& row : r.trace) trace << manip::format_trace_row(row) << "\n";
  io::Checkpoint codes;
  codes.put("w_s", src.w);
  codes.put("w_a", r.w_a);
  codes.save(dir / "codes.sgim");
  std::printf("cosine distance %.6f -> %.6f\n", r.trace.front().cosine, r.trace.back().cosine);
  return kOk;
}

int cmd_mix(const Options& o) {
  const auto cfg = load_config(o);
  const auto m = pipeline::load_models(o.checkpoint);
  const auto layers = m.generator.config.layers;
  const auto split = o.split.value_or(cfg.mix_split ? cfg.mix_split : manip::default_split(layers));
  if (split == 0 || split >= layers) {
    throw ContractError("split must lie in [1, " + std::to_string(layers - 1) + "], got " + std::to_string(split));
  }
  const auto src = source_for(o, cfg, m);
  const auto a = audio_target(o, cfg, m, src.seed);
  const auto t = model::embed_text(text::tokenize(o.text), m.vocab, m.encoders);
  const auto ra = manip::optimize_latent(src.w, a, cfg.manip, m.generator, m.encoders);
  const auto rt = manip::optimize_latent(src.w, t, cfg.manip, m.generator, m.encoders);
  const auto mixed = manip::style_mix(ra.w_a, rt.w_a, split);
  const auto dir = out_dir(o);
  io::write_ppm(dir / "source.ppm", gen::generate_image(src.w, m.generator));
  io::write_ppm(dir / "audio.ppm", gen::generate_image(ra.w_a, m.generator));
  io::write_ppm(dir / "text.ppm", gen::generate_image(rt.w_a, m.generator));
  io::write_ppm(dir / "mixed.ppm", gen::generate_image(mixed, m.generator));
  auto report = open_out(dir / "mix.txt");
  report << header("mix", cfg) << "# source_seed " << src.seed << " source_class " << src.class_id << "\n"
         << "split " << split << "\n"
         << "audio rows 0-" << split - 1 << "\n"
         << "text rows " << split << "-" << layers - 1 << "\n";
  std::printf("mixed at split %zu of %zu layers\n", split, layers);
  return kOk;
}

int cmd_eval(const Options& o) {
  const auto cfg = load_config(o);
  const bool needs_generator = o.task == "semantic" || o.task == "direction";
  const auto m = pipeline::load_models(o.checkpoint, needs_generator);
  eval::EvalReport report;
  if (o.task == "zeroshot" || o.task == "probe") {
    const auto examples = examples_for(o, cfg);
    const auto split = data::split_indices(examples.size(), cfg.seed, cfg.eval.train_fraction);
    if (o.task == "zeroshot") {
      std::vector<audio::MelSpectrogram> mels;
      std::vector<std::size_t> labels;
      for (std::size_t i : split.test) {
        mels.push_back(examples[i].mel);
        labels.push_back(examples[i].class_id);
      }
      report = eval::zero_shot_classify(mels, labels, data::class_prompts(cfg.data.classes), m.encoders, m.vocab);
    } else {
      std::vector<model::Embedding> x;
      std::vector<std::size_t> labels;
      for (const auto& ex : examples) {
        x.push_back(model::embed_audio(ex.mel, m.encoders));
        labels.push_back(ex.class_id);
      }
      report = eval::linear_probe(x, labels, split, cfg.eval.probe_steps, cfg.eval.probe_lr);
    }
  } else if (o.task == "semantic") {
    report = pipeline::semantic_suite(cfg, m);
  } else {
    report = pipeline::direction_suite(cfg, m);
  }
  report.task = o.task;
  report.seed = cfg.seed;
  const auto dir = out_dir(o);
  const auto text = report.to_text();
  open_out(dir / (o.task + ".txt")) << header("eval", cfg) << text;
  std::cout << text;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sound-guided image manipulation toolkit"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "key = value configuration file")->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "global seed, overrides the config");
    sub->add_option("--out", o.out, "output directory");
  };
  auto guidance = [&](CLI::App* sub) {
    auto* audio = sub->add_option("--audio", o.audio, "guiding WAV file");
    auto* cls = sub->add_option("--class", o.guide_class, "synthesize guiding audio of this class");
    audio->excludes(cls);
    sub->add_option("--source-seed", o.source_seed, "seed of the source code (default: global seed)");
    sub->add_option("--source-class", o.source_class, "class of the source code (default: seed mod classes)");
    sub->add_option("--checkpoint", o.checkpoint, "model directory")->required();
    return std::pair{audio, cls};
  };

  auto* synth = app.add_subcommand("synth-data", "write a synthetic audio/text/image dataset");
  common(synth);

  auto* embed = app.add_subcommand("train-embed", "train the audio, text and image encoders");
  common(embed);
  embed->add_option("--data", o.data, "dataset directory from synth-data")->required();

  auto* train_gen = app.add_subcommand("train-gen", "pretrain the image generator");
  common(train_gen);

  auto* manipulate = app.add_subcommand("manipulate", "optimize a latent code toward audio or text");
  common(manipulate);
  {
    auto [audio, cls] = guidance(manipulate);
    auto* text = manipulate->add_option("--text", o.text, "guiding text");
    text->excludes(audio)->excludes(cls);
    manipulate->callback([&, audio, cls, text] {
      if (audio->count() + cls->count() + text->count() == 0) {
        throw CLI::RequiredError("one of --audio, --class or --text");
      }
    });
  }

  auto* mix = app.add_subcommand("mix", "mix audio-guided and text-guided codes by layer");
  common(mix);
  {
    auto [audio, cls] = guidance(mix);
    mix->add_option("--text", o.text, "guiding text")->required();
    mix->add_option("--split", o.split, "first layer taken from the text-guided code");
    mix->callback([&, audio, cls] {
      if (audio->count() + cls->count() == 0) throw CLI::RequiredError("--audio or --class");
    });
  }

  auto* evaluate = app.add_subcommand("eval", "run an evaluation protocol");
  common(evaluate);
  evaluate->add_option("--checkpoint", o.checkpoint, "model directory")->required();
  evaluate->add_option("--task", o.task, "zeroshot, probe, semantic or direction")
      ->required()
      ->check(CLI::IsMember({"zeroshot", "probe", "semantic", "direction"}));
  evaluate->add_option("--data", o.data, "dataset directory (default: synthesize from the config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*synth) return cmd_synth_data(o);
    if (*embed) return cmd_train_embed(o);
    if (*train_gen) return cmd_train_gen(o);
    if (*manipulate) return cmd_manipulate(o);
    if (*mix) return cmd_mix(o);
    return cmd_eval(o);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ContractError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return kIo;
  } catch (const ConvergenceError& e) {
    std::cerr << "numerical error: " << e.what() << " (final value " << e.final_value() << ")\n";
    return kNumerical;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kNumerical;
  }
}
