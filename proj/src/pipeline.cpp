#include "sgim/pipeline.h"

#include <fstream>
#include <sstream>

#include "sgim/audio/waveform.h"
#include "sgim/data/catalog.h"
#include "sgim/errors.h"
#include "sgim/gen/render.h"
#include "sgim/io/model_io.h"
#include "sgim/io/ppm.h"
#include "sgim/seed.h"

namespace sgim::pipeline {

namespace fs = std::filesystem;

namespace {

std::string stem_for(const data::Example& ex, std::size_t index) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "c%zu_%05zu", ex.class_id, index);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string join(const text::TokenSequence& tokens) {
  std::string s;
  for (const auto& t : tokens) s += (s.empty() ? "" : " ") + t;
  return s;
}

}  // namespace

void write_dataset(const fs::path& dir, const std::vector<data::Example>& examples,
                   const std::string& header) {
  std::error_code ec;
  for (const char* sub : {"audio", "text", "images"}) {
    fs::create_directories(dir / sub, ec);
    if (ec) throw IoError("cannot create " + (dir / sub).string() + ": " + ec.message());
  }
  std::string manifest = header;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const auto& ex = examples[i];
    const auto stem = stem_for(ex, i);
    audio::write_wav(dir / "audio" / (stem + ".wav"), ex.wave);
    write_text(dir / "text" / (stem + ".txt"), join(ex.caption) + "\n");
    io::write_ppm(dir / "images" / (stem + ".ppm"), ex.image);
    manifest += stem + " " + std::to_string(ex.class_id) + " " + std::to_string(ex.seed) + "\n";
  }
  write_text(dir / "manifest.txt", manifest);
}

std::vector<data::Example> load_dataset(const fs::path& dir, const data::DatasetConfig& cfg) {
  if (!fs::is_directory(dir)) throw IoError("dataset directory " + dir.string() + " not found");
  std::istringstream lines(read_text(dir / "manifest.txt"));
  std::vector<data::Example> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string stem;
    data::Example ex;
    if (!(fields >> stem >> ex.class_id >> ex.seed)) {
      throw FormatError("manifest line " + std::to_string(line_no) + ": expected `stem class seed`");
    }
    if (ex.class_id >= cfg.classes) {
      throw FormatError("manifest line " + std::to_string(line_no) + ": class out of range");
    }
    ex.wave = audio::load_wav(dir / "audio" / (stem + ".wav"));
    ex.mel = audio::log_mel(ex.wave, cfg.mel);
    ex.caption = text::tokenize(read_text(dir / "text" / (stem + ".txt")));
    ex.image = io::read_ppm(dir / "images" / (stem + ".ppm"));
    if (ex.image.height != cfg.image_size || ex.image.width != cfg.image_size || ex.image.channels != 3) {
      throw FormatError(stem + ".ppm: expected a " + std::to_string(cfg.image_size) + "-pixel square RGB image");
    }
    out.push_back(std::move(ex));
  }
  if (out.empty()) throw FormatError("manifest lists no items");
  return out;
}

text::SynonymTable default_synonyms() { return text::SynonymTable::parse(data::default_synonym_table()); }

EmbeddingRun train_embedding(const io::Config& cfg, const std::vector<data::Example>& examples,
                             const std::function<void(const train::StepLog&)>& on_step) {
  const auto synonyms = default_synonyms();
  EmbeddingRun run{data::build_vocabulary(examples, synonyms),
                   data::split_indices(examples.size(), cfg.seed, cfg.eval.train_fraction),
                   {}};
  auto ecfg = cfg.encoder;
  ecfg.vocab_size = run.vocab.size();
  const auto init = model::Encoders::init(ecfg, derive_seed(cfg.seed, 11));
  run.result = train::train_encoders(examples, run.split.train, init, cfg.train, synonyms, run.vocab, on_step);
  return run;
}

void save_encoders(const fs::path& dir, const model::Encoders& e, double tau,
                   const text::Vocabulary& vocab) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  io::encoders_to_checkpoint(e, tau).save(dir / "encoders.sgim");
  io::save_vocabulary(dir / "vocab.txt", vocab);
}

void save_generator(const fs::path& dir, const gen::Generator& g) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  io::generator_to_checkpoint(g).save(dir / "generator.sgim");
}

Models load_models(const fs::path& dir, bool with_generator) {
  Models m;
  m.encoders = io::encoders_from_checkpoint(io::Checkpoint::load(dir / "encoders.sgim"), &m.tau);
  m.vocab = io::load_vocabulary(dir / "vocab.txt");
  if (m.encoders.config.vocab_size != m.vocab.size()) {
    throw FormatError("vocab.txt does not match the text encoder");
  }
  if (!with_generator) return m;
  m.generator = io::generator_from_checkpoint(io::Checkpoint::load(dir / "generator.sgim"));
  if (m.encoders.config.image_size != m.generator.config.image_size) {
    throw FormatError("encoder and generator image sizes differ");
  }
  return m;
}

ad::Tensor source_code(const gen::Generator& g, std::size_t class_id, std::uint64_t seed) {
  return gen::map_latent(class_id, gen::latent_noise(seed, g.config.noise_dim), g);
}

std::vector<RunSpec> run_suite(std::size_t classes, std::size_t runs_per_class, std::uint64_t seed) {
  if (classes < 2) throw ContractError("run suite needs at least two classes");
  std::vector<RunSpec> runs;
  for (std::size_t c = 0; c < classes; ++c) {
    for (std::size_t r = 0; r < runs_per_class; ++r) {
      const auto s = derive_seed(seed, c, r);
      runs.push_back({c, (c + 1 + s % (classes - 1)) % classes, s});
    }
  }
  return runs;
}

ad::Tensor run_source(const gen::Generator& g, const RunSpec& run) {
  return source_code(g, run.source_class, derive_seed(run.seed, 1));
}

data::Example run_guidance(const RunSpec& run, const data::DatasetConfig& cfg) {
  return data::synth_example(run.guide_class, derive_seed(run.seed, 2), cfg);
}

eval::LinearProbe fit_image_probe(const gen::Generator& g, const model::Encoders& e,
                                  std::size_t per_class, const io::EvalConfig& cfg,
                                  std::uint64_t seed) {
  std::vector<model::Embedding> x;
  std::vector<std::size_t> y;
  for (std::size_t k = 0; k < g.config.classes; ++k) {
    for (std::size_t i = 0; i < per_class; ++i) {
      x.push_back(model::embed_image(gen::generate_image(source_code(g, k, derive_seed(seed, k, i)), g), e));
      y.push_back(k);
    }
  }
  return eval::fit_linear_probe(x, y, cfg.probe_steps, cfg.probe_lr);
}

eval::EvalReport semantic_suite(const io::Config& cfg, const Models& m,
                                const std::function<void(const SuiteRun&)>& on_run) {
  const auto probe = fit_image_probe(m.generator, m.encoders, 50, cfg.eval, derive_seed(cfg.seed, 77));
  std::vector<model::Embedding> outputs;
  std::vector<std::size_t> guides;
  for (const auto& spec : run_suite(cfg.data.classes, cfg.eval.runs_per_class, derive_seed(cfg.manip.seed, 5))) {
    SuiteRun run{spec, run_source(m.generator, spec), {}};
    const auto target = model::embed_audio(run_guidance(spec, cfg.data).mel, m.encoders);
    run.result = manip::optimize_latent(run.w_s, target, cfg.manip, m.generator, m.encoders);
    outputs.push_back(model::embed_image(gen::generate_image(run.result.w_a, m.generator), m.encoders));
    guides.push_back(spec.guide_class);
    if (on_run) on_run(run);
  }
  auto report = eval::semantic_manip_accuracy(outputs, guides, probe);
  report.seed = cfg.seed;
  return report;
}

eval::EvalReport direction_suite(const io::Config& cfg, const Models& m) {
  const auto classes = cfg.data.classes;
  const auto per_class = (cfg.eval.direction_pairs + classes - 1) / classes;
  auto runs = run_suite(classes, per_class, derive_seed(cfg.manip.seed, 6));
  runs.resize(cfg.eval.direction_pairs);
  const auto prompts = data::class_prompts(classes);
  std::vector<std::vector<float>> sources, by_audio, by_text;
  for (const auto& spec : runs) {
    const auto w_s = run_source(m.generator, spec);
    const auto a = model::embed_audio(run_guidance(spec, cfg.data).mel, m.encoders);
    const auto t = model::embed_text(text::tokenize(prompts[spec.guide_class]), m.vocab, m.encoders);
    const auto ra = manip::optimize_latent(w_s, a, cfg.manip, m.generator, m.encoders);
    const auto rt = manip::optimize_latent(w_s, t, cfg.manip, m.generator, m.encoders);
    sources.emplace_back(w_s.data().begin(), w_s.data().end());
    by_audio.emplace_back(ra.w_a.data().begin(), ra.w_a.data().end());
    by_text.emplace_back(rt.w_a.data().begin(), rt.w_a.data().end());
  }
  auto report = eval::direction_stats(sources, by_audio, by_text);
  report.seed = cfg.seed;
  return report;
}

}  // namespace sgim::pipeline
