#include "sgim/io/config.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace sgim::io {

namespace {

struct Field {
  std::string name;
  std::string help;
  std::function<void(Config&, const std::string&)> set;
  std::function<std::string(const Config&)> get;
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double parse_double(const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    throw ContractError("expected a number, got '" + v + "'");
  }
  if (used != v.size() || !std::isfinite(out)) throw ContractError("expected a number, got '" + v + "'");
  return out;
}

std::uint64_t parse_uint(const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ContractError("expected a nonnegative integer, got '" + v + "'");
  }
  return out;
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ContractError("expected true or false, got '" + v + "'");
}

// Shortest text that parses back to the same double.
template <typename F>
std::string fmt(F v) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

template <typename U>
Field uint_field(std::string name, std::string help, U Config::*group, std::size_t U::*member,
                 std::size_t lo, std::size_t hi) {
  return {name, help,
          [=](Config& c, const std::string& v) {
            const auto x = parse_uint(v);
            if (x < lo || x > hi) {
              throw ContractError("must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
            }
            (c.*group).*member = static_cast<std::size_t>(x);
          },
          [=](const Config& c) { return std::to_string((c.*group).*member); }};
}

template <typename U>
Field real_field(std::string name, std::string help, U Config::*group, double U::*member,
                 double lo, double hi) {
  return {name, help,
          [=](Config& c, const std::string& v) {
            const double x = parse_double(v);
            if (!(x >= lo && x <= hi)) throw ContractError("must lie in [" + fmt(lo) + ", " + fmt(hi) + "]");
            (c.*group).*member = x;
          },
          [=](const Config& c) { return fmt((c.*group).*member); }};
}

template <typename U>
Field bool_field(std::string name, std::string help, U Config::*group, bool U::*member) {
  return {name, help, [=](Config& c, const std::string& v) { (c.*group).*member = parse_bool(v); },
          [=](const Config& c) { return std::string((c.*group).*member ? "true" : "false"); }};
}

const std::vector<Field>& fields() {
  constexpr std::size_t big = 1u << 24;
  static const std::vector<Field> f = [] {
    std::vector<Field> v;
    v.push_back({"seed", "global seed",
                 [](Config& c, const std::string& s) { c.set_seed(parse_uint(s)); },
                 [](const Config& c) { return std::to_string(c.seed); }});
    using D = data::DatasetConfig;
    v.push_back(uint_field<D>("classes", "number of classes", &Config::data, &D::classes, 2, 8));
    v.push_back(uint_field<D>("per_class", "synthetic items per class", &Config::data, &D::per_class, 1, big));
    v.push_back(real_field<D>("duration", "clip length in seconds", &Config::data, &D::duration, 0.1, 60.0));
    v.push_back({"sample_rate", "audio sample rate in Hz",
                 [](Config& c, const std::string& s) {
                   const auto x = parse_uint(s);
                   if (x < 1000 || x > 192000) throw ContractError("must lie in [1000, 192000]");
                   c.data.mel.sample_rate = static_cast<int>(x);
                 },
                 [](const Config& c) { return std::to_string(c.data.mel.sample_rate); }});
    v.push_back({"window", "STFT window (power of two)",
                 [](Config& c, const std::string& s) {
                   const auto x = parse_uint(s);
                   if (x < 16 || x > 65536 || (x & (x - 1)) != 0) {
                     throw ContractError("must be a power of two in [16, 65536]");
                   }
                   c.data.mel.window = x;
                 },
                 [](const Config& c) { return std::to_string(c.data.mel.window); }});
    v.push_back({"hop", "STFT hop",
                 [](Config& c, const std::string& s) {
                   const auto x = parse_uint(s);
                   if (x < 1 || x > 65536) throw ContractError("must lie in [1, 65536]");
                   c.data.mel.hop = x;
                 },
                 [](const Config& c) { return std::to_string(c.data.mel.hop); }});
    v.push_back({"mel_bins", "mel filters",
                 [](Config& c, const std::string& s) {
                   const auto x = parse_uint(s);
                   if (x < 2 || x > 512) throw ContractError("must lie in [2, 512]");
                   c.data.mel.mel_bins = x;
                   c.encoder.mel_bins = x;
                 },
                 [](const Config& c) { return std::to_string(c.data.mel.mel_bins); }});
    v.push_back({"log_floor", "log-mel floor",
                 [](Config& c, const std::string& s) {
                   const double x = parse_double(s);
                   if (!(x > 0.0 && x < 1.0)) throw ContractError("must lie in (0, 1)");
                   c.data.mel.log_floor = static_cast<float>(x);
                 },
                 [](const Config& c) { return fmt(c.data.mel.log_floor); }});
    using E = model::EncoderConfig;
    v.push_back(uint_field<E>("embed_dim", "shared embedding size", &Config::encoder, &E::embed_dim, 2, 4096));
    v.push_back(uint_field<E>("hidden", "encoder hidden width", &Config::encoder, &E::hidden, 1, 8192));
    using T = train::TrainConfig;
    v.push_back(uint_field<T>("batch", "contrastive batch size", &Config::train, &T::batch, 2, 100000));
    v.push_back(uint_field<T>("steps", "contrastive training steps", &Config::train, &T::steps, 0, big));
    v.push_back(uint_field<T>("cycle", "learning-rate cycle length", &Config::train, &T::cycle, 1, big));
    v.push_back(real_field<T>("lr_max", "peak learning rate", &Config::train, &T::lr_max, 0.0, 10.0));
    v.push_back(real_field<T>("lr_min", "floor learning rate", &Config::train, &T::lr_min, 0.0, 10.0));
    v.push_back(real_field<T>("momentum", "SGD momentum", &Config::train, &T::momentum, 0.0, 0.999));
    v.push_back(real_field<T>("weight_decay", "SGD weight decay", &Config::train, &T::weight_decay, 0.0, 1.0));
    v.push_back(real_field<T>("tau_init", "initial temperature", &Config::train, &T::tau_init, 0.01, 1.0));
    v.push_back(bool_field<T>("freeze_text_image", "freeze text and image encoders after warm-up",
                              &Config::train, &T::freeze_text_image));
    v.push_back(uint_field<T>("freeze_warmup", "steps before freezing", &Config::train, &T::freeze_warmup, 0, big));
    v.push_back(bool_field<T>("use_self_loss", "include the audio self-supervised term",
                              &Config::train, &T::use_self_loss));
    v.push_back(real_field<T>("freq_mask", "frequency mask ratio", &Config::train, &T::freq_mask, 0.0, 0.99));
    v.push_back(real_field<T>("time_mask", "time mask ratio", &Config::train, &T::time_mask, 0.0, 0.99));
    v.push_back(real_field<T>("text_aug_prob", "per-augmentation text probability", &Config::train,
                              &T::text_aug_prob, 0.0, 1.0));
    using G = gen::GenConfig;
    v.push_back(uint_field<G>("layers", "latent layers L", &Config::generator, &G::layers, 2, 64));
    v.push_back(uint_field<G>("style_dim", "latent width D", &Config::generator, &G::style_dim, 1, 4096));
    v.push_back(uint_field<G>("units", "generator hidden units", &Config::generator, &G::units, 1, 4096));
    v.push_back({"image_size", "image height and width (multiple of 4)",
                 [](Config& c, const std::string& s) {
                   const auto x = parse_uint(s);
                   if (x < 4 || x > 1024 || x % 4 != 0) throw ContractError("must be a multiple of 4 in [4, 1024]");
                   c.generator.image_size = x;
                   c.encoder.image_size = x;
                   c.data.image_size = x;
                 },
                 [](const Config& c) { return std::to_string(c.generator.image_size); }});
    v.push_back(uint_field<G>("noise_dim", "mapping noise size", &Config::generator, &G::noise_dim, 3, 4096));
    v.push_back(uint_field<G>("mapping_hidden", "mapping hidden width", &Config::generator,
                              &G::mapping_hidden, 1, 4096));
    using P = gen::PretrainConfig;
    v.push_back(uint_field<P>("pretrain_steps", "generator pretraining steps", &Config::pretrain, &P::steps, 0, big));
    v.push_back(uint_field<P>("pretrain_batch", "generator pretraining batch", &Config::pretrain, &P::batch, 1, 100000));
    v.push_back(real_field<P>("pretrain_lr", "generator Adam learning rate", &Config::pretrain, &P::lr, 0.0, 1.0));
    v.push_back(real_field<P>("mse_threshold", "required reconstruction MSE", &Config::pretrain,
                              &P::mse_threshold, 0.0, 4.0));
    using M = manip::ManipConfig;
    v.push_back(real_field<M>("lambda_sim", "gated latent penalty weight", &Config::manip, &M::lambda_sim, 0.0, 1e9));
    v.push_back(real_field<M>("lambda_id", "identity loss weight", &Config::manip, &M::lambda_id, 0.0, 1e9));
    v.push_back(uint_field<M>("manip_steps", "latent optimization steps", &Config::manip, &M::steps, 1, big));
    v.push_back(real_field<M>("step_size", "latent optimization step", &Config::manip, &M::step_size, 0.0, 100.0));
    v.push_back(real_field<M>("gate_init", "initial raw gate value", &Config::manip, &M::gate_init, -50.0, 50.0));
    v.push_back({"mix_split", "style-mixing split layer (0 = half of L, rounded up)",
                 [](Config& c, const std::string& s) { c.mix_split = parse_uint(s); },
                 [](const Config& c) { return std::to_string(c.mix_split); }});
    using V = EvalConfig;
    v.push_back(uint_field<V>("probe_steps", "linear probe steps", &Config::eval, &V::probe_steps, 1, big));
    v.push_back(real_field<V>("probe_lr", "linear probe learning rate", &Config::eval, &V::probe_lr, 1e-9, 100.0));
    v.push_back(uint_field<V>("runs_per_class", "semantic-accuracy runs per class", &Config::eval,
                              &V::runs_per_class, 1, big));
    v.push_back(uint_field<V>("direction_pairs", "direction-statistics pairs", &Config::eval,
                              &V::direction_pairs, 1, big));
    v.push_back(real_field<V>("train_fraction", "train share of the held-out split", &Config::eval,
                              &V::train_fraction, 0.05, 0.95));
    return v;
  }();
  return f;
}

}  // namespace

void Config::set_seed(std::uint64_t s) {
  seed = s;
  train.seed = s;
  pretrain.seed = s;
  manip.seed = s;
}

Config Config::parse(std::string_view text) {
  Config c;
  std::size_t line_no = 0, start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw FormatError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    const Field* field = nullptr;
    for (const auto& f : fields()) {
      if (f.name == key) field = &f;
    }
    if (!field) throw FormatError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    try {
      field->set(c, value);
    } catch (const ContractError& e) {
      throw FormatError("config line " + std::to_string(line_no) + ": " + key + ": " + e.what());
    }
  }
  try {
    c.train.validate();
    c.generator.classes = c.data.classes;
    c.generator.validate();
    c.manip.validate();
    if (c.mix_split >= c.generator.layers) throw ContractError("mix_split must be below layers");
    if (c.data.mel.hop > c.data.mel.window) throw ContractError("hop must not exceed window");
  } catch (const ContractError& e) {
    throw FormatError(std::string("config: ") + e.what());
  }
  return c;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string Config::serialize() const {
  std::string out;
  for (const auto& f : fields()) out += f.name + " = " + f.get(*this) + "\n";
  return out;
}

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> k;
    for (const auto& f : fields()) k.push_back({f.name, f.help});
    return k;
  }();
  return keys;
}

}  // namespace sgim::io
