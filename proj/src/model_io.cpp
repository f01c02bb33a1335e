#include "sgim/io/model_io.h"

#include <fstream>

namespace sgim::io {

namespace {

void put_mlp(Checkpoint& ck, const std::string& prefix, const model::Mlp<float>& m) {
  ck.put(prefix + ".w_in", m.w_in);
  ck.put(prefix + ".b_in", m.b_in);
  ck.put(prefix + ".w_hidden", m.w_hidden);
  ck.put(prefix + ".b_hidden", m.b_hidden);
  ck.put(prefix + ".w_out", m.w_out);
  ck.put(prefix + ".b_out", m.b_out);
}

model::Mlp<float> get_mlp(const Checkpoint& ck, const std::string& prefix, std::size_t in,
                          std::size_t hidden, std::size_t out) {
  model::Mlp<float> m;
  m.w_in = ck.tensor(prefix + ".w_in", {in, hidden}, true);
  m.b_in = ck.tensor(prefix + ".b_in", {1, hidden}, true);
  m.w_hidden = ck.tensor(prefix + ".w_hidden", {hidden, hidden}, true);
  m.b_hidden = ck.tensor(prefix + ".b_hidden", {1, hidden}, true);
  m.w_out = ck.tensor(prefix + ".w_out", {hidden, out}, true);
  m.b_out = ck.tensor(prefix + ".b_out", {1, out}, true);
  return m;
}

}  // namespace

Checkpoint encoders_to_checkpoint(const model::Encoders& e, double tau) {
  Checkpoint ck;
  const auto& c = e.config;
  ck.put_scalars("encoder.config", {double(c.embed_dim), double(c.hidden), double(c.mel_bins),
                                    double(c.vocab_size), double(c.image_channels), double(c.image_size)});
  ck.put_scalars("encoder.tau", {tau});
  put_mlp(ck, "audio", e.audio);
  put_mlp(ck, "text", e.text);
  put_mlp(ck, "image", e.image);
  ck.put("audio.shift", {e.audio_shift.size()}, e.audio_shift);
  ck.put("audio.scale", {e.audio_scale.size()}, e.audio_scale);
  return ck;
}

model::Encoders encoders_from_checkpoint(const Checkpoint& ck, double* tau) {
  const auto v = ck.scalars("encoder.config", 6);
  model::Encoders e;
  auto& c = e.config;
  c.embed_dim = static_cast<std::size_t>(v[0]);
  c.hidden = static_cast<std::size_t>(v[1]);
  c.mel_bins = static_cast<std::size_t>(v[2]);
  c.vocab_size = static_cast<std::size_t>(v[3]);
  c.image_channels = static_cast<std::size_t>(v[4]);
  c.image_size = static_cast<std::size_t>(v[5]);
  e.audio = get_mlp(ck, "audio", c.audio_inputs(), c.hidden, c.embed_dim);
  e.text = get_mlp(ck, "text", c.vocab_size, c.hidden, c.embed_dim);
  e.image = get_mlp(ck, "image", c.image_inputs(), c.hidden, c.embed_dim);
  const auto shift = ck.tensor("audio.shift", {c.audio_inputs()});
  const auto scale = ck.tensor("audio.scale", {c.audio_inputs()});
  e.audio_shift.assign(shift.data().begin(), shift.data().end());
  e.audio_scale.assign(scale.data().begin(), scale.data().end());
  if (tau) *tau = ck.scalars("encoder.tau", 1)[0];
  return e;
}

Checkpoint generator_to_checkpoint(const gen::Generator& g) {
  Checkpoint ck;
  const auto& c = g.config;
  ck.put_scalars("generator.config",
                 {double(c.layers), double(c.style_dim), double(c.units), double(c.image_size),
                  double(c.channels), double(c.noise_dim), double(c.classes), double(c.mapping_hidden)});
  const auto& s = g.synthesis;
  ck.put("synthesis.const", s.const_input);
  for (std::size_t l = 0; l < c.layers; ++l) {
    const std::string p = "synthesis." + std::to_string(l);
    ck.put(p + ".weight", s.weight[l]);
    ck.put(p + ".scale_proj", s.scale_proj[l]);
    ck.put(p + ".scale_bias", s.scale_bias[l]);
    ck.put(p + ".shift_proj", s.shift_proj[l]);
    ck.put(p + ".shift_bias", s.shift_bias[l]);
  }
  ck.put("synthesis.out_w", s.out_w);
  ck.put("synthesis.out_b", s.out_b);
  ck.put("mapping.w1", g.mapping.w1);
  ck.put("mapping.b1", g.mapping.b1);
  ck.put("mapping.w2", g.mapping.w2);
  ck.put("mapping.b2", g.mapping.b2);
  return ck;
}

gen::Generator generator_from_checkpoint(const Checkpoint& ck) {
  const auto v = ck.scalars("generator.config", 8);
  gen::Generator g;
  auto& c = g.config;
  c.layers = static_cast<std::size_t>(v[0]);
  c.style_dim = static_cast<std::size_t>(v[1]);
  c.units = static_cast<std::size_t>(v[2]);
  c.image_size = static_cast<std::size_t>(v[3]);
  c.channels = static_cast<std::size_t>(v[4]);
  c.noise_dim = static_cast<std::size_t>(v[5]);
  c.classes = static_cast<std::size_t>(v[6]);
  c.mapping_hidden = static_cast<std::size_t>(v[7]);
  try {
    c.validate();
  } catch (const ContractError& e) {
    throw FormatError(std::string("generator checkpoint: ") + e.what());
  }
  auto& s = g.synthesis;
  s.config = c;
  s.const_input = ck.tensor("synthesis.const", {1, c.units}, true);
  for (std::size_t l = 0; l < c.layers; ++l) {
    const std::string p = "synthesis." + std::to_string(l);
    s.weight.push_back(ck.tensor(p + ".weight", {c.units, c.units}, true));
    s.scale_proj.push_back(ck.tensor(p + ".scale_proj", {c.style_dim, c.units}, true));
    s.scale_bias.push_back(ck.tensor(p + ".scale_bias", {1, c.units}, true));
    s.shift_proj.push_back(ck.tensor(p + ".shift_proj", {c.style_dim, c.units}, true));
    s.shift_bias.push_back(ck.tensor(p + ".shift_bias", {1, c.units}, true));
  }
  s.out_w = ck.tensor("synthesis.out_w", {c.units, c.pixels()}, true);
  s.out_b = ck.tensor("synthesis.out_b", {1, c.pixels()}, true);
  g.mapping.w1 = ck.tensor("mapping.w1", {c.classes + c.noise_dim, c.mapping_hidden}, true);
  g.mapping.b1 = ck.tensor("mapping.b1", {1, c.mapping_hidden}, true);
  g.mapping.w2 = ck.tensor("mapping.w2", {c.mapping_hidden, c.style_dim}, true);
  g.mapping.b2 = ck.tensor("mapping.b2", {1, c.style_dim}, true);
  return g;
}

void save_vocabulary(const std::filesystem::path& path, const text::Vocabulary& vocab) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& t : vocab.tokens()) out << t << "\n";
  if (!out) throw IoError("failed writing " + path.string());
}

text::Vocabulary load_vocabulary(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tokens.push_back(line);
  }
  if (tokens.empty() || tokens[0] != text::Vocabulary::kUnknownToken) {
    throw FormatError(path.string() + ": vocabulary must start with " +
                      std::string(text::Vocabulary::kUnknownToken));
  }
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    if (tokens[i].empty()) throw FormatError(path.string() + ": empty token on line " + std::to_string(i + 1));
  }
  text::Vocabulary v(std::vector<std::string>(tokens.begin() + 1, tokens.end()));
  if (v.size() != tokens.size()) throw FormatError(path.string() + ": duplicate tokens");
  return v;
}

}  // namespace sgim::io
