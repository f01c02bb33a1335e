#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace sgim::data {

// One synthetic class shared by the audio synthesizer, the text captions and
// the procedural image renderer. Index i of the catalog is class id i.
struct ClassInfo {
  std::string name;
  std::vector<std::string> captions;
  // Zero-shot prompt. Its words occur in the captions, the phrase itself does not.
  std::string prompt;
};

const std::vector<ClassInfo>& class_catalog();

// Bundled synonym table in the `word: syn1, syn2` text format.
std::string_view default_synonym_table();

}  // namespace sgim::data
