#pragma once

#include "clipstate/embedding.hpp"
#include "clipstate/suite.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace clipstate::io {

inline constexpr int kFormatVersion = 1;

/// Rounds to the 9 significant digits written to disk.
double round_sig9(double x);

std::string dataset_to_string(const LabeledDataset& d);
LabeledDataset dataset_from_string(std::string_view text);

std::string prompts_to_string(const PromptSet& ps);
PromptSet prompts_from_string(std::string_view text);

/// Prompt embeddings, if the recognizer carries them, go under
/// metadata.prompt_embeddings / metadata.prompt_polarities / metadata.dim.
std::string recognizer_to_string(const Recognizer& r);
Recognizer recognizer_from_string(std::string_view text);

std::string read_file(const std::filesystem::path& path);
/// Writes via a temporary sibling and rename.
void write_file(const std::filesystem::path& path, std::string_view contents);

LabeledDataset load_dataset(const std::filesystem::path& path);
void save_dataset(const std::filesystem::path& path, const LabeledDataset& d);
PromptSet load_prompts(const std::filesystem::path& path);
void save_prompts(const std::filesystem::path& path, const PromptSet& ps);
Recognizer load_recognizer(const std::filesystem::path& path);
void save_recognizer(const std::filesystem::path& path, const Recognizer& r);

/// Parses a bare JSON array of reals into an embedding.
EmbeddingVector embedding_from_string(std::string_view text);

}  // namespace clipstate::io
