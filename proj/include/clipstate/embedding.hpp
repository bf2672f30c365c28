#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace clipstate {

/// Binary state tag. Positive is the state the recognizer fires on (e.g. "open").
enum class Label : int { Positive = 1, Negative = -1 };

constexpr int sign(Label l) noexcept { return static_cast<int>(l); }

Label label_from_int(long long value);

/// Unit-normalized point in the joint image/text embedding space.
///
/// The checked constructor accepts inputs whose norm is within 1% of one
/// (serialization rounding) and re-normalizes them; anything further off,
/// empty, or non-finite is rejected.
class EmbeddingVector {
public:
    static constexpr double kIngestTolerance = 0.01;
    /// Norm deviations this small are left alone rather than re-normalized.
    static constexpr double kRoundingSlack = 1e-8;

    EmbeddingVector() = default;
    explicit EmbeddingVector(std::vector<double> values);

    /// Scales an arbitrary non-zero finite vector to unit length.
    static EmbeddingVector normalized(std::vector<double> values);

    std::size_t dim() const noexcept { return values_.size(); }
    std::span<const double> values() const noexcept { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }

    friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;

private:
    std::vector<double> values_;
};

double euclidean_norm(std::span<const double> v);

struct DatasetItem {
    std::string id;
    Label label;
    EmbeddingVector embedding;

    friend bool operator==(const DatasetItem&, const DatasetItem&) = default;
};

/// Image embeddings with binary ground-truth state labels.
class LabeledDataset {
public:
    /// Validates dim consistency, id uniqueness and T >= 1. Optimization
    /// entry points additionally require both classes to be present.
    LabeledDataset(std::size_t dim, std::vector<DatasetItem> items);

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return items_.size(); }
    const std::vector<DatasetItem>& items() const noexcept { return items_; }
    const DatasetItem& operator[](std::size_t t) const { return items_[t]; }

    std::vector<Label> labels() const;
    std::size_t count(Label l) const;
    bool has_both_classes() const { return count(Label::Positive) > 0 && count(Label::Negative) > 0; }

    friend bool operator==(const LabeledDataset&, const LabeledDataset&) = default;

private:
    std::size_t dim_;
    std::vector<DatasetItem> items_;
};

struct Prompt {
    std::string text;
    Label polarity;
    EmbeddingVector embedding;

    friend bool operator==(const Prompt&, const Prompt&) = default;
};

class PromptSet {
public:
    /// Validates N_P >= 1, unique texts and dim consistency.
    PromptSet(std::size_t dim, std::vector<Prompt> prompts);

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return prompts_.size(); }
    const std::vector<Prompt>& prompts() const noexcept { return prompts_; }
    const Prompt& operator[](std::size_t i) const { return prompts_[i]; }
    std::vector<std::string> texts() const;

    friend bool operator==(const PromptSet&, const PromptSet&) = default;

private:
    std::size_t dim_;
    std::vector<Prompt> prompts_;
};

/// Row t, column i holds the cosine similarity of image t and prompt i.
class SimilarityMatrix {
public:
    SimilarityMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    double operator()(std::size_t t, std::size_t i) const { return values_[t * cols_ + i]; }
    std::span<const double> row(std::size_t t) const {
        return std::span<const double>(values_).subspan(t * cols_, cols_);
    }

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> values_;
};

double cosine_similarity(const EmbeddingVector& v, const EmbeddingVector& p);

SimilarityMatrix similarity_matrix(const LabeledDataset& d, const PromptSet& ps);

/// Similarity of a single image against every prompt.
std::vector<double> similarity_row(const EmbeddingVector& v, const PromptSet& ps);

/// Article variants of a noun phrase: "a/an", "the", "this", "that".
std::vector<std::string> expand_prompt_variants(std::string_view base);

}  // namespace clipstate
