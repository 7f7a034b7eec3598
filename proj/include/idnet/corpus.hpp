#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "idnet/matrix.hpp"

namespace idnet {

using Year = int;
using Count = std::int64_t;

enum class CorpusLabel { all, funded, unfunded };

/// "A", "F" or "U".
std::string_view to_string(CorpusLabel label) noexcept;
CorpusLabel parse_corpus_label(std::string_view text);

/// Ordered, unique term labels. Position in the sequence is the node index.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> terms);

  std::size_t size() const noexcept { return terms_.size(); }
  const std::vector<std::string>& terms() const noexcept { return terms_; }
  const std::string& term(std::size_t index) const { return terms_.at(index); }

  std::optional<std::size_t> find(std::string_view term) const;
  /// Throws InputError for unknown terms.
  std::size_t index_of(std::string_view term) const;

  bool operator==(const Vocabulary&) const = default;

 private:
  std::vector<std::string> terms_;
};

/// Reads a manifest with one term per line; blank lines are skipped.
Vocabulary load_vocabulary(const std::filesystem::path& path);
void save_vocabulary(const Vocabulary& vocabulary, const std::filesystem::path& path);

/// Inclusive span of years, one network slice per year.
class YearRange {
 public:
  YearRange() = default;
  YearRange(Year start, Year end);

  Year start() const noexcept { return start_; }
  Year end() const noexcept { return end_; }
  std::size_t slices() const noexcept { return static_cast<std::size_t>(end_ - start_ + 1); }

  bool contains(Year y) const noexcept { return y >= start_ && y <= end_; }
  bool contains(const YearRange& other) const noexcept {
    return other.start_ >= start_ && other.end_ <= end_;
  }
  std::size_t index_of(Year y) const;
  Year year_at(std::size_t index) const noexcept { return start_ + static_cast<Year>(index); }

  bool operator==(const YearRange&) const = default;

 private:
  Year start_ = 0;
  Year end_ = 0;
};

/// Per-year occurrence (diagonal) and co-occurrence (off-diagonal) counts of one corpus.
///
/// Entries are stored as full matrices so an asymmetric tensor can be represented
/// and reported by validate_tensor(); set_pair() keeps both triangles in sync.
class CountTensor {
 public:
  CountTensor() = default;
  CountTensor(CorpusLabel label, Vocabulary vocabulary, YearRange years);

  CorpusLabel label() const noexcept { return label_; }
  void set_label(CorpusLabel label) noexcept { label_ = label; }
  const Vocabulary& vocabulary() const noexcept { return vocabulary_; }
  const YearRange& years() const noexcept { return years_; }
  std::size_t terms() const noexcept { return vocabulary_.size(); }

  const SquareMatrix<Count>& slice(std::size_t t) const { return slices_.at(t); }
  SquareMatrix<Count>& slice(std::size_t t) { return slices_.at(t); }
  const std::vector<SquareMatrix<Count>>& slices() const noexcept { return slices_; }

  Count at(std::size_t t, std::size_t i, std::size_t j) const { return slices_.at(t)(i, j); }
  void set_pair(std::size_t t, std::size_t i, std::size_t j, Count value);

  bool operator==(const CountTensor&) const = default;

 private:
  CorpusLabel label_ = CorpusLabel::all;
  Vocabulary vocabulary_;
  YearRange years_;
  std::vector<SquareMatrix<Count>> slices_;
};

struct Violation {
  enum class Rule { negative, asymmetric, exceeds_occurrence };
  Rule rule;
  Year year;
  std::size_t i;
  std::size_t j;

  std::string describe(const Vocabulary& vocabulary) const;
};

/// Empty iff every entry is non-negative, every slice is symmetric and
/// c_ij <= min(c_ii, c_jj) holds off the diagonal.
std::vector<Violation> validate_tensor(const CountTensor& tensor);

struct LoadOptions {
  /// Year range of the tensor. When absent it is inferred from the data rows.
  std::optional<YearRange> years;
  /// Reject tensors failing validate_tensor(). Disabled by the `validate` command,
  /// which reports violations instead.
  bool enforce_invariants = true;
};

/// Reads a `year,term_i,term_j,count` file. Missing rows are zero.
CountTensor load_counts(const std::filesystem::path& path, const Vocabulary& vocabulary,
                        CorpusLabel label, const LoadOptions& options = {});

/// Writes non-zero entries with i <= j, sorted by year then index pair.
void save_counts(const CountTensor& tensor, const std::filesystem::path& path);
std::string format_counts(const CountTensor& tensor);

struct DerivedUnfunded {
  CountTensor tensor;
  /// Entries that were negative and clamped to zero (only when clamping was requested).
  std::vector<std::string> warnings;
};

/// U = A - F elementwise. Negative entries are an error unless `clamp` is set.
DerivedUnfunded derive_unfunded(const CountTensor& all, const CountTensor& funded, bool clamp);

/// Elementwise F + U, used when an unfunded corpus is ingested directly.
CountTensor combine_corpora(const CountTensor& funded, const CountTensor& unfunded);

/// Diagonal (occurrence) counts of one term, in chronological order.
std::vector<std::pair<Year, Count>> occurrence_series(const CountTensor& tensor,
                                                      std::string_view term);

}  // namespace idnet
