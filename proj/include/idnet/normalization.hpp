#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "idnet/corpus.hpp"
#include "idnet/matrix.hpp"

namespace idnet {

struct WeightSlice {
  Year year = 0;
  SquareMatrix<double> weights;
};

struct WeightTensor {
  CorpusLabel label = CorpusLabel::all;
  Vocabulary vocabulary;
  YearRange years;
  std::vector<WeightSlice> slices;

  std::size_t terms() const noexcept { return vocabulary.size(); }
  const SquareMatrix<double>& at_year(Year y) const { return slices.at(years.index_of(y)).weights; }
};

/// Cosine (Ochiai) weights w_ij = c_ij / sqrt(c_ii c_jj), zero diagonal.
/// Pairs where either occurrence count is zero get weight 0.
///
/// Evaluated as sqrt(c_ij^2 / (c_ii c_jj)): for counts below 2^26 both products are
/// exact in double, so the result is invariant under integer rescaling of the slice
/// and never exceeds 1 when c_ij <= min(c_ii, c_jj).
SquareMatrix<double> cosine_normalize(const SquareMatrix<Count>& counts);

WeightTensor normalize_tensor(const CountTensor& tensor);

/// `year,term_i,term_j,weight`, i < j, zero weights omitted, 12 significant digits.
std::string format_weights(const WeightTensor& tensor);
void save_weights(const WeightTensor& tensor, const std::filesystem::path& path);

}  // namespace idnet
