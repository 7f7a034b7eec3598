#include "idnet/normalization.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "idnet/csv.hpp"
#include "idnet/error.hpp"

namespace idnet {

SquareMatrix<double> cosine_normalize(const SquareMatrix<Count>& counts) {
  const auto n = counts.size();
  SquareMatrix<double> w(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto cii = static_cast<double>(counts(i, i));
    if (cii <= 0.0) continue;
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto cjj = static_cast<double>(counts(j, j));
      const auto cij = static_cast<double>(counts(i, j));
      if (cjj <= 0.0 || cij <= 0.0) continue;
      const double value = std::sqrt((cij * cij) / (cii * cjj));
      w(i, j) = value;
      w(j, i) = value;
    }
  }
  return w;
}

WeightTensor normalize_tensor(const CountTensor& tensor) {
  WeightTensor out;
  out.label = tensor.label();
  out.vocabulary = tensor.vocabulary();
  out.years = tensor.years();
  out.slices.reserve(tensor.years().slices());
  for (std::size_t t = 0; t < tensor.years().slices(); ++t) {
    out.slices.push_back({tensor.years().year_at(t), cosine_normalize(tensor.slice(t))});
  }
  return out;
}

std::string format_weights(const WeightTensor& tensor) {
  std::ostringstream out;
  out << "year,term_i,term_j,weight\n";
  const auto n = tensor.terms();
  for (const auto& slice : tensor.slices) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double w = slice.weights(i, j);
        if (w == 0.0) continue;
        out << slice.year << ',' << csv::escape_field(tensor.vocabulary.term(i)) << ','
            << csv::escape_field(tensor.vocabulary.term(j)) << ',' << csv::format_real(w) << '\n';
      }
    }
  }
  return out.str();
}

void save_weights(const WeightTensor& tensor, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << format_weights(tensor);
}

}  // namespace idnet
