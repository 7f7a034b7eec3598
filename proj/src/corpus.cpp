#include "idnet/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "idnet/csv.hpp"
#include "idnet/error.hpp"

namespace idnet {
namespace {

constexpr std::string_view kCountsHeader = "year,term_i,term_j,count";

template <typename Int>
bool parse_integer(std::string_view text, Int& out) {
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last && !text.empty();
}

std::string strip_bom(std::string line) {
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
      static_cast<unsigned char>(line[1]) == 0xBB && static_cast<unsigned char>(line[2]) == 0xBF) {
    line.erase(0, 3);
  }
  return line;
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << content;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace

std::string_view to_string(CorpusLabel label) noexcept {
  switch (label) {
    case CorpusLabel::all:
      return "A";
    case CorpusLabel::funded:
      return "F";
    case CorpusLabel::unfunded:
      return "U";
  }
  return "?";
}

CorpusLabel parse_corpus_label(std::string_view text) {
  if (text == "A") return CorpusLabel::all;
  if (text == "F") return CorpusLabel::funded;
  if (text == "U") return CorpusLabel::unfunded;
  throw InputError("unknown corpus label '" + std::string(text) + "' (expected A, F or U)");
}

Vocabulary::Vocabulary(std::vector<std::string> terms) : terms_(std::move(terms)) {
  if (terms_.size() < 2) throw InputError("vocabulary needs at least two terms");
  std::set<std::string_view> seen;
  for (const auto& t : terms_) {
    if (t.empty()) throw InputError("vocabulary contains an empty term");
    if (!seen.insert(t).second) throw InputError("duplicate vocabulary term '" + t + "'");
  }
}

std::optional<std::size_t> Vocabulary::find(std::string_view term) const {
  const auto it = std::find(terms_.begin(), terms_.end(), term);
  if (it == terms_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - terms_.begin());
}

std::size_t Vocabulary::index_of(std::string_view term) const {
  if (auto idx = find(term)) return *idx;
  throw InputError("unknown term '" + std::string(term) + "'");
}

Vocabulary load_vocabulary(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open vocabulary '" + path.string() + "'");
  std::vector<std::string> terms;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first) line = strip_bom(line);
    first = false;
    auto term = csv::trim(line);
    if (!term.empty()) terms.push_back(std::move(term));
  }
  return Vocabulary(std::move(terms));
}

void save_vocabulary(const Vocabulary& vocabulary, const std::filesystem::path& path) {
  std::string text;
  for (const auto& t : vocabulary.terms()) text += t + "\n";
  write_text(path, text);
}

YearRange::YearRange(Year start, Year end) : start_(start), end_(end) {
  if (start > end) {
    throw InputError("year range " + std::to_string(start) + "-" + std::to_string(end) +
                     " is empty");
  }
}

std::size_t YearRange::index_of(Year y) const {
  if (!contains(y)) {
    throw InputError("year " + std::to_string(y) + " outside " + std::to_string(start_) + "-" +
                     std::to_string(end_));
  }
  return static_cast<std::size_t>(y - start_);
}

CountTensor::CountTensor(CorpusLabel label, Vocabulary vocabulary, YearRange years)
    : label_(label), vocabulary_(std::move(vocabulary)), years_(years) {
  slices_.assign(years_.slices(), SquareMatrix<Count>(vocabulary_.size(), 0));
}

void CountTensor::set_pair(std::size_t t, std::size_t i, std::size_t j, Count value) {
  auto& s = slices_.at(t);
  s(i, j) = value;
  s(j, i) = value;
}

std::string Violation::describe(const Vocabulary& vocabulary) const {
  const std::string where = "(" + vocabulary.term(i) + "," + vocabulary.term(j) + "," +
                            std::to_string(year) + ")";
  switch (rule) {
    case Rule::negative:
      return "negative count at " + where;
    case Rule::asymmetric:
      return "symmetry broken at " + where;
    case Rule::exceeds_occurrence:
      return "co-occurrence exceeds occurrence at " + where;
  }
  return "unknown violation at " + where;
}

std::vector<Violation> validate_tensor(const CountTensor& tensor) {
  std::vector<Violation> out;
  const auto n = tensor.terms();
  for (std::size_t t = 0; t < tensor.years().slices(); ++t) {
    const auto& s = tensor.slice(t);
    const Year year = tensor.years().year_at(t);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (s(i, j) < 0) out.push_back({Violation::Rule::negative, year, i, j});
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (s(i, j) != s(j, i)) {
          out.push_back({Violation::Rule::asymmetric, year, i, j});
          continue;
        }
        if (s(i, j) > std::min(s(i, i), s(j, j))) {
          out.push_back({Violation::Rule::exceeds_occurrence, year, i, j});
        }
      }
    }
  }
  return out;
}

CountTensor load_counts(const std::filesystem::path& path, const Vocabulary& vocabulary,
                        CorpusLabel label, const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open counts file '" + path.string() + "'");

  struct Entry {
    Count value;
    std::size_t line;
    bool swapped;
  };
  std::map<std::tuple<Year, std::size_t, std::size_t>, Entry> entries;

  const std::string where = path.filename().string();
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) line = strip_bom(line);
    if (csv::trim(line).empty()) continue;
    if (!header_seen) {
      if (csv::trim(line) != kCountsHeader) {
        throw InputError(where + ":" + std::to_string(line_no) + ": expected header '" +
                         std::string(kCountsHeader) + "'");
      }
      header_seen = true;
      continue;
    }
    const auto fields = csv::split_record(line);
    const auto at = where + ":" + std::to_string(line_no) + ": ";
    if (fields.size() != 4) throw InputError(at + "malformed row (expected 4 fields)");
    Year year = 0;
    Count value = 0;
    if (!parse_integer(fields[0], year)) throw InputError(at + "malformed year '" + fields[0] + "'");
    if (!parse_integer(fields[3], value)) throw InputError(at + "malformed count '" + fields[3] + "'");
    if (value < 0) throw InputError(at + "negative count");
    const auto i = vocabulary.find(fields[1]);
    const auto j = vocabulary.find(fields[2]);
    if (!i) throw InputError(at + "unknown term '" + fields[1] + "'");
    if (!j) throw InputError(at + "unknown term '" + fields[2] + "'");
    if (options.years && !options.years->contains(year)) {
      throw InputError(at + "year " + std::to_string(year) + " outside the configured range");
    }
    const bool swapped = *i > *j;
    const auto key = std::make_tuple(year, std::min(*i, *j), std::max(*i, *j));
    const auto [it, inserted] = entries.try_emplace(key, Entry{value, line_no, swapped});
    if (!inserted && it->second.value != value) {
      if (it->second.swapped != swapped) {
        throw InputError(at + "conflicting symmetric entries (see line " +
                         std::to_string(it->second.line) + ")");
      }
      throw InputError(at + "duplicate conflicting rows (see line " +
                       std::to_string(it->second.line) + ")");
    }
  }
  if (!header_seen) throw InputError(where + ": missing header '" + std::string(kCountsHeader) + "'");

  YearRange years;
  if (options.years) {
    years = *options.years;
  } else if (!entries.empty()) {
    Year lo = std::get<0>(entries.begin()->first);
    Year hi = std::get<0>(entries.rbegin()->first);
    years = YearRange(lo, hi);
  } else {
    throw InputError(where + ": no data rows and no year range configured");
  }

  CountTensor tensor(label, vocabulary, years);
  for (const auto& [key, entry] : entries) {
    const auto& [year, i, j] = key;
    tensor.set_pair(years.index_of(year), i, j, entry.value);
  }

  if (options.enforce_invariants) {
    const auto violations = validate_tensor(tensor);
    if (!violations.empty()) {
      throw InputError(where + ": " + violations.front().describe(vocabulary) + " (" +
                       std::to_string(violations.size()) + " violation(s))");
    }
  }
  return tensor;
}

std::string format_counts(const CountTensor& tensor) {
  std::ostringstream out;
  out << kCountsHeader << '\n';
  const auto& vocab = tensor.vocabulary();
  for (std::size_t t = 0; t < tensor.years().slices(); ++t) {
    const auto& s = tensor.slice(t);
    for (std::size_t i = 0; i < tensor.terms(); ++i) {
      for (std::size_t j = i; j < tensor.terms(); ++j) {
        if (s(i, j) == 0) continue;
        out << tensor.years().year_at(t) << ',' << csv::escape_field(vocab.term(i)) << ','
            << csv::escape_field(vocab.term(j)) << ',' << s(i, j) << '\n';
      }
    }
  }
  return out.str();
}

void save_counts(const CountTensor& tensor, const std::filesystem::path& path) {
  write_text(path, format_counts(tensor));
}

namespace {

void require_compatible(const CountTensor& a, const CountTensor& b) {
  if (a.vocabulary() != b.vocabulary()) throw InputError("corpora have mismatched vocabularies");
  if (a.years() != b.years()) throw InputError("corpora have mismatched year ranges");
}

}  // namespace

DerivedUnfunded derive_unfunded(const CountTensor& all, const CountTensor& funded, bool clamp) {
  if (all.label() != CorpusLabel::all) throw InputError("first operand must be the A corpus");
  if (funded.label() != CorpusLabel::funded) throw InputError("second operand must be the F corpus");
  require_compatible(all, funded);

  DerivedUnfunded out{CountTensor(CorpusLabel::unfunded, all.vocabulary(), all.years()), {}};
  const auto n = all.terms();
  for (std::size_t t = 0; t < all.years().slices(); ++t) {
    auto& u = out.tensor.slice(t);
    const auto& a = all.slice(t);
    const auto& f = funded.slice(t);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const Count diff = a(i, j) - f(i, j);
        if (diff >= 0) {
          u(i, j) = diff;
          continue;
        }
        const std::string where = "(" + all.vocabulary().term(i) + "," +
                                  all.vocabulary().term(j) + "," +
                                  std::to_string(all.years().year_at(t)) + ")";
        if (!clamp) throw InputError("negative unfunded count at " + where);
        u(i, j) = 0;
        if (i <= j) {
          out.warnings.push_back("clamped negative unfunded count " + std::to_string(diff) +
                                 " at " + where);
        }
      }
    }
  }
  return out;
}

CountTensor combine_corpora(const CountTensor& funded, const CountTensor& unfunded) {
  require_compatible(funded, unfunded);
  CountTensor all(CorpusLabel::all, funded.vocabulary(), funded.years());
  const auto n = funded.terms();
  for (std::size_t t = 0; t < funded.years().slices(); ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        all.slice(t)(i, j) = funded.slice(t)(i, j) + unfunded.slice(t)(i, j);
      }
    }
  }
  return all;
}

std::vector<std::pair<Year, Count>> occurrence_series(const CountTensor& tensor,
                                                      std::string_view term) {
  const auto i = tensor.vocabulary().index_of(term);
  std::vector<std::pair<Year, Count>> out;
  out.reserve(tensor.years().slices());
  for (std::size_t t = 0; t < tensor.years().slices(); ++t) {
    out.emplace_back(tensor.years().year_at(t), tensor.slice(t)(i, i));
  }
  return out;
}

}  // namespace idnet
