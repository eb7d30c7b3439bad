#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dropreg/sparse.hpp"

namespace dropreg {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ScalingMode { unit_second_moment, none };

/// Per-column factors from normalize_columns, reusable on test or unlabeled
/// data so that held-out columns are scaled exactly like training columns.
struct ScalingReport {
  std::vector<double> factors;  // multiplier per column; 1.0 where untouched
  ScalingMode mode = ScalingMode::none;
  std::vector<std::uint32_t> unscaled;  // all-zero columns left as-is
};

namespace detail {

inline std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

/// Reads the sparse line format: `<label> <index>:<value> ...` with 1-based
/// strictly ascending indices, `#` comments, blank lines ignored, and an
/// optional `#dim <d>` header. Without a header the dimension is inferred as
/// one past the largest index seen.
inline Dataset read_sparse_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  Dataset data;
  std::uint64_t header_dim = 0;
  bool have_header = false, first_content = true;
  std::vector<std::pair<std::vector<std::pair<std::uint32_t, double>>, double>> parsed;
  std::uint32_t max_index = 0;  // 1-based
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto fail = [&](const std::string& why) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": " + why);
    };
    if (first_content && line.rfind("#dim", 0) == 0) {
      std::istringstream hs(line.substr(4));
      if (!(hs >> header_dim) || header_dim == 0) fail("malformed #dim header");
      have_header = true;
      first_content = false;
      continue;
    }
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    double label;
    if (!(ls >> label)) continue;  // blank or comment-only line
    first_content = false;
    std::vector<std::pair<std::uint32_t, double>> entries;
    std::string tok;
    while (ls >> tok) {
      std::size_t colon = tok.find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 == tok.size())
        fail("malformed entry '" + tok + "' (expected index:value)");
      std::uint64_t idx;
      double val;
      try {
        std::size_t used;
        idx = std::stoull(tok.substr(0, colon), &used);
        if (used != colon) fail("malformed index in '" + tok + "'");
        std::string vs = tok.substr(colon + 1);
        val = std::stod(vs, &used);
        if (used != vs.size()) fail("malformed value in '" + tok + "'");
      } catch (const ParseError&) {
        throw;
      } catch (const std::exception&) {
        fail("malformed entry '" + tok + "'");
      }
      if (idx == 0) fail("indices are 1-based on disk; got 0");
      if (!entries.empty() && idx <= entries.back().first)
        fail("entry indices must be strictly ascending");
      if (!std::isfinite(val)) fail("non-finite value");
      entries.emplace_back(static_cast<std::uint32_t>(idx), val);
      max_index = std::max(max_index, static_cast<std::uint32_t>(idx));
    }
    parsed.emplace_back(std::move(entries), label);
  }
  if (parsed.empty()) throw ParseError(path + ": empty dataset");
  std::uint32_t dim = have_header ? static_cast<std::uint32_t>(header_dim) : max_index;
  if (have_header && max_index > dim)
    throw ParseError(path + ": entry index " + std::to_string(max_index) +
                     " exceeds #dim " + std::to_string(header_dim));
  data.dim = dim;
  for (auto& [entries, label] : parsed) {
    SparseVector row;
    row.dim = dim;
    for (auto& [idx, val] : entries) row.push(idx - 1, val);
    data.add(std::move(row), label);
  }
  return data;
}

/// Writes the sparse line format with a #dim header and 17-significant-digit
/// values, so a write-then-read round trip is bit-exact.
inline void write_sparse_dataset(const Dataset& data, const std::string& path) {
  data.check();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "#dim " << data.dim << "\n";
  for (std::size_t i = 0; i < data.n(); ++i) {
    out << detail::format_value(data.labels[i]);
    const SparseVector& row = data.rows[i];
    for (std::size_t k = 0; k < row.indices.size(); ++k)
      out << ' ' << (row.indices[k] + 1) << ':' << detail::format_value(row.values[k]);
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed for " + path);
}

/// Lowercases and splits a document into alphanumeric runs.
inline std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

/// Bag-of-ngrams featurization: unigram counts, plus adjacent bigrams joined
/// with '_' when order = 2. The vocabulary is sorted lexicographically;
/// features whose total occurrence count falls below min_count are dropped.
inline std::pair<Dataset, std::vector<std::string>> featurize_ngrams(
    const std::vector<std::string>& documents, const std::vector<double>& labels,
    int order, std::size_t min_count = 0) {
  if (order != 1 && order != 2) throw std::invalid_argument("ngram order must be 1 or 2");
  if (documents.size() != labels.size())
    throw std::invalid_argument("documents and labels must have equal length");
  std::vector<std::vector<std::string>> grams(documents.size());
  std::map<std::string, std::size_t> totals;
  for (std::size_t i = 0; i < documents.size(); ++i) {
    std::vector<std::string> toks = tokenize(documents[i]);
    for (const std::string& t : toks) {
      grams[i].push_back(t);
      ++totals[t];
    }
    if (order == 2)
      for (std::size_t k = 0; k + 1 < toks.size(); ++k) {
        std::string bg = toks[k] + "_" + toks[k + 1];
        ++totals[bg];
        grams[i].push_back(std::move(bg));
      }
  }
  std::vector<std::string> vocab;
  std::map<std::string, std::uint32_t> index;
  for (const auto& [gram, count] : totals)  // std::map iterates lexicographically
    if (count >= min_count) {
      index[gram] = static_cast<std::uint32_t>(vocab.size());
      vocab.push_back(gram);
    }
  Dataset data;
  data.dim = static_cast<std::uint32_t>(vocab.size());
  for (std::size_t i = 0; i < documents.size(); ++i) {
    std::map<std::uint32_t, double> counts;
    for (const std::string& g : grams[i]) {
      auto it = index.find(g);
      if (it != index.end()) counts[it->second] += 1.0;
    }
    SparseVector row;
    row.dim = data.dim;
    for (const auto& [j, c] : counts) row.push(j, c);
    data.add(std::move(row), labels[i]);
  }
  return {std::move(data), std::move(vocab)};
}

inline void write_vocabulary(const std::vector<std::string>& vocab, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const std::string& t : vocab) out << t << '\n';
  if (!out) throw std::runtime_error("write failed for " + path);
}

inline std::vector<std::string> read_vocabulary(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::vector<std::string> vocab;
  std::string line;
  while (std::getline(in, line)) vocab.push_back(line);
  while (!vocab.empty() && vocab.back().empty()) vocab.pop_back();
  return vocab;
}

/// Rescales every stored value by its column factor.
inline Dataset apply_scaling(const Dataset& data, const ScalingReport& scaling) {
  if (scaling.factors.size() != data.dim)
    throw std::invalid_argument("scaling factors do not match dataset dim");
  Dataset out;
  out.dim = data.dim;
  for (std::size_t i = 0; i < data.n(); ++i) {
    SparseVector row;
    row.dim = data.dim;
    for (std::size_t k = 0; k < data.rows[i].indices.size(); ++k) {
      std::uint32_t j = data.rows[i].indices[k];
      row.push(j, data.rows[i].values[k] * scaling.factors[j]);
    }
    out.add(std::move(row), data.labels[i]);
  }
  return out;
}

/// Scales column j by 1/sqrt(sum_i x_ij^2) so each touched column has unit
/// second moment. All-zero columns are left alone and listed in the report.
inline std::pair<Dataset, ScalingReport> normalize_columns(const Dataset& data, ScalingMode mode) {
  data.check();
  if (data.n() == 0) throw std::invalid_argument("cannot normalize an empty dataset");
  ScalingReport report;
  report.mode = mode;
  report.factors.assign(data.dim, 1.0);
  if (mode == ScalingMode::none) return {data, report};
  std::vector<double> sumsq(data.dim, 0.0);
  for (const SparseVector& row : data.rows)
    for (std::size_t k = 0; k < row.indices.size(); ++k)
      sumsq[row.indices[k]] += row.values[k] * row.values[k];
  for (std::uint32_t j = 0; j < data.dim; ++j) {
    if (sumsq[j] > 0.0)
      report.factors[j] = 1.0 / std::sqrt(sumsq[j]);
    else
      report.unscaled.push_back(j);
  }
  return {apply_scaling(data, report), std::move(report)};
}

}  // namespace dropreg
