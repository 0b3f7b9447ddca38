#include "medres/ingest/word_vectors.h"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "medres/errors.h"

namespace medres::ingest {

const std::vector<double>* WordVectors::find(const std::string& token) const {
  const auto it = table.find(token);
  return it == table.end() ? nullptr : &it->second;
}

WordVectors load_word_vectors(const std::string& path, std::size_t dim,
                              std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw DataError(path, 0, "cannot open word-vector file");
  WordVectors out;
  out.dim = dim;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream fields(line);
    std::string token;
    if (!(fields >> token)) continue;
    std::vector<double> v;
    v.reserve(dim);
    std::string field;
    while (fields >> field) {
      double x = 0.0;
      const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), x);
      if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw DataError(path, line_no, "not a number: '" + field + "'");
      }
      v.push_back(x);
    }
    if (v.size() != dim) {
      throw DataError(path, line_no, "expected " + std::to_string(dim) + " values for '" +
                                         token + "', found " + std::to_string(v.size()));
    }
    if (out.table.count(token) && warnings) {
      warnings->push_back(path + ":" + std::to_string(line_no) + ": duplicate token '" +
                          token + "', keeping the last vector");
    }
    out.table[token] = std::move(v);
  }
  return out;
}

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      cur += static_cast<char>(std::tolower(c));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::vector<double> embed_text(const std::string& text, const WordVectors& vectors) {
  std::vector<double> mean(vectors.dim, 0.0);
  std::size_t known = 0;
  for (const auto& tok : tokenize(text)) {
    if (const auto* v = vectors.find(tok)) {
      for (std::size_t i = 0; i < vectors.dim; ++i) mean[i] += (*v)[i];
      ++known;
    }
  }
  if (known > 0) {
    for (double& x : mean) x /= static_cast<double>(known);
  }
  return mean;
}

}  // namespace medres::ingest
