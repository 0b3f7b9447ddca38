#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

namespace medres::ingest {

struct WordVectors {
  std::size_t dim = 0;
  std::unordered_map<std::string, std::vector<double>> table;

  const std::vector<double>* find(const std::string& token) const;
};

// GloVe text format: a token followed by `dim` numbers per line. A repeated
// token keeps the last vector and adds a warning. Throws DataError naming
// the line on a wrong number of values or an unparsable number.
WordVectors load_word_vectors(const std::string& path, std::size_t dim,
                              std::vector<std::string>* warnings = nullptr);

// Lower-cased alphanumeric runs.
std::vector<std::string> tokenize(const std::string& text);

// Mean of the in-vocabulary token vectors; zeros when none is known.
std::vector<double> embed_text(const std::string& text, const WordVectors& vectors);

}  // namespace medres::ingest
