#pragma once

#include <cstddef>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "medres/entitygraph/dataset.h"
#include "medres/ingest/word_vectors.h"

namespace medres::ingest {

// One paper of an Aminer "Citation-network V1" style corpus:
//   #*title  #@a1,a2  #tyear  #cvenue  #indexid  #%ref (repeated)  #!abstract
// separated by blank lines.
struct CitationRecord {
  std::string id;
  std::string title;
  std::vector<std::string> authors;
  std::string venue;
  int year = 0;
  std::vector<std::string> references;
};

struct DanglingReference {
  std::size_t record = 0;  // index of the citing record
  std::string reference;
};

struct CitationCorpus {
  std::vector<CitationRecord> records;
  // References naming no record of the corpus. They are kept in the records
  // and ignored by every counting rule.
  std::vector<DanglingReference> dangling;
};

// Throws DataError naming the line for an unknown tag, a bad year, a
// duplicate id, or a record without id or year.
CitationCorpus parse_citation_corpus(const std::string& path);
CitationCorpus parse_citation_text(std::istream& in, const std::string& source_name);
void write_citation_corpus(const std::vector<CitationRecord>& records, std::ostream& out);

// Inclusive year range.
struct YearWindow {
  int first = 0;
  int last = 0;
  bool contains(int year) const { return first <= year && year <= last; }
};

inline constexpr const char* kUserType = "user";
inline constexpr const char* kAuthorType = "author";
inline constexpr const char* kConferenceType = "conference";

// Graphs and vocabularies built from the records published in a window.
// Every person authoring an in-window paper is both a user and an author
// (two entity types over the same sorted name list); venues are sorted.
struct CitationGraphs {
  GraphSet graphs;
  std::vector<std::string> persons;
  std::vector<std::string> venues;
  std::map<std::string, std::size_t> person_index;
  std::map<std::string, std::size_t> venue_index;
  std::size_t user_type = 0;
  std::size_t author_type = 0;
  std::size_t conference_type = 0;
};

// Five count-weighted graphs from in-window records only (citations need
// both ends in the window; every author position counts):
//   user_published_conference  papers by the user at the venue
//   user_cited_conference      citations from the user's papers to the venue
//   user_coauthor_author       papers the two persons wrote together
//   user_cited_author          citations from the user's papers to the author's
//   author_cited_user          citations from the author's papers to the user's
// Self-citations (same person on both ends) are not counted.
CitationGraphs build_citation_graphs(const std::vector<CitationRecord>& records,
                                     YearWindow window);

// Labelled (user; author, conference) pairs. The user is the first author
// of a citing paper published in `citing`. Each author A of each cited
// paper q gives a positive; every other paper of A published in
// `candidates` that the user never cites (in `citing`) gives a negative.
// Only cited papers inside `candidates` count. The user vector is the
// citing title's embedding, the item vector the candidate's. Rows whose
// person or venue is outside the graph vocabulary are dropped, and an
// author gets negatives only when one of their positives was kept.
Dataset generate_labeled_pairs(const std::vector<CitationRecord>& records,
                               const CitationGraphs& graphs, YearWindow citing,
                               YearWindow candidates, const WordVectors& vectors);

}  // namespace medres::ingest
