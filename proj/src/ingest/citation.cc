#include "medres/ingest/citation.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <tuple>
#include <unordered_map>

#include "medres/errors.h"

namespace medres::ingest {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_authors(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto end = comma == std::string::npos ? s.size() : comma;
    std::string name = trim(s.substr(start, end - start));
    if (!name.empty()) out.push_back(std::move(name));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::unordered_map<std::string, std::size_t> index_by_id(
    const std::vector<CitationRecord>& records) {
  std::unordered_map<std::string, std::size_t> out;
  for (std::size_t i = 0; i < records.size(); ++i) out.emplace(records[i].id, i);
  return out;
}

}  // namespace

CitationCorpus parse_citation_text(std::istream& in, const std::string& source) {
  CitationCorpus corpus;
  CitationRecord cur;
  bool open = false;
  bool has_year = false;
  std::size_t start_line = 0;
  std::set<std::string> seen_ids;

  auto finish = [&](std::size_t line_no) {
    if (!open) return;
    if (cur.id.empty()) throw DataError(source, start_line, "record without #index");
    if (!has_year) throw DataError(source, start_line, "record " + cur.id + " without #t year");
    if (!seen_ids.insert(cur.id).second) {
      throw DataError(source, line_no, "duplicate paper id " + cur.id);
    }
    corpus.records.push_back(std::move(cur));
    cur = CitationRecord{};
    open = false;
    has_year = false;
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) {
      finish(line_no);
      continue;
    }
    if (line.size() < 2 || line[0] != '#') {
      throw DataError(source, line_no, "expected a '#' tag");
    }
    if (!open) {
      open = true;
      start_line = line_no;
    }
    if (line.rfind("#index", 0) == 0) {
      cur.id = trim(line.substr(6));
      if (cur.id.empty()) throw DataError(source, line_no, "empty #index");
      continue;
    }
    const char tag = line[1];
    const std::string value = trim(line.substr(2));
    switch (tag) {
      case '*':
        cur.title = value;
        break;
      case '@':
        cur.authors = split_authors(value);
        break;
      case 't': {
        int y = 0;
        const auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), y);
        if (value.empty() || ec != std::errc() || p != value.data() + value.size()) {
          throw DataError(source, line_no, "bad year '" + value + "'");
        }
        cur.year = y;
        has_year = true;
        break;
      }
      case 'c':
        cur.venue = value;
        break;
      case '%':
        if (!value.empty()) cur.references.push_back(value);
        break;
      case '!':
        break;
      default:
        throw DataError(source, line_no, std::string("unknown tag '#") + tag + "'");
    }
  }
  finish(line_no);

  const auto by_id = index_by_id(corpus.records);
  for (std::size_t i = 0; i < corpus.records.size(); ++i) {
    for (const auto& ref : corpus.records[i].references) {
      if (!by_id.count(ref)) corpus.dangling.push_back({i, ref});
    }
  }
  return corpus;
}

CitationCorpus parse_citation_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path, 0, "cannot open citation corpus");
  return parse_citation_text(in, path);
}

void write_citation_corpus(const std::vector<CitationRecord>& records, std::ostream& out) {
  for (const auto& r : records) {
    out << "#*" << r.title << '\n' << "#@";
    for (std::size_t i = 0; i < r.authors.size(); ++i) {
      out << (i ? "," : "") << r.authors[i];
    }
    out << '\n' << "#t" << r.year << '\n' << "#c" << r.venue << '\n';
    out << "#index" << r.id << '\n';
    for (const auto& ref : r.references) out << "#%" << ref << '\n';
    out << '\n';
  }
}

namespace {

using EdgeCounts = std::map<std::pair<std::size_t, std::size_t>, double>;

SparseMatrix to_matrix(std::size_t rows, std::size_t cols, const EdgeCounts& counts) {
  std::vector<SparseEntry> entries;
  entries.reserve(counts.size());
  for (const auto& [rc, w] : counts) entries.push_back({rc.first, rc.second, w});
  return SparseMatrix(rows, cols, std::move(entries));
}

}  // namespace

CitationGraphs build_citation_graphs(const std::vector<CitationRecord>& records,
                                     YearWindow window) {
  if (window.first > window.last) throw ConfigError("empty year window");
  CitationGraphs cg;
  std::set<std::string> persons, venues;
  for (const auto& r : records) {
    if (!window.contains(r.year)) continue;
    persons.insert(r.authors.begin(), r.authors.end());
    if (!r.venue.empty()) venues.insert(r.venue);
  }
  cg.persons.assign(persons.begin(), persons.end());
  cg.venues.assign(venues.begin(), venues.end());
  for (std::size_t i = 0; i < cg.persons.size(); ++i) cg.person_index[cg.persons[i]] = i;
  for (std::size_t i = 0; i < cg.venues.size(); ++i) cg.venue_index[cg.venues[i]] = i;

  EntityCatalog cat;
  cg.user_type = cat.add_type(kUserType, cg.persons.size());
  cg.author_type = cat.add_type(kAuthorType, cg.persons.size());
  cg.conference_type = cat.add_type(kConferenceType, cg.venues.size());
  cg.graphs = GraphSet(std::move(cat));

  EdgeCounts published, cited_venue, coauthor, cited_author, author_cited_user;
  const auto by_id = index_by_id(records);
  for (const auto& r : records) {
    if (!window.contains(r.year)) continue;
    std::vector<std::size_t> people;
    for (const auto& a : r.authors) people.push_back(cg.person_index.at(a));
    const bool has_venue = !r.venue.empty();
    for (std::size_t u : people) {
      if (has_venue) published[{u, cg.venue_index.at(r.venue)}] += 1.0;
      for (std::size_t a : people) {
        if (a != u) coauthor[{u, a}] += 1.0;
      }
    }
    for (const auto& ref : r.references) {
      const auto it = by_id.find(ref);
      if (it == by_id.end()) continue;
      const auto& q = records[it->second];
      if (!window.contains(q.year)) continue;
      for (std::size_t u : people) {
        if (!q.venue.empty()) cited_venue[{u, cg.venue_index.at(q.venue)}] += 1.0;
        for (const auto& name : q.authors) {
          const std::size_t a = cg.person_index.at(name);
          if (a == u) continue;
          cited_author[{u, a}] += 1.0;
          author_cited_user[{u, a}] += 1.0;  // author u cites user a
        }
      }
    }
  }
  const std::size_t np = cg.persons.size(), nv = cg.venues.size();
  cg.graphs.add_graph({"user_published_conference", cg.user_type, cg.conference_type,
                       to_matrix(np, nv, published)});
  cg.graphs.add_graph({"user_cited_conference", cg.user_type, cg.conference_type,
                       to_matrix(np, nv, cited_venue)});
  cg.graphs.add_graph({"user_coauthor_author", cg.user_type, cg.author_type,
                       to_matrix(np, np, coauthor)});
  cg.graphs.add_graph({"user_cited_author", cg.user_type, cg.author_type,
                       to_matrix(np, np, cited_author)});
  cg.graphs.add_graph({"author_cited_user", cg.author_type, cg.user_type,
                       to_matrix(np, np, author_cited_user)});
  return cg;
}

Dataset generate_labeled_pairs(const std::vector<CitationRecord>& records,
                               const CitationGraphs& cg, YearWindow citing,
                               YearWindow candidates, const WordVectors& vectors) {
  DatasetSchema schema{{cg.user_type}, {cg.author_type, cg.conference_type},
                       vectors.dim, vectors.dim};
  Dataset out(schema);
  const auto by_id = index_by_id(records);

  // Candidate papers per author name, in record order.
  std::map<std::string, std::vector<std::size_t>> papers_of;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!candidates.contains(records[i].year)) continue;
    for (const auto& a : records[i].authors) papers_of[a].push_back(i);
  }
  auto resolved_candidate = [&](const std::string& ref) -> long {
    const auto it = by_id.find(ref);
    if (it == by_id.end() || !candidates.contains(records[it->second].year)) return -1;
    return static_cast<long>(it->second);
  };
  // Everything each first author cites from the citing window.
  std::map<std::string, std::set<std::size_t>> cited_by_user;
  for (const auto& r : records) {
    if (!citing.contains(r.year) || r.authors.empty()) continue;
    for (const auto& ref : r.references) {
      const long q = resolved_candidate(ref);
      if (q >= 0) cited_by_user[r.authors.front()].insert(static_cast<std::size_t>(q));
    }
  }

  std::set<std::tuple<std::size_t, std::size_t, std::string>> emitted;
  auto emit = [&](std::size_t p, std::size_t q, const std::string& author, int label) {
    const auto& user = records[p].authors.front();
    const auto u = cg.person_index.find(user);
    const auto a = cg.person_index.find(author);
    const auto v = cg.venue_index.find(records[q].venue);
    if (u == cg.person_index.end() || a == cg.person_index.end() ||
        v == cg.venue_index.end()) {
      return false;
    }
    if (!emitted.insert({p, q, author}).second) return true;
    LabeledExample ex;
    ex.user_entities = {u->second};
    ex.item_entities = {a->second, v->second};
    ex.user_vec = embed_text(records[p].title, vectors);
    ex.item_vec = embed_text(records[q].title, vectors);
    ex.label = label;
    ex.user_key = user;
    ex.item_ref = records[q].id + "/" + author;
    out.add(std::move(ex));
    return true;
  };

  for (std::size_t p = 0; p < records.size(); ++p) {
    const auto& r = records[p];
    if (!citing.contains(r.year) || r.authors.empty()) continue;
    const auto& cited = cited_by_user[r.authors.front()];
    std::vector<std::string> cited_authors;
    for (const auto& ref : r.references) {
      const long q = resolved_candidate(ref);
      if (q < 0) continue;
      for (const auto& a : records[static_cast<std::size_t>(q)].authors) {
        // Negatives only follow a positive that survived the vocabulary check.
        if (!emit(p, static_cast<std::size_t>(q), a, 1)) continue;
        if (std::find(cited_authors.begin(), cited_authors.end(), a) == cited_authors.end()) {
          cited_authors.push_back(a);
        }
      }
    }
    for (const auto& a : cited_authors) {
      for (std::size_t q : papers_of[a]) {
        if (q == p || cited.count(q)) continue;
        (void)emit(p, q, a, 0);
      }
    }
  }
  return out;
}

}  // namespace medres::ingest
