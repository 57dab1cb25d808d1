#include "dgl/table_io.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace dgl {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw InputError("line " + std::to_string(line) + ": " + what);
}

/// Reads non-blank lines as (line number, fields); the first is the header.
struct CsvReader {
  std::istream& in;
  std::size_t line_no = 0;

  bool next(std::vector<std::string>& fields) {
    std::string line;
    while (std::getline(in, line)) {
      ++line_no;
      if (trim(line).empty()) continue;
      fields = split_csv_line(line);
      return true;
    }
    if (in.bad()) throw InputError("read error");
    return false;
  }
};

std::vector<std::string> expect_header(CsvReader& r, std::size_t min_fields, const std::string& what) {
  std::vector<std::string> header;
  if (!r.next(header)) throw InputError("empty " + what + " table");
  if (header.size() < min_fields) fail(r.line_no, what + " header needs at least " + std::to_string(min_fields) + " columns");
  return header;
}

double parse_double(const std::string& s, std::size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) fail(line, "not a number: \"" + s + "\"");
  return v;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ';'))
    if (auto t = trim(item); !t.empty()) out.push_back(t);
  return out;
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

void write_signatures_csv(std::ostream& out, const SignatureMatrix& s, const DirectedGraph& g) {
  out << "node";
  for (std::size_t o = 0; o < s.orbit_count(); ++o) out << ",o" << o;
  out << '\n';
  for (std::size_t v = 0; v < s.node_count(); ++v) {
    out << g.label(static_cast<NodeId>(v));
    for (std::uint64_t c : s.row(v)) out << ',' << c;
    out << '\n';
  }
}

NumericTable read_numeric_table(std::istream& in) {
  CsvReader r{in};
  auto header = expect_header(r, 2, "numeric");
  NumericTable t;
  t.columns.assign(header.begin() + 1, header.end());
  std::vector<std::vector<double>> rows;
  std::vector<std::string> fields;
  while (r.next(fields)) {
    if (fields.size() != header.size())
      fail(r.line_no, "expected " + std::to_string(header.size()) + " fields, found " + std::to_string(fields.size()));
    bool missing = false;
    std::vector<double> row;
    for (std::size_t c = 1; c < fields.size(); ++c) {
      if (fields[c].empty() || fields[c] == "NA") {
        missing = true;
        break;
      }
      row.push_back(parse_double(fields[c], r.line_no));
    }
    if (missing) {
      t.dropped.push_back(fields[0]);
      continue;
    }
    t.ids.push_back(fields[0]);
    rows.push_back(std::move(row));
  }
  t.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(t.columns.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t c = 0; c < rows[i].size(); ++c) t.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
  return t;
}

NumericTable load_numeric_table(const std::filesystem::path& path) {
  auto in = open_input(path);
  try {
    return read_numeric_table(in);
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void write_numeric_table(std::ostream& out, const std::string& id_header, const std::vector<std::string>& ids,
                         const std::vector<std::string>& columns, const Eigen::MatrixXd& values) {
  out << id_header;
  for (const auto& c : columns) out << ',' << c;
  out << '\n';
  const auto old = out.precision(17);
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    out << ids[static_cast<std::size_t>(i)];
    for (Eigen::Index c = 0; c < values.cols(); ++c) out << ',' << values(i, c);
    out << '\n';
  }
  out.precision(old);
}

AnnotationTable read_annotations(std::istream& in) {
  CsvReader r{in};
  auto header = expect_header(r, 2, "annotation");
  AnnotationTable t;
  t.terms.assign(header.begin() + 1, header.end());
  std::vector<std::string> fields;
  while (r.next(fields)) {
    if (fields.size() != header.size()) fail(r.line_no, "annotation row width differs from header");
    std::vector<std::uint8_t> row;
    for (std::size_t c = 1; c < fields.size(); ++c) {
      if (fields[c] != "0" && fields[c] != "1") fail(r.line_no, "annotation entries must be 0 or 1");
      row.push_back(fields[c] == "1" ? 1 : 0);
    }
    t.entities.push_back(fields[0]);
    t.values.push_back(std::move(row));
  }
  return t;
}

Clustering read_clustering(std::istream& in) {
  CsvReader r{in};
  expect_header(r, 2, "clustering");
  Clustering c;
  std::vector<std::string> fields;
  while (r.next(fields)) {
    if (fields.size() != 2 || fields[0].empty() || fields[1].empty()) fail(r.line_no, "expected \"entity,cluster\"");
    if (!c.emplace(fields[0], fields[1]).second) fail(r.line_no, "entity listed twice: " + fields[0]);
  }
  return c;
}

void write_clustering(std::ostream& out, const Clustering& c) {
  out << "entity,cluster\n";
  for (const auto& [entity, cluster] : c) out << entity << ',' << cluster << '\n';
}

std::vector<TradeRecord> read_trade_records(std::istream& in) {
  CsvReader r{in};
  expect_header(r, 3, "trade");
  std::vector<TradeRecord> records;
  std::vector<std::string> fields;
  while (r.next(fields)) {
    if (fields.size() != 3 || fields[0].empty() || fields[1].empty()) fail(r.line_no, "expected \"exporter,importer,value\"");
    const double v = parse_double(fields[2], r.line_no);
    if (v < 0.0) fail(r.line_no, "trade value is negative");
    records.push_back({fields[0], fields[1], v});
  }
  return records;
}

std::vector<Reaction> read_reactions(std::istream& in) {
  CsvReader r{in};
  expect_header(r, 3, "reaction");
  std::vector<Reaction> reactions;
  std::vector<std::string> fields;
  while (r.next(fields)) {
    if (fields.size() != 3 || fields[0].empty()) fail(r.line_no, "expected \"enzyme,substrates,products\"");
    reactions.push_back({fields[0], split_list(fields[1]), split_list(fields[2])});
  }
  return reactions;
}

void write_enrichment(std::ostream& out, const std::vector<EnrichmentRow>& rows) {
  out << "cluster,term,X,N,K,M,p,enriched\n";
  const auto old = out.precision(17);
  for (const auto& r : rows)
    out << r.cluster << ',' << r.term << ',' << r.x << ',' << r.n << ',' << r.k << ',' << r.m << ',' << r.p << ','
        << (r.enriched ? 1 : 0) << '\n';
  out.precision(old);
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  return out;
}

}  // namespace dgl
