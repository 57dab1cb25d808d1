#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dgl/counting.hpp"
#include "dgl/enrichment.hpp"
#include "dgl/graph.hpp"

// Plain comma-separated tables with a header row. Fields are trimmed and
// cannot contain commas. Malformed input raises InputError with a line number.

namespace dgl {

std::vector<std::string> split_csv_line(const std::string& line);

/// Header "node,o0,...,o<k-1>"; one row per node in id order.
void write_signatures_csv(std::ostream& out, const SignatureMatrix& s, const DirectedGraph& g);

struct NumericTable {
  std::vector<std::string> ids;      // first column
  std::vector<std::string> columns;  // remaining header fields
  Eigen::MatrixXd values;
  std::vector<std::string> dropped;  // ids of rows with missing values ("" or NA)
};

NumericTable read_numeric_table(std::istream& in);
NumericTable load_numeric_table(const std::filesystem::path& path);
void write_numeric_table(std::ostream& out, const std::string& id_header, const std::vector<std::string>& ids,
                         const std::vector<std::string>& columns, const Eigen::MatrixXd& values);

/// Header "entity,<term>,..." with 0/1 entries.
AnnotationTable read_annotations(std::istream& in);
/// Header "entity,cluster".
Clustering read_clustering(std::istream& in);
void write_clustering(std::ostream& out, const Clustering& c);
/// Header "exporter,importer,value".
std::vector<TradeRecord> read_trade_records(std::istream& in);
/// Header "enzyme,substrates,products"; metabolites separated by ';'.
std::vector<Reaction> read_reactions(std::istream& in);

/// Header "cluster,term,X,N,K,M,p,enriched".
void write_enrichment(std::ostream& out, const std::vector<EnrichmentRow>& rows);

std::ifstream open_input(const std::filesystem::path& path);
std::ofstream open_output(const std::filesystem::path& path);

}  // namespace dgl
