#include "swcrt/data_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "swcrt/csv.hpp"

namespace swcrt {

TrialData IngestedData::as_trial() const {
  if (!individuals) throw SchemaError("individual-level outcomes are not available");
  TrialData t;
  t.cell_means = cell_means;
  t.individuals = *individuals;
  t.cell_size = static_cast<int>(individuals->cols());
  return t;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    while (!field.empty() && (field.back() == '\r' || field.back() == ' '))
      field.pop_back();
    while (!field.empty() && field.front() == ' ') field.erase(field.begin());
    out.push_back(field);
  }
  return out;
}

int column_of(const std::vector<std::string>& header, const std::string& name) {
  for (size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

struct RawRow {
  int cluster, period;
  double a, b;  // outcome | (mean, n)
  int sequence;
};

}  // namespace

IngestedData read_trial_csv(const std::string& path, int expected_periods,
                            std::optional<int> expected_clusters) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read data file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("empty data file");
  const auto header = split_line(line);

  const int c_cluster = column_of(header, "cluster");
  const int c_period = column_of(header, "period");
  const int c_outcome = column_of(header, "outcome");
  const int c_mean = column_of(header, "mean");
  const int c_n = column_of(header, "n");
  const int c_seq = column_of(header, "sequence");
  if (c_cluster < 0 || c_period < 0)
    throw SchemaError("data file needs 'cluster' and 'period' columns");
  const bool individual = c_outcome >= 0;
  if (!individual && (c_mean < 0 || c_n < 0))
    throw SchemaError("data file needs either an 'outcome' column or 'mean' and 'n'");

  std::vector<RawRow> raw;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto f = split_line(line);
    if (static_cast<int>(f.size()) < static_cast<int>(header.size()))
      throw SchemaError("line " + std::to_string(line_no) + ": too few fields");
    RawRow r{};
    try {
      r.cluster = std::stoi(f[c_cluster]);
      r.period = std::stoi(f[c_period]);
      r.a = individual ? std::stod(f[c_outcome]) : std::stod(f[c_mean]);
      r.b = individual ? 0.0 : std::stod(f[c_n]);
      r.sequence = c_seq >= 0 ? std::stoi(f[c_seq]) : 0;
    } catch (const std::exception&) {
      throw SchemaError("line " + std::to_string(line_no) + ": malformed value");
    }
    raw.push_back(r);
  }
  if (raw.empty()) throw SchemaError("data file has no rows");

  std::map<int, int> cluster_seq;  // declared sequence per cluster (0 = unknown)
  int max_period = 0;
  for (const auto& r : raw) {
    if (r.period < 1) throw SchemaError("periods must be 1-based positive");
    if (r.cluster < 1) throw SchemaError("clusters must be 1-based positive");
    max_period = std::max(max_period, r.period);
    auto [it, inserted] = cluster_seq.emplace(r.cluster, r.sequence);
    if (!inserted && it->second != r.sequence)
      throw SchemaError("cluster " + std::to_string(r.cluster) +
                        " has conflicting sequence labels");
  }
  const int J = expected_periods;
  if (max_period > J)
    throw UnbalancedPanel("data has period " + std::to_string(max_period) +
                          " beyond J=" + std::to_string(J));
  const int I = static_cast<int>(cluster_seq.size());
  if (expected_clusters && I != *expected_clusters)
    throw UnbalancedPanel("data has " + std::to_string(I) + " clusters, expected " +
                          std::to_string(*expected_clusters));
  const int Q = J - 1;
  if (I % Q != 0)
    throw UnbalancedPanel("cluster count " + std::to_string(I) +
                          " is not a multiple of Q=" + std::to_string(Q));

  // map input cluster labels onto the round-robin order used by build_design:
  // the k-th cluster of sequence q becomes internal cluster (k-1)*Q + q
  std::vector<std::pair<int, int>> labels;  // (input label, sequence)
  for (const auto& [label, seq] : cluster_seq) {
    int q = seq;
    if (q == 0) q = ((label - 1) % Q) + 1;  // no sequence column: positional
    if (q < 1 || q > Q)
      throw SchemaError("cluster " + std::to_string(label) + " has sequence " +
                        std::to_string(q) + " outside 1.." + std::to_string(Q));
    labels.emplace_back(label, q);
  }
  std::map<int, int> internal_index;  // input label -> 0-based internal cluster
  {
    std::vector<int> seq_count(Q + 1, 0);
    for (const auto& [label, q] : labels) {
      internal_index[label] = seq_count[q] * Q + (q - 1);
      ++seq_count[q];
    }
    for (int q = 1; q <= Q; ++q)
      if (seq_count[q] != I / Q)
        throw UnbalancedPanel("sequence " + std::to_string(q) + " has " +
                              std::to_string(seq_count[q]) + " clusters, expected " +
                              std::to_string(I / Q));
  }

  std::map<std::pair<int, int>, std::vector<double>> cells;
  for (const auto& r : raw)
    cells[{internal_index.at(r.cluster), r.period - 1}].push_back(
        individual ? r.a : r.a);

  IngestedData data;
  if (individual) {
    int K = -1;
    for (int c = 0; c < I; ++c)
      for (int j = 0; j < J; ++j) {
        auto it = cells.find({c, j});
        if (it == cells.end())
          throw UnbalancedPanel("missing cluster-period cell (internal cluster " +
                                std::to_string(c + 1) + ", period " +
                                std::to_string(j + 1) + ")");
        if (K < 0) K = static_cast<int>(it->second.size());
        else if (static_cast<int>(it->second.size()) != K)
          throw UnbalancedPanel("unequal cell sizes (engine requires balance)");
      }
    data.design = build_design(I, J, K);
    data.cell_means.resize(I, J);
    data.individuals = Eigen::MatrixXd(I * J, K);
    for (int c = 0; c < I; ++c)
      for (int j = 0; j < J; ++j) {
        const auto& v = cells.at({c, j});
        for (int k = 0; k < K; ++k) (*data.individuals)(c * J + j, k) = v[k];
        data.cell_means(c, j) = data.individuals->row(c * J + j).mean();
      }
  } else {
    double n_common = -1.0;
    for (const auto& r : raw) {
      if (cells.at({internal_index.at(r.cluster), r.period - 1}).size() != 1)
        throw UnbalancedPanel("duplicate pre-aggregated cell for cluster " +
                              std::to_string(r.cluster));
      if (n_common < 0) n_common = r.b;
      else if (r.b != n_common)
        throw UnbalancedPanel("unequal cell sizes (engine requires balance)");
    }
    if (!(n_common >= 1.0) || n_common != std::floor(n_common))
      throw SchemaError("'n' must be a positive integer");
    data.design = build_design(I, J, static_cast<int>(n_common));
    data.cell_means.resize(I, J);
    for (int c = 0; c < I; ++c)
      for (int j = 0; j < J; ++j) {
        auto it = cells.find({c, j});
        if (it == cells.end())
          throw UnbalancedPanel("missing cluster-period cell (internal cluster " +
                                std::to_string(c + 1) + ", period " +
                                std::to_string(j + 1) + ")");
        data.cell_means(c, j) = it->second.front();
      }
  }
  return data;
}

void write_trial_csv(const TrialData& trial, const DesignSpec& design,
                     const std::string& path) {
  CsvWriter csv(path);
  csv.header({"cluster", "period", "outcome", "sequence"});
  for (int c = 1; c <= design.n_clusters; ++c)
    for (int j = 1; j <= design.n_periods; ++j) {
      const int row = (c - 1) * design.n_periods + (j - 1);
      for (int k = 0; k < trial.cell_size; ++k) {
        csv.field(c);
        csv.field(j);
        csv.field(trial.individuals(row, k));
        csv.field(sequence_of_cluster(design, c));
        csv.end_row();
      }
    }
}

}  // namespace swcrt
