#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>

#include "swcrt/design.hpp"
#include "swcrt/dgp.hpp"

namespace swcrt {

// Ingested trial outcomes, already relabeled so that cluster c belongs to
// sequence ((c-1) mod Q)+1 (the builder's round-robin order). Individual-level
// files keep the per-individual matrix so pooled REML can use within-cell
// contrasts; pre-aggregated files carry means only.
struct IngestedData {
  DesignSpec design;
  Eigen::MatrixXd cell_means;                 // I x J
  std::optional<Eigen::MatrixXd> individuals; // (I*J) x K when available

  TrialData as_trial() const;  // requires individuals
};

// CSV with header either (cluster, period, outcome[, sequence]) for
// individual rows or (cluster, period, mean, n[, sequence]) pre-aggregated.
// The panel must be complete and balanced: every cluster-period cell present
// with the same cell count.
IngestedData read_trial_csv(const std::string& path, int expected_periods,
                            std::optional<int> expected_clusters = std::nullopt);

// Writes a dataset in the individual-level ingestion format.
void write_trial_csv(const TrialData& trial, const DesignSpec& design,
                     const std::string& path);

}  // namespace swcrt
