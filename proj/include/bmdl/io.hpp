#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bmdl/chain.hpp"
#include "bmdl/count_tensor.hpp"
#include "bmdl/features.hpp"
#include "bmdl/synth.hpp"

namespace bmdl::io {

namespace fs = std::filesystem;

/// Genes x samples count matrix as stored on disk.
struct CountMatrix {
  std::vector<std::string> gene_ids;
  std::vector<std::string> sample_ids;
  SparseCounts counts;  // num_genes == gene_ids.size()
};

/// Tab-delimited: first row is a corner cell followed by sample ids; each
/// further row is a gene id followed by one non-negative integer per sample.
/// Parsed line by line; only non-zero cells are kept.
CountMatrix parse_count_matrix(std::istream& in);
CountMatrix load_count_matrix(const fs::path& path);
std::string format_count_matrix(const CountMatrix& m);
void write_count_matrix(const fs::path& path, const CountMatrix& m);

/// Two columns `sample_id<TAB>label` after a header line.
std::map<std::string, int> load_labels(const fs::path& path);
void write_labels(const fs::path& path, const std::vector<std::string>& ids,
                  const std::vector<int>& labels);

struct DomainEntry {
  std::string name;
  fs::path counts;
  bool target = false;
  std::optional<fs::path> labels;
};

/// JSON manifest:
///   {"domains": [{"name": .., "counts": .., "role": "source"|"target", "labels": ..}],
///    "min_total_count": 50, "gene_allowlist": "genes.txt"}
/// Relative paths resolve against the manifest's directory.
struct DomainManifest {
  std::vector<DomainEntry> domains;
  std::int64_t min_total_count = 50;  // 0 disables the filter
  std::optional<fs::path> gene_allowlist;

  void validate() const;  // exactly one target, paths exist
  std::size_t target_index() const;
};

DomainManifest load_manifest(const fs::path& path);
std::string format_manifest(const DomainManifest& m, const fs::path& relative_to = {});

struct DroppedGene {
  std::string gene;
  std::string reason;  // "not in every domain", "not in allowlist", "total count < N"
};

struct Assembled {
  CountTensor tensor;
  std::size_t target_index = 0;
  std::vector<DroppedGene> dropped;
};

/// Intersects gene sets (sorted), applies the allowlist and the total-count
/// filter, attaches labels. Throws DataError on an empty result.
Assembled assemble(const DomainManifest& manifest);
Assembled assemble(std::vector<CountMatrix> matrices, const std::vector<std::string>& names,
                   std::size_t target_index, std::int64_t min_total_count,
                   const std::vector<std::optional<std::map<std::string, int>>>& labels = {},
                   const std::optional<std::vector<std::string>>& allowlist = std::nullopt);

/// Header `sample_id[<TAB>label]<TAB>0<TAB>1...`; values printed with %.17g.
std::string format_features(const FeatureMatrix& f);
FeatureMatrix parse_features(std::istream& in);
void write_features(const fs::path& path, const FeatureMatrix& f);
FeatureMatrix load_features(const fs::path& path);

/// Real matrix with row and column ids, %.17g values.
std::string format_table(const Eigen::MatrixXd& m, const std::vector<std::string>& row_ids,
                         const std::vector<std::string>& col_ids, const std::string& corner = "id");

/// phi_mean.tsv, r_mean.tsv, r_last.tsv, z_activation.tsv, log_joint.tsv, summary.json.
void write_summary(const fs::path& dir, const PosteriorSummary& summary,
                   const std::vector<std::string>& gene_ids,
                   const std::vector<std::string>& domain_names);

/// counts/labels per domain plus test split, manifest.json and truth.json.
void write_synth_dataset(const fs::path& dir, const SynthDataset& data);

/// Shared record attached to every output.
struct Provenance {
  std::string command;
  std::string config_json;  // canonical dump of the effective configuration
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> inputs;   // (path, fingerprint)
  std::vector<std::string> outputs;
  std::vector<std::string> history;  // earlier commands the outputs depend on, oldest first
};

std::uint64_t config_hash(const std::string& canonical_json);
std::string format_provenance(const Provenance& p);
void write_provenance(const fs::path& path, const Provenance& p);

/// Library version string.
const char* version();

}  // namespace bmdl::io
