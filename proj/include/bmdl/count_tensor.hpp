#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bmdl {

/// Genes x samples count matrix stored by sample column: for sample j the
/// non-zero entries are `gene[col_start[j] .. col_start[j+1])` with matching `count`.
struct SparseCounts {
  std::size_t num_genes = 0;
  std::vector<std::size_t> col_start{0};
  std::vector<std::int32_t> gene;
  std::vector<std::int64_t> count;

  std::size_t num_samples() const { return col_start.size() - 1; }
  std::size_t nnz() const { return count.size(); }

  std::span<const std::int32_t> genes_of(std::size_t j) const {
    return {gene.data() + col_start[j], col_start[j + 1] - col_start[j]};
  }
  std::span<const std::int64_t> counts_of(std::size_t j) const {
    return {count.data() + col_start[j], col_start[j + 1] - col_start[j]};
  }

  std::int64_t sample_total(std::size_t j) const;
  std::vector<std::int64_t> gene_totals() const;
  std::int64_t at(std::size_t v, std::size_t j) const;

  /// Dense genes x samples values, row-major by gene ( [v][j] ).
  static SparseCounts from_dense(const std::vector<std::vector<std::int64_t>>& by_gene);

  /// Approximate heap footprint of the stored entries.
  std::size_t memory_bytes() const;

  /// Appends a sample column; entries with count 0 are dropped.
  void push_sample(std::span<const std::int32_t> genes, std::span<const std::int64_t> counts);
};

struct DomainData {
  std::string name;
  std::vector<std::string> sample_ids;
  SparseCounts counts;
  std::optional<std::vector<int>> labels;
  /// Gene axis as ingested; empty means "same as the tensor's".
  std::vector<std::string> gene_ids;
};

/// Ragged 3-way count data: domains x shared genes x per-domain samples.
struct CountTensor {
  std::vector<std::string> gene_ids;
  std::vector<DomainData> domains;

  std::size_t num_domains() const { return domains.size(); }
  std::size_t num_genes() const { return gene_ids.size(); }
  std::size_t num_samples(std::size_t d) const { return domains[d].counts.num_samples(); }
  std::size_t total_samples() const;

  /// Single-domain tensor holding only domain `d`.
  CountTensor restrict_to(std::size_t d) const;

  /// FNV-1a digest of shape, ids, and every stored entry.
  std::uint64_t fingerprint() const;
};

struct Violation {
  enum class Kind { EmptyTensor, EmptyDomain, GeneAxisMismatch, NegativeCount, ZeroStored,
                    IndexOutOfRange, IdCountMismatch, LabelCoverage, Unsorted };
  Kind kind;
  std::string message;
  std::optional<std::size_t> domain;
  std::optional<std::size_t> gene;
  std::optional<std::size_t> sample;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  std::string to_string() const;
};

ValidationReport validate(const CountTensor& tensor);

}  // namespace bmdl
