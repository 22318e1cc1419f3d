#include "bmdl/count_tensor.hpp"

#include <algorithm>
#include <sstream>

namespace bmdl {

namespace {

struct Fnv1a {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ULL;
    }
  }
  template <typename T>
  void value(const T& x) {
    bytes(&x, sizeof(T));
  }
  void text(const std::string& s) {
    value(s.size());
    bytes(s.data(), s.size());
  }
};

}  // namespace

std::int64_t SparseCounts::sample_total(std::size_t j) const {
  std::int64_t total = 0;
  for (auto c : counts_of(j)) total += c;
  return total;
}

std::vector<std::int64_t> SparseCounts::gene_totals() const {
  std::vector<std::int64_t> totals(num_genes, 0);
  for (std::size_t i = 0; i < gene.size(); ++i) totals[static_cast<std::size_t>(gene[i])] += count[i];
  return totals;
}

std::int64_t SparseCounts::at(std::size_t v, std::size_t j) const {
  const auto genes = genes_of(j);
  const auto it = std::lower_bound(genes.begin(), genes.end(), static_cast<std::int32_t>(v));
  if (it == genes.end() || *it != static_cast<std::int32_t>(v)) return 0;
  return counts_of(j)[static_cast<std::size_t>(it - genes.begin())];
}

SparseCounts SparseCounts::from_dense(const std::vector<std::vector<std::int64_t>>& by_gene) {
  SparseCounts out;
  out.num_genes = by_gene.size();
  const std::size_t samples = by_gene.empty() ? 0 : by_gene.front().size();
  for (std::size_t j = 0; j < samples; ++j) {
    for (std::size_t v = 0; v < by_gene.size(); ++v) {
      if (by_gene[v][j] != 0) {
        out.gene.push_back(static_cast<std::int32_t>(v));
        out.count.push_back(by_gene[v][j]);
      }
    }
    out.col_start.push_back(out.count.size());
  }
  return out;
}

std::size_t SparseCounts::memory_bytes() const {
  return col_start.capacity() * sizeof(std::size_t) + gene.capacity() * sizeof(std::int32_t) +
         count.capacity() * sizeof(std::int64_t);
}

void SparseCounts::push_sample(std::span<const std::int32_t> genes,
                               std::span<const std::int64_t> counts) {
  for (std::size_t i = 0; i < genes.size(); ++i) {
    if (counts[i] == 0) continue;
    gene.push_back(genes[i]);
    count.push_back(counts[i]);
  }
  col_start.push_back(count.size());
}

std::size_t CountTensor::total_samples() const {
  std::size_t n = 0;
  for (const auto& d : domains) n += d.counts.num_samples();
  return n;
}

CountTensor CountTensor::restrict_to(std::size_t d) const {
  CountTensor out;
  out.gene_ids = gene_ids;
  out.domains.push_back(domains.at(d));
  return out;
}

std::uint64_t CountTensor::fingerprint() const {
  Fnv1a h;
  h.value(gene_ids.size());
  for (const auto& g : gene_ids) h.text(g);
  h.value(domains.size());
  for (const auto& d : domains) {
    h.text(d.name);
    h.value(d.sample_ids.size());
    for (const auto& s : d.sample_ids) h.text(s);
    h.value(d.counts.num_genes);
    h.bytes(d.counts.col_start.data(), d.counts.col_start.size() * sizeof(std::size_t));
    h.bytes(d.counts.gene.data(), d.counts.gene.size() * sizeof(std::int32_t));
    h.bytes(d.counts.count.data(), d.counts.count.size() * sizeof(std::int64_t));
  }
  return h.h;
}

std::string ValidationReport::to_string() const {
  std::ostringstream out;
  for (const auto& v : violations) out << v.message << '\n';
  return out.str();
}

ValidationReport validate(const CountTensor& tensor) {
  ValidationReport report;
  auto add = [&](Violation::Kind kind, std::string msg, std::optional<std::size_t> d = {},
                 std::optional<std::size_t> v = {}, std::optional<std::size_t> j = {}) {
    report.violations.push_back({kind, std::move(msg), d, v, j});
  };

  if (tensor.domains.empty()) add(Violation::Kind::EmptyTensor, "tensor has no domains");
  if (tensor.gene_ids.empty()) add(Violation::Kind::EmptyTensor, "tensor has no genes");
  const std::size_t num_genes = tensor.gene_ids.size();

  for (std::size_t d = 0; d < tensor.domains.size(); ++d) {
    const auto& dom = tensor.domains[d];
    const auto& m = dom.counts;
    const std::string where = "domain " + std::to_string(d) + " (" + dom.name + ")";
    if (m.num_samples() == 0) add(Violation::Kind::EmptyDomain, where + " has no samples", d);
    if (!dom.gene_ids.empty() && dom.gene_ids != tensor.gene_ids)
      add(Violation::Kind::GeneAxisMismatch, where + " gene axis differs from the shared axis", d);
    if (m.num_genes != num_genes)
      add(Violation::Kind::GeneAxisMismatch,
          where + " stores " + std::to_string(m.num_genes) + " genes, expected " +
              std::to_string(num_genes),
          d);
    if (dom.sample_ids.size() != m.num_samples())
      add(Violation::Kind::IdCountMismatch, where + " sample id count differs from sample count", d);
    if (dom.labels && dom.labels->size() != m.num_samples())
      add(Violation::Kind::LabelCoverage, where + " labels do not cover every sample", d);
    if (m.gene.size() != m.count.size() || m.col_start.empty() || m.col_start.back() != m.count.size()) {
      add(Violation::Kind::IndexOutOfRange, where + " sparse index arrays are inconsistent", d);
      continue;
    }

    for (std::size_t j = 0; j < m.num_samples(); ++j) {
      const auto genes = m.genes_of(j);
      const auto counts = m.counts_of(j);
      for (std::size_t i = 0; i < genes.size(); ++i) {
        const auto v = static_cast<std::size_t>(genes[i]);
        if (genes[i] < 0 || v >= num_genes) {
          add(Violation::Kind::IndexOutOfRange, where + " gene index out of range", d, v, j);
          continue;
        }
        if (i > 0 && genes[i] <= genes[i - 1])
          add(Violation::Kind::Unsorted, where + " entries not strictly sorted by gene", d, v, j);
        if (counts[i] < 0)
          add(Violation::Kind::NegativeCount,
              "negative count " + std::to_string(counts[i]) + " at (d=" + std::to_string(d) +
                  ", v=" + std::to_string(v) + ", j=" + std::to_string(j) + ")",
              d, v, j);
        else if (counts[i] == 0)
          add(Violation::Kind::ZeroStored,
              "explicit zero stored at (d=" + std::to_string(d) + ", v=" + std::to_string(v) +
                  ", j=" + std::to_string(j) + ")",
              d, v, j);
      }
    }
  }
  return report;
}

}  // namespace bmdl
