#include "bmdl/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>
#include <unordered_map>

#include "bmdl/atomic_file.hpp"
#include "bmdl/error.hpp"
#include "bmdl/serialize.hpp"

namespace bmdl::io {

using nlohmann::json;

namespace {

void split_tabs(const std::string& line, std::vector<std::string_view>& out) {
  out.clear();
  std::size_t start = 0;
  std::string_view sv(line);
  while (true) {
    const auto pos = sv.find('\t', start);
    if (pos == std::string_view::npos) {
      out.push_back(sv.substr(start));
      return;
    }
    out.push_back(sv.substr(start, pos - start));
    start = pos + 1;
  }
}

bool read_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

}  // namespace

CountMatrix parse_count_matrix(std::istream& in) {
  CountMatrix m;
  std::string line;
  std::vector<std::string_view> cells;
  std::size_t lineno = 0;

  while (read_line(in, line)) {
    ++lineno;
    if (!line.empty()) break;
  }
  if (line.empty()) throw ParseError("count matrix has no header row", lineno == 0 ? 1 : lineno);
  split_tabs(line, cells);
  if (cells.size() < 2) throw ParseError("header row has no sample ids", lineno);
  std::set<std::string_view> seen_samples;
  for (std::size_t c = 1; c < cells.size(); ++c) {
    if (cells[c].empty()) throw ParseError("empty sample id", lineno, c + 1);
    m.sample_ids.emplace_back(cells[c]);
  }
  {
    std::set<std::string> uniq(m.sample_ids.begin(), m.sample_ids.end());
    if (uniq.size() != m.sample_ids.size()) throw ParseError("duplicate sample id", lineno);
  }
  const std::size_t J = m.sample_ids.size();

  // Per-sample (gene, count) lists; rows arrive in gene order so each stays sorted.
  std::vector<std::vector<std::pair<std::int32_t, std::int64_t>>> by_sample(J);
  std::unordered_map<std::string, std::size_t> gene_line;
  while (read_line(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    split_tabs(line, cells);
    if (cells.size() != J + 1)
      throw ParseError("expected " + std::to_string(J + 1) + " fields, found " +
                           std::to_string(cells.size()),
                       lineno);
    std::string gene(cells[0]);
    if (gene.empty()) throw ParseError("empty gene id", lineno, 1);
    const auto [it, fresh] = gene_line.emplace(gene, lineno);
    if (!fresh)
      throw ParseError("duplicate gene id '" + gene + "' (first seen on line " +
                           std::to_string(it->second) + ")",
                       lineno, 1);
    const auto v = static_cast<std::int32_t>(m.gene_ids.size());
    m.gene_ids.push_back(std::move(gene));
    for (std::size_t c = 1; c <= J; ++c) {
      const auto cell = cells[c];
      std::int64_t value = 0;
      const auto* end = cell.data() + cell.size();
      const auto res = std::from_chars(cell.data(), end, value);
      if (cell.empty() || res.ec != std::errc() || res.ptr != end)
        throw ParseError("not an integer count: '" + std::string(cell) + "'", lineno, c + 1);
      if (value < 0) throw ParseError("negative count " + std::string(cell), lineno, c + 1);
      if (value > 0) by_sample[c - 1].emplace_back(v, value);
    }
  }

  m.counts.num_genes = m.gene_ids.size();
  std::size_t nnz = 0;
  for (const auto& s : by_sample) nnz += s.size();
  m.counts.gene.reserve(nnz);
  m.counts.count.reserve(nnz);
  for (auto& s : by_sample) {
    for (const auto& [g, n] : s) {
      m.counts.gene.push_back(g);
      m.counts.count.push_back(n);
    }
    m.counts.col_start.push_back(m.counts.count.size());
    s.clear();
    s.shrink_to_fit();
  }
  return m;
}

CountMatrix load_count_matrix(const fs::path& path) {
  auto in = open_in(path);
  try {
    return parse_count_matrix(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.detail(), e.line(), e.column());
  }
}

std::string format_count_matrix(const CountMatrix& m) {
  std::string out = "gene";
  for (const auto& s : m.sample_ids) out += '\t' + s;
  out += '\n';
  // Row-major view of the sample-major storage.
  const std::size_t V = m.gene_ids.size(), J = m.sample_ids.size();
  std::vector<std::size_t> cursor(m.counts.col_start.begin(), m.counts.col_start.end() - 1);
  for (std::size_t v = 0; v < V; ++v) {
    out += m.gene_ids[v];
    for (std::size_t j = 0; j < J; ++j) {
      std::int64_t n = 0;
      auto& c = cursor[j];
      if (c < m.counts.col_start[j + 1] && static_cast<std::size_t>(m.counts.gene[c]) == v) n = m.counts.count[c++];
      out += '\t';
      out += std::to_string(n);
    }
    out += '\n';
  }
  return out;
}

void write_count_matrix(const fs::path& path, const CountMatrix& m) {
  write_atomic(path, format_count_matrix(m));
}

std::map<std::string, int> load_labels(const fs::path& path) {
  auto in = open_in(path);
  std::map<std::string, int> out;
  std::string line;
  std::vector<std::string_view> cells;
  std::size_t lineno = 0;
  bool header = true;
  while (read_line(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    split_tabs(line, cells);
    if (cells.size() != 2)
      throw ParseError(path.string() + ": expected sample_id and label", lineno);
    int label = 0;
    const auto* end = cells[1].data() + cells[1].size();
    const auto res = std::from_chars(cells[1].data(), end, label);
    if (cells[1].empty() || res.ec != std::errc() || res.ptr != end)
      throw ParseError(path.string() + ": label is not an integer", lineno, 2);
    if (!out.emplace(std::string(cells[0]), label).second)
      throw ParseError(path.string() + ": duplicate sample id", lineno, 1);
  }
  return out;
}

void write_labels(const fs::path& path, const std::vector<std::string>& ids,
                  const std::vector<int>& labels) {
  if (ids.size() != labels.size()) throw DataError("ids and labels differ in length");
  std::string out = "sample_id\tlabel\n";
  for (std::size_t i = 0; i < ids.size(); ++i) out += ids[i] + '\t' + std::to_string(labels[i]) + '\n';
  write_atomic(path, out);
}

void DomainManifest::validate() const {
  if (domains.empty()) throw DataError("manifest lists no domains");
  std::size_t targets = 0;
  std::set<std::string> names;
  for (const auto& d : domains) {
    if (d.target) ++targets;
    if (!names.insert(d.name).second) throw DataError("duplicate domain name " + d.name);
    if (!fs::exists(d.counts)) throw DataError("count matrix not found: " + d.counts.string());
    if (d.labels && !fs::exists(*d.labels)) throw DataError("labels not found: " + d.labels->string());
  }
  if (targets != 1) throw DataError("manifest must name exactly one target domain");
  if (gene_allowlist && !fs::exists(*gene_allowlist))
    throw DataError("gene allowlist not found: " + gene_allowlist->string());
  if (min_total_count < 0) throw DataError("min_total_count must be non-negative");
}

std::size_t DomainManifest::target_index() const {
  for (std::size_t i = 0; i < domains.size(); ++i)
    if (domains[i].target) return i;
  throw DataError("manifest has no target domain");
}

DomainManifest load_manifest(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": invalid manifest JSON: " + e.what());
  }
  const fs::path base = path.parent_path();
  auto resolve = [&](const std::string& p) {
    fs::path q(p);
    return q.is_absolute() ? q : base / q;
  };
  DomainManifest m;
  try {
    for (const auto& d : j.at("domains")) {
      DomainEntry e;
      e.name = d.at("name").get<std::string>();
      e.counts = resolve(d.at("counts").get<std::string>());
      const std::string role = d.value("role", "source");
      if (role != "source" && role != "target") throw DataError("unknown domain role '" + role + "'");
      e.target = role == "target";
      if (d.contains("labels") && !d.at("labels").is_null())
        e.labels = resolve(d.at("labels").get<std::string>());
      m.domains.push_back(std::move(e));
    }
    m.min_total_count = j.value("min_total_count", std::int64_t{50});
    if (j.contains("gene_allowlist") && !j.at("gene_allowlist").is_null())
      m.gene_allowlist = resolve(j.at("gene_allowlist").get<std::string>());
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": malformed manifest: " + e.what());
  }
  m.validate();
  return m;
}

std::string format_manifest(const DomainManifest& m, const fs::path& relative_to) {
  auto rel = [&](const fs::path& p) {
    return relative_to.empty() ? p.string() : p.lexically_relative(relative_to).string();
  };
  json domains = json::array();
  for (const auto& d : m.domains) {
    json e{{"name", d.name}, {"counts", rel(d.counts)}, {"role", d.target ? "target" : "source"}};
    if (d.labels) e["labels"] = rel(*d.labels);
    domains.push_back(e);
  }
  json j{{"domains", domains}, {"min_total_count", m.min_total_count}};
  if (m.gene_allowlist) j["gene_allowlist"] = rel(*m.gene_allowlist);
  return j.dump(2) + "\n";
}

Assembled assemble(std::vector<CountMatrix> matrices, const std::vector<std::string>& names,
                   std::size_t target_index, std::int64_t min_total_count,
                   const std::vector<std::optional<std::map<std::string, int>>>& labels,
                   const std::optional<std::vector<std::string>>& allowlist) {
  if (matrices.empty()) throw DataError("no domains to assemble");
  if (names.size() != matrices.size()) throw DataError("one name per domain required");
  if (target_index >= matrices.size()) throw DataError("target index out of range");
  if (!labels.empty() && labels.size() != matrices.size())
    throw DataError("labels must be given per domain");

  Assembled out;
  out.target_index = target_index;

  // Sorted intersection.
  std::set<std::string> common(matrices[0].gene_ids.begin(), matrices[0].gene_ids.end());
  std::set<std::string> all = common;
  for (std::size_t d = 1; d < matrices.size(); ++d) {
    std::set<std::string> genes(matrices[d].gene_ids.begin(), matrices[d].gene_ids.end());
    all.insert(genes.begin(), genes.end());
    std::set<std::string> next;
    std::set_intersection(common.begin(), common.end(), genes.begin(), genes.end(),
                          std::inserter(next, next.end()));
    common.swap(next);
  }
  for (const auto& g : all)
    if (!common.count(g)) out.dropped.push_back({g, "not in every domain"});
  if (common.empty()) throw DataError("gene sets of the domains do not intersect");

  if (allowlist) {
    const std::set<std::string> allow(allowlist->begin(), allowlist->end());
    for (auto it = common.begin(); it != common.end();) {
      if (!allow.count(*it)) {
        out.dropped.push_back({*it, "not in allowlist"});
        it = common.erase(it);
      } else {
        ++it;
      }
    }
  }

  // Cross-domain totals over the surviving genes.
  std::map<std::string, std::int64_t> totals;
  for (const auto& g : common) totals[g] = 0;
  for (const auto& m : matrices) {
    const auto t = m.counts.gene_totals();
    for (std::size_t v = 0; v < m.gene_ids.size(); ++v) {
      auto it = totals.find(m.gene_ids[v]);
      if (it != totals.end()) it->second += t[v];
    }
  }
  std::vector<std::string> kept;
  for (const auto& [g, total] : totals) {
    if (min_total_count > 0 && total < min_total_count)
      out.dropped.push_back({g, "total count < " + std::to_string(min_total_count)});
    else
      kept.push_back(g);
  }
  if (kept.empty()) throw DataError("no genes survive filtering");

  std::unordered_map<std::string, std::int32_t> new_index;
  for (std::size_t i = 0; i < kept.size(); ++i) new_index.emplace(kept[i], static_cast<std::int32_t>(i));
  out.tensor.gene_ids = kept;

  for (std::size_t d = 0; d < matrices.size(); ++d) {
    auto& m = matrices[d];
    std::vector<std::int32_t> remap(m.gene_ids.size(), -1);
    for (std::size_t v = 0; v < m.gene_ids.size(); ++v) {
      auto it = new_index.find(m.gene_ids[v]);
      if (it != new_index.end()) remap[v] = it->second;
    }
    DomainData dom;
    dom.name = names[d];
    dom.sample_ids = m.sample_ids;
    dom.counts.num_genes = kept.size();
    std::vector<std::pair<std::int32_t, std::int64_t>> entries;
    std::vector<std::int32_t> g;
    std::vector<std::int64_t> c;
    for (std::size_t j = 0; j < m.counts.num_samples(); ++j) {
      entries.clear();
      const auto genes = m.counts.genes_of(j);
      const auto counts = m.counts.counts_of(j);
      for (std::size_t i = 0; i < genes.size(); ++i) {
        const auto nv = remap[static_cast<std::size_t>(genes[i])];
        if (nv >= 0) entries.emplace_back(nv, counts[i]);
      }
      std::sort(entries.begin(), entries.end());
      g.clear();
      c.clear();
      for (const auto& [a, b] : entries) {
        g.push_back(a);
        c.push_back(b);
      }
      dom.counts.push_sample(g, c);
    }
    if (!labels.empty() && labels[d]) {
      std::vector<int> l;
      for (const auto& id : dom.sample_ids) {
        auto it = labels[d]->find(id);
        if (it == labels[d]->end())
          throw DataError("domain " + names[d] + ": no label for sample " + id);
        l.push_back(it->second);
      }
      dom.labels = std::move(l);
    }
    out.tensor.domains.push_back(std::move(dom));
    m = CountMatrix{};
  }
  return out;
}

Assembled assemble(const DomainManifest& manifest) {
  manifest.validate();
  std::vector<CountMatrix> matrices;
  std::vector<std::string> names;
  std::vector<std::optional<std::map<std::string, int>>> labels;
  for (const auto& d : manifest.domains) {
    matrices.push_back(load_count_matrix(d.counts));
    names.push_back(d.name);
    labels.push_back(d.labels ? std::optional(load_labels(*d.labels)) : std::nullopt);
  }
  std::optional<std::vector<std::string>> allow;
  if (manifest.gene_allowlist) {
    auto in = open_in(*manifest.gene_allowlist);
    std::vector<std::string> genes;
    std::string line;
    while (read_line(in, line))
      if (!line.empty()) genes.push_back(line);
    allow = std::move(genes);
  }
  return assemble(std::move(matrices), names, manifest.target_index(), manifest.min_total_count,
                  labels, allow);
}

std::string format_features(const FeatureMatrix& f) {
  const bool has_labels = f.labels.has_value();
  std::string out = "sample_id";
  if (has_labels) out += "\tlabel";
  for (int k = 0; k < f.num_factors(); ++k) out += '\t' + std::to_string(k);
  out += '\n';
  for (std::size_t j = 0; j < f.num_samples(); ++j) {
    out += j < f.sample_ids.size() ? f.sample_ids[j] : "sample" + std::to_string(j);
    if (has_labels) out += '\t' + std::to_string((*f.labels)[j]);
    for (int k = 0; k < f.num_factors(); ++k)
      out += '\t' + fmt(f.theta_bar(static_cast<Eigen::Index>(j), k));
    out += '\n';
  }
  return out;
}

FeatureMatrix parse_features(std::istream& in) {
  std::string line;
  std::vector<std::string_view> cells;
  std::size_t lineno = 0;
  if (!read_line(in, line)) throw ParseError("feature file is empty", 1);
  ++lineno;
  split_tabs(line, cells);
  if (cells.empty() || cells[0] != "sample_id") throw ParseError("header must start with sample_id", 1, 1);
  const bool has_labels = cells.size() > 1 && cells[1] == "label";
  const std::size_t first = has_labels ? 2 : 1;
  const std::size_t K = cells.size() - first;
  for (std::size_t c = first; c < cells.size(); ++c)
    if (cells[c] != std::to_string(c - first)) throw ParseError("factor header out of order", 1, c + 1);

  FeatureMatrix f;
  std::vector<double> values;
  std::vector<int> labels;
  while (read_line(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    split_tabs(line, cells);
    if (cells.size() != first + K) throw ParseError("wrong number of fields", lineno);
    f.sample_ids.emplace_back(cells[0]);
    if (has_labels) {
      int l = 0;
      const auto* end = cells[1].data() + cells[1].size();
      const auto res = std::from_chars(cells[1].data(), end, l);
      if (cells[1].empty() || res.ec != std::errc() || res.ptr != end)
        throw ParseError("label is not an integer", lineno, 2);
      labels.push_back(l);
    }
    for (std::size_t c = first; c < cells.size(); ++c) {
      const std::string cell(cells[c]);
      std::size_t used = 0;
      double x = 0;
      try {
        x = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != cell.size() || cell.empty()) throw ParseError("not a number: '" + cell + "'", lineno, c + 1);
      values.push_back(x);
    }
  }
  const auto J = static_cast<Eigen::Index>(f.sample_ids.size());
  f.theta_bar.resize(J, static_cast<Eigen::Index>(K));
  for (Eigen::Index j = 0; j < J; ++j)
    for (std::size_t k = 0; k < K; ++k)
      f.theta_bar(j, static_cast<Eigen::Index>(k)) = values[static_cast<std::size_t>(j) * K + k];
  if (has_labels) f.labels = std::move(labels);
  return f;
}

void write_features(const fs::path& path, const FeatureMatrix& f) { write_atomic(path, format_features(f)); }

FeatureMatrix load_features(const fs::path& path) {
  auto in = open_in(path);
  try {
    return parse_features(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.detail(), e.line(), e.column());
  }
}

std::string format_table(const Eigen::MatrixXd& m, const std::vector<std::string>& row_ids,
                         const std::vector<std::string>& col_ids, const std::string& corner) {
  std::string out = corner;
  for (const auto& c : col_ids) out += '\t' + c;
  out += '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    out += row_ids[static_cast<std::size_t>(r)];
    for (Eigen::Index c = 0; c < m.cols(); ++c) out += '\t' + fmt(m(r, c));
    out += '\n';
  }
  return out;
}

namespace {

std::vector<std::string> index_ids(Eigen::Index n, const std::string& prefix = "") {
  std::vector<std::string> ids;
  for (Eigen::Index i = 0; i < n; ++i) ids.push_back(prefix + std::to_string(i));
  return ids;
}

}  // namespace

void write_summary(const fs::path& dir, const PosteriorSummary& s,
                   const std::vector<std::string>& gene_ids,
                   const std::vector<std::string>& domain_names) {
  const auto K = s.phi_mean.cols();
  const auto factors = index_ids(K);
  write_atomic(dir / "phi_mean.tsv", format_table(s.phi_mean, gene_ids, factors, "gene"));
  write_atomic(dir / "r_mean.tsv", format_table(s.r_mean, factors, domain_names, "factor"));
  write_atomic(dir / "r_last.tsv", format_table(s.r_last, factors, domain_names, "factor"));
  write_atomic(dir / "z_activation.tsv", format_table(s.z_activation, factors, domain_names, "factor"));
  std::string trace = "iteration\tlog_joint\n";
  for (std::size_t i = 0; i < s.log_joint_trace.size(); ++i)
    trace += std::to_string(i + 1) + '\t' + fmt(s.log_joint_trace[i]) + '\n';
  write_atomic(dir / "log_joint.tsv", trace);
  json j{{"iterations", s.iterations},
         {"samples_collected", s.samples_collected},
         {"active_factor_count", s.active_factor_count},
         {"degenerate_entries", s.degenerate_entries},
         {"domains", domain_names},
         {"gamma0", s.final_state.gamma0},
         {"eta", s.final_state.eta},
         {"c0", s.final_state.c0}};
  write_atomic(dir / "summary.json", j.dump(2) + "\n");
}

void write_synth_dataset(const fs::path& dir, const SynthDataset& data) {
  DomainManifest manifest;
  manifest.min_total_count = 0;
  auto write_domain = [&](const DomainData& d) {
    CountMatrix m{data.tensor.gene_ids, d.sample_ids, d.counts};
    write_count_matrix(dir / (d.name + ".tsv"), m);
    if (d.labels) write_labels(dir / (d.name + "_labels.tsv"), d.sample_ids, *d.labels);
  };
  for (std::size_t i = 0; i < data.tensor.domains.size(); ++i) {
    const auto& d = data.tensor.domains[i];
    write_domain(d);
    manifest.domains.push_back({d.name, dir / (d.name + ".tsv"), i == data.target_index,
                                d.labels ? std::optional(dir / (d.name + "_labels.tsv")) : std::nullopt});
  }
  write_domain(data.test);
  write_atomic(dir / "manifest.json", format_manifest(manifest, dir));

  json truth = json::object();
  json domains = json::array();
  auto encode_truth = [](const SynthTruth& t) {
    return json{{"phi", json_codec::encode_matrix(t.phi)},       {"s", json_codec::encode_matrix(t.s)},
                {"r", json_codec::encode_matrix(t.r)},           {"theta", json_codec::encode_matrix(t.theta)},
                {"p", json_codec::encode_matrix(t.p)},           {"c_j", json_codec::encode_matrix(t.c_j)}};
  };
  for (std::size_t i = 0; i < data.truth.size(); ++i) {
    auto t = encode_truth(data.truth[i]);
    t["name"] = data.tensor.domains[i].name;
    domains.push_back(t);
  }
  truth["domains"] = domains;
  truth["test"] = encode_truth(data.test_truth);
  truth["target_index"] = data.target_index;
  truth["shared_source_column"] = data.shared_source_column;
  write_atomic(dir / "truth.json", truth.dump() + "\n");
}

std::uint64_t config_hash(const std::string& canonical_json) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical_json) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

const char* version() { return "0.1.0"; }

std::string format_provenance(const Provenance& p) {
  json inputs = json::array();
  for (const auto& [path, fp] : p.inputs) inputs.push_back({{"path", path}, {"fingerprint", fp}});
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config_hash(p.config_json)));
  json j{{"tool", "bmdl"},
         {"version", version()},
         {"command", p.command},
         {"config", json::parse(p.config_json)},
         {"config_hash", hash},
         {"seed", p.seed},
         {"inputs", inputs},
         {"outputs", p.outputs},
         {"history", p.history},
         {"build",
          {{"compiler", __VERSION__},
           {"cplusplus", static_cast<long>(__cplusplus)},
           {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                         std::to_string(EIGEN_MINOR_VERSION)}}}};
  return j.dump(2) + "\n";
}

void write_provenance(const fs::path& path, const Provenance& p) { write_atomic(path, format_provenance(p)); }

}  // namespace bmdl::io
