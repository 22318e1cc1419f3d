#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "bmdl/chain.hpp"
#include "bmdl/error.hpp"
#include "bmdl/eval.hpp"
#include "bmdl/features.hpp"
#include "bmdl/io.hpp"
#include "bmdl/synth.hpp"
#include "cli.hpp"

namespace py = pybind11;
using namespace bmdl;

namespace {

using CountArray = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

SparseCounts to_sparse(const CountArray& dense) {
  if (dense.size() > 0 && dense.minCoeff() < 0) throw DataError("counts must be non-negative");
  SparseCounts s;
  s.num_genes = static_cast<std::size_t>(dense.rows());
  std::vector<std::int32_t> genes;
  std::vector<std::int64_t> counts;
  for (Eigen::Index j = 0; j < dense.cols(); ++j) {
    genes.clear();
    counts.clear();
    for (Eigen::Index v = 0; v < dense.rows(); ++v)
      if (dense(v, j) > 0) {
        genes.push_back(static_cast<std::int32_t>(v));
        counts.push_back(dense(v, j));
      }
    s.push_sample(genes, counts);
  }
  return s;
}

CountArray to_dense(const SparseCounts& s) {
  CountArray out = CountArray::Zero(static_cast<Eigen::Index>(s.num_genes), static_cast<Eigen::Index>(s.num_samples()));
  for (std::size_t j = 0; j < s.num_samples(); ++j) {
    const auto g = s.genes_of(j);
    const auto c = s.counts_of(j);
    for (std::size_t i = 0; i < g.size(); ++i) out(g[i], static_cast<Eigen::Index>(j)) = c[i];
  }
  return out;
}

// Domains given as genes x samples arrays over a common gene axis.
CountTensor make_tensor(const std::vector<CountArray>& domains) {
  if (domains.empty()) throw DataError("at least one domain is required");
  CountTensor t;
  const auto V = domains.front().rows();
  for (Eigen::Index v = 0; v < V; ++v) t.gene_ids.push_back("gene" + std::to_string(v));
  for (std::size_t d = 0; d < domains.size(); ++d) {
    if (domains[d].rows() != V) throw DataError("every domain needs the same number of genes");
    DomainData dom;
    dom.name = "domain" + std::to_string(d);
    dom.counts = to_sparse(domains[d]);
    for (Eigen::Index j = 0; j < domains[d].cols(); ++j) dom.sample_ids.push_back(dom.name + "_" + std::to_string(j));
    t.domains.push_back(std::move(dom));
  }
  return t;
}

py::dict summary_dict(const PosteriorSummary& s) {
  py::dict d;
  d["phi_mean"] = s.phi_mean;
  d["r_mean"] = s.r_mean;
  d["s_mean"] = s.s_mean;
  d["z_activation"] = s.z_activation;
  d["r_last"] = s.r_last;
  d["log_joint_trace"] = s.log_joint_trace;
  d["active_factor_count"] = s.active_factor_count;
  d["samples_collected"] = s.samples_collected;
  d["iterations"] = s.iterations;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Multi-domain negative binomial factor analysis";

  py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

  py::class_<Hyperparameters>(m, "Hyperparameters")
      .def(py::init<>())
      .def_readwrite("K", &Hyperparameters::K)
      .def_readwrite("a0", &Hyperparameters::a0)
      .def_readwrite("b0", &Hyperparameters::b0)
      .def_readwrite("e0", &Hyperparameters::e0)
      .def_readwrite("f0", &Hyperparameters::f0)
      .def_readwrite("h0", &Hyperparameters::h0)
      .def_readwrite("u0", &Hyperparameters::u0)
      .def_readwrite("s0", &Hyperparameters::s0)
      .def_readwrite("w0", &Hyperparameters::w0)
      .def_readwrite("t0", &Hyperparameters::t0)
      .def_readwrite("c_ibp", &Hyperparameters::c_ibp)
      .def_readwrite("crt_cutoff", &Hyperparameters::crt_cutoff)
      .def("validate", &Hyperparameters::validate);

  py::class_<ChainConfig>(m, "ChainConfig")
      .def(py::init<>())
      .def_readwrite("iterations", &ChainConfig::iterations)
      .def_readwrite("burn_in", &ChainConfig::burn_in)
      .def_readwrite("thin", &ChainConfig::thin)
      .def_readwrite("collect_log_joint", &ChainConfig::collect_log_joint)
      .def_readwrite("resample_pi", &ChainConfig::resample_pi)
      .def_readwrite("resample_scales", &ChainConfig::resample_scales)
      .def_property(
          "init", [](const ChainConfig& c) { return std::string(to_string(c.init)); },
          [](ChainConfig& c, const std::string& s) { c.init = parse_init_strategy(s); })
      .def("validate", &ChainConfig::validate);

  py::class_<SynthConfig>(m, "SynthConfig")
      .def(py::init<>())
      .def_readwrite("num_features", &SynthConfig::num_features)
      .def_readwrite("factors_per_domain", &SynthConfig::factors_per_domain)
      .def_readwrite("shared_factors", &SynthConfig::shared_factors)
      .def_readwrite("source_samples", &SynthConfig::source_samples)
      .def_readwrite("target_samples", &SynthConfig::target_samples)
      .def_readwrite("test_samples", &SynthConfig::test_samples)
      .def_readwrite("balanced", &SynthConfig::balanced)
      .def_readwrite("class_scale_a", &SynthConfig::class_scale_a)
      .def_readwrite("class_scale_scale", &SynthConfig::class_scale_scale)
      .def_readwrite("dirichlet_eta", &SynthConfig::dirichlet_eta)
      .def_readwrite("gamma0", &SynthConfig::gamma0)
      .def_readwrite("c0", &SynthConfig::c0)
      .def_readwrite("c_d", &SynthConfig::c_d)
      .def_readwrite("p_beta", &SynthConfig::p_beta)
      .def_readwrite("seed", &SynthConfig::seed);

  m.def(
      "generate",
      [](const SynthConfig& config) {
        const auto data = generate(config);
        py::list domains, labels, phi;
        for (std::size_t d = 0; d < data.tensor.num_domains(); ++d) {
          domains.append(to_dense(data.tensor.domains[d].counts));
          labels.append(data.tensor.domains[d].labels ? py::cast(*data.tensor.domains[d].labels) : py::none());
          phi.append(data.truth[d].phi);
        }
        py::dict out;
        out["domains"] = domains;
        out["labels"] = labels;
        out["true_phi"] = phi;
        out["target_index"] = data.target_index;
        out["test_counts"] = to_dense(data.test.counts);
        out["test_labels"] = *data.test.labels;
        out["shared_mask"] = data.shared_mask;
        return out;
      },
      py::arg("config"), "Synthetic dataset as dense genes x samples count arrays.");

  m.def(
      "fit",
      [](const std::vector<CountArray>& domains, const Hyperparameters& hp, const std::string& variant,
         const ChainConfig& config, std::uint64_t seed) {
        const auto tensor = make_tensor(domains);
        RandomStream rng(seed);
        PosteriorSummary s;
        {
          py::gil_scoped_release release;
          s = run_chain(tensor, hp, parse_variant(variant), config, rng);
        }
        return summary_dict(s);
      },
      py::arg("domains"), py::arg("hp") = Hyperparameters{}, py::arg("variant") = "bmdl",
      py::arg("config") = ChainConfig{}, py::arg("seed") = 1,
      "Runs one chain over domains given as genes x samples count arrays.");

  m.def(
      "extract",
      [](const CountArray& counts, const Eigen::MatrixXd& phi, const Eigen::VectorXd& r_target,
         const Hyperparameters& hp, const std::string& variant, int iterations, int collect_last,
         std::uint64_t seed) {
        FrozenFactors f;
        f.phi = phi;
        f.r_target = r_target;
        f.hp = hp;
        f.variant = parse_variant(variant);
        const auto samples = to_sparse(counts);
        FeatureMatrix fm;
        {
          py::gil_scoped_release release;
          fm = extract(samples, f, ExtractionConfig{iterations, collect_last}, RandomStream(seed));
        }
        return fm.theta_bar;
      },
      py::arg("counts"), py::arg("phi"), py::arg("r_target"), py::arg("hp") = Hyperparameters{},
      py::arg("variant") = "bmdl", py::arg("iterations") = 1000, py::arg("collect_last") = 500,
      py::arg("seed") = 1, "Posterior-mean factor scores (samples x K) for genes x samples counts.");

  py::class_<LinearModel>(m, "LinearModel")
      .def_readonly("weights", &LinearModel::weights)
      .def_readonly("bias", &LinearModel::bias)
      .def("predict", &LinearModel::predict);

  m.def(
      "train_linear",
      [](const Eigen::MatrixXd& X, const std::vector<int>& labels, double C) { return train_linear(X, labels, C); },
      py::arg("X"), py::arg("labels"), py::arg("C") = 1.0);
  m.def(
      "evaluate",
      [](const LinearModel& model, const Eigen::MatrixXd& X, const std::vector<int>& labels) {
        return evaluate(model, X, labels);
      },
      py::arg("model"), py::arg("X"), py::arg("labels"));

  m.def(
      "run_cli",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "bmdl");
        std::ostringstream out, err;
        int code = 0;
        {
          py::gil_scoped_release release;
          code = cli::run(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command-line tool in-process; returns (exit code, stdout, stderr).");

  m.attr("__version__") = io::version();
}
