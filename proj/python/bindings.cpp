#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cardioinfer/bayesopt.hpp"
#include "cardioinfer/cardiosim.hpp"
#include "cardioinfer/experiment.hpp"
#include "cardioinfer/manifold.hpp"
#include "cardioinfer/mesh.hpp"
#include "cardioinfer/vi.hpp"

namespace py = pybind11;
using namespace cardioinfer;

namespace {

ParameterSpace space_for(const ManifoldEmbedding& emb, int n_stimuli) {
  return ParameterSpace::for_embedding(emb, n_stimuli);
}

py::dict trace_to_dict(const BoTrace& trace) {
  py::dict d;
  const int n = static_cast<int>(trace.iterations.size());
  Eigen::VectorXd objective(n), best(n);
  for (int i = 0; i < n; ++i) {
    objective[i] = trace.iterations[i].objective;
    best[i] = trace.iterations[i].best_so_far;
  }
  d["objective"] = objective;
  d["best_so_far"] = best;
  d["best_x"] = trace.best_raw;
  d["best_theta"] = trace.best_theta;
  d["best_value"] = trace.best_value;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "cardioinfer core: eikonal ECG simulator, isomap chart, GP "
            "surrogate optimization and the two-stage variational fit";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ValidationError>(m, "ValidationError",
                                          PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError",
                                         PyExc_RuntimeError);

  py::class_<HeartMesh>(m, "HeartMesh")
      .def_property_readonly("n_vertices", &HeartMesh::n_vertices)
      .def_property_readonly("n_edges",
                             [](const HeartMesh& mesh) {
                               return static_cast<int>(mesh.edges.size());
                             })
      .def("endocardial_vertices", &HeartMesh::endocardial_vertices)
      .def("vertex",
           [](const HeartMesh& mesh, int v) {
             if (v < 0 || v >= mesh.n_vertices()) {
               throw py::index_error("vertex id out of range");
             }
             return mesh.vertices[v];
           })
      .def("__repr__", [](const HeartMesh& mesh) {
        return "<HeartMesh " + std::to_string(mesh.n_vertices()) +
               " vertices, " + std::to_string(mesh.edges.size()) + " edges>";
      });

  m.def("generate_ellipsoid_shell", &generate_ellipsoid_shell,
        py::arg("n_theta"), py::arg("n_phi"), py::arg("inner_radii_mm"),
        py::arg("wall_thickness_mm"), py::arg("n_layers"), py::arg("seed"));
  m.def("load_mesh", &load_mesh, py::arg("text"));
  m.def("serialize_mesh", &serialize_mesh, py::arg("mesh"));

  py::class_<ManifoldEmbedding>(m, "ManifoldEmbedding")
      .def_static("build", &ManifoldEmbedding::build, py::arg("mesh"),
                  py::arg("k"))
      .def_property_readonly("latent", &ManifoldEmbedding::latent)
      .def_property_readonly("vertex_ids", &ManifoldEmbedding::vertex_ids)
      .def("nearest_node", &ManifoldEmbedding::nearest_node, py::arg("z"))
      .def("__len__", &ManifoldEmbedding::size);

  m.def("isomap_embed", &isomap_embed, py::arg("distances"),
        py::arg("dim") = 2);

  py::class_<ParameterSpace>(m, "ParameterSpace")
      .def_property_readonly("dim", &ParameterSpace::dim)
      .def_readonly("n_stimuli", &ParameterSpace::n_stimuli)
      .def("bounds", &ParameterSpace::bounds, py::arg("d"));
  m.def("parameter_space", &space_for, py::arg("embedding"),
        py::arg("n_stimuli") = 6);

  py::class_<LeadConfig>(m, "LeadConfig")
      .def_static("default_torso", &LeadConfig::default_torso)
      .def_readwrite("duration_ms", &LeadConfig::duration_ms)
      .def_readwrite("dt_ms", &LeadConfig::dt_ms)
      .def_readwrite("template_sigma_ms", &LeadConfig::template_sigma_ms);

  py::class_<EcgTrace>(m, "EcgTrace")
      .def_property_readonly("leads",
                             [](const EcgTrace& t) { return t.leads; })
      .def_readonly("dt_ms", &EcgTrace::dt_ms)
      .def("csv", [](const EcgTrace& t) { return ecg_csv(t); });

  m.def(
      "simulate",
      [](const Eigen::VectorXd& theta, const HeartMesh& mesh,
         const ManifoldEmbedding& emb, const ParameterSpace& space,
         const LeadConfig& cfg) {
        return simulate(theta, mesh, emb, space, cfg);
      },
      py::arg("theta"), py::arg("mesh"), py::arg("embedding"),
      py::arg("space"), py::arg("lead_config"));
  m.def("ecg_mse", &ecg_mse, py::arg("a"), py::arg("b"));

  m.def("ordered_transform", &ordered_transform, py::arg("raw"),
        py::arg("space"));
  m.def("ordered_encode", &ordered_encode, py::arg("theta"),
        py::arg("space"));
  m.def("latin_hypercube", &latin_hypercube, py::arg("n"), py::arg("bounds"),
        py::arg("seed"));

  m.def(
      "kl_diag_gaussians",
      [](const Eigen::VectorXd& mu_q, const Eigen::VectorXd& sigma_q,
         const Eigen::VectorXd& mu_p, const Eigen::VectorXd& sigma_p) {
        return kl_diag_gaussians(GaussianPosterior{mu_q, sigma_q},
                                 PriorSpec{mu_p, sigma_p});
      },
      py::arg("mu_q"), py::arg("sigma_q"), py::arg("mu_p"),
      py::arg("sigma_p"));

  m.def(
      "bo_minimize",
      [](const std::function<double(const Eigen::VectorXd&)>& objective,
         const Eigen::MatrixX2d& bounds, int budget, int n_init,
         std::uint64_t seed, const std::string& acquisition) {
        BoConfig cfg;
        cfg.budget = budget;
        cfg.n_init = n_init;
        cfg.seed = seed;
        if (acquisition == "ei") {
          cfg.acquisition = AcquisitionKind::EI;
        } else if (acquisition == "aei") {
          cfg.acquisition = AcquisitionKind::AugmentedEI;
        } else {
          throw ConfigError("acquisition must be 'ei' or 'aei'");
        }
        return trace_to_dict(bo_minimize_box(objective, bounds, cfg));
      },
      py::arg("objective"), py::arg("bounds"), py::arg("budget"),
      py::arg("n_init"), py::arg("seed") = 0,
      py::arg("acquisition") = "aei",
      "Minimize a black-box objective over a box; bounds is (p, 2).");

  m.def(
      "run_recovery",
      [](const std::string& config_json) {
        const RecoveryReport rep =
            run_recovery(RunConfig::from_json_text(config_json));
        py::dict d;
        d["prior_mean_mse"] = rep.prior_mean_mse;
        d["final_mse"] = rep.final_mse;
        d["theta_star"] = rep.theta_star;
        d["theta_fit"] = rep.theta_fit;
        d["posterior_mu"] = rep.posterior.mu;
        d["posterior_sigma"] = rep.posterior.sigma;
        return d;
      },
      py::arg("config_json"),
      "Run the full two-stage recovery from a JSON config string.");
}
