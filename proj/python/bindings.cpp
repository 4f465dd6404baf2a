#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "unmeasure/altmin.hpp"
#include "unmeasure/divergence.hpp"
#include "unmeasure/dutchbook.hpp"
#include "unmeasure/error.hpp"
#include "unmeasure/gof.hpp"
#include "unmeasure/poisson_ops.hpp"
#include "unmeasure/poly_ineq.hpp"
#include "unmeasure/projections.hpp"

namespace py = pybind11;
using namespace unmeasure;

namespace {

// Structured results cross the boundary as plain dicts via their JSON form.
py::object to_python(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

nlohmann::json from_python(const py::object& o) {
  const auto text = py::module_::import("json").attr("dumps")(o).cast<std::string>();
  return nlohmann::json::parse(text);
}

double finite_or_inf(const ExtendedReal& v) {
  return v.is_finite() ? v.value() : std::numeric_limits<double>::infinity();
}

FDivergenceSpec spec_by_name(const std::string& name) {
  if (name == "kl") return kl_spec();
  if (name == "reverse-kl") return reverse_kl_spec();
  throw DomainError("unknown divergence spec: " + name);
}

py::dict count_dict(const CountDistribution& d) {
  py::dict out;
  out["cutoffs"] = d.cutoffs();
  out["probs"] = std::vector<double>(d.probs().begin(), d.probs().end());
  out["tail_mass"] = d.tail_mass();
  return out;
}

py::list qq_rows(const QqTable& t) {
  py::list rows;
  for (const auto& r : t.rows) rows.append(py::make_tuple(r.g2, r.cdf_left, r.cdf_right, r.chi2_cdf));
  return rows;
}

py::dict trace_dict(const AltMinTrace& t) {
  py::dict out;
  out["variant"] = to_string(t.variant);
  out["converged"] = t.converged;
  out["cycles_to_tol"] = t.cycles_to_tol;
  out["fixed_point"] = std::vector<double>(t.fixed_point().weights().begin(), t.fixed_point().weights().end());
  py::list lower;
  for (const auto& c : t.cycles) lower.append(c.lower_bound);
  out["lower_bound"] = lower;
  return out;
}

std::vector<MomentConstraint> moments(const std::vector<std::pair<std::vector<double>, double>>& items) {
  std::vector<MomentConstraint> out;
  for (const auto& [f, t] : items) out.push_back({f, t});
  return out;
}

}  // namespace

PYBIND11_MODULE(_unmeasure, m) {
  m.doc() = "Divergences, thinning, goodness of fit and projections for unnormalized measures";

  auto domain = py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<InfeasibleError>(m, "InfeasibleError", domain.ptr());
  py::register_exception<ConvergenceError>(m, "ConvergenceError", domain.ptr());

  m.def(
      "kl_extended",
      [](const std::vector<double>& p, const std::vector<double>& q) {
        return finite_or_inf(kl_extended(Measure(p), Measure(q)));
      },
      py::arg("p"), py::arg("q"));
  m.def(
      "f_divergence",
      [](const std::vector<double>& p, const std::vector<double>& q, const std::string& spec) {
        return finite_or_inf(f_divergence(Measure(p), Measure(q), spec_by_name(spec)));
      },
      py::arg("p"), py::arg("q"), py::arg("spec") = "kl");

  m.def("poisson_pmf", [](double lambda) { return count_dict(poisson_pmf(lambda)); }, py::arg("lam"));
  m.def(
      "thin_poisson", [](double lambda, double alpha) { return count_dict(thin(poisson_pmf(lambda), alpha)); },
      py::arg("lam"), py::arg("alpha"));
  m.def(
      "thin_binomial",
      [](int n, double p, double alpha) { return count_dict(thin(binomial_distribution(n, p), alpha)); },
      py::arg("n"), py::arg("p"), py::arg("alpha"));
  m.def(
      "thin_identity",
      [](const std::vector<double>& p, const std::vector<double>& q, const std::vector<int>& ns) {
        const auto r = thin_divergence_identity(Measure(p), Measure(q), ns);
        py::dict out;
        out["holds"] = r.holds;
        out["base_divergence"] = finite_or_inf(r.base_divergence);
        py::list rows;
        for (const auto& row : r.rows) rows.append(finite_or_inf(row.thinned_divergence));
        out["thinned"] = rows;
        return out;
      },
      py::arg("p"), py::arg("q"), py::arg("ns"));

  m.def("binom_divergence", &binom_divergence, py::arg("n"), py::arg("x"));
  m.def(
      "g_statistic", [](int n, int x) { return g_statistic(n, x).g; }, py::arg("n"), py::arg("x"));
  m.def(
      "classical_qq",
      [](int n) {
        const auto t = classical_qq(n);
        return py::make_tuple(qq_rows(t), t.gap);
      },
      py::arg("n"), "Rows (g2, cdf_left, cdf_right, chi2_cdf) and the uniformity gap.");
  m.def(
      "poisson_qq",
      [](double intensity) {
        const auto t = poisson_qq(intensity);
        return py::make_tuple(qq_rows(t), t.gap);
      },
      py::arg("intensity"));

  m.def(
      "project",
      [](const std::vector<double>& q, const py::object& constraints, const std::string& spec, double tol) {
        nlohmann::json j = project(Measure(q), constraint_set_from_json(from_python(constraints)),
                                   spec_by_name(spec), {.tol = tol});
        return to_python(j);
      },
      py::arg("q"), py::arg("constraints"), py::arg("spec") = "kl", py::arg("tol") = 1e-9,
      "Constraints use the CLI JSON layout: equalities, inequalities, probability.");

  m.def(
      "altmin",
      [](const std::vector<double>& q, const std::vector<std::pair<std::vector<double>, double>>& constraints,
         const std::string& variant, double tol) {
        const auto c = moments(constraints);
        if (variant == "normalized") return trace_dict(altmin_cyclic(Measure(q), c, false, tol));
        if (variant == "unnormalized") return trace_dict(altmin_cyclic(Measure(q), c, true, tol));
        if (variant == "orthogonalized") return trace_dict(altmin_accelerated(Measure(q), c, tol));
        throw DomainError("unknown variant: " + variant);
      },
      py::arg("q"), py::arg("constraints"), py::arg("variant") = "orthogonalized", py::arg("tol") = 1e-10);

  m.def(
      "inequality_scan",
      [](const std::string& base, double lambda, int n, double p, int degree, double epsilon, long samples,
         std::uint64_t seed) {
        const OrthoPoly f = base == "krawtchouk" ? krawtchouk(n, p, degree) : charlier(lambda, degree);
        nlohmann::json j = inequality_scan(f, epsilon, samples, seed);
        return to_python(j);
      },
      py::arg("base") = "charlier", py::arg("lam") = 1.0, py::arg("n") = 20, py::arg("p") = 0.25,
      py::arg("degree") = 1, py::arg("epsilon") = 0.05, py::arg("samples") = 10'000, py::arg("seed") = 1);

  m.def(
      "dutchbook",
      [](const std::vector<std::vector<double>>& matrix, double tol) {
        const PayoffSystem system(matrix);
        const auto c = decide(system, tol);
        nlohmann::json j = c;
        j["verified"] = verify(system, c);
        return to_python(j);
      },
      py::arg("matrix"), py::arg("tol") = 1e-12);
}
