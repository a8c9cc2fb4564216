#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "expsum/acceptance.hpp"
#include "expsum/calculus.hpp"
#include "expsum/errors.hpp"
#include "expsum/io.hpp"
#include "expsum/model.hpp"
#include "expsum/recovery.hpp"
#include "expsum/solver.hpp"

namespace py = pybind11;
using namespace expsum;

PYBIND11_MODULE(_expsum, m) {
    m.doc() = "exponential-sum parameter recovery from values and iterated integrals";

    py::register_exception<SingularMatrixError>(m, "SingularMatrixError");
    py::register_exception<NonConvergenceError>(m, "NonConvergenceError");
    py::register_exception<ComplexRatesError>(m, "ComplexRatesError");
    py::register_exception<DuplicateRatesError>(m, "DuplicateRatesError");
    py::register_exception<ShiftTooSmallError>(m, "ShiftTooSmallError");
    py::register_exception<InsufficientRecordsError>(m, "InsufficientRecordsError");
    py::register_exception<FormatError>(m, "FormatError");

    py::class_<ExpSumTerm>(m, "Term")
        .def(py::init<double, double>(), py::arg("coeff"), py::arg("rate"))
        .def_readwrite("coeff", &ExpSumTerm::coeff)
        .def_readwrite("rate", &ExpSumTerm::rate)
        .def("__repr__", [](const ExpSumTerm& t) {
            return "Term(coeff=" + std::to_string(t.coeff) + ", rate=" + std::to_string(t.rate) + ")";
        });

    py::class_<ExpSumModel>(m, "Model")
        .def(py::init<std::vector<ExpSumTerm>, std::optional<double>>(), py::arg("terms"),
             py::arg("constant") = std::nullopt)
        .def_property_readonly("terms", &ExpSumModel::terms)
        .def_property_readonly("constant", &ExpSumModel::constant)
        .def_property_readonly("n_terms", &ExpSumModel::n_terms)
        .def("__call__", [](const ExpSumModel& model, double t) { return evaluate(model, t); })
        .def("to_json", [](const ExpSumModel& model) { return io::model_to_json(model); })
        .def_static("from_json", [](const std::string& text) { return io::model_from_json(text); });

    m.def("evaluate", &evaluate, py::arg("model"), py::arg("t"));
    m.def("iterated_integral_exact", &iterated_integral_exact, py::arg("model"), py::arg("k"),
          py::arg("t"));
    m.def("moment_exact", &moment_exact, py::arg("model"), py::arg("k"), py::arg("t"));

    py::class_<GeneratorSpec>(m, "GeneratorSpec")
        .def(py::init<>())
        .def_readwrite("n_terms", &GeneratorSpec::n_terms)
        .def_readwrite("rate_min", &GeneratorSpec::rate_min)
        .def_readwrite("rate_max", &GeneratorSpec::rate_max)
        .def_readwrite("zero_ball", &GeneratorSpec::zero_ball)
        .def_readwrite("min_rate_separation", &GeneratorSpec::min_rate_separation)
        .def_readwrite("coeff_min", &GeneratorSpec::coeff_min)
        .def_readwrite("coeff_max", &GeneratorSpec::coeff_max)
        .def_readwrite("nonneg_required", &GeneratorSpec::nonneg_required)
        .def_readwrite("horizon", &GeneratorSpec::horizon)
        .def_readwrite("seed", &GeneratorSpec::seed);

    py::class_<GeneratedModel>(m, "GeneratedModel")
        .def_readonly("model", &GeneratedModel::model)
        .def_readonly("nonneg_shift", &GeneratedModel::nonneg_shift)
        .def_readonly("attempts", &GeneratedModel::attempts);

    m.def("generate", &generate, py::arg("spec"));

    py::class_<DenseSignal>(m, "DenseSignal")
        .def(py::init<std::vector<double>, std::vector<double>>(), py::arg("grid"),
             py::arg("values"))
        .def_property_readonly("grid", &DenseSignal::grid)
        .def_property_readonly("values", &DenseSignal::values);

    py::class_<MomentTable>(m, "MomentTable")
        .def_readonly("t", &MomentTable::t)
        .def_readonly("moments", &MomentTable::moments);

    m.def("moments_from_signal", &moments_from_signal, py::arg("signal"), py::arg("t"),
          py::arg("K"));
    m.def("integrals_from_moments", &integrals_from_moments, py::arg("table"), py::arg("k"));
    m.def("iterated_quadrature_oracle", &iterated_quadrature_oracle, py::arg("signal"),
          py::arg("k"), py::arg("t"));

    py::class_<MonicPolynomial>(m, "MonicPolynomial")
        .def(py::init([](std::vector<double> low) { return MonicPolynomial{std::move(low)}; }),
             py::arg("low_coeffs"))
        .def_readonly("low_coeffs", &MonicPolynomial::low_coeffs)
        .def_property_readonly("degree", &MonicPolynomial::degree);

    m.def("poly_roots", &poly_roots, py::arg("p"), py::arg("tol") = 1e-8);

    py::enum_<RecoveryMode>(m, "RecoveryMode")
        .value("strict", RecoveryMode::strict)
        .value("shifted", RecoveryMode::shifted)
        .value("with_constant", RecoveryMode::with_constant);

    py::class_<SampleRecord>(m, "SampleRecord")
        .def(py::init<>())
        .def(py::init([](double t, double f, std::vector<double> integrals) {
                 return SampleRecord{t, f, std::move(integrals)};
             }),
             py::arg("t"), py::arg("f"), py::arg("integrals"))
        .def_readwrite("t", &SampleRecord::t)
        .def_readwrite("f_value", &SampleRecord::f_value)
        .def_readwrite("integrals", &SampleRecord::integrals);

    py::class_<RecoveryProblem>(m, "RecoveryProblem")
        .def(py::init<>())
        .def_readwrite("n_terms", &RecoveryProblem::n_terms)
        .def_readwrite("records", &RecoveryProblem::records)
        .def_readwrite("mode", &RecoveryProblem::mode)
        .def_readwrite("shift_value", &RecoveryProblem::shift_value)
        .def_readwrite("reselect_rows", &RecoveryProblem::reselect_rows);

    py::class_<RecoveryResult>(m, "RecoveryResult")
        .def_readonly("model", &RecoveryResult::model)
        .def_readonly("x_vector", &RecoveryResult::x_vector)
        .def_readonly("frobenius", &RecoveryResult::frobenius)
        .def_readonly("cond_estimate", &RecoveryResult::cond_estimate)
        .def_readonly("collocation_residual", &RecoveryResult::collocation_residual)
        .def_readonly("reconstruction_residual", &RecoveryResult::reconstruction_residual)
        .def_readonly("mode_used", &RecoveryResult::mode_used)
        .def_readonly("warnings", &RecoveryResult::warnings);

    m.def("recover", &run, py::arg("problem"));
    m.def("exact_records", &exact_records, py::arg("model"), py::arg("times"),
          py::arg("n_integrals"));
    m.def("ingest_records", &ingest_records, py::arg("signal"), py::arg("times"),
          py::arg("n_integrals"));

    py::class_<VerifyTerm>(m, "VerifyTerm")
        .def_readonly("coeff", &VerifyTerm::coeff)
        .def_readonly("rate", &VerifyTerm::rate)
        .def_readonly("significant", &VerifyTerm::significant);

    py::class_<VerifyReport>(m, "VerifyReport")
        .def_readonly("ok", &VerifyReport::pass)
        .def_readonly("n_significant", &VerifyReport::n_significant)
        .def_readonly("tau_zero", &VerifyReport::tau_zero)
        .def_readonly("terms", &VerifyReport::terms)
        .def_readonly("reference", &VerifyReport::reference)
        .def_readonly("max_relative_deviation", &VerifyReport::max_relative_deviation)
        .def_readonly("notes", &VerifyReport::notes);

    m.def("verify_overdetermined", &verify_overdetermined, py::arg("problem"), py::arg("true_n"));

    py::class_<acceptance::CriterionResult>(m, "CriterionResult")
        .def_readonly("id", &acceptance::CriterionResult::id)
        .def_readonly("name", &acceptance::CriterionResult::name)
        .def_readonly("ok", &acceptance::CriterionResult::pass)
        .def_readonly("detail", &acceptance::CriterionResult::detail);

    m.def(
        "selftest",
        [](std::uint64_t seed, bool quick) {
            acceptance::Options opts;
            opts.seed = seed;
            opts.quick = quick;
            return acceptance::run_all(opts);
        },
        py::arg("seed") = 20240917u, py::arg("quick") = true);
}
