#include "unisynth/circuit_io.hpp"
#include "unisynth/datagen.hpp"
#include "unisynth/errors.hpp"
#include "unisynth/factorizer.hpp"
#include "unisynth/harness.hpp"
#include "unisynth/objectives.hpp"
#include "unisynth/optimizers.hpp"
#include "unisynth/oracle.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace unisynth;

namespace {

py::dict report_dict(const FactorReport& r) {
    py::dict d;
    d["cnot_count"] = r.cnot_count;
    d["total_gates"] = r.total_gates;
    d["error"] = r.error;
    d["wall_time"] = r.wall_time;
    d["projection_distance"] = r.projection_distance;
    d["unitarity_defect"] = r.unitarity_defect;
    return d;
}

LearnConfig make_config(const std::string& method, double alpha, double beta, double tol, double stall_tol,
                        std::size_t max_iters, const std::string& linesearch, std::uint64_t seed) {
    LearnConfig c = method_config(method, alpha, beta, max_iters);
    c.tol = tol;
    c.stall_tol = stall_tol;
    c.linesearch = parse_linesearch(linesearch);
    c.seed = RngSeed{seed};
    return c;
}

}  // namespace

PYBIND11_MODULE(_unisynth, m) {
    m.doc() = "Learn unitaries from input/output states and factor them into Rz/Ry/CNOT circuits";

    py::register_exception<Error>(m, "UnisynthError", PyExc_RuntimeError);

    m.def("haar_random_unitary", [](Eigen::Index n, std::uint64_t seed) { return haar_random_unitary(n, RngSeed{seed}); },
          py::arg("n"), py::arg("seed") = 0);
    m.def(
        "random_state_batch",
        [](Eigen::Index n, Eigen::Index m, double cond_cap, std::uint64_t seed) {
            const StateBatchSample s = random_state_batch(n, m, cond_cap, RngSeed{seed});
            return py::make_tuple(s.states, s.condition_number, s.resamples);
        },
        py::arg("n"), py::arg("m"), py::arg("cond_cap") = 100.0, py::arg("seed") = 0);
    m.def("named_operator", [](const std::string& name, Eigen::Index n) { return named_operator(parse_named_operator(name), n); },
          py::arg("name"), py::arg("n"));
    m.def("named_target", &named_target, py::arg("name"));

    m.def("frobenius_objective", &frobenius_objective, py::arg("u"), py::arg("x"), py::arg("y"));
    m.def("frobenius_gradient", &frobenius_gradient, py::arg("u"), py::arg("x"), py::arg("y"));
    m.def("unitarization_objective", &unitarization_objective, py::arg("u"));
    m.def("process_fidelity", &process_fidelity, py::arg("u"), py::arg("v"));
    m.def("fidelity_error", &fidelity_error, py::arg("u"), py::arg("v"));
    m.def("procrustes_solve", &procrustes_solve, py::arg("x"), py::arg("y"));
    m.def("nearest_unitary", &nearest_unitary, py::arg("u"));

    m.def(
        "learn",
        [](const Matrix& x, const Matrix& y, const std::string& method, double alpha, double beta, double tol,
           double stall_tol, std::size_t max_iters, const std::string& linesearch, bool sequential, unsigned workers,
           std::uint64_t seed) {
            const LearnConfig c = make_config(method, alpha, beta, tol, stall_tol, max_iters, linesearch, seed);
            LearnResult r;
            {
                py::gil_scoped_release release;
                r = sequential ? sequential_learn(c, x, y, workers) : run(c, x, y);
            }
            py::dict d;
            d["u"] = r.u;
            d["status"] = to_string(r.status);
            d["iterations"] = r.iterations;
            d["mean_row_iterations"] = r.mean_row_iterations;
            d["final_f"] = r.final_f;
            d["final_g"] = r.final_g;
            d["lambda_final"] = r.lambda_final;
            return d;
        },
        py::arg("x"), py::arg("y"), py::arg("method") = "GD", py::arg("alpha") = 0.1, py::arg("beta") = 0.1,
        py::arg("tol") = 1e-15, py::arg("stall_tol") = 1e-18, py::arg("max_iters") = 100000,
        py::arg("linesearch") = "none", py::arg("sequential") = false, py::arg("workers") = 1, py::arg("seed") = 0);

    m.def(
        "factor",
        [](const Matrix& u, int qubits) {
            const Factorization f = factor(u, qubits);
            py::dict d;
            d["qasm"] = write_qasm(f.circuit);
            d["diagram"] = render_ascii(f.circuit);
            d["report"] = report_dict(f.report);
            return d;
        },
        py::arg("u"), py::arg("qubits"));

    m.def("qasm_matrix", [](const std::string& text) { return circuit_matrix(read_qasm(text)); }, py::arg("qasm"),
          "Simulates an OpenQASM 2.0 circuit over the Rz/Ry/CNOT subset.");
    m.def("normalize_qasm", [](const std::string& text) { return write_qasm(read_qasm(text)); }, py::arg("qasm"));
    m.def("write_matrix", &write_matrix, py::arg("m"));
    m.def("read_matrix", [](const std::string& text) { return read_matrix(text); }, py::arg("text"));

    m.def(
        "pipeline",
        [](const Matrix& x, const Matrix& y, const std::string& method, double alpha, double beta, std::size_t max_iters) {
            PipelineResult p;
            {
                py::gil_scoped_release release;
                p = run_pipeline(x, y, method_config(method, alpha, beta, max_iters));
            }
            py::dict d;
            d["u"] = p.learn.u;
            d["status"] = to_string(p.learn.status);
            d["iterations"] = p.learn.iterations;
            d["qasm"] = p.qasm;
            d["diagram"] = p.diagram;
            d["report"] = report_dict(p.factorization.report);
            d["report_json"] = p.report_json;
            d["warnings"] = p.warnings;
            return d;
        },
        py::arg("x"), py::arg("y"), py::arg("method") = "NM", py::arg("alpha") = 0.1, py::arg("beta") = 0.1,
        py::arg("max_iters") = 100000);
}
