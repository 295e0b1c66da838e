#include "oracles.hpp"

#include "unisynth/circuit_io.hpp"
#include "unisynth/datagen.hpp"
#include "unisynth/errors.hpp"
#include "unisynth/factorizer.hpp"
#include "unisynth/objectives.hpp"

#include <doctest.h>

#include <bit>
#include <cstring>

using namespace unisynth;

namespace {

const std::string kHeader = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\n";

ParseError parse_error_of(const std::string& text) {
    try {
        read_qasm(text);
    } catch (const ParseError& e) {
        return e;
    }
    FAIL("expected a parse error");
    return ParseError("", 0, 0);
}

}  // namespace

TEST_CASE("qasm: empty circuit is header plus register") {
    const std::string text = write_qasm(Circuit(1));
    CHECK(text == kHeader + "qreg q[1];\n");
    CHECK(read_qasm(text) == Circuit(1));
}

TEST_CASE("qasm: single CNOT parses") {
    const Circuit c = read_qasm(kHeader + "qreg q[2];\ncx q[0],q[1];\n");
    REQUIRE(c.gates.size() == 1);
    CHECK(c.num_qubits == 2);
    CHECK(c.gates[0] == Gate::cnot(0, 1));
}

TEST_CASE("qasm: factored hadamard parses back to the same matrix") {
    const Operator h = named_operator(NamedOperator::hadamard, 2);
    const Factorization f = factor(h, 1);
    const Circuit back = read_qasm(write_qasm(f.circuit));
    CHECK(back == f.circuit);
    CHECK(back.metadata.source_hash == f.circuit.metadata.source_hash);
    CHECK((circuit_matrix(back) - h).norm() <= 1e-12);
}

TEST_CASE("qasm: random factored circuits round-trip exactly") {
    Rng rng = make_rng(RngSeed{1});
    for (int k = 1; k <= 3; ++k) {
        const Factorization f = factor(haar_random_unitary(Eigen::Index{1} << k, rng), k);
        const std::string text = write_qasm(f.circuit);
        const Circuit back = read_qasm(text);
        CHECK(back == f.circuit);
        CHECK(write_qasm(back) == text);
    }
}

TEST_CASE("qasm: structured parse errors") {
    {
        const ParseError e = parse_error_of("OPENQASM 3.0;\nqreg q[1];\n");
        CHECK(e.line() == 1);
        CHECK(e.column() == 10);
    }
    {
        const ParseError e = parse_error_of("qreg q[1];\n");
        CHECK(e.line() == 1);
        CHECK(e.message().find("header") != std::string::npos);
    }
    {
        const ParseError e = parse_error_of(kHeader + "qreg q[2];\nh q[0];\n");
        CHECK(e.line() == 4);
        CHECK(e.column() == 1);
        CHECK(e.message().find("unknown token") != std::string::npos);
    }
    {
        const ParseError e = parse_error_of(kHeader + "qreg q[2];\nrz(0.5) q[2];\n");
        CHECK(e.line() == 4);
        CHECK(e.column() == 11);
        CHECK(e.message().find("out of range") != std::string::npos);
    }
    {
        const ParseError e = parse_error_of(kHeader + "qreg q[2];\ncx q[1],q[1];\n");
        CHECK(e.line() == 4);
    }
    {
        const ParseError e = parse_error_of(kHeader + "qreg q[2];\nqreg q[2];\n");
        CHECK(e.line() == 4);
    }
    {
        const ParseError e = parse_error_of(kHeader + "rz(1) q[0];\n");
        CHECK(e.line() == 3);
    }
    CHECK_THROWS_AS(read_qasm(kHeader + "qreg q[1];\nrz(abc) q[0];\n"), ParseError);
    CHECK_THROWS_AS(read_qasm(kHeader + "qreg q[1];\nrz(1) q[0]\n"), ParseError);
}

TEST_CASE("ascii: bare wires and single boxes") {
    CHECK(render_ascii(Circuit(2)) == "q0: --\nq1: --\n");
    Circuit c(2);
    c.append(Gate::ry(0, 0.5));
    const std::string d = render_ascii(c);
    CHECK(d.find("q0: -") == 0);
    const auto rows = d.find('\n');
    const std::string row0 = d.substr(0, rows), row1 = d.substr(rows + 1, d.size() - rows - 2);
    CHECK(row0.find("[Ry(0.5000)]") != std::string::npos);
    CHECK(row1.find_first_not_of("q1: -") == std::string::npos);
    CHECK(row0.size() == row1.size());
}

TEST_CASE("ascii: CNOT draws control and target in one column") {
    Circuit c(3);
    c.append(Gate::cnot(0, 2));
    const std::string d = render_ascii(c);
    const auto l0 = d.find('\n'), l1 = d.find('\n', l0 + 1);
    const std::string r0 = d.substr(0, l0), r1 = d.substr(l0 + 1, l1 - l0 - 1), r2 = d.substr(l1 + 1);
    const auto at = r0.find('@');
    REQUIRE(at != std::string::npos);
    CHECK(r1[at] == '|');
    CHECK(r2.substr(at - 1, 3) == "(+)");
}

TEST_CASE("ascii: factored hadamard matches the golden file") {
    const Factorization f = factor(named_operator(NamedOperator::hadamard, 2), 1);
    CHECK(render_ascii(f.circuit) == read_text_file(std::string(UNISYNTH_TEST_DATA) + "/factor_h1_diagram.txt"));
}

TEST_CASE("matrix text: hadamard fixture") {
    const std::string text = read_text_file(std::string(UNISYNTH_TEST_DATA) + "/h1_matrix.txt");
    const Matrix h = read_matrix(text);
    CHECK(h == named_operator(NamedOperator::hadamard, 2));
    CHECK(write_matrix(h) == text);
}

TEST_CASE("matrix text: round trip of random batches") {
    Rng rng = make_rng(RngSeed{2});
    const Matrix m = gaussian_matrix(5, 3, rng);
    const std::string text = write_matrix(m);
    CHECK(read_matrix(text) == m);
    CHECK(write_matrix(read_matrix(text)) == text);
}

TEST_CASE("matrix text: errors") {
    CHECK_THROWS_AS(read_matrix(""), ParseError);
    CHECK_THROWS_AS(read_matrix("2 2\n1+0i 0+0i\n"), ParseError);
    CHECK_THROWS_AS(read_matrix("1 2\n1+0i\n"), ParseError);
    CHECK_THROWS_AS(read_matrix("1 1\n1+0i 2+0i\n"), ParseError);
    CHECK_THROWS_AS(read_matrix("1 1\n1+0j\n"), ParseError);
    CHECK_THROWS_AS(read_matrix("1 1\n1 + 0i\n"), ParseError);
    try {
        read_matrix("2 1\n1+0i\n1+xi\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
}

TEST_CASE("complex literals") {
    CHECK(format_complex(Complex(1.5, -2)) == "1.5-2i");
    CHECK(format_complex(Complex(0, 0)) == "0+0i");
    CHECK(parse_complex("1e-5-3E+2i") == Complex(1e-5, -300));
    CHECK(parse_complex("-0.25+1i") == Complex(-0.25, 1));
    CHECK_THROWS_AS(parse_complex("1.5"), ParseError);
    CHECK_THROWS_AS(parse_complex("1.5+i"), ParseError);
    CHECK_THROWS_AS(parse_complex("+2i"), ParseError);
}

TEST_CASE("complex literals preserve the bits of 10^6 random doubles") {
    Rng rng(12345);
    std::size_t mismatches = 0;
    for (int i = 0; i < 500000; ++i) {
        // Random bit patterns cover subnormals and extreme exponents; skip NaN/inf.
        double a, b;
        do {
            const std::uint64_t bits = rng();
            std::memcpy(&a, &bits, sizeof a);
        } while (!std::isfinite(a));
        do {
            const std::uint64_t bits = rng();
            std::memcpy(&b, &bits, sizeof b);
        } while (!std::isfinite(b));
        const Complex z = parse_complex(format_complex(Complex(a, b)));
        if (std::bit_cast<std::uint64_t>(z.real()) != std::bit_cast<std::uint64_t>(a) ||
            std::bit_cast<std::uint64_t>(z.imag()) != std::bit_cast<std::uint64_t>(b))
            ++mismatches;
    }
    CHECK(mismatches == 0);
}

TEST_CASE("batch metadata csv") {
    const std::string csv = batch_metadata_csv({{"x", 4, 4, 12.5, 3, 7}});
    CHECK(csv.find("name,") == 0);
    CHECK(csv.find("x,4,4,12.5,3,7") != std::string::npos);
}
