#include "oracles.hpp"

#include "unisynth/circuit.hpp"
#include "unisynth/datagen.hpp"
#include "unisynth/errors.hpp"

#include <doctest.h>

#include <numbers>

using namespace unisynth;

TEST_CASE("circuit matrix: empty circuit is the identity") {
    CHECK(circuit_matrix(Circuit(2)) == Matrix::Identity(4, 4));
}

TEST_CASE("circuit matrix: CNOT swaps |10> and |11>") {
    Circuit c(2);
    c.append(Gate::cnot(0, 1));
    Matrix expect = Matrix::Zero(4, 4);
    expect(0, 0) = expect(1, 1) = expect(2, 3) = expect(3, 2) = 1;
    CHECK(circuit_matrix(c) == expect);
}

TEST_CASE("circuit matrix: rotation conventions") {
    const double t = 0.7;
    CHECK((rz_matrix(t) - oracle::rz(t)).norm() <= 1e-15);
    CHECK((ry_matrix(t) - oracle::ry(t)).norm() <= 1e-15);
    Circuit c(1);
    c.append(Gate::global_phase(t));
    CHECK(std::abs(circuit_matrix(c)(0, 0) - std::polar(1.0, t)) <= 1e-15);
}

namespace {

Circuit random_circuit(int k, int length, Rng& rng) {
    std::uniform_int_distribution<int> kind(0, k > 1 ? 3 : 2), qubit(0, k - 1);
    std::uniform_real_distribution<double> angle(-4, 4);
    Circuit c(k);
    for (int i = 0; i < length; ++i) {
        switch (kind(rng)) {
            case 0: c.append(Gate::rz(qubit(rng), angle(rng))); break;
            case 1: c.append(Gate::ry(qubit(rng), angle(rng))); break;
            case 2: c.append(Gate::global_phase(angle(rng))); break;
            default: {
                const int a = qubit(rng);
                int b = qubit(rng);
                while (b == a) b = qubit(rng);
                c.append(Gate::cnot(a, b));
            }
        }
    }
    return c;
}

}  // namespace

TEST_CASE("circuit matrix: agrees with Kronecker simulation") {
    Rng rng = make_rng(RngSeed{1});
    for (int k = 1; k <= 4; ++k)
        for (int i = 0; i < 10; ++i) {
            const Circuit c = random_circuit(k, 30, rng);
            CHECK((circuit_matrix(c) - oracle::simulate(c)).norm() <= 1e-12);
        }
}

TEST_CASE("circuit matrix: concatenation is a product") {
    Rng rng = make_rng(RngSeed{2});
    const Circuit a = random_circuit(3, 20, rng), b = random_circuit(3, 20, rng);
    Circuit ab = a;
    ab.append(b);
    CHECK((circuit_matrix(ab) - circuit_matrix(b) * circuit_matrix(a)).norm() <= 1e-12);
}

TEST_CASE("gate counts exclude the phase pseudo-gate") {
    CHECK(gate_counts(Circuit(2)).total_gates == 0);
    Circuit c(2);
    c.append(Gate::rz(0, 1));
    c.append(Gate::ry(1, 1));
    c.append(Gate::rz(1, 1));
    c.append(Gate::cnot(1, 0));
    c.append(Gate::global_phase(0.5));
    const GateCounts g = gate_counts(c);
    CHECK(g.cnot_count == 1);
    CHECK(g.total_gates == 4);
    CHECK(g.phase_gates == 1);
}

TEST_CASE("circuit validation") {
    Circuit c(2);
    c.append(Gate::rz(2, 0.1));
    CHECK_THROWS_AS(c.validate(), InvalidRequest);
    CHECK_THROWS_AS(circuit_matrix(c), InvalidRequest);
    Circuit d(2);
    d.append(Gate::cnot(1, 1));
    CHECK_THROWS_AS(d.validate(), InvalidRequest);
    Circuit e(2);
    e.append(Gate::cnot(0, 1));
    CHECK_NOTHROW(e.validate());
}

TEST_CASE("equality ignores metadata") {
    Circuit a(1), b(1);
    a.append(Gate::rz(0, 0.25));
    b.append(Gate::rz(0, 0.25));
    b.metadata.source_hash = "abc";
    CHECK(a == b);
    b.gates[0].angle = 0.26;
    CHECK_FALSE(a == b);
}

TEST_CASE("wrap angle reduces to (-pi, pi]") {
    const double pi = std::numbers::pi;
    CHECK(wrap_angle(pi) == doctest::Approx(pi));
    CHECK(wrap_angle(-pi) == doctest::Approx(pi));
    CHECK(wrap_angle(3 * pi / 2) == doctest::Approx(-pi / 2));
    CHECK(wrap_angle(0.0) == 0.0);
    for (double a = -20; a < 20; a += 0.37) {
        const double w = wrap_angle(a);
        CHECK(w > -pi);
        CHECK(w <= pi);
        CHECK(std::abs(std::remainder(w - a, 2 * pi)) <= 1e-12);
    }
}
