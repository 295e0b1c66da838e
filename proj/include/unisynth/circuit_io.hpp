#pragma once

#include "unisynth/circuit.hpp"
#include "unisynth/types.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace unisynth {

/// OpenQASM 2.0 over the Rz/Ry/CNOT subset. GLOBAL_PHASE is carried by a
/// `// global_phase(θ)` comment so other tools can still read the file.
std::string write_qasm(const Circuit& c);

/// Throws ParseError (with line/column) on anything outside the emitted subset.
Circuit read_qasm(std::string_view text);

/// One row per qubit, one fixed-width column per gate.
std::string render_ascii(const Circuit& c);

/// `n m` header, then n lines of m entries formatted `a+bi` (17 significant digits).
std::string write_matrix(const Matrix& m);
Matrix read_matrix(std::string_view text);

/// Formats one complex entry as `a+bi` / `a-bi`.
std::string format_complex(Complex z);
/// Parses one `a+bi` token; throws ParseError at `line`, `column` on failure.
Complex parse_complex(std::string_view token, std::size_t line = 1, std::size_t column = 1);

/// Row of the batch-metadata CSV written alongside generated files.
struct BatchMetadata {
    std::string name;
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    double condition_number = 1.0;
    std::size_t resamples = 0;
    std::uint64_t seed = 0;
};

std::string batch_metadata_csv(const std::vector<BatchMetadata>& rows);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view text);

inline Matrix read_matrix_file(const std::string& path) { return read_matrix(read_text_file(path)); }
inline void write_matrix_file(const std::string& path, const Matrix& m) { write_text_file(path, write_matrix(m)); }

}  // namespace unisynth
