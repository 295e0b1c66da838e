#include "unisynth/circuit_io.hpp"

#include "unisynth/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace unisynth {

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

bool parse_double(std::string_view s, double& out) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    if (s.empty()) return false;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

// Cursor over one line of text; columns are 1-based.
struct Cursor {
    std::string_view line;
    std::size_t pos = 0;
    std::size_t line_no = 1;

    [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, line_no, pos + 1); }
    [[noreturn]] void fail_at(const std::string& what, std::size_t at) const { throw ParseError(what, line_no, at + 1); }

    void skip_ws() {
        while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
    }
    bool done() {
        skip_ws();
        return pos >= line.size();
    }
    bool accept(std::string_view token) {
        skip_ws();
        if (line.substr(pos, token.size()) == token) {
            pos += token.size();
            return true;
        }
        return false;
    }
    void expect(std::string_view token) {
        if (!accept(token)) fail("expected '" + std::string(token) + "'");
    }
    std::string_view word() {
        skip_ws();
        const std::size_t start = pos;
        while (pos < line.size() && (std::isalnum(static_cast<unsigned char>(line[pos])) || line[pos] == '_')) ++pos;
        return line.substr(start, pos - start);
    }
    long integer() {
        skip_ws();
        const std::size_t start = pos;
        long v = 0;
        const auto [ptr, ec] = std::from_chars(line.data() + pos, line.data() + line.size(), v);
        if (ec != std::errc() || ptr == line.data() + pos) fail_at("expected an integer", start);
        pos = static_cast<std::size_t>(ptr - line.data());
        return v;
    }
    double number_until(char stop) {
        skip_ws();
        const std::size_t start = pos;
        const std::size_t end = line.find(stop, pos);
        if (end == std::string_view::npos) fail(std::string("expected '") + stop + "'");
        std::string_view text = line.substr(start, end - start);
        while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
        double v = 0.0;
        if (!parse_double(text, v)) fail_at("malformed number", start);
        pos = start + text.size();
        return v;
    }
};

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        if (end == text.size()) break;
        start = end + 1;
    }
    return lines;
}

constexpr std::string_view kPhasePragma = "// global_phase(";
constexpr std::string_view kHashPragma = "// source_hash: ";

}  // namespace

std::string write_qasm(const Circuit& c) {
    c.validate();
    std::ostringstream os;
    os << "OPENQASM 2.0;\ninclude \"qelib1.inc\";\n";
    if (!c.metadata.source_hash.empty()) os << kHashPragma << c.metadata.source_hash << "\n";
    os << "qreg q[" << c.num_qubits << "];\n";
    for (const Gate& g : c.gates) {
        switch (g.kind) {
            case GateKind::RZ: os << "rz(" << format_double(g.angle) << ") q[" << g.target << "];\n"; break;
            case GateKind::RY: os << "ry(" << format_double(g.angle) << ") q[" << g.target << "];\n"; break;
            case GateKind::CNOT: os << "cx q[" << g.control << "],q[" << g.target << "];\n"; break;
            case GateKind::GLOBAL_PHASE: os << kPhasePragma << format_double(g.angle) << ")\n"; break;
        }
    }
    return os.str();
}

Circuit read_qasm(std::string_view text) {
    Circuit c(1);
    bool header = false, qreg = false;
    const auto lines = split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        Cursor cur{lines[i], 0, i + 1};
        if (cur.done()) continue;
        const std::size_t first = cur.pos;
        const std::string_view rest = cur.line.substr(first);

        if (rest.substr(0, kPhasePragma.size()) == kPhasePragma) {
            if (!qreg) cur.fail("global_phase before qreg declaration");
            cur.pos = first + kPhasePragma.size();
            const double angle = cur.number_until(')');
            cur.expect(")");
            if (!cur.done()) cur.fail("unexpected trailing text");
            c.append(Gate::global_phase(angle));
            continue;
        }
        if (rest.substr(0, kHashPragma.size()) == kHashPragma) {
            std::string_view hash = rest.substr(kHashPragma.size());
            while (!hash.empty() && std::isspace(static_cast<unsigned char>(hash.back()))) hash.remove_suffix(1);
            c.metadata.source_hash = std::string(hash);
            continue;
        }
        if (rest.substr(0, 2) == "//") continue;

        if (!header) {
            if (!cur.accept("OPENQASM")) cur.fail("malformed header: expected 'OPENQASM 2.0;'");
            cur.skip_ws();
            const std::size_t vpos = cur.pos;
            if (!cur.accept("2.0")) cur.fail_at("malformed header: unsupported version", vpos);
            cur.expect(";");
            if (!cur.done()) cur.fail("unexpected trailing text");
            header = true;
            continue;
        }

        const std::size_t word_pos = (cur.skip_ws(), cur.pos);
        const std::string_view kw = cur.word();
        const auto qubit_ref = [&]() {
            cur.expect("q");
            cur.expect("[");
            cur.skip_ws();
            const std::size_t at = cur.pos;
            const long q = cur.integer();
            if (q < 0 || q >= c.num_qubits) cur.fail_at("qubit index out of range", at);
            cur.expect("]");
            return static_cast<int>(q);
        };
        const auto finish = [&]() {
            cur.expect(";");
            if (!cur.done()) cur.fail("unexpected trailing text");
        };

        if (kw == "include") {
            cur.expect("\"qelib1.inc\"");
            finish();
        } else if (kw == "qreg") {
            if (qreg) cur.fail_at("duplicate qreg declaration", word_pos);
            cur.expect("q");
            cur.expect("[");
            cur.skip_ws();
            const std::size_t at = cur.pos;
            const long k = cur.integer();
            if (k < 1 || k > 30) cur.fail_at("register size out of range", at);
            cur.expect("]");
            finish();
            c.num_qubits = static_cast<int>(k);
            qreg = true;
        } else if (kw == "rz" || kw == "ry") {
            if (!qreg) cur.fail_at("gate before qreg declaration", word_pos);
            cur.expect("(");
            const double angle = cur.number_until(')');
            cur.expect(")");
            const int q = qubit_ref();
            finish();
            c.append(kw == "rz" ? Gate::rz(q, angle) : Gate::ry(q, angle));
        } else if (kw == "cx") {
            if (!qreg) cur.fail_at("gate before qreg declaration", word_pos);
            const int ctrl = qubit_ref();
            cur.expect(",");
            cur.skip_ws();
            const std::size_t at = cur.pos;
            const int tgt = qubit_ref();
            if (ctrl == tgt) cur.fail_at("control equals target", at);
            finish();
            c.append(Gate::cnot(ctrl, tgt));
        } else {
            cur.fail_at("unknown token '" + std::string(kw.empty() ? cur.line.substr(word_pos, 1) : kw) + "'", word_pos);
        }
    }
    if (!header) throw ParseError("malformed header: missing 'OPENQASM 2.0;'", 1, 1);
    if (!qreg) throw ParseError("missing qreg declaration", lines.size(), 1);
    return c;
}

std::string render_ascii(const Circuit& c) {
    c.validate();
    constexpr std::size_t kWidth = 15;
    const auto cell = [&](const std::string& label) {
        const std::size_t pad = kWidth - std::min(label.size(), kWidth);
        return std::string(pad / 2, '-') + label + std::string(pad - pad / 2, '-');
    };
    std::vector<std::string> rows(static_cast<std::size_t>(c.num_qubits));
    for (int q = 0; q < c.num_qubits; ++q) rows[static_cast<std::size_t>(q)] = "q" + std::to_string(q) + ": -";
    const std::size_t prefix = std::max_element(rows.begin(), rows.end(), [](auto& a, auto& b) { return a.size() < b.size(); })->size();
    for (auto& r : rows) r.insert(r.size() - 2, prefix - r.size(), ' ');

    for (const Gate& g : c.gates) {
        if (g.kind == GateKind::GLOBAL_PHASE) continue;
        for (int q = 0; q < c.num_qubits; ++q) {
            std::string label;
            if (g.kind == GateKind::CNOT) {
                const int lo = std::min(g.control, g.target), hi = std::max(g.control, g.target);
                if (q == g.control) label = "@";
                else if (q == g.target) label = "(+)";
                else if (q > lo && q < hi) label = "|";
            } else if (q == g.target) {
                char buf[32];
                std::snprintf(buf, sizeof(buf), "[%s(%.4f)]", g.kind == GateKind::RZ ? "Rz" : "Ry", g.angle);
                label = buf;
            }
            rows[static_cast<std::size_t>(q)] += cell(label);
        }
    }
    std::string out;
    for (const auto& r : rows) out += r + "-\n";
    return out;
}

std::string format_complex(Complex z) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g%+.17gi", z.real(), z.imag());
    return buf;
}

Complex parse_complex(std::string_view token, std::size_t line, std::size_t column) {
    const auto fail = [&](const char* what) -> Complex {
        throw ParseError(std::string(what) + " '" + std::string(token) + "'", line, column);
    };
    if (token.size() < 4 || token.back() != 'i') return fail("malformed complex literal");
    const std::string_view body = token.substr(0, token.size() - 1);
    std::size_t split = std::string_view::npos;
    for (std::size_t p = body.size(); p-- > 1;) {
        if ((body[p] == '+' || body[p] == '-') && body[p - 1] != 'e' && body[p - 1] != 'E') {
            split = p;
            break;
        }
    }
    if (split == std::string_view::npos) return fail("complex literal without imaginary sign");
    double re = 0.0, im = 0.0;
    if (!parse_double(body.substr(0, split), re)) return fail("malformed real part in");
    if (!parse_double(body.substr(split), im)) return fail("malformed imaginary part in");
    return {re, im};
}

std::string write_matrix(const Matrix& m) {
    std::string out = std::to_string(m.rows()) + " " + std::to_string(m.cols()) + "\n";
    for (Eigen::Index j = 0; j < m.rows(); ++j) {
        for (Eigen::Index k = 0; k < m.cols(); ++k) {
            if (k) out += ' ';
            out += format_complex(m(j, k));
        }
        out += '\n';
    }
    return out;
}

Matrix read_matrix(std::string_view text) {
    const auto lines = split_lines(text);
    std::size_t i = 0;
    while (i < lines.size() && Cursor{lines[i], 0, i + 1}.done()) ++i;
    if (i == lines.size()) throw ParseError("empty matrix text: expected 'n m' header", 1, 1);
    Cursor head{lines[i], 0, i + 1};
    const long rows = head.integer();
    const long cols = head.integer();
    if (!head.done()) head.fail("unexpected trailing text after header");
    if (rows < 1 || cols < 1) throw ParseError("matrix dimensions must be positive", i + 1, 1);

    Matrix m(rows, cols);
    long r = 0;
    for (++i; i < lines.size(); ++i) {
        Cursor cur{lines[i], 0, i + 1};
        if (cur.done()) continue;
        if (r >= rows) cur.fail("more rows than declared in header");
        long col = 0;
        while (!cur.done()) {
            const std::size_t start = cur.pos;
            while (cur.pos < cur.line.size() && !std::isspace(static_cast<unsigned char>(cur.line[cur.pos]))) ++cur.pos;
            if (col >= cols) cur.fail_at("more columns than declared in header", start);
            m(r, col++) = parse_complex(cur.line.substr(start, cur.pos - start), i + 1, start + 1);
        }
        if (col != cols) cur.fail("fewer columns than declared in header");
        ++r;
    }
    if (r != rows) throw ParseError("fewer rows than declared in header", lines.size(), 1);
    return m;
}

std::string batch_metadata_csv(const std::vector<BatchMetadata>& rows) {
    std::ostringstream os;
    os << "name,rows,cols,condition_number,resamples,seed\n";
    for (const auto& r : rows)
        os << r.name << ',' << r.rows << ',' << r.cols << ',' << format_double(r.condition_number) << ',' << r.resamples
           << ',' << r.seed << '\n';
    return os.str();
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidRequest("cannot open '" + path + "' for reading");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_text_file(const std::string& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidRequest("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw InvalidRequest("failed writing '" + path + "'");
}

}  // namespace unisynth
