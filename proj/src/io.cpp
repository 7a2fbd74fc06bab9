#include "oukit/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "oukit/errors.hpp"

namespace oukit {

namespace {

using nlohmann::json;

cplx parse_entry(const json& e, const std::string& where) {
    if (e.is_number()) return {e.get<double>(), 0.0};
    if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) return {e[0].get<double>(), e[1].get<double>()};
    raise(ErrorCode::ConfigInvalid, where + ": entries must be numbers or [re, im] pairs");
}

MatrixXc parse_matrix(const json& doc, const char* key) {
    if (!doc.contains(key)) raise(ErrorCode::ConfigInvalid, std::string("system document lacks \"") + key + "\"");
    const json& m = doc[key];
    if (m.is_number() || (m.is_array() && m.size() == 2 && m[0].is_number())) {
        MatrixXc out(1, 1);
        out(0, 0) = parse_entry(m, key);
        return out;
    }
    if (!m.is_array() || m.empty()) raise(ErrorCode::ConfigInvalid, std::string(key) + " must be a nested array");
    const auto rows = static_cast<Eigen::Index>(m.size());
    if (!m[0].is_array()) raise(ErrorCode::ConfigInvalid, std::string(key) + " must be a nested array");
    const auto cols = static_cast<Eigen::Index>(m[0].size());
    MatrixXc out(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const json& row = m[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
            raise(ErrorCode::ConfigInvalid, std::string(key) + " rows differ in length");
        for (Eigen::Index c = 0; c < cols; ++c) out(r, c) = parse_entry(row[static_cast<std::size_t>(c)], key);
    }
    return out;
}

json entry_json(cplx z) {
    if (z.imag() == 0.0) return z.real();
    return json::array({z.real(), z.imag()});
}

json matrix_json(const MatrixXc& m) {
    json out = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(entry_json(m(r, c)));
        out.push_back(row);
    }
    return out;
}

json parse_document(const std::string& text, const char* what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        raise(ErrorCode::ConfigInvalid, std::string(what) + " is not valid JSON: " + e.what());
    }
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_number(const std::string& s) {
    double v = 0.0;
    const char* b = s.data();
    const char* e = s.data() + s.size();
    while (b < e && *b == ' ') ++b;
    if (b < e && *b == '+') ++b;
    const auto r = std::from_chars(b, e, v);
    if (r.ec != std::errc() || r.ptr != e) raise(ErrorCode::ConfigInvalid, "malformed number \"" + s + "\" in CSV");
    return v;
}

}  // namespace

std::string format_double(double x) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, r.ptr);
}

OUSystem system_from_json(const std::string& text, const ValidationTolerances& tol) {
    const json doc = parse_document(text, "system document");
    if (!doc.is_object()) raise(ErrorCode::ConfigInvalid, "system document must be an object");
    const MatrixXc A = parse_matrix(doc, "A");
    const MatrixXc B = parse_matrix(doc, "B");
    int d = -1;
    if (doc.contains("d")) {
        if (!doc["d"].is_number_integer() || doc["d"].get<int>() < 1) raise(ErrorCode::ConfigInvalid, "d must be a positive integer");
        d = doc["d"].get<int>();
    }
    MatrixXr S;
    if (doc.contains("S")) {
        const MatrixXc Sc = parse_matrix(doc, "S");
        if (Sc.imag().cwiseAbs().maxCoeff() != 0.0) raise(ErrorCode::ConfigInvalid, "S must be real");
        S = Sc.real();
        if (d >= 0 && S.rows() != d) raise(ErrorCode::ConfigInvalid, "S does not match d");
    } else {
        if (d < 0) raise(ErrorCode::ConfigInvalid, "system document needs d or S");
        S = MatrixXr::Zero(d, d);
    }
    return validate_system(A, B, S, tol);
}

OUSystem load_system(const std::string& path, const ValidationTolerances& tol) {
    return system_from_json(read_text_file(path), tol);
}

std::string system_to_json(const OUSystem& sys) {
    json doc;
    doc["A"] = matrix_json(sys.A);
    doc["B"] = matrix_json(sys.B);
    doc["S"] = matrix_json(sys.S.cast<cplx>());
    doc["d"] = sys.d;
    return doc.dump(2) + "\n";
}

std::string grid_spec_to_json(const GridSpec& spec) {
    json doc;
    doc["min"] = spec.min;
    doc["max"] = spec.max;
    doc["count"] = spec.count;
    return doc.dump() + "\n";
}

GridSpec grid_spec_from_json(const std::string& text) {
    const json doc = parse_document(text, "grid header");
    GridSpec g;
    try {
        g.min = doc.at("min").get<std::vector<double>>();
        g.max = doc.at("max").get<std::vector<double>>();
        g.count = doc.at("count").get<std::vector<int>>();
    } catch (const json::exception& e) {
        raise(ErrorCode::ConfigInvalid, std::string("grid header: ") + e.what());
    }
    try {
        g.validate();
    } catch (const Error& e) {
        raise(ErrorCode::ConfigInvalid, e.what());
    }
    return g;
}

std::string grid_function_to_csv(const GridFunction& v) {
    std::ostringstream os;
    const int d = v.spec.dim();
    for (int a = 0; a < d; ++a) os << (a ? "," : "") << 'x' << a;
    for (int m = 0; m < v.N; ++m) os << ",re" << m << ",im" << m;
    os << "\r\n";
    for (std::size_t k = 0; k < v.spec.nodes(); ++k) {
        const VectorXr x = v.spec.node(k);
        for (int a = 0; a < d; ++a) os << (a ? "," : "") << format_double(x(a));
        const VectorXc z = v.at(k);
        for (int m = 0; m < v.N; ++m) os << ',' << format_double(z(m).real()) << ',' << format_double(z(m).imag());
        os << "\r\n";
    }
    return os.str();
}

GridFunction grid_function_from_csv(const std::string& text, const GridSpec& spec) {
    spec.validate();
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line)) raise(ErrorCode::ConfigInvalid, "grid CSV is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string> head = split_line(line);
    const int d = spec.dim();
    const int cols = static_cast<int>(head.size());
    if (cols < d + 2 || (cols - d) % 2 != 0) raise(ErrorCode::ConfigInvalid, "grid CSV header has an unexpected column count");
    GridFunction v;
    v.spec = spec;
    v.N = (cols - d) / 2;
    v.values.assign(spec.nodes() * static_cast<std::size_t>(v.N), 0.0);
    std::size_t k = 0;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (k >= spec.nodes()) raise(ErrorCode::ConfigInvalid, "grid CSV has more rows than grid nodes");
        const std::vector<std::string> cells = split_line(line);
        if (static_cast<int>(cells.size()) != cols) raise(ErrorCode::ConfigInvalid, "grid CSV row has the wrong length");
        const VectorXr x = spec.node(k);
        for (int a = 0; a < d; ++a) {
            const double c = parse_number(cells[static_cast<std::size_t>(a)]);
            if (std::abs(c - x(a)) > 1e-9 * (1.0 + std::abs(x(a))))
                raise(ErrorCode::ConfigInvalid, "grid CSV coordinates do not match the grid header");
        }
        VectorXc z(v.N);
        for (int m = 0; m < v.N; ++m)
            z(m) = cplx(parse_number(cells[static_cast<std::size_t>(d + 2 * m)]),
                        parse_number(cells[static_cast<std::size_t>(d + 2 * m + 1)]));
        v.set(k, z);
        ++k;
    }
    if (k != spec.nodes()) raise(ErrorCode::ConfigInvalid, "grid CSV has fewer rows than grid nodes");
    return v;
}

std::string kernel_slice_csv(const OUSystem& sys, double t, int axis, const std::vector<double>& coords) {
    if (axis < 0 || axis >= sys.d) raise(ErrorCode::InvalidInput, "axis out of range");
    const KernelEvaluator ev(sys, t);
    std::ostringstream os;
    os << "t,psi";
    for (int r = 0; r < sys.N; ++r)
        for (int c = 0; c < sys.N; ++c) os << ",re_" << r << c << ",im_" << r << c;
    os << "\r\n";
    for (double s : coords) {
        VectorXr psi = VectorXr::Zero(sys.d);
        psi(axis) = s;
        const MatrixXc K = ev.K(psi);
        os << format_double(t) << ',' << format_double(s);
        for (int r = 0; r < sys.N; ++r)
            for (int c = 0; c < sys.N; ++c) os << ',' << format_double(K(r, c).real()) << ',' << format_double(K(r, c).imag());
        os << "\r\n";
    }
    return os.str();
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCode::ConfigInvalid, "cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(ErrorCode::ConfigInvalid, "cannot write " + path);
    out << text;
    if (!out) raise(ErrorCode::ConfigInvalid, "write failed for " + path);
}

}  // namespace oukit
