#include "plg/serialization.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace plg {

using nlohmann::json;

std::string format_real(double value) {
    if (!std::isfinite(value)) throw FormatError("cannot serialize non-finite value");
    char buf[32];
    const int len = std::snprintf(buf, sizeof buf, "%.17g", value);
    return std::string(buf, static_cast<std::size_t>(len));
}

namespace {

std::string vector_json(const Eigen::Ref<const Vector>& v) {
    std::string s = "[";
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) s += ", ";
        s += format_real(v(i));
    }
    return s + "]";
}

std::string matrix_json(const Matrix& m) {
    std::string s = "[";
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (r || c) s += ", ";
            s += format_real(m(r, c));
        }
    return s + "]";
}

json parse(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw FormatError(std::string("invalid JSON: ") + e.what());
    }
}

const json& field(const json& doc, const char* key) {
    if (!doc.is_object() || !doc.contains(key))
        throw FormatError(std::string("missing field '") + key + "'");
    return doc.at(key);
}

double real_field(const json& doc, const char* key) {
    const json& v = field(doc, key);
    if (!v.is_number()) throw FormatError(std::string("field '") + key + "' must be a number");
    return v.get<double>();
}

Vector vector_field(const json& doc, const char* key, int n) {
    const json& v = field(doc, key);
    if (!v.is_array() || static_cast<int>(v.size()) != n)
        throw FormatError(std::string("field '") + key + "' must be an array of length " +
                          std::to_string(n));
    Vector out(n);
    for (int i = 0; i < n; ++i) {
        if (!v[static_cast<std::size_t>(i)].is_number())
            throw FormatError(std::string("field '") + key + "' has a non-numeric entry");
        out(i) = v[static_cast<std::size_t>(i)].get<double>();
    }
    return out;
}

// Row-major flat array of n*n values; nested rows are accepted too.
Matrix matrix_field(const json& doc, const char* key, int n) {
    const json& v = field(doc, key);
    json flat = json::array();
    if (v.is_array() && !v.empty() && v.front().is_array()) {
        for (const auto& row : v)
            for (const auto& x : row) flat.push_back(x);
    } else {
        flat = v;
    }
    const json wrapper = {{key, flat}};
    const Vector values = vector_field(wrapper, key, n * n);
    Matrix out(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) out(r, c) = values(r * n + c);
    return out;
}

int dim_field(const json& doc) {
    const json& v = field(doc, "n");
    if (!v.is_number_integer() || v.get<long long>() < 1)
        throw FormatError("field 'n' must be a positive integer");
    return v.get<int>();
}

PlgParams plg_from_doc(const json& doc) {
    PlgParams p;
    p.n = dim_field(doc);
    p.mu0 = vector_field(doc, "mu0", p.n);
    p.Sigma0 = matrix_field(doc, "Sigma0", p.n);
    p.g = vector_field(doc, "g", p.n);
    p.C = vector_field(doc, "C", p.n);
    p.sigma2 = real_field(doc, "sigma2");
    return p;
}

LdsParams lds_from_doc(const json& doc) {
    LdsParams p;
    p.n = dim_field(doc);
    p.A = matrix_field(doc, "A", p.n);
    p.H = vector_field(doc, "H", p.n).transpose();
    p.Q = matrix_field(doc, "Q", p.n);
    p.R = real_field(doc, "R");
    p.x1hat = vector_field(doc, "x1hat", p.n);
    p.P1 = matrix_field(doc, "P1", p.n);
    return p;
}

}  // namespace

std::string plg_to_json(const PlgParams& p) {
    p.check_shapes();
    std::ostringstream s;
    s << "{\n"
      << "  \"n\": " << p.n << ",\n"
      << "  \"mu0\": " << vector_json(p.mu0) << ",\n"
      << "  \"Sigma0\": " << matrix_json(p.Sigma0) << ",\n"
      << "  \"g\": " << vector_json(p.g) << ",\n"
      << "  \"C\": " << vector_json(p.C) << ",\n"
      << "  \"sigma2\": " << format_real(p.sigma2) << "\n"
      << "}\n";
    return s.str();
}

PlgParams plg_from_json(const std::string& text) { return plg_from_doc(parse(text)); }

std::string lds_to_json(const LdsParams& p) {
    p.check_shapes();
    std::ostringstream s;
    s << "{\n"
      << "  \"n\": " << p.n << ",\n"
      << "  \"A\": " << matrix_json(p.A) << ",\n"
      << "  \"H\": " << vector_json(p.H.transpose()) << ",\n"
      << "  \"Q\": " << matrix_json(p.Q) << ",\n"
      << "  \"R\": " << format_real(p.R) << ",\n"
      << "  \"x1hat\": " << vector_json(p.x1hat) << ",\n"
      << "  \"P1\": " << matrix_json(p.P1) << "\n"
      << "}\n";
    return s.str();
}

LdsParams lds_from_json(const std::string& text) { return lds_from_doc(parse(text)); }

std::string diagnostics_to_json(const CeDiagnostics& d) {
    std::string s = "{\n  \"gamma_condition\": ";
    s += std::isfinite(d.gamma_condition) ? format_real(d.gamma_condition) : "null";
    s += ",\n  \"umt_ok\": ";
    s += d.umt_ok ? "true" : "false";
    s += ",\n  \"psd_violation\": ";
    s += d.psd_violation ? "true" : "false";
    s += "\n}\n";
    return s;
}

Model model_from_json(const std::string& text) {
    const json doc = parse(text);
    if (doc.is_object() && doc.contains("A")) return lds_from_doc(doc);
    if (doc.is_object() && doc.contains("g")) return plg_from_doc(doc);
    throw FormatError("model JSON is neither an LDS (has \"A\") nor a PLG (has \"g\")");
}

void write_traces_csv(std::ostream& out, const std::vector<Trace>& traces) {
    out << "trace,t,y\n";
    for (std::size_t k = 0; k < traces.size(); ++k)
        for (std::size_t t = 0; t < traces[k].size(); ++t)
            out << k << ',' << (t + 1) << ',' << format_real(traces[k].ys[t]) << '\n';
}

namespace {

template <typename T>
T parse_number(std::string_view field, std::size_t line) {
    T value{};
    const char* end = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(field.data(), end, value);
    if (ec != std::errc() || ptr != end)
        throw FormatError("trace CSV line " + std::to_string(line) + ": bad number '" +
                          std::string(field) + "'");
    return value;
}

}  // namespace

std::vector<Trace> read_traces_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw FormatError("trace CSV is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "trace,t,y") throw FormatError("trace CSV header must be 'trace,t,y'");

    std::vector<Trace> traces;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto c1 = line.find(',');
        const auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
        if (c2 == std::string::npos)
            throw FormatError("trace CSV line " + std::to_string(lineno) + ": expected 3 fields");
        const std::string_view view(line);
        const auto k = parse_number<std::size_t>(view.substr(0, c1), lineno);
        const auto t = parse_number<std::size_t>(view.substr(c1 + 1, c2 - c1 - 1), lineno);
        const auto y = parse_number<double>(view.substr(c2 + 1), lineno);

        if (k == traces.size()) traces.emplace_back();
        if (k + 1 != traces.size() || t != traces.back().size() + 1)
            throw FormatError("trace CSV line " + std::to_string(lineno) +
                              ": rows must be sorted by (trace, t) without gaps");
        traces.back().ys.push_back(y);
    }
    return traces;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write " + path.string());
    out << contents;
}

}  // namespace plg
