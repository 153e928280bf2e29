// Copyright 2026 The diffmon Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// File formats: JSON rep and model documents, CSV tables, fingerprints.

#pragma once

#include <json.hpp>

#include <charconv>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "diffmon/dynamics.hpp"
#include "diffmon/reps.hpp"
#include "diffmon/stats.hpp"
#include "diffmon/trajectory.hpp"

namespace diffmon::io {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Number formatting

/// Shortest round-trip text, locale independent.
inline std::string format_shortest(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

/// 17 significant digits, locale independent.
inline std::string format17(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

/// Shortest form that always reads as a floating value ("1.0", not "1").
inline std::string format_real(double x) {
    std::string s = format_shortest(x);
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

inline std::string format_vector(const RealVector& v) {
    std::string s = "[";
    for (Eigen::Index k = 0; k < v.size(); ++k) {
        if (k) s += ", ";
        s += format_real(v(k));
    }
    return s + "]";
}

// ---------------------------------------------------------------------------
// Files and fingerprints

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    out << content;
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

/// 64-bit FNV-1a digest as 16 hex digits.
inline std::string fingerprint(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    static const char* hex = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, h >>= 4) s[size_t(i)] = hex[h & 0xf];
    return s;
}

// ---------------------------------------------------------------------------
// Schema helpers

namespace detail {

[[noreturn]] inline void schema(const std::string& field, const std::string& what) {
    throw Error(ErrorCode::SchemaError, "field \"" + field + "\": " + what);
}

inline const json& field(const json& doc, const std::string& name) {
    if (!doc.is_object()) schema(name, "document is not an object");
    const auto it = doc.find(name);
    if (it == doc.end()) schema(name, "missing");
    return *it;
}

inline double number(const json& v, const std::string& name) {
    if (!v.is_number()) schema(name, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) schema(name, "not finite");
    return x;
}

inline cplx complex_value(const json& v, const std::string& name) {
    if (!v.is_array() || v.size() != 2) schema(name, "expected [re, im]");
    return {number(v[0], name + "[0]"), number(v[1], name + "[1]")};
}

inline RealVector real_vector(const json& v, const std::string& name, Eigen::Index n) {
    if (!v.is_array() || Eigen::Index(v.size()) != n) {
        schema(name, "expected an array of " + std::to_string(n) + " numbers");
    }
    RealVector out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        out(i) = number(v[size_t(i)], name + "[" + std::to_string(i) + "]");
    }
    return out;
}

inline RealMatrix real_matrix(const json& v, const std::string& name, Eigen::Index rows,
                              Eigen::Index cols) {
    if (!v.is_array() || Eigen::Index(v.size()) != rows) {
        schema(name, "expected " + std::to_string(rows) + " rows");
    }
    RealMatrix out(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        out.row(i) = real_vector(v[size_t(i)], name + "[" + std::to_string(i) + "]", cols);
    }
    return out;
}

inline ComplexMatrix complex_matrix(const json& v, const std::string& name, Eigen::Index rows,
                                    Eigen::Index cols) {
    if (!v.is_array() || Eigen::Index(v.size()) != rows) {
        schema(name, "expected " + std::to_string(rows) + " rows");
    }
    ComplexMatrix out(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const json& row = v[size_t(i)];
        const std::string rname = name + "[" + std::to_string(i) + "]";
        if (!row.is_array() || Eigen::Index(row.size()) != cols) {
            schema(rname, "expected " + std::to_string(cols) + " [re, im] entries");
        }
        for (Eigen::Index j = 0; j < cols; ++j) {
            out(i, j) = complex_value(row[size_t(j)], rname + "[" + std::to_string(j) + "]");
        }
    }
    return out;
}

inline json to_json(const ComplexMatrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
        rows.push_back(row);
    }
    return rows;
}

inline json to_json(const RealMatrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

inline json to_json(const RealVector& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

/// Re-raises a domain error from validation as a ValidationError.
template <typename F>
auto validated(const std::string& source, F&& f) {
    try {
        return f();
    } catch (const Error& e) {
        if (e.code() == ErrorCode::SchemaError || e.code() == ErrorCode::ParseError) throw;
        throw Error(ErrorCode::ValidationError, source + ": " + e.what());
    }
}

}  // namespace detail

inline json parse_json(const std::string& text, const std::string& source) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ParseError, source + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Rep documents

struct RepDocument {
    std::string type;  // mrep | urep | trep | brep
    double hbar = 1.0;
    Eigen::Index channels = 0;
    std::optional<MRep> mrep;
    std::optional<URep> urep;
    std::optional<TRep> trep;
    std::optional<BRep> brep;
    std::optional<OrthoMatrix> ortho;  // optional "O" next to a brep
    EfficiencyVector eta;
};

/// Parses and validates a rep document; `default_hbar` applies when "hbar" is absent.
inline RepDocument rep_from_json(const json& doc, const std::string& source = "input",
                                 double tol = kDefaultTol, double default_hbar = 1.0) {
    RepDocument rep;
    const json& type = detail::field(doc, "type");
    if (!type.is_string()) detail::schema("type", "expected a string");
    rep.type = type.get<std::string>();
    rep.hbar = doc.contains("hbar") ? detail::number(doc["hbar"], "hbar") : default_hbar;
    const json& lj = detail::field(doc, "L");
    if (!lj.is_number_integer() || lj.get<long>() < 1) detail::schema("L", "expected an integer >= 1");
    const Eigen::Index l = lj.get<long>();
    rep.channels = l;
    if (!(rep.hbar > 0.0)) {
        throw Error(ErrorCode::ValidationError, source + ": hbar must be positive");
    }
    if (rep.type == "mrep") {
        MRep m{rep.hbar, detail::complex_matrix(detail::field(doc, "matrix"), "matrix", l, 2 * l)};
        rep.eta = detail::validated(source, [&] { return validate_mrep(m, tol); });
        rep.mrep = m;
    } else if (rep.type == "urep") {
        URep u{rep.hbar, detail::real_matrix(detail::field(doc, "matrix"), "matrix", 2 * l, 2 * l)};
        rep.eta = detail::validated(source, [&] { return validate_urep(u, tol); });
        rep.urep = u;
    } else if (rep.type == "trep") {
        TRep t{rep.hbar, detail::real_matrix(detail::field(doc, "matrix"), "matrix", 2 * l, 2 * l)};
        rep.eta = detail::validated(source, [&] { return validate_trep(t, tol); });
        rep.trep = t;
    } else if (rep.type == "brep") {
        BRep b;
        b.eta = detail::real_vector(detail::field(doc, "eta"), "eta", l);
        b.s = detail::complex_matrix(detail::field(doc, "S"), "S", l, l);
        b.theta = detail::real_vector(detail::field(doc, "theta"), "theta", l);
        detail::validated(source, [&] {
            validate_brep(b, tol);
            return 0;
        });
        rep.eta = b.eta;
        rep.brep = b;
        if (doc.contains("O")) {
            const RealMatrix o = detail::real_matrix(doc["O"], "O", 2 * l, 2 * l);
            rep.ortho = detail::validated(source, [&] { return make_ortho(o, tol); });
        }
    } else {
        detail::schema("type", "unknown rep type \"" + rep.type + "\"");
    }
    return rep;
}

inline RepDocument read_rep(const std::string& path, double tol = kDefaultTol,
                            double default_hbar = 1.0) {
    return rep_from_json(parse_json(read_file(path), path), path, tol, default_hbar);
}

/// M-rep equivalent of any rep document. U-reps use T = sqrt(hbar U).
inline MRep to_mrep(const RepDocument& rep, double tol = kDefaultTol) {
    if (rep.mrep) return *rep.mrep;
    if (rep.trep) return trep_to_mrep(*rep.trep);
    if (rep.brep) {
        return rep.ortho ? brep_o_to_mrep(*rep.brep, *rep.ortho, rep.hbar, tol)
                         : brep_to_mrep(*rep.brep, rep.hbar, tol);
    }
    const RealMatrix t = linalg::positive_sqrt(RealMatrix(rep.hbar * rep.urep->matrix), tol);
    return trep_to_mrep(TRep{rep.hbar, t});
}

inline json to_json(const MRep& m) {
    return json{{"type", "mrep"}, {"hbar", m.hbar}, {"L", m.channels()},
                {"matrix", detail::to_json(m.matrix)}};
}

inline json to_json(const URep& u) {
    return json{{"type", "urep"}, {"hbar", u.hbar}, {"L", u.channels()},
                {"matrix", detail::to_json(u.matrix)}};
}

inline json to_json(const TRep& t) {
    return json{{"type", "trep"}, {"hbar", t.hbar}, {"L", t.channels()},
                {"matrix", detail::to_json(t.matrix)}};
}

inline json to_json(const BRep& b, double hbar, const std::optional<OrthoMatrix>& o = std::nullopt) {
    json doc{{"type", "brep"},
             {"hbar", hbar},
             {"L", b.channels()},
             {"eta", detail::to_json(b.eta)},
             {"S", detail::to_json(b.s)},
             {"theta", detail::to_json(b.theta)}};
    if (o) {
        doc["O"] = detail::to_json(o->matrix);
        doc["det_O"] = o->det_sign;
    }
    return doc;
}

// ---------------------------------------------------------------------------
// Model documents

inline LindbladModel model_from_json(const json& doc, const std::string& source = "input",
                                     double default_hbar = 1.0) {
    const double hbar = doc.contains("hbar") ? detail::number(doc["hbar"], "hbar") : default_hbar;
    const json& dj = detail::field(doc, "dim");
    if (!dj.is_number_integer() || dj.get<long>() < 1) detail::schema("dim", "expected an integer >= 1");
    const Eigen::Index n = dj.get<long>();
    const ComplexMatrix h = detail::complex_matrix(detail::field(doc, "hamiltonian"), "hamiltonian", n, n);
    const json& lj = detail::field(doc, "lindblads");
    if (!lj.is_array() || lj.empty()) detail::schema("lindblads", "expected a non-empty array");
    std::vector<ComplexMatrix> cs;
    for (size_t k = 0; k < lj.size(); ++k) {
        cs.push_back(detail::complex_matrix(lj[k], "lindblads[" + std::to_string(k) + "]", n, n));
    }
    return detail::validated(source, [&] { return LindbladModel(h, cs, hbar); });
}

inline LindbladModel read_model(const std::string& path, double default_hbar = 1.0) {
    return model_from_json(parse_json(read_file(path), path), path, default_hbar);
}

inline json to_json(const LindbladModel& model) {
    json cs = json::array();
    for (const auto& c : model.lindblads()) cs.push_back(detail::to_json(c));
    return json{{"hbar", model.hbar()},
                {"dim", model.dim()},
                {"hamiltonian", detail::to_json(model.hamiltonian())},
                {"lindblads", cs}};
}

inline ComplexMatrix state_from_json(const json& v, Eigen::Index n, const std::string& source) {
    const ComplexMatrix rho = detail::complex_matrix(v, "rho0", n, n);
    detail::validated(source, [&] {
        validate_state(rho, 1e-9);
        return 0;
    });
    return rho;
}

// ---------------------------------------------------------------------------
// CSV

/// Header t,traj,y_1..y_{2L},purity,log_weight; rows ordered by trajectory, then step.
inline std::string trajectory_csv(const Ensemble& ens) {
    const Eigen::Index d = 2 * ens.channels;
    std::string out = "t,traj";
    for (Eigen::Index j = 1; j <= d; ++j) out += ",y_" + std::to_string(j);
    out += ",purity,log_weight\n";
    for (size_t k = 0; k < ens.trajectories.size(); ++k) {
        const auto& t = ens.trajectories[k];
        if (t.currents.rows() != ens.config.steps || t.purity.size() != ens.config.steps) {
            throw Error(ErrorCode::InvalidArgument, "trajectory CSV needs currents and purity");
        }
        for (long n = 0; n < ens.config.steps; ++n) {
            out += format17(double(n + 1) * ens.config.dt);
            out += ',';
            out += std::to_string(t.stream);
            for (Eigen::Index j = 0; j < d; ++j) {
                out += ',';
                out += format17(t.currents(n, j));
            }
            out += ',';
            out += format17(t.purity(n));
            out += ',';
            out += format17(t.log_weight(n));
            out += '\n';
        }
    }
    return out;
}

/// Named numeric table written both as JSON and as CSV.
struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    std::string csv() const {
        std::string out;
        for (size_t c = 0; c < columns.size(); ++c) out += (c ? "," : "") + columns[c];
        out += '\n';
        for (const auto& row : rows) {
            for (size_t c = 0; c < row.size(); ++c) out += (c ? "," : "") + format17(row[c]);
            out += '\n';
        }
        return out;
    }

    json to_json() const { return json{{"columns", columns}, {"rows", rows}}; }
};

inline json tables_to_json(const std::vector<Table>& tables) {
    json doc = json::object();
    for (const auto& t : tables) doc[t.name] = t.to_json();
    return doc;
}

inline std::vector<Table> convergence_tables(const ConvergenceReport& rep) {
    Table td{"trace_distance", {"t", "trace_distance", "bias"}, {}};
    for (size_t k = 0; k < rep.times.size(); ++k) {
        td.rows.push_back({rep.times[k], rep.trace_distance[k], rep.bias[k]});
    }
    Table noise{"noise_moments", {"component", "mean"}, {}};
    for (Eigen::Index j = 0; j < rep.noise_mean.size(); ++j) {
        noise.columns.push_back("cov_over_dt_" + std::to_string(j + 1));
    }
    for (Eigen::Index i = 0; i < rep.noise_mean.size(); ++i) {
        std::vector<double> row{double(i + 1), rep.noise_mean(i)};
        for (Eigen::Index j = 0; j < rep.noise_mean.size(); ++j) row.push_back(rep.noise_covariance(i, j));
        noise.rows.push_back(row);
    }
    Table summary{"summary", {"max_trace_distance", "max_bias", "n_increments"},
                  {{rep.max_trace_distance, rep.max_bias, double(rep.n_increments)}}};
    return {td, noise, summary};
}

}  // namespace diffmon::io
