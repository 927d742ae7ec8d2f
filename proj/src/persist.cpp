#include "oed/persist.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>
#include <vector>

#include "json.hpp"
#include "oed/errors.hpp"

namespace oed {

using nlohmann::json;

namespace {

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& j, const char* name) {
    if (!j.is_array() || j.empty()) throw ConfigError(std::string("system json: ") + name + " must be a nonempty array of rows");
    const std::size_t cols = j.front().is_array() ? j.front().size() : 0;
    Matrix m(static_cast<Index>(j.size()), static_cast<Index>(cols));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_array() || j[i].size() != cols) {
            throw ConfigError(std::string("system json: ") + name + " rows have unequal lengths");
        }
        for (std::size_t k = 0; k < cols; ++k) {
            if (!j[i][k].is_number()) throw ConfigError(std::string("system json: ") + name + " has a non-numeric entry");
            m(static_cast<Index>(i), static_cast<Index>(k)) = j[i][k].get<double>();
        }
    }
    return m;
}

json vector_to_json(const Vector& v) {
    json a = json::array();
    for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

Vector vector_from_json(const json& j) {
    Vector v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = j[i].get<double>();
    return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(line);
    while (std::getline(in, cur, sep)) out.push_back(cur);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) throw ConfigError("format_double: conversion failed");
    return std::string(buf, ptr);
}

double parse_double(const std::string& text) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) throw ConfigError("not a number: '" + text + "'");
    return v;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << text;
}

LtiSystem parse_system_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("system json: ") + e.what());
    }
    for (const char* key : {"A", "B", "C", "D"}) {
        if (!j.contains(key)) throw ConfigError(std::string("system json: missing ") + key);
    }
    return LtiSystem(matrix_from_json(j["A"], "A"), matrix_from_json(j["B"], "B"), matrix_from_json(j["C"], "C"),
                     matrix_from_json(j["D"], "D"));
}

LtiSystem load_system_json(const std::filesystem::path& path) { return parse_system_json(read_text_file(path)); }

std::string system_to_json(const LtiSystem& sys) {
    json j;
    j["A"] = matrix_to_json(sys.A());
    j["B"] = matrix_to_json(sys.B());
    j["C"] = matrix_to_json(sys.C());
    j["D"] = matrix_to_json(sys.D());
    return j.dump(2) + "\n";
}

std::string design_log_to_json(const DesignLog& log) {
    json steps = json::array();
    for (const auto& s : log.steps) {
        json step;
        step["t"] = s.t;
        step["branch"] = s.branch == Branch::ImageMiss ? "image_miss" : "certificate";
        step["u"] = vector_to_json(s.u);
        step["scalar"] = s.scalar ? json(*s.scalar) : json(nullptr);
        step["rank_after"] = s.rank_after;
        step["image_residual"] = s.image_residual;
        if (s.certificate) {
            step["certificate"] = {{"xi", vector_to_json(s.certificate->xi)},
                                   {"eta", vector_to_json(s.certificate->eta)},
                                   {"m", s.certificate->m},
                                   {"residual", s.certificate->residual}};
        } else {
            step["certificate"] = nullptr;
        }
        steps.push_back(std::move(step));
    }
    json fin;
    fin["T"] = log.final.T;
    fin["rank"] = log.final.final_rank;
    fin["target"] = log.final.target_rank;
    fin["n_recovered"] = log.final.n_recovered ? json(*log.final.n_recovered) : json(nullptr);
    json j;
    j["steps"] = std::move(steps);
    j["final"] = std::move(fin);
    return j.dump(2) + "\n";
}

DesignLog parse_design_log_json(const std::string& text) {
    DesignLog log;
    try {
        const json j = json::parse(text);
        for (const auto& s : j.at("steps")) {
            DesignStep step;
            step.t = s.at("t").get<long>();
            const auto branch = s.at("branch").get<std::string>();
            if (branch != "image_miss" && branch != "certificate") throw ConfigError("design log: unknown branch " + branch);
            step.branch = branch == "image_miss" ? Branch::ImageMiss : Branch::Certificate;
            step.u = vector_from_json(s.at("u"));
            if (!s.at("scalar").is_null()) step.scalar = s.at("scalar").get<double>();
            step.rank_after = s.at("rank_after").get<Index>();
            step.image_residual = s.value("image_residual", 0.0);
            if (s.contains("certificate") && !s.at("certificate").is_null()) {
                const auto& c = s.at("certificate");
                KernelCertificate cert;
                cert.xi = vector_from_json(c.at("xi"));
                cert.eta = vector_from_json(c.at("eta"));
                cert.m = c.at("m").get<Index>();
                cert.residual = c.at("residual").get<double>();
                step.certificate = std::move(cert);
            }
            log.steps.push_back(std::move(step));
        }
        const auto& f = j.at("final");
        log.final.T = f.at("T").get<Index>();
        log.final.final_rank = f.at("rank").get<Index>();
        log.final.target_rank = f.at("target").get<Index>();
        if (!f.at("n_recovered").is_null()) log.final.n_recovered = f.at("n_recovered").get<Index>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("design log json: ") + e.what());
    }
    return log;
}

std::string trajectory_to_csv(const Trajectory& traj) {
    const Index m = traj.u.dim();
    const Index p = traj.y ? traj.y->dim() : 0;
    const Index n = traj.x ? traj.x->dim() : 0;
    const Index T = traj.u.size();
    if (traj.y && traj.y->size() != T) throw DimensionError("trajectory_to_csv: y length differs from u");
    if (traj.x && traj.x->size() != T + 1) throw DimensionError("trajectory_to_csv: x must hold T + 1 samples");

    std::string out = "t";
    for (Index i = 1; i <= m; ++i) out += ",u_" + std::to_string(i);
    for (Index i = 1; i <= p; ++i) out += ",y_" + std::to_string(i);
    for (Index i = 1; i <= n; ++i) out += ",x_" + std::to_string(i);
    out += '\n';

    const long t0 = traj.t0();
    const Index rows = traj.x ? T + 1 : T;
    for (Index k = 0; k < rows; ++k) {
        out += std::to_string(t0 + k);
        for (Index i = 0; i < m; ++i) out += "," + (k < T ? format_double(traj.u[k](i)) : std::string());
        for (Index i = 0; i < p; ++i) out += "," + (k < T ? format_double((*traj.y)[k](i)) : std::string());
        for (Index i = 0; i < n; ++i) out += "," + format_double((*traj.x)[k](i));
        out += '\n';
    }
    return out;
}

Trajectory parse_trajectory_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("trajectory csv: empty input");
    const auto header = split(line, ',');
    if (header.empty() || header[0] != "t") throw ConfigError("trajectory csv: header must start with 't'");
    Index m = 0, p = 0, n = 0;
    for (std::size_t c = 1; c < header.size(); ++c) {
        const std::string expect_u = "u_" + std::to_string(m + 1);
        const std::string expect_y = "y_" + std::to_string(p + 1);
        const std::string expect_x = "x_" + std::to_string(n + 1);
        if (header[c] == expect_u && p == 0 && n == 0) ++m;
        else if (header[c] == expect_y && n == 0) ++p;
        else if (header[c] == expect_x) ++n;
        else throw ConfigError("trajectory csv: unexpected column '" + header[c] + "'");
    }
    if (m == 0) throw ConfigError("trajectory csv: no input columns");

    Trajectory traj;
    bool first_row = true;
    bool terminal_seen = false;
    long t0 = 0;
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto cells = split(line, ',');
        if (cells.size() != header.size()) throw ConfigError("trajectory csv: ragged row '" + line + "'");
        rows.push_back(std::move(cells));
    }
    for (const auto& cells : rows) {
        const long t = static_cast<long>(parse_double(cells[0]));
        if (first_row) {
            t0 = t;
            traj.u = VectorSeq(m, t0);
            if (p > 0) traj.y = VectorSeq(p, t0);
            if (n > 0) traj.x = VectorSeq(n, t0);
            first_row = false;
        }
        if (terminal_seen) throw ConfigError("trajectory csv: rows after the terminal state");
        if (t != t0 + static_cast<long>(traj.x ? traj.x->size() : traj.u.size())) {
            throw ConfigError("trajectory csv: non-consecutive time index " + cells[0]);
        }
        const bool terminal = cells[1].empty();
        if (terminal && n == 0) throw ConfigError("trajectory csv: missing input values");
        auto read = [&cells](std::size_t offset, Index count) {
            Vector v(count);
            for (Index i = 0; i < count; ++i) v(i) = parse_double(cells[offset + static_cast<std::size_t>(i)]);
            return v;
        };
        if (!terminal) {
            traj.u.push_back(read(1, m));
            if (p > 0) traj.y->push_back(read(1 + static_cast<std::size_t>(m), p));
        } else {
            terminal_seen = true;
        }
        if (n > 0) traj.x->push_back(read(1 + static_cast<std::size_t>(m + p), n));
    }
    if (first_row) {
        traj.u = VectorSeq(m);
        if (p > 0) traj.y = VectorSeq(p);
        if (n > 0) traj.x = VectorSeq(n);
    }
    if (traj.x && !terminal_seen && !first_row) throw ConfigError("trajectory csv: missing terminal state row");
    return traj;
}

}  // namespace oed
