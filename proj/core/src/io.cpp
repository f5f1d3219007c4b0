#include "cpka/io.hpp"

#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cpka/tensor.hpp"
#include "cpka/whitening.hpp"

namespace cpka {

std::string fmt(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string> split(const std::string& line, char sep = ',') {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, sep)) out.push_back(cell);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

double to_double(const std::string& s) {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == 0) throw InputError("csv: bad number '" + s + "'");
    return v;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    return os;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw InputError("cannot read " + path);
    return is;
}

}  // namespace

void write_sourceset_csv(const std::string& path, const SourceSet& s) {
    auto os = open_out(path);
    const bool real = is_real_matrix(s.data);
    for (std::size_t i = 0; i < s.labels.size(); ++i) {
        if (real)
            os << s.labels[i] << ',';
        else
            os << s.labels[i] << "_re," << s.labels[i] << "_im,";
    }
    os << "sample_rate=" << fmt(s.sample_rate) << '\n';
    for (Eigen::Index j = 0; j < s.length(); ++j) {
        for (Eigen::Index i = 0; i < s.count(); ++i) {
            if (i) os << ',';
            os << fmt(s.data(i, j).real());
            if (!real) os << ',' << fmt(s.data(i, j).imag());
        }
        os << '\n';
    }
}

SourceSet read_sourceset_csv(const std::string& path) {
    auto is = open_in(path);
    std::string line;
    if (!std::getline(is, line)) throw InputError("empty csv " + path);
    auto head = split(line);
    if (head.empty() || head.back().rfind("sample_rate=", 0) != 0)
        throw InputError("csv header lacks sample_rate in " + path);
    const double fs = to_double(head.back().substr(12));
    head.pop_back();
    bool complex = !head.empty() && head.front().size() > 3 && head.front().compare(head.front().size() - 3, 3, "_re") == 0;
    std::vector<std::string> labels;
    if (complex) {
        for (std::size_t i = 0; i + 1 < head.size(); i += 2) labels.push_back(head[i].substr(0, head[i].size() - 3));
    } else {
        labels = head;
    }
    const std::size_t n = labels.size();
    std::vector<std::vector<cd>> cols(n);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != (complex ? 2 * n : n)) throw InputError("csv row width mismatch in " + path);
        for (std::size_t i = 0; i < n; ++i)
            cols[i].push_back(complex ? cd(to_double(cells[2 * i]), to_double(cells[2 * i + 1])) : cd(to_double(cells[i]), 0.0));
    }
    const auto len = static_cast<Eigen::Index>(cols.empty() ? 0 : cols[0].size());
    CMatrix d(static_cast<Eigen::Index>(n), len);
    for (std::size_t i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < len; ++j) d(static_cast<Eigen::Index>(i), j) = cols[i][static_cast<std::size_t>(j)];
    return SourceSet(std::move(d), std::move(labels), fs);
}

void write_tensor_csv(const std::string& path, const FourthOrderTensor& t) {
    auto os = open_out(path);
    os << "i1,i2,i3,i4,re,im\n";
    const int n = t.dim();
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d) {
                    const cd v = t(a, b, c, d);
                    os << a << ',' << b << ',' << c << ',' << d << ',' << fmt(v.real()) << ',' << fmt(v.imag()) << '\n';
                }
}

FourthOrderTensor read_tensor_csv(const std::string& path) {
    auto is = open_in(path);
    std::string line;
    std::getline(is, line);
    std::vector<std::array<int, 4>> idx;
    std::vector<cd> vals;
    int n = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto c = split(line);
        if (c.size() != 6) throw InputError("tensor csv: expected 6 columns in " + path);
        std::array<int, 4> q{std::stoi(c[0]), std::stoi(c[1]), std::stoi(c[2]), std::stoi(c[3])};
        for (int v : q) n = std::max(n, v + 1);
        idx.push_back(q);
        vals.emplace_back(to_double(c[4]), to_double(c[5]));
    }
    FourthOrderTensor t(n);
    if (idx.size() != t.data().size()) throw InputError("tensor csv: entry count does not match dimension");
    for (std::size_t k = 0; k < idx.size(); ++k) t(idx[k][0], idx[k][1], idx[k][2], idx[k][3]) = vals[k];
    return t;
}

// layout: "CPKT4\0\0\0", uint32 n, uint32 reserved, then n^4 (re, im) doubles,
// all little endian as written by the host
void write_tensor_binary(const std::string& path, const FourthOrderTensor& t) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path);
    const char magic[8] = {'C', 'P', 'K', 'T', '4', 0, 0, 0};
    os.write(magic, 8);
    const std::uint32_t n = static_cast<std::uint32_t>(t.dim()), reserved = 0;
    os.write(reinterpret_cast<const char*>(&n), 4);
    os.write(reinterpret_cast<const char*>(&reserved), 4);
    os.write(reinterpret_cast<const char*>(t.data().data()), static_cast<std::streamsize>(t.data().size() * sizeof(cd)));
    if (!os) throw std::runtime_error("write failed for " + path);
}

FourthOrderTensor read_tensor_binary(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw InputError("cannot read " + path);
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, "CPKT4", 5) != 0) throw InputError("not a tensor file: " + path);
    std::uint32_t n = 0, reserved = 0;
    is.read(reinterpret_cast<char*>(&n), 4);
    is.read(reinterpret_cast<char*>(&reserved), 4);
    FourthOrderTensor t(static_cast<int>(n));
    is.read(reinterpret_cast<char*>(t.data().data()), static_cast<std::streamsize>(t.data().size() * sizeof(cd)));
    if (!is) throw InputError("truncated tensor file: " + path);
    return t;
}

void write_unmixing_csv(const std::string& path, const UnmixingMatrix& w) {
    {
        auto os = open_out(path);
        for (Eigen::Index k = 0; k < w.w.cols(); ++k) os << (k ? "," : "") << 'w' << k << "_re,w" << k << "_im";
        os << '\n';
        for (Eigen::Index i = 0; i < w.w.rows(); ++i) {
            for (Eigen::Index k = 0; k < w.w.cols(); ++k)
                os << (k ? "," : "") << fmt(w.w(i, k).real()) << ',' << fmt(w.w(i, k).imag());
            os << '\n';
        }
    }
    nlohmann::json j;
    j["algorithm"] = w.algorithm;
    j["converged"] = w.converged();
    j["volume"] = w.volume();
    j["vectors"] = nlohmann::json::array();
    for (const auto& d : w.diagnostics)
        j["vectors"].push_back(
            {{"iterations", d.iterations}, {"residual", d.residual}, {"restarts", d.restarts}, {"converged", d.converged}});
    j["objective_history"] = w.objective_history;
    auto os = open_out(path + ".json");
    os << j.dump(2) << '\n';
}

UnmixingMatrix read_unmixing_csv(const std::string& path) {
    auto is = open_in(path);
    std::string line;
    if (!std::getline(is, line)) throw InputError("empty csv " + path);
    const std::size_t cols = split(line).size() / 2;
    std::vector<std::vector<cd>> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto c = split(line);
        if (c.size() != 2 * cols) throw InputError("unmixing csv: row width mismatch");
        std::vector<cd> r;
        for (std::size_t k = 0; k < cols; ++k) r.emplace_back(to_double(c[2 * k]), to_double(c[2 * k + 1]));
        rows.push_back(std::move(r));
    }
    UnmixingMatrix w;
    w.w.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t k = 0; k < cols; ++k) w.w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
    std::ifstream js(path + ".json");
    if (js) {
        const auto j = nlohmann::json::parse(js);
        w.algorithm = j.value("algorithm", "");
        for (const auto& v : j.at("vectors"))
            w.diagnostics.push_back({v.at("iterations").get<int>(), v.at("residual").get<double>(),
                                     v.at("restarts").get<int>(), v.at("converged").get<bool>()});
        w.objective_history = j.at("objective_history").get<std::vector<double>>();
    }
    return w;
}

std::string report_csv_header() { return "algorithm,seed,isi,acc,sdr_mean,sdr_min,extras"; }

std::string report_csv_row(const SeparationReport& r) {
    std::ostringstream os;
    os << r.algorithm << ',' << r.seed << ',' << fmt(r.isi) << ',' << fmt(r.acc) << ',' << fmt(r.sdr_mean()) << ','
       << fmt(r.sdr_min()) << ',';
    bool first = true;
    for (const auto& [k, v] : r.extras) {
        os << (first ? "" : ";") << k << '=' << fmt(v);
        first = false;
    }
    os << (first ? "" : ";") << "converged=" << (r.converged ? 1 : 0);
    return os.str();
}

std::string report_json(const SeparationReport& r) {
    nlohmann::json j;
    j["algorithm"] = r.algorithm;
    j["seed"] = r.seed;
    j["isi"] = r.isi;
    j["acc"] = r.acc;
    j["sdr_db"] = r.sdr_db;
    j["sdr_mean"] = r.sdr_mean();
    j["sdr_min"] = r.sdr_min();
    j["matching"] = r.matching;
    j["converged"] = r.converged;
    j["extras"] = r.extras;
    return j.dump(2);
}

}  // namespace cpka
