#include "roughscatter/io.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace roughscatter {

namespace {

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out)
{
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    }
    std::ofstream out(path, mode | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    return out;
}

std::ifstream open_in(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string() + " for reading");
    return in;
}

template <typename T>
void put(std::ostream& out, T v)
{
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::filesystem::path& path)
{
    T v;
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw IoError("truncated file " + path.string());
    return v;
}

void check_magic(std::istream& in, const char* magic, const std::filesystem::path& path)
{
    std::array<char, 8> buf{};
    in.read(buf.data(), 8);
    if (!in || std::memcmp(buf.data(), magic, 8) != 0) throw IoError("bad header in " + path.string());
}

void finish(std::ofstream& out, const std::filesystem::path& path)
{
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
}

} // namespace

std::string format_double(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows)
{
    auto out = open_out(path);
    for (size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
    for (const auto& row : rows) {
        if (row.size() != header.size()) throw std::invalid_argument("write_csv: row width differs from header");
        for (size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_double(row[i]);
        out << '\n';
    }
    finish(out, path);
}

CsvTable read_csv(const std::filesystem::path& path)
{
    auto in = open_in(path);
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty csv " + path.string());
    std::stringstream hs(line);
    for (std::string cell; std::getline(hs, cell, ',');) t.header.push_back(cell);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream rs(line);
        std::vector<double> row;
        for (std::string cell; std::getline(rs, cell, ',');) row.push_back(std::stod(cell));
        t.rows.push_back(std::move(row));
    }
    return t;
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
    auto out = open_out(path);
    out << text;
    finish(out, path);
}

void write_realization(const std::filesystem::path& path, const InterfaceRealization& r)
{
    auto out = open_out(path, std::ios::out | std::ios::binary);
    out.write("RSGRID01", 8);
    put<std::int32_t>(out, r.grid.n1);
    put<std::int32_t>(out, r.grid.n2);
    put(out, r.grid.d1);
    put(out, r.grid.d2);
    put(out, r.grid.origin(0));
    put(out, r.grid.origin(1));
    put<std::uint64_t>(out, r.seed);
    out.write(reinterpret_cast<const char*>(r.values.data()), std::streamsize(sizeof(double) * r.values.size()));
    finish(out, path);
}

InterfaceRealization read_realization(const std::filesystem::path& path)
{
    auto in = open_in(path);
    check_magic(in, "RSGRID01", path);
    InterfaceRealization r;
    r.grid.n1 = get<std::int32_t>(in, path);
    r.grid.n2 = get<std::int32_t>(in, path);
    r.grid.d1 = get<double>(in, path);
    r.grid.d2 = get<double>(in, path);
    r.grid.origin(0) = get<double>(in, path);
    r.grid.origin(1) = get<double>(in, path);
    r.seed = get<std::uint64_t>(in, path);
    if (r.grid.n1 <= 0 || r.grid.n2 <= 0) throw IoError("bad dimensions in " + path.string());
    r.values.resize(r.grid.size());
    in.read(reinterpret_cast<char*>(r.values.data()), std::streamsize(sizeof(double) * r.values.size()));
    if (!in) throw IoError("truncated file " + path.string());
    return r;
}

void write_field(const std::filesystem::path& path, const WaveField& f)
{
    auto out = open_out(path, std::ios::out | std::ios::binary);
    out.write("RSFIELD1", 8);
    put<std::int32_t>(out, f.lateral.n1);
    put<std::int32_t>(out, f.lateral.n2);
    put(out, f.lateral.d1);
    put(out, f.lateral.d2);
    put<std::int32_t>(out, f.omega.n);
    put(out, f.omega.d_omega);
    put<std::int32_t>(out, static_cast<std::int32_t>(f.frame.kind));
    put(out, f.z);
    put(out, f.frame.epsilon);
    for (Eigen::Index i = 0; i < f.spectrum.rows(); ++i)
        for (Eigen::Index m = 0; m < f.spectrum.cols(); ++m) {
            put(out, f.spectrum(i, m).real());
            put(out, f.spectrum(i, m).imag());
        }
    finish(out, path);
}

WaveField read_field(const std::filesystem::path& path)
{
    auto in = open_in(path);
    check_magic(in, "RSFIELD1", path);
    WaveField f;
    f.lateral.n1 = get<std::int32_t>(in, path);
    f.lateral.n2 = get<std::int32_t>(in, path);
    f.lateral.d1 = get<double>(in, path);
    f.lateral.d2 = get<double>(in, path);
    f.omega.n = get<std::int32_t>(in, path);
    f.omega.d_omega = get<double>(in, path);
    const auto tag = get<std::int32_t>(in, path);
    if (tag < 0 || tag > 2) throw IoError("bad frame tag in " + path.string());
    f.frame.kind = static_cast<FrameKind>(tag);
    f.z = get<double>(in, path);
    f.frame.epsilon = get<double>(in, path);
    if (f.lateral.n1 <= 0 || f.lateral.n2 <= 0 || f.omega.n <= 0) throw IoError("bad dimensions in " + path.string());
    f.spectrum.resize(f.lateral.size(), f.omega.n);
    for (Eigen::Index i = 0; i < f.spectrum.rows(); ++i)
        for (Eigen::Index m = 0; m < f.spectrum.cols(); ++m) {
            const double re = get<double>(in, path);
            const double im = get<double>(in, path);
            f.spectrum(i, m) = {re, im};
        }
    return f;
}

std::string sha256_hex(const std::string& bytes)
{
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256: digest failed");
    static const char* hex = "0123456789abcdef";
    std::string s;
    for (unsigned int i = 0; i < len; ++i) {
        s += hex[md[i] >> 4];
        s += hex[md[i] & 15];
    }
    return s;
}

std::string sha256_file(const std::filesystem::path& path)
{
    auto in = open_in(path);
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return sha256_hex(bytes);
}

} // namespace roughscatter
