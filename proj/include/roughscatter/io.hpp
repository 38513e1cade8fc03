#pragma once

#include "roughscatter/grid.hpp"
#include "roughscatter/interface.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace roughscatter {

/// File-system or format failure while reading or writing artifacts.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Shortest round-trip-safe text form of a double (17 significant digits).
std::string format_double(double x);

/// Comma-separated table with a header row; every value is written with format_double.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

CsvTable read_csv(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);

/// Interface realization dump. Little-endian header: magic "RSGRID01" (8 bytes), int32 n1, int32 n2,
/// float64 d1, d2, origin1, origin2, uint64 seed; payload n1 * n2 float64 samples, row-major (i1 * n2 + i2).
void write_realization(const std::filesystem::path& path, const InterfaceRealization& realization);
InterfaceRealization read_realization(const std::filesystem::path& path);

/// Wavefront dump. Header: magic "RSFIELD1", int32 n1, n2, float64 d1, d2, int32 n_omega, float64 d_omega,
/// int32 frame tag (0 lab, 1 reflected, 2 transmitted), float64 z, float64 epsilon; payload
/// (n1 * n2) x n_omega complex values as float64 (real, imaginary) pairs, row-major over (lateral, omega).
void write_field(const std::filesystem::path& path, const WaveField& field);
WaveField read_field(const std::filesystem::path& path);

/// Hex SHA-256 digest of a byte string and of a file's contents.
std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

} // namespace roughscatter
