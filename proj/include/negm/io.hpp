#ifndef NEGM_IO_HPP
#define NEGM_IO_HPP

#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "negm/tensor.hpp"

namespace negm::io {

// content hashing for provenance (FNV-1a 64)
uint64_t fnv1a64(const void* data, size_t n, uint64_t h = 0xcbf29ce484222325ULL);
uint64_t fnv1a64_str(const std::string& s, uint64_t h = 0xcbf29ce484222325ULL);
std::string hex64(uint64_t v);
std::string tensor_hash(const Tensor& t);

/// Little-endian binary writer for the versioned container formats
/// (see docs/formats.md).
class BinWriter {
public:
    explicit BinWriter(const std::string& path);
    void magic(const char m[8]);
    void u32(uint32_t v);
    void i32(int32_t v);
    void f64(double v);
    void bytes(const void* p, size_t n);
    void str(const std::string& s);            // u32 length + bytes
    void meta(const std::map<std::string, std::string>& m);
    void tensor(const Tensor& t);              // rank, dims, raw doubles
    bool ok() const { return static_cast<bool>(out_); }
    void close();

private:
    std::ofstream out_;
    std::string path_;
};

class BinReader {
public:
    explicit BinReader(const std::string& path);
    void expect_magic(const char m[8]);
    uint32_t u32();
    int32_t i32();
    double f64();
    std::string str();
    std::map<std::string, std::string> meta();
    Tensor tensor();
    const std::string& path() const { return path_; }

private:
    void need(size_t n);
    std::ifstream in_;
    std::string path_;
};

// CSV with a header row; cells containing separators/quotes are quoted
class CsvWriter {
public:
    explicit CsvWriter(const std::string& path);
    void row(const std::vector<std::string>& cells);
    void close();

private:
    std::ofstream out_;
};

std::vector<std::vector<std::string>> read_csv(const std::string& path);

std::string format_double(double v);  // round-trip-exact %.17g

/// Grayscale map in [-1,1] as a portable graymap (0 -> 128). Multi-channel
/// inputs are written as PPM with per-channel mapping when c==3, otherwise
/// channels are summed first.
void write_attribution_pnm(const std::string& path, const Tensor& map);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace negm::io

#endif
