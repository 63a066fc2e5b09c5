#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace gcedmd {

// Single-file container of named numeric tensors plus one JSON metadata
// object. On disk: magic "GCED1", u64 little-endian header length, UTF-8 JSON
// header {"meta": {...}, "tensors": [{"name", "dtype", "shape", "offset"}]},
// then the raw payload. Values are row-major little-endian doubles; dtype
// "c128" interleaves (re, im). Offsets are byte positions relative to the
// payload start. Loading rejects bad magic, truncated files, overlapping or
// out-of-range tensors and unknown dtypes with distinct error codes.
class TensorContainer {
 public:
  // meta must parse as a JSON object.
  void set_meta(std::string json_object_text);
  const std::string& meta_text() const { return meta_; }

  void put_f64(const std::string& name, std::vector<std::int64_t> shape,
               std::vector<double> values);
  void put_c128(const std::string& name, std::vector<std::int64_t> shape,
                std::vector<std::complex<double>> values);

  bool has(const std::string& name) const { return entries_.count(name) != 0; }
  std::vector<std::string> names() const;
  const std::vector<std::int64_t>& shape(const std::string& name) const;
  const std::string& dtype(const std::string& name) const;
  const std::vector<double>& f64(const std::string& name) const;
  const std::vector<std::complex<double>>& c128(const std::string& name) const;

  void save(const std::filesystem::path& path) const;
  static TensorContainer load(const std::filesystem::path& path);

 private:
  struct Entry {
    std::string dtype;
    std::vector<std::int64_t> shape;
    std::vector<double> real_values;
    std::vector<std::complex<double>> complex_values;
  };
  const Entry& entry(const std::string& name) const;
  std::map<std::string, Entry> entries_;
  std::string meta_ = "{}";
};

}  // namespace gcedmd
