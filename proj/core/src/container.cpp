#include "gcedmd/container.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>

#include "gcedmd/errors.hpp"

namespace gcedmd {

using json = nlohmann::json;

namespace {

constexpr char kMagic[5] = {'G', 'C', 'E', 'D', '1'};

std::int64_t element_count(const std::vector<std::int64_t>& shape) {
  std::int64_t n = 1;
  for (std::int64_t d : shape) {
    require_input(d >= 0, "bad_shape", "tensor shape entries must be nonnegative");
    n *= d;
  }
  return n;
}

void write_u64(std::ofstream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t read_u64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

}  // namespace

void TensorContainer::set_meta(std::string json_object_text) {
  json doc;
  try {
    doc = json::parse(json_object_text);
  } catch (const json::exception& e) {
    throw io_error("bad_meta", std::string("meta is not valid JSON: ") + e.what());
  }
  require_input(doc.is_object(), "bad_meta", "meta must be a JSON object");
  meta_ = std::move(json_object_text);
}

void TensorContainer::put_f64(const std::string& name, std::vector<std::int64_t> shape,
                              std::vector<double> values) {
  require_input(!name.empty(), "bad_tensor", "tensor name must be nonempty");
  require_input(element_count(shape) == static_cast<std::int64_t>(values.size()), "bad_tensor",
                "value count does not match the shape");
  Entry e;
  e.dtype = "f64";
  e.shape = std::move(shape);
  e.real_values = std::move(values);
  entries_[name] = std::move(e);
}

void TensorContainer::put_c128(const std::string& name, std::vector<std::int64_t> shape,
                               std::vector<std::complex<double>> values) {
  require_input(!name.empty(), "bad_tensor", "tensor name must be nonempty");
  require_input(element_count(shape) == static_cast<std::int64_t>(values.size()), "bad_tensor",
                "value count does not match the shape");
  Entry e;
  e.dtype = "c128";
  e.shape = std::move(shape);
  e.complex_values = std::move(values);
  entries_[name] = std::move(e);
}

std::vector<std::string> TensorContainer::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [k, v] : entries_) out.push_back(k);
  return out;
}

const TensorContainer::Entry& TensorContainer::entry(const std::string& name) const {
  auto it = entries_.find(name);
  require_input(it != entries_.end(), "missing_tensor", "container has no tensor named " + name);
  return it->second;
}

const std::vector<std::int64_t>& TensorContainer::shape(const std::string& name) const {
  return entry(name).shape;
}

const std::string& TensorContainer::dtype(const std::string& name) const {
  return entry(name).dtype;
}

const std::vector<double>& TensorContainer::f64(const std::string& name) const {
  const Entry& e = entry(name);
  require_input(e.dtype == "f64", "bad_dtype", "tensor " + name + " is not f64");
  return e.real_values;
}

const std::vector<std::complex<double>>& TensorContainer::c128(const std::string& name) const {
  const Entry& e = entry(name);
  require_input(e.dtype == "c128", "bad_dtype", "tensor " + name + " is not c128");
  return e.complex_values;
}

void TensorContainer::save(const std::filesystem::path& path) const {
  json header;
  header["meta"] = json::parse(meta_);
  header["tensors"] = json::array();
  std::uint64_t offset = 0;
  for (const auto& [name, e] : entries_) {
    const std::uint64_t bytes = e.dtype == "f64"
                                    ? e.real_values.size() * sizeof(double)
                                    : e.complex_values.size() * 2 * sizeof(double);
    header["tensors"].push_back(
        {{"name", name}, {"dtype", e.dtype}, {"shape", e.shape}, {"offset", offset}});
    offset += bytes;
  }
  const std::string text = header.dump();
  std::ofstream out(path, std::ios::binary);
  require_input(out.good(), "file_write", "cannot open for writing: " + path.string());
  out.write(kMagic, sizeof(kMagic));
  write_u64(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& [name, e] : entries_) {
    if (e.dtype == "f64") {
      out.write(reinterpret_cast<const char*>(e.real_values.data()),
                static_cast<std::streamsize>(e.real_values.size() * sizeof(double)));
    } else {
      out.write(reinterpret_cast<const char*>(e.complex_values.data()),
                static_cast<std::streamsize>(e.complex_values.size() * 2 * sizeof(double)));
    }
  }
  out.flush();
  require_input(out.good(), "file_write", "failed writing: " + path.string());
}

TensorContainer TensorContainer::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require_input(in.good(), "file_not_found", "cannot open: " + path.string());
  in.seekg(0, std::ios::end);
  const std::uint64_t file_size = static_cast<std::uint64_t>(in.tellg());
  in.seekg(0);
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(kMagic));
  require_input(in.good() && std::equal(magic, magic + sizeof(kMagic), kMagic), "bad_magic",
                "not a tensor container: " + path.string());
  const std::uint64_t header_len = read_u64(in);
  require_input(in.good() && sizeof(kMagic) + 8 + header_len <= file_size, "truncated",
                "header extends past the end of the file");
  std::string text(header_len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(header_len));
  require_input(in.good(), "truncated", "could not read the header");
  json header;
  try {
    header = json::parse(text);
  } catch (const json::exception& e) {
    throw io_error("bad_header", std::string("header is not valid JSON: ") + e.what());
  }
  require_input(header.is_object() && header.contains("meta") && header["meta"].is_object() &&
                    header.contains("tensors") && header["tensors"].is_array(),
                "bad_header", "header needs a meta object and a tensors array");

  const std::uint64_t payload_start = sizeof(kMagic) + 8 + header_len;
  const std::uint64_t payload_size = file_size - payload_start;
  struct Placed {
    std::uint64_t begin, end;
  };
  std::vector<Placed> placed;

  TensorContainer c;
  c.set_meta(header["meta"].dump());
  for (const json& t : header["tensors"]) {
    require_input(t.is_object() && t.contains("name") && t.contains("dtype") &&
                      t.contains("shape") && t.contains("offset"),
                  "bad_header", "tensor record needs name, dtype, shape, offset");
    const std::string name = t["name"].get<std::string>();
    const std::string dtype = t["dtype"].get<std::string>();
    require_input(dtype == "f64" || dtype == "c128", "bad_dtype",
                  "unsupported dtype " + dtype + " for tensor " + name);
    std::vector<std::int64_t> shape = t["shape"].get<std::vector<std::int64_t>>();
    const std::int64_t count = element_count(shape);
    const std::uint64_t bytes =
        static_cast<std::uint64_t>(count) * (dtype == "f64" ? 1 : 2) * sizeof(double);
    const std::uint64_t offset = t["offset"].get<std::uint64_t>();
    require_input(offset + bytes <= payload_size, "truncated",
                  "tensor " + name + " extends past the end of the file");
    for (const Placed& p : placed)
      require_input(offset >= p.end || offset + bytes <= p.begin, "overlap",
                    "tensor " + name + " overlaps another tensor");
    placed.push_back({offset, offset + bytes});

    in.seekg(static_cast<std::streamoff>(payload_start + offset));
    if (dtype == "f64") {
      std::vector<double> vals(static_cast<std::size_t>(count));
      in.read(reinterpret_cast<char*>(vals.data()), static_cast<std::streamsize>(bytes));
      require_input(in.good(), "truncated", "could not read tensor " + name);
      c.put_f64(name, std::move(shape), std::move(vals));
    } else {
      std::vector<std::complex<double>> vals(static_cast<std::size_t>(count));
      in.read(reinterpret_cast<char*>(vals.data()), static_cast<std::streamsize>(bytes));
      require_input(in.good(), "truncated", "could not read tensor " + name);
      c.put_c128(name, std::move(shape), std::move(vals));
    }
  }
  return c;
}

}  // namespace gcedmd
