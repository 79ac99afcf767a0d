#include "embedmap/io.hpp"

#include <openssl/evp.h>

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>

#include "embedmap/error.hpp"

namespace embedmap {
namespace {

std::string_view TrimCell(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> SplitCsv(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(TrimCell(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::string Where(std::string_view source, std::size_t line) {
  return std::string(source) + ":" + std::to_string(line);
}

struct CsvTable {
  std::size_t dims = 0;
  bool has_outcome = false;
  std::vector<double> values;
  std::vector<std::string> outcomes;
  std::size_t rows = 0;
};

CsvTable ParseCsv(std::istream& in, std::string_view source) {
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::size_t columns = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = TrimCell(line);
    if (!header_seen) {
      if (line_no == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
      if (view.empty()) continue;
      const auto cells = SplitCsv(view);
      columns = cells.size();
      table.has_outcome = cells.back() == "outcome";
      table.dims = columns - (table.has_outcome ? 1 : 0);
      for (std::size_t d = 0; d < table.dims; ++d) {
        if (cells[d] != "d" + std::to_string(d)) {
          throw Error(ErrorCode::kMalformedFile,
                      Where(source, line_no) + ": bad header column '" +
                          std::string(cells[d]) + "', expected d" +
                          std::to_string(d));
        }
      }
      if (table.dims == 0) {
        throw Error(ErrorCode::kMalformedFile,
                    Where(source, line_no) + ": header has no d0 column");
      }
      header_seen = true;
      continue;
    }
    if (view.empty()) continue;
    const auto cells = SplitCsv(view);
    if (cells.size() != columns) {
      throw Error(ErrorCode::kMalformedFile,
                  Where(source, line_no) + ": expected " +
                      std::to_string(columns) + " columns, got " +
                      std::to_string(cells.size()));
    }
    for (std::size_t d = 0; d < table.dims; ++d) {
      const auto cell = cells[d];
      double value = 0.0;
      const auto* first = cell.data();
      const auto* last = cell.data() + cell.size();
      if (first != last && *first == '+') ++first;
      const auto [ptr, ec] = std::from_chars(first, last, value);
      if (ec != std::errc() || ptr != last || cell.empty()) {
        throw Error(ErrorCode::kMalformedFile,
                    Where(source, line_no) + ": cannot parse '" +
                        std::string(cell) + "' as a number");
      }
      if (!std::isfinite(value)) {
        throw Error(ErrorCode::kNonFiniteValue,
                    Where(source, line_no) + ": row " +
                        std::to_string(table.rows) + ", column " +
                        std::to_string(d));
      }
      table.values.push_back(value);
    }
    if (table.has_outcome) table.outcomes.emplace_back(cells.back());
    ++table.rows;
  }
  if (!header_seen) {
    throw Error(ErrorCode::kMalformedFile,
                std::string(source) + ": missing header row");
  }
  if (table.rows == 0) {
    throw Error(ErrorCode::kMalformedFile,
                std::string(source) + ": no data rows");
  }
  return table;
}

// Little-endian primitives, independent of host byte order.
template <typename T>
void PutLe(std::ostream& out, T value) {
  using U = std::make_unsigned_t<std::conditional_t<
      std::is_floating_point_v<T>,
      std::conditional_t<sizeof(T) == 8, std::int64_t, std::int32_t>, T>>;
  U bits = std::bit_cast<U>(value);
  std::array<char, sizeof(U)> bytes{};
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xFFu);
  }
  out.write(bytes.data(), bytes.size());
}

template <typename T>
T GetLe(std::istream& in, std::string_view source, std::string_view what) {
  using U = std::make_unsigned_t<std::conditional_t<
      std::is_floating_point_v<T>,
      std::conditional_t<sizeof(T) == 8, std::int64_t, std::int32_t>, T>>;
  std::array<unsigned char, sizeof(U)> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (in.gcount() != static_cast<std::streamsize>(bytes.size())) {
    throw Error(ErrorCode::kMalformedFile,
                std::string(source) + ": truncated while reading " +
                    std::string(what));
  }
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    bits |= static_cast<U>(static_cast<U>(bytes[i]) << (8 * i));
  }
  return std::bit_cast<T>(bits);
}

struct BinaryTable {
  std::size_t dims = 0;
  std::size_t rows = 0;
  std::vector<double> values;
  std::optional<std::vector<OutcomeId>> outcomes;
};

BinaryTable ParseBinary(std::istream& in, std::string_view source) {
  char magic[4] = {};
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, kBinaryMagic, 4) != 0) {
    throw Error(ErrorCode::kMalformedFile,
                std::string(source) + ": missing EMBD magic");
  }
  const auto version = GetLe<std::uint32_t>(in, source, "version");
  if (version != kBinaryVersion) {
    throw Error(ErrorCode::kMalformedFile,
                std::string(source) + ": unsupported version " +
                    std::to_string(version));
  }
  BinaryTable table;
  const auto dims = GetLe<std::uint64_t>(in, source, "dimension count");
  const auto rows = GetLe<std::uint64_t>(in, source, "sample count");
  const auto flag = GetLe<std::uint8_t>(in, source, "outcome flag");
  if (flag > 1) {
    throw Error(ErrorCode::kMalformedFile,
                std::string(source) + ": bad outcome flag " +
                    std::to_string(flag));
  }
  if (dims == 0 || rows == 0) {
    throw Error(ErrorCode::kMalformedFile,
                std::string(source) + ": empty shape " + std::to_string(rows) +
                    "x" + std::to_string(dims));
  }
  if (rows > (std::uint64_t{1} << 40) / dims) {
    throw Error(ErrorCode::kMalformedFile,
                std::string(source) + ": implausible shape");
  }
  table.dims = static_cast<std::size_t>(dims);
  table.rows = static_cast<std::size_t>(rows);
  table.values.resize(table.dims * table.rows);
  for (std::size_t i = 0; i < table.values.size(); ++i) {
    const double v = GetLe<double>(in, source, "embedding values");
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kNonFiniteValue,
                  std::string(source) + ": row " +
                      std::to_string(i / table.dims) + ", column " +
                      std::to_string(i % table.dims));
    }
    table.values[i] = v;
  }
  if (flag == 1) {
    std::vector<OutcomeId> ids(table.rows);
    for (auto& id : ids) id = GetLe<std::uint16_t>(in, source, "outcome ids");
    table.outcomes = std::move(ids);
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw Error(ErrorCode::kMalformedFile,
                std::string(source) + ": trailing bytes after data");
  }
  return table;
}

void WriteBinaryImpl(std::ostream& out, const EmbeddingMatrix& m,
                     const std::vector<OutcomeId>* outcomes) {
  out.write(kBinaryMagic, 4);
  PutLe<std::uint32_t>(out, kBinaryVersion);
  PutLe<std::uint64_t>(out, m.dims());
  PutLe<std::uint64_t>(out, m.rows());
  PutLe<std::uint8_t>(out, outcomes != nullptr ? 1 : 0);
  for (double v : m.values()) PutLe<double>(out, v);
  if (outcomes != nullptr) {
    for (auto id : *outcomes) PutLe<std::uint16_t>(out, id);
  }
}

void WriteCsvHeader(std::ostream& out, std::size_t dims, bool outcome) {
  for (std::size_t d = 0; d < dims; ++d) {
    if (d > 0) out << ',';
    out << 'd' << d;
  }
  if (outcome) out << ",outcome";
  out << '\n';
}

void WriteCsvRow(std::ostream& out, std::span<const double> row) {
  for (std::size_t d = 0; d < row.size(); ++d) {
    if (d > 0) out << ',';
    out << FormatDouble(row[d]);
  }
}

std::ifstream OpenInput(const std::filesystem::path& path,
                        std::ios::openmode mode) {
  std::ifstream in(path, mode);
  if (!in) {
    throw Error(ErrorCode::kIoError, "cannot open '" + path.string() + "'");
  }
  return in;
}

std::ofstream OpenOutput(const std::filesystem::path& path,
                         std::ios::openmode mode) {
  std::ofstream out(path, mode);
  if (!out) {
    throw Error(ErrorCode::kIoError,
                "cannot write '" + path.string() + "'");
  }
  return out;
}

}  // namespace

FileFormat ParseFileFormat(std::string_view name,
                           const std::filesystem::path& path) {
  if (name == "csv") return FileFormat::kCsv;
  if (name == "binary") return FileFormat::kBinary;
  if (name == "auto" || name.empty()) {
    return path.extension() == ".csv" ? FileFormat::kCsv : FileFormat::kBinary;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown format '" + std::string(name) + "'");
}

LabeledEmbeddingSet ReadLabeledCsv(std::istream& in,
                                   const OutcomeVocabulary& vocabulary,
                                   std::string_view source) {
  auto table = ParseCsv(in, source);
  if (!table.has_outcome) {
    throw Error(ErrorCode::kMalformedFile,
                std::string(source) + ": header lacks an outcome column");
  }
  std::vector<OutcomeId> outcomes;
  outcomes.reserve(table.rows);
  for (const auto& name : table.outcomes) {
    outcomes.push_back(vocabulary.Lookup(name));
  }
  return LabeledEmbeddingSet(
      EmbeddingMatrix(std::move(table.values), table.rows, table.dims),
      std::move(outcomes), vocabulary);
}

UnlabeledEmbeddingSet ReadUnlabeledCsv(std::istream& in,
                                       std::string_view source) {
  // A trailing outcome column is ignored so labeled files can be replayed as
  // operating data.
  auto table = ParseCsv(in, source);
  return UnlabeledEmbeddingSet(
      EmbeddingMatrix(std::move(table.values), table.rows, table.dims));
}

LabeledEmbeddingSet ReadLabeledBinary(std::istream& in,
                                      const OutcomeVocabulary& vocabulary,
                                      std::string_view source) {
  auto table = ParseBinary(in, source);
  if (!table.outcomes) {
    throw Error(ErrorCode::kMalformedFile,
                std::string(source) + ": file carries no outcomes");
  }
  for (auto id : *table.outcomes) {
    if (!vocabulary.Contains(id)) {
      throw Error(ErrorCode::kUnknownOutcomeLabel,
                  std::string(source) + ": outcome id " + std::to_string(id) +
                      " outside vocabulary of " +
                      std::to_string(vocabulary.size()));
    }
  }
  return LabeledEmbeddingSet(
      EmbeddingMatrix(std::move(table.values), table.rows, table.dims),
      std::move(*table.outcomes), vocabulary);
}

UnlabeledEmbeddingSet ReadUnlabeledBinary(std::istream& in,
                                          std::string_view source) {
  auto table = ParseBinary(in, source);
  return UnlabeledEmbeddingSet(
      EmbeddingMatrix(std::move(table.values), table.rows, table.dims));
}

LabeledEmbeddingSet LoadLabeled(const std::filesystem::path& path,
                                FileFormat format,
                                const OutcomeVocabulary& vocabulary) {
  if (format == FileFormat::kCsv) {
    auto in = OpenInput(path, std::ios::in);
    return ReadLabeledCsv(in, vocabulary, path.string());
  }
  auto in = OpenInput(path, std::ios::in | std::ios::binary);
  return ReadLabeledBinary(in, vocabulary, path.string());
}

UnlabeledEmbeddingSet LoadUnlabeled(const std::filesystem::path& path,
                                    FileFormat format) {
  if (format == FileFormat::kCsv) {
    auto in = OpenInput(path, std::ios::in);
    return ReadUnlabeledCsv(in, path.string());
  }
  auto in = OpenInput(path, std::ios::in | std::ios::binary);
  return ReadUnlabeledBinary(in, path.string());
}

void WriteCsv(std::ostream& out, const LabeledEmbeddingSet& set) {
  WriteCsvHeader(out, set.dim_count(), true);
  for (std::size_t i = 0; i < set.sample_count(); ++i) {
    WriteCsvRow(out, set.row(i));
    out << ',' << set.vocabulary()[set.outcome(i)].name << '\n';
  }
}

void WriteCsv(std::ostream& out, const UnlabeledEmbeddingSet& set) {
  WriteCsvHeader(out, set.dim_count(), false);
  for (std::size_t i = 0; i < set.sample_count(); ++i) {
    WriteCsvRow(out, set.row(i));
    out << '\n';
  }
}

void WriteBinary(std::ostream& out, const LabeledEmbeddingSet& set) {
  WriteBinaryImpl(out, set.embeddings(), &set.outcomes());
}

void WriteBinary(std::ostream& out, const UnlabeledEmbeddingSet& set) {
  WriteBinaryImpl(out, set.embeddings(), nullptr);
}

void Save(const std::filesystem::path& path, FileFormat format,
          const LabeledEmbeddingSet& set) {
  auto out = OpenOutput(path, std::ios::out | std::ios::binary);
  if (format == FileFormat::kCsv) {
    WriteCsv(out, set);
  } else {
    WriteBinary(out, set);
  }
}

void Save(const std::filesystem::path& path, FileFormat format,
          const UnlabeledEmbeddingSet& set) {
  auto out = OpenOutput(path, std::ios::out | std::ios::binary);
  if (format == FileFormat::kCsv) {
    WriteCsv(out, set);
  } else {
    WriteBinary(out, set);
  }
}

std::string FormatDouble(double value) {
  std::array<char, 32> buffer{};
  const auto [ptr, ec] =
      std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
  return std::string(buffer.data(), ptr);
}

std::string ReadFile(const std::filesystem::path& path) {
  auto in = OpenInput(path, std::ios::in | std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteFile(const std::filesystem::path& path, std::string_view contents) {
  auto out = OpenOutput(path, std::ios::out | std::ios::binary);
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
}

std::string Sha256Hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                              EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest.data(), &length) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    hex += kHex[digest[i] >> 4];
    hex += kHex[digest[i] & 0xF];
  }
  return hex;
}

std::string Checksum(const LabeledEmbeddingSet& set) {
  std::ostringstream out;
  WriteBinary(out, set);
  return "sha256:" + Sha256Hex(out.str());
}

}  // namespace embedmap
