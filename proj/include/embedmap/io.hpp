#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "embedmap/dataset.hpp"

namespace embedmap {

enum class FileFormat { kCsv, kBinary };

// "csv" / "binary"; "auto" resolves from the path extension (.csv is CSV,
// anything else binary).
FileFormat ParseFileFormat(std::string_view name,
                           const std::filesystem::path& path);

inline constexpr char kBinaryMagic[4] = {'E', 'M', 'B', 'D'};
inline constexpr std::uint32_t kBinaryVersion = 1;

LabeledEmbeddingSet LoadLabeled(const std::filesystem::path& path,
                                FileFormat format,
                                const OutcomeVocabulary& vocabulary =
                                    OutcomeVocabulary::BinaryClassification());
UnlabeledEmbeddingSet LoadUnlabeled(const std::filesystem::path& path,
                                    FileFormat format);

// Stream variants; `source` is only used in error messages.
LabeledEmbeddingSet ReadLabeledCsv(std::istream& in,
                                   const OutcomeVocabulary& vocabulary,
                                   std::string_view source = "<stream>");
UnlabeledEmbeddingSet ReadUnlabeledCsv(std::istream& in,
                                       std::string_view source = "<stream>");
LabeledEmbeddingSet ReadLabeledBinary(std::istream& in,
                                      const OutcomeVocabulary& vocabulary,
                                      std::string_view source = "<stream>");
UnlabeledEmbeddingSet ReadUnlabeledBinary(std::istream& in,
                                          std::string_view source = "<stream>");

void WriteCsv(std::ostream& out, const LabeledEmbeddingSet& set);
void WriteCsv(std::ostream& out, const UnlabeledEmbeddingSet& set);
void WriteBinary(std::ostream& out, const LabeledEmbeddingSet& set);
void WriteBinary(std::ostream& out, const UnlabeledEmbeddingSet& set);

void Save(const std::filesystem::path& path, FileFormat format,
          const LabeledEmbeddingSet& set);
void Save(const std::filesystem::path& path, FileFormat format,
          const UnlabeledEmbeddingSet& set);

// Shortest decimal that parses back to the same double.
std::string FormatDouble(double value);

// Reads the whole file; throws kIoError naming the path.
std::string ReadFile(const std::filesystem::path& path);
void WriteFile(const std::filesystem::path& path, std::string_view contents);

// Hex SHA-256 of raw bytes.
std::string Sha256Hex(std::string_view bytes);
// Checksum over the canonical binary encoding, independent of source format.
std::string Checksum(const LabeledEmbeddingSet& set);

}  // namespace embedmap
