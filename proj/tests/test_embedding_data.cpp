#include "doctest.h"

#include <cstring>
#include <limits>
#include <random>
#include <sstream>

#include "embedmap/error.hpp"
#include "embedmap/io.hpp"
#include "test_support.hpp"

using namespace embedmap;

namespace {

ErrorCode CodeOf(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an embedmap::Error");
  return ErrorCode::kIoError;
}

}  // namespace

TEST_CASE("derive_outcome covers the four binary outcomes") {
  using enum BinaryClass;
  const auto vocab = OutcomeVocabulary::BinaryClassification();
  CHECK(vocab[DeriveOutcome(kPositive, kPositive)].name == "TP");
  CHECK(vocab[DeriveOutcome(kNegative, kNegative)].name == "TN");
  CHECK(vocab[DeriveOutcome(kPositive, kNegative)].name == "FP");
  CHECK(vocab[DeriveOutcome(kNegative, kPositive)].name == "FN");
}

TEST_CASE("derive_outcome is a bijection and failure iff prediction != truth") {
  const auto vocab = OutcomeVocabulary::BinaryClassification();
  std::vector<bool> seen(4, false);
  for (auto p : {BinaryClass::kNegative, BinaryClass::kPositive}) {
    for (auto t : {BinaryClass::kNegative, BinaryClass::kPositive}) {
      const auto id = DeriveOutcome(p, t);
      CHECK_FALSE(seen[id]);
      seen[id] = true;
      CHECK(vocab.IsFailure(id) == (p != t));
    }
  }
}

TEST_CASE("outcome vocabulary parsing") {
  const auto vocab = OutcomeVocabulary::Parse("ok:0, bad:1 ,meh:false");
  REQUIRE(vocab.size() == 3);
  CHECK(vocab[1].name == "bad");
  CHECK(vocab.IsFailure(1));
  CHECK_FALSE(vocab.IsFailure(2));
  CHECK(vocab.ToString() == "ok:0,bad:1,meh:0");
  CHECK(OutcomeVocabulary::Parse(vocab.ToString()) == vocab);
  CHECK(CodeOf([] { OutcomeVocabulary::Parse("a:0,a:1"); }) ==
        ErrorCode::kInvalidArgument);
  CHECK(CodeOf([] { OutcomeVocabulary::Parse("a"); }) ==
        ErrorCode::kInvalidArgument);
  CHECK(CodeOf([] { OutcomeVocabulary::Parse(""); }) ==
        ErrorCode::kInvalidArgument);
}

TEST_CASE("load_labeled parses CSV") {
  std::istringstream in("d0,d1,outcome\n0.5,1,TP\n-2,3e-1,FN\n4,5,TN\n");
  const auto set =
      ReadLabeledCsv(in, OutcomeVocabulary::BinaryClassification());
  CHECK(set.sample_count() == 3);
  CHECK(set.dim_count() == 2);
  CHECK(set.at(1, 1) == 0.3);
  CHECK(set.outcome(1) == binary::kFalseNegative);
  CHECK(set.outcome(2) == binary::kTrueNegative);
}

TEST_CASE("load_labeled tolerates CRLF and blank lines") {
  std::istringstream in("d0,outcome\r\n1,TP\r\n\r\n2,FP\r\n");
  const auto set = ReadLabeledCsv(in, OutcomeVocabulary::BinaryClassification());
  CHECK(set.sample_count() == 2);
}

TEST_CASE("load_labeled error paths") {
  const auto vocab = OutcomeVocabulary::BinaryClassification();
  const auto load = [&](const std::string& text) {
    std::istringstream in(text);
    return ReadLabeledCsv(in, vocab);
  };
  CHECK(CodeOf([&] { load("d0,d1,outcome\n0,nan,TP\n"); }) ==
        ErrorCode::kNonFiniteValue);
  CHECK(CodeOf([&] { load("d0,d1,outcome\n0,inf,TP\n"); }) ==
        ErrorCode::kNonFiniteValue);
  CHECK(CodeOf([&] { load("d0,d1,outcome\n0,1,XX\n"); }) ==
        ErrorCode::kUnknownOutcomeLabel);
  CHECK(CodeOf([&] { load("d0,d2,outcome\n0,1,TP\n"); }) ==
        ErrorCode::kMalformedFile);
  CHECK(CodeOf([&] { load("d0,d1,outcome\n0,TP\n"); }) ==
        ErrorCode::kMalformedFile);
  CHECK(CodeOf([&] { load("d0,d1,outcome\n0,abc,TP\n"); }) ==
        ErrorCode::kMalformedFile);
  CHECK(CodeOf([&] { load("d0,d1\n0,1\n"); }) == ErrorCode::kMalformedFile);
  CHECK(CodeOf([&] { load(""); }) == ErrorCode::kMalformedFile);

  try {
    load("d0,d1,outcome\n0,1,TP\n2,nan,TP\n");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("row 1, column 1") != std::string::npos);
  }
  try {
    load("d0,outcome\n0,XX\n");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("'XX'") != std::string::npos);
  }
}

TEST_CASE("load_unlabeled parses CSV and rejects empty data") {
  std::istringstream in("d0,d1\n1,2\n3,4\n");
  const auto set = ReadUnlabeledCsv(in);
  CHECK(set.sample_count() == 2);
  CHECK(set.dim_count() == 2);

  std::istringstream empty("d0,d1\n");
  CHECK(CodeOf([&] { ReadUnlabeledCsv(empty); }) == ErrorCode::kMalformedFile);

  std::istringstream labeled("d0,outcome\n1,TP\n");
  CHECK(ReadUnlabeledCsv(labeled).dim_count() == 1);
}

TEST_CASE("binary header echoes declared shape") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> values(4096 * 100);
  for (auto& v : values) v = u(rng);
  const UnlabeledEmbeddingSet set(EmbeddingMatrix(values, 100, 4096));
  std::stringstream buffer;
  WriteBinary(buffer, set);
  const auto back = ReadUnlabeledBinary(buffer);
  CHECK(back.dim_count() == 4096);
  CHECK(back.sample_count() == 100);
  CHECK(back == set);
}

TEST_CASE("binary layout is bit-exact") {
  const auto set = testing::MakeLabeled({{1.0}, {-2.5}}, {"TP", "TN"});
  std::stringstream buffer;
  WriteBinary(buffer, set);
  const std::string bytes = buffer.str();
  REQUIRE(bytes.size() == 4 + 4 + 8 + 8 + 1 + 2 * 8 + 2 * 2);
  CHECK(bytes.substr(0, 4) == "EMBD");
  CHECK(bytes[4] == 1);  // version, little endian
  CHECK(bytes[8] == 1);  // D
  CHECK(bytes[16] == 2);  // N
  CHECK(bytes[24] == 1);  // has outcomes
  // 1.0 = 0x3FF0000000000000 little endian
  CHECK(static_cast<unsigned char>(bytes[25 + 7]) == 0x3F);
  CHECK(static_cast<unsigned char>(bytes[25 + 6]) == 0xF0);
  CHECK(bytes[41] == 0);  // outcome id TP
  CHECK(bytes[43] == 3);  // outcome id TN
}

TEST_CASE("binary error paths") {
  const auto vocab = OutcomeVocabulary::BinaryClassification();
  std::istringstream bad_magic("EMBX");
  CHECK(CodeOf([&] { ReadUnlabeledBinary(bad_magic); }) ==
        ErrorCode::kMalformedFile);

  const auto set = testing::MakeLabeled({{1.0}, {2.0}}, {"TP", "TN"});
  std::stringstream buffer;
  WriteBinary(buffer, set);
  const auto bytes = buffer.str();

  std::istringstream truncated(bytes.substr(0, bytes.size() - 1));
  CHECK(CodeOf([&] { ReadLabeledBinary(truncated, vocab); }) ==
        ErrorCode::kMalformedFile);

  std::istringstream narrow(bytes);
  CHECK(CodeOf([&] { ReadLabeledBinary(narrow, testing::FirstOutcomes(2)); }) ==
        ErrorCode::kUnknownOutcomeLabel);

  std::stringstream unlabeled;
  WriteBinary(unlabeled, testing::AsUnlabeled(set));
  CHECK(CodeOf([&] { ReadLabeledBinary(unlabeled, vocab); }) ==
        ErrorCode::kMalformedFile);

  std::string nan_bytes = bytes;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::memcpy(nan_bytes.data() + 25 + 8, &nan, 8);
  std::istringstream with_nan(nan_bytes);
  CHECK(CodeOf([&] { ReadLabeledBinary(with_nan, vocab); }) ==
        ErrorCode::kNonFiniteValue);
}

TEST_CASE("property: CSV and binary round trips preserve every value") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 25; ++trial) {
    std::uniform_int_distribution<std::size_t> size(1, 40);
    const auto set = testing::RandomLabeled(rng, size(rng), size(rng) % 9 + 1, 4);

    std::stringstream csv;
    WriteCsv(csv, set);
    const auto from_csv =
        ReadLabeledCsv(csv, OutcomeVocabulary::BinaryClassification());
    CHECK(from_csv == set);

    std::stringstream bin;
    WriteBinary(bin, from_csv);
    const std::string first = bin.str();
    const auto from_bin =
        ReadLabeledBinary(bin, OutcomeVocabulary::BinaryClassification());
    CHECK(from_bin == set);
    std::stringstream again;
    WriteBinary(again, from_bin);
    CHECK(again.str() == first);

    std::stringstream csv_again;
    WriteCsv(csv_again, from_bin);
    std::stringstream csv_first;
    WriteCsv(csv_first, set);
    CHECK(csv_again.str() == csv_first.str());
  }
}

TEST_CASE("FormatDouble is shortest round-trip") {
  CHECK(FormatDouble(0.1) == "0.1");
  CHECK(FormatDouble(1.0) == "1");
  CHECK(FormatDouble(-2.5e-300) == "-2.5e-300");
  const double tricky = 0.30000000000000004;
  CHECK(std::stod(FormatDouble(tricky)) == tricky);
}

TEST_CASE("checksum ignores the source format") {
  const auto set = testing::MakeLabeled({{1.0, 2.0}, {3.0, 4.0}}, {"TP", "FN"});
  std::stringstream csv;
  WriteCsv(csv, set);
  const auto back = ReadLabeledCsv(csv, set.vocabulary());
  CHECK(Checksum(back) == Checksum(set));
  CHECK(Checksum(set).rfind("sha256:", 0) == 0);
  CHECK(Sha256Hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("constructor invariants") {
  CHECK(CodeOf([] { EmbeddingMatrix({}, 0, 1); }) == ErrorCode::kMalformedFile);
  CHECK(CodeOf([] { EmbeddingMatrix({1.0}, 1, 0); }) == ErrorCode::kMalformedFile);
  CHECK(CodeOf([] { EmbeddingMatrix({1.0, 2.0}, 1, 3); }) ==
        ErrorCode::kMalformedFile);
  CHECK(CodeOf([] {
          LabeledEmbeddingSet(EmbeddingMatrix({1.0}, 1, 1), {0, 1},
                              OutcomeVocabulary::BinaryClassification());
        }) == ErrorCode::kLengthMismatch);
  CHECK(CodeOf([] {
          LabeledEmbeddingSet(EmbeddingMatrix({1.0}, 1, 1), {9},
                              OutcomeVocabulary::BinaryClassification());
        }) == ErrorCode::kUnknownOutcomeLabel);
}
