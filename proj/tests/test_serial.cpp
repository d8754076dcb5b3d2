#include "xga/serial.hpp"

#include <gtest/gtest.h>

#include <fstream>

#include "test_util.hpp"
#include "xga/rng.hpp"

namespace xga {
namespace {

using test::TempDir;

TEST(Serial, MatrixJsonLayoutRowMajor) {
  Mat m(2, 2);
  m << 1.0, 2.0, 3.0, 4.0;
  const Json j = matrix_to_json(m);
  EXPECT_EQ(j.at("rows").get<int>(), 2);
  EXPECT_EQ(j.at("cols").get<int>(), 2);
  const auto data = j.at("data").get<std::vector<double>>();
  ASSERT_EQ(data.size(), 4u);
  EXPECT_EQ(data[0], 1.0);
  EXPECT_EQ(data[1], 2.0);
  EXPECT_EQ(data[2], 3.0);
  EXPECT_EQ(data[3], 4.0);
}

TEST(Serial, MatrixRoundTripExact) {
  Rng r(1);
  const Mat m = r.normal_matrix(5, 3);
  const Mat back = matrix_from_json(matrix_to_json(m));
  ASSERT_EQ(back.rows(), m.rows());
  ASSERT_EQ(back.cols(), m.cols());
  EXPECT_TRUE(back == m);  // doubles survive json round trip bit-exactly
}

TEST(Serial, VectorRoundTripExact) {
  Rng r(2);
  const Vec v = r.normal_vector(9);
  const Json j = vector_to_json(v);
  ASSERT_TRUE(j.is_array());
  const Vec back = vector_from_json(j);
  EXPECT_TRUE(back == v);
}

TEST(Serial, FileRoundTripThroughDumpText) {
  TempDir dir("serial");
  const std::string path = dir.path() + "/x.json";
  Rng r(3);
  Json j;
  j["m"] = matrix_to_json(r.normal_matrix(4, 4));
  j["name"] = "résumé";  // utf-8 payload
  write_json_file(path, j);
  const Json back = read_json_file(path);
  EXPECT_EQ(back, j);
}

TEST(Serial, WrittenFileEndsWithNewline) {
  TempDir dir("serial");
  const std::string path = dir.path() + "/y.json";
  write_json_file(path, Json{{"a", 1}});
  std::ifstream in(path, std::ios::binary);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  ASSERT_FALSE(text.empty());
  EXPECT_EQ(text.back(), '\n');
}

TEST(Serial, MissingFileThrows) {
  EXPECT_THROW(read_json_file("/nonexistent/dir/no.json"), ConfigError);
}

TEST(Serial, MalformedJsonThrows) {
  TempDir dir("serial");
  const std::string path = dir.path() + "/bad.json";
  std::ofstream(path) << "{not json";
  EXPECT_THROW(read_json_file(path), ConfigError);
}

TEST(Serial, MatrixFromJsonRejectsBadShape) {
  Json j;
  j["rows"] = 2;
  j["cols"] = 3;
  j["data"] = std::vector<double>{1, 2, 3};  // 3 != 2*3
  EXPECT_THROW(matrix_from_json(j), ConfigError);
}

}  // namespace
}  // namespace xga
