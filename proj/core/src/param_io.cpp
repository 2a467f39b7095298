#include "prefopt/param_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "prefopt/errors.hpp"

namespace prefopt {

namespace {

void put_le(std::string& out, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<char>(bits & 0xffu));
    bits >>= 8;
  }
}

double get_le(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) bits = (bits << 8) | p[i];
  return std::bit_cast<double>(bits);
}

}  // namespace

std::string encode_params(const ParamVector& params, const nlohmann::ordered_json& extra) {
  nlohmann::ordered_json header = nlohmann::ordered_json::object();
  header["format"] = "prefopt-params-v1";
  header["count"] = params.size();
  auto shapes = nlohmann::ordered_json::array();
  for (const auto& s : params.shapes()) shapes.push_back({s.rows, s.cols});
  header["shapes"] = shapes;
  for (auto it = extra.begin(); it != extra.end(); ++it) header[it.key()] = it.value();

  std::string out = header.dump();
  out.push_back('\n');
  out.reserve(out.size() + 8 * params.size());
  for (double v : params.values()) put_le(out, v);
  return out;
}

SerializedParams decode_params(const std::string& bytes) {
  const auto nl = bytes.find('\n');
  if (nl == std::string::npos) throw Error("parameter file has no header line");
  SerializedParams out;
  out.header = nlohmann::json::parse(bytes.substr(0, nl));
  const auto count = out.header.at("count").get<std::size_t>();
  if (bytes.size() - nl - 1 != 8 * count) {
    throw Error("parameter file payload holds " + std::to_string((bytes.size() - nl - 1) / 8) +
                " doubles, header says " + std::to_string(count));
  }
  std::vector<TensorShape> shapes;
  for (const auto& s : out.header.at("shapes")) shapes.push_back({s.at(0).get<int>(), s.at(1).get<int>()});
  std::vector<double> values(count);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + nl + 1);
  for (std::size_t i = 0; i < count; ++i) values[i] = get_le(p + 8 * i);
  out.params = ParamVector(std::move(values), std::move(shapes));
  return out;
}

void save_params(const std::filesystem::path& path, const ParamVector& params, const nlohmann::ordered_json& extra) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  const auto bytes = encode_params(params, extra);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

SerializedParams load_params(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return decode_params(ss.str());
}

}  // namespace prefopt
