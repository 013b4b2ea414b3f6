#include "paraprod/io.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <sstream>

namespace pp {

json signal_to_json(const Signal& s) {
  json re = json::array(), im = json::array();
  for (const auto& v : s.samples()) {
    re.push_back(v.real());
    im.push_back(v.imag());
  }
  return json{{"log_size", s.grid().log_size}, {"period", s.grid().period}, {"re", re}, {"im", im}};
}

Signal signal_from_json(const json& j) {
  try {
    Grid g(j.at("log_size").get<int>(), j.value("period", 1.0));
    const auto& re = j.at("re");
    CVec v(g.size());
    if (re.size() != g.size()) throw ParseError("signal 're' length does not match 2^log_size");
    const bool has_im = j.contains("im");
    if (has_im && j.at("im").size() != g.size()) throw ParseError("signal 'im' length does not match 2^log_size");
    for (std::size_t i = 0; i < g.size(); ++i)
      v[i] = cplx(re[i].get<double>(), has_im ? j.at("im")[i].get<double>() : 0.0);
    return Signal(g, std::move(v));
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed signal JSON: ") + e.what());
  }
}

// mask_hex: sample 4c+b is bit (3-b) of hex digit c
json set_to_json(const MeasurableSet& F) {
  const std::size_t n = F.grid.size();
  std::string hex;
  hex.reserve(n / 4);
  static const char* digits = "0123456789abcdef";
  for (std::size_t c = 0; c < n / 4; ++c) {
    int nib = 0;
    for (int b = 0; b < 4; ++b)
      if (F.mask[4 * c + static_cast<std::size_t>(b)]) nib |= 1 << (3 - b);
    hex.push_back(digits[nib]);
  }
  return json{{"log_size", F.grid.log_size}, {"period", F.grid.period}, {"mask_hex", hex}};
}

MeasurableSet set_from_json(const json& j) {
  try {
    Grid g(j.at("log_size").get<int>(), j.value("period", 1.0));
    const std::string hex = j.at("mask_hex").get<std::string>();
    if (hex.size() != g.size() / 4) throw ParseError("mask_hex length must be 2^log_size / 4");
    MeasurableSet F(g);
    for (std::size_t c = 0; c < hex.size(); ++c) {
      const char ch = hex[c];
      int nib;
      if (ch >= '0' && ch <= '9') nib = ch - '0';
      else if (ch >= 'a' && ch <= 'f') nib = ch - 'a' + 10;
      else if (ch >= 'A' && ch <= 'F') nib = ch - 'A' + 10;
      else throw ParseError("mask_hex contains a non-hex character");
      for (int b = 0; b < 4; ++b) F.mask[4 * c + static_cast<std::size_t>(b)] = (nib >> (3 - b)) & 1;
    }
    return F;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed set JSON: ") + e.what());
  }
}

std::string fmt_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string signal_to_csv(const Signal& s) {
  std::ostringstream os;
  os << "x,re,im\n";
  for (std::size_t i = 0; i < s.size(); ++i)
    os << fmt_num(s.grid().x(i)) << ',' << fmt_num(s[i].real()) << ',' << fmt_num(s[i].imag()) << '\n';
  return os.str();
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr);
  static const char* digits = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(digits[md[i] >> 4]);
    out.push_back(digits[md[i] & 15]);
  }
  return out;
}

}  // namespace pp
