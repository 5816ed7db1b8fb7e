#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "airground/preference.h"

namespace airground {

namespace {

constexpr const char* kModelMagic = "airground-mlp";
constexpr const char* kBundleMagic = "airground-bundle";
constexpr int kVersion = 1;

std::string hex(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

double parse_double(const std::string& token) {
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end == token.c_str() || *end != '\0') {
    throw std::runtime_error("model file: bad number '" + token + "'");
  }
  return v;
}

std::string expect_word(std::istream& in, const std::string& word) {
  std::string got;
  if (!(in >> got) || got != word) {
    throw std::runtime_error("model file: expected '" + word + "', got '" + got + "'");
  }
  return got;
}

long read_count(std::istream& in) {
  long n = -1;
  if (!(in >> n) || n < 0) throw std::runtime_error("model file: bad count");
  return n;
}

double read_double(std::istream& in) {
  std::string token;
  if (!(in >> token)) throw std::runtime_error("model file: truncated");
  return parse_double(token);
}

}  // namespace

void save_model(std::ostream& out, const Mlp& model) {
  out << kModelMagic << ' ' << kVersion << '\n';
  out << "architecture "
      << (model.architecture() == Architecture::Shared ? "shared" : "shared+specific")
      << '\n';
  out << "shared_layers " << model.shared_layers() << '\n';
  out << "layers " << model.layers().size() << '\n';
  for (const auto& l : model.layers()) {
    out << "layer " << l.w.rows() << ' ' << l.w.cols() << '\n';
    for (Eigen::Index r = 0; r < l.w.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.w.cols(); ++c) {
        out << (c ? " " : "") << hex(l.w(r, c));
      }
      out << '\n';
    }
    for (Eigen::Index r = 0; r < l.b.size(); ++r) {
      out << (r ? " " : "") << hex(l.b(r));
    }
    out << '\n';
  }
  out << "end\n";
}

Mlp load_model(std::istream& in) {
  expect_word(in, kModelMagic);
  if (read_count(in) != kVersion) throw std::runtime_error("model file: unsupported version");
  expect_word(in, "architecture");
  std::string arch;
  in >> arch;
  if (arch != "shared" && arch != "shared+specific") {
    throw std::runtime_error("model file: unknown architecture '" + arch + "'");
  }
  expect_word(in, "shared_layers");
  const long shared = read_count(in);
  expect_word(in, "layers");
  const long depth = read_count(in);
  std::vector<Layer> layers;
  for (long k = 0; k < depth; ++k) {
    expect_word(in, "layer");
    const long rows = read_count(in);
    const long cols = read_count(in);
    Layer l{Eigen::MatrixXd(rows, cols), Eigen::VectorXd(rows)};
    for (long r = 0; r < rows; ++r) {
      for (long c = 0; c < cols; ++c) l.w(r, c) = read_double(in);
    }
    for (long r = 0; r < rows; ++r) l.b(r) = read_double(in);
    layers.push_back(std::move(l));
  }
  expect_word(in, "end");
  return Mlp(std::move(layers),
             arch == "shared" ? Architecture::Shared : Architecture::SharedPlusSpecific,
             static_cast<std::size_t>(shared));
}

void save_bundle(std::ostream& out, const ModelBundle& bundle) {
  out << kBundleMagic << ' ' << kVersion << '\n';
  out << "fingerprint " << (bundle.fingerprint.empty() ? "-" : bundle.fingerprint) << '\n';
  out << "model courier\n";
  save_model(out, bundle.courier);
  out << "model gv\n";
  save_model(out, bundle.gv);
  out << "model uav\n";
  save_model(out, bundle.uav);
}

ModelBundle load_bundle(std::istream& in) {
  expect_word(in, kBundleMagic);
  if (read_count(in) != kVersion) throw std::runtime_error("bundle: unsupported version");
  ModelBundle b;
  expect_word(in, "fingerprint");
  in >> b.fingerprint;
  if (b.fingerprint == "-") b.fingerprint.clear();
  expect_word(in, "model");
  expect_word(in, "courier");
  b.courier = load_model(in);
  expect_word(in, "model");
  expect_word(in, "gv");
  b.gv = load_model(in);
  expect_word(in, "model");
  expect_word(in, "uav");
  b.uav = load_model(in);
  return b;
}

void save_bundle(const std::string& path, const ModelBundle& bundle) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  save_bundle(out, bundle);
  if (!out) throw std::runtime_error("failed writing " + path);
}

ModelBundle load_bundle(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  return load_bundle(in);
}

}  // namespace airground
