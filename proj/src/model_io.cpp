#include "confsep/model_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace confsep {

namespace {

constexpr const char* kHeader = "CONFSEP-MODEL v1";

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

[[noreturn]] void malformed(const std::string& why) {
  throw ValidationError("malformed model file: " + why);
}

}  // namespace

std::string format_model(const Network& net) {
  net.validate();
  std::ostringstream out;
  out << kHeader << "\n";
  out << "layers";
  for (int s : net.layer_sizes) out << ' ' << s;
  out << "\n";
  out << "activation " << to_string(net.activation) << "\n";
  for (int k = 0; k < net.num_layers(); ++k) {
    const Matrix& w = net.weights[k];
    out << 'W' << k << ' ' << w.rows() << ' ' << w.cols() << "\n";
    for (int r = 0; r < w.rows(); ++r) {
      for (int c = 0; c < w.cols(); ++c) {
        if (c) out << ' ';
        out << format_double(w(r, c));
      }
      out << "\n";
    }
    const Vector& b = net.biases[k];
    out << 'b' << k << ' ' << b.size() << "\n";
    for (int i = 0; i < b.size(); ++i) {
      if (i) out << ' ';
      out << format_double(b[i]);
    }
    out << "\n";
  }
  return out.str();
}

Network parse_model(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kHeader) {
    malformed("missing '" + std::string(kHeader) + "' header");
  }

  Network net;
  std::string word;
  if (!(in >> word) || word != "layers") malformed("expected 'layers'");
  {
    std::getline(in, line);
    std::istringstream ls(line);
    int s;
    while (ls >> s) net.layer_sizes.push_back(s);
    if (net.layer_sizes.size() < 2) malformed("need at least two layer sizes");
  }
  if (!(in >> word) || word != "activation") malformed("expected 'activation'");
  if (!(in >> word)) malformed("missing activation name");
  net.activation = parse_activation(word);

  const int layers = static_cast<int>(net.layer_sizes.size()) - 1;
  for (int k = 0; k < layers; ++k) {
    long rows = 0, cols = 0;
    if (!(in >> word) || word != "W" + std::to_string(k)) {
      malformed("expected W" + std::to_string(k));
    }
    if (!(in >> rows >> cols) || rows != net.layer_sizes[k + 1] ||
        cols != net.layer_sizes[k]) {
      malformed("W" + std::to_string(k) + " shape mismatch");
    }
    Matrix w(rows, cols);
    for (long r = 0; r < rows; ++r) {
      for (long c = 0; c < cols; ++c) {
        if (!(in >> w(r, c))) malformed("truncated W" + std::to_string(k));
      }
    }
    net.weights.push_back(std::move(w));

    long n = 0;
    if (!(in >> word) || word != "b" + std::to_string(k)) {
      malformed("expected b" + std::to_string(k));
    }
    if (!(in >> n) || n != net.layer_sizes[k + 1]) {
      malformed("b" + std::to_string(k) + " size mismatch");
    }
    Vector b(n);
    for (long i = 0; i < n; ++i) {
      if (!(in >> b[i])) malformed("truncated b" + std::to_string(k));
    }
    net.biases.push_back(std::move(b));
  }
  net.validate();
  return net;
}

void save_model(const Network& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << format_model(net);
  if (!out) throw IoError("write failed for '" + path + "'");
}

Network load_model(const std::string& path) {
  return parse_model(read_text_file(path));
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("read failed for '" + path + "'");
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace confsep
