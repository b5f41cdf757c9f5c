#pragma once

#include <string>

#include "confsep/network.hpp"

namespace confsep {

/// Flat text model format, round-trip exact for doubles.
///
///   CONFSEP-MODEL v1
///   layers <n0> <n1> ... <nk>
///   activation <relu|tanh>
///   W<k> <rows> <cols>   followed by <rows> lines of <cols> values, row-major
///   b<k> <n>             followed by one line of <n> values
///
/// Values are printed with 17 significant decimal digits, which parses back
/// to the identical double.
void save_model(const Network& net, const std::string& path);

Network load_model(const std::string& path);

std::string format_model(const Network& net);
Network parse_model(const std::string& text);

/// Whole-file text IO; failures raise IoError carrying the path.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace confsep
