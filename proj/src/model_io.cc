// src/model_io.cc

// Copyright 2026  The kwsaug Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include <bit>
#include <cmath>
#include <fstream>

#include "json.hpp"
#include "kws/error.h"
#include "kws/model.h"

namespace kws {

using nlohmann::json;

namespace {

constexpr char kModelVersion[] = "kws-model-v1";
constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string EncodeFloats(std::span<const double> values) {
  std::vector<unsigned char> bytes;
  bytes.reserve(values.size() * 4);
  for (double v : values) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
    for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<unsigned char>(bits >> (8 * i)));
  }
  return Base64Encode(bytes);
}

std::vector<double> DecodeFloats(const std::string &text, std::size_t expected,
                                 const std::string &what) {
  const auto bytes = Base64Decode(text);
  Require(bytes.size() == expected * 4, ErrorKind::kUnsupportedFormat,
          "model blob '" + what + "' has " + std::to_string(bytes.size()) + " bytes, expected " +
              std::to_string(expected * 4));
  std::vector<double> out(expected);
  for (std::size_t i = 0; i < expected; ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(bytes[4 * i + b]) << (8 * b);
    out[i] = std::bit_cast<float>(bits);
  }
  return out;
}

json LayerToJson(const std::string &name, const DenseLayer &layer) {
  return {{"name", name},
          {"rows", layer.inputs()},
          {"cols", layer.outputs()},
          {"weights", EncodeFloats(layer.weights.values())},
          {"bias", EncodeFloats(layer.bias)}};
}

DenseLayer LayerFromJson(const json &j) {
  const auto name = j.at("name").get<std::string>();
  const auto rows = j.at("rows").get<std::size_t>();
  const auto cols = j.at("cols").get<std::size_t>();
  DenseLayer layer{Matrix(rows, cols), {}};
  const auto w = DecodeFloats(j.at("weights").get<std::string>(), rows * cols, name);
  std::copy(w.begin(), w.end(), layer.weights.values().begin());
  layer.bias = DecodeFloats(j.at("bias").get<std::string>(), cols, name + ".bias");
  return layer;
}

}  // namespace

std::string Base64Encode(std::span<const unsigned char> bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    for (int s = 18; s >= 0; s -= 6) out.push_back(kAlphabet[(v >> s) & 63]);
  }
  const std::size_t rest = bytes.size() - i;
  if (rest == 1) {
    const std::uint32_t v = bytes[i] << 16;
    out.push_back(kAlphabet[(v >> 18) & 63]);
    out.push_back(kAlphabet[(v >> 12) & 63]);
    out += "==";
  } else if (rest == 2) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8);
    out.push_back(kAlphabet[(v >> 18) & 63]);
    out.push_back(kAlphabet[(v >> 12) & 63]);
    out.push_back(kAlphabet[(v >> 6) & 63]);
    out.push_back('=');
  }
  return out;
}

std::vector<unsigned char> Base64Decode(std::string_view text) {
  auto value = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
  };
  Require(text.size() % 4 == 0, ErrorKind::kUnsupportedFormat,
          "base64: length not a multiple of 4");
  std::vector<unsigned char> out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    std::uint32_t v = 0;
    int pad = 0;
    for (int k = 0; k < 4; ++k) {
      const char c = text[i + k];
      int d = 0;
      if (c == '=' && i + 4 == text.size() && k >= 2) {
        ++pad;
      } else {
        d = value(c);
        Require(d >= 0 && pad == 0, ErrorKind::kUnsupportedFormat, "base64: bad character");
      }
      v = (v << 6) | static_cast<std::uint32_t>(d);
    }
    out.push_back(static_cast<unsigned char>(v >> 16));
    if (pad < 2) out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
    if (pad < 1) out.push_back(static_cast<unsigned char>(v & 0xff));
  }
  return out;
}

void SaveModel(const AcousticModel &model, const std::filesystem::path &path) {
  const ModelConfig &c = model.config;
  json doc;
  doc["version"] = kModelVersion;
  doc["config"] = {{"hidden_layers", c.hidden_layers},
                   {"hidden_units", c.hidden_units},
                   {"keyword_states", c.keyword_states},
                   {"aux_phones", c.aux_phones},
                   {"loss_weight_keyword", c.loss_weight_keyword},
                   {"loss_weight_aux", c.loss_weight_aux},
                   {"learning_rate", c.learning_rate},
                   {"batch_size", c.batch_size},
                   {"epochs", c.epochs},
                   {"init_seed", c.init_seed},
                   {"halve_on_plateau", c.halve_on_plateau}};
  doc["feature_dim"] = model.feature_dim;
  json layers = json::array();
  for (std::size_t l = 0; l < model.params.hidden.size(); ++l)
    layers.push_back(LayerToJson("hidden" + std::to_string(l), model.params.hidden[l]));
  layers.push_back(LayerToJson("keyword_head", model.params.keyword_head));
  layers.push_back(LayerToJson("aux_head", model.params.aux_head));
  doc["layers"] = layers;
  doc["state_priors"] = model.state_priors;

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) Fail(ErrorKind::kIo, "cannot write model: " + path.string());
  out << doc.dump(1) << '\n';
}

AcousticModel LoadModel(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorKind::kIo, "cannot open model: " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception &err) {
    Fail(ErrorKind::kUnsupportedFormat, "model " + path.string() + ": " + err.what());
  }
  Require(doc.value("version", "") == kModelVersion, ErrorKind::kUnsupportedFormat,
          "model " + path.string() + ": expected version " + kModelVersion);
  AcousticModel model;
  try {
    const json &c = doc.at("config");
    model.config.hidden_layers = c.at("hidden_layers").get<int>();
    model.config.hidden_units = c.at("hidden_units").get<int>();
    model.config.keyword_states = c.at("keyword_states").get<int>();
    model.config.aux_phones = c.at("aux_phones").get<int>();
    model.config.loss_weight_keyword = c.at("loss_weight_keyword").get<double>();
    model.config.loss_weight_aux = c.at("loss_weight_aux").get<double>();
    model.config.learning_rate = c.at("learning_rate").get<double>();
    model.config.batch_size = c.at("batch_size").get<int>();
    model.config.epochs = c.at("epochs").get<int>();
    model.config.init_seed = c.at("init_seed").get<std::uint64_t>();
    model.config.halve_on_plateau = c.value("halve_on_plateau", true);
    model.feature_dim = doc.at("feature_dim").get<std::size_t>();
    const json &layers = doc.at("layers");
    Require(layers.size() == static_cast<std::size_t>(model.config.hidden_layers) + 2,
            ErrorKind::kUnsupportedFormat, "model: layer count does not match config");
    for (int l = 0; l < model.config.hidden_layers; ++l)
      model.params.hidden.push_back(LayerFromJson(layers[static_cast<std::size_t>(l)]));
    model.params.keyword_head = LayerFromJson(layers[layers.size() - 2]);
    model.params.aux_head = LayerFromJson(layers[layers.size() - 1]);
    model.state_priors = doc.at("state_priors").get<std::vector<double>>();
  } catch (const json::exception &err) {
    Fail(ErrorKind::kUnsupportedFormat, "model " + path.string() + ": " + err.what());
  }
  // Shapes must chain from the feature dim into both heads.
  std::size_t in_dim = model.feature_dim;
  for (const auto &layer : model.params.hidden) {
    Require(layer.inputs() == in_dim, ErrorKind::kUnsupportedFormat,
            "model: layer shapes do not chain");
    in_dim = layer.outputs();
  }
  Require(model.params.keyword_head.inputs() == in_dim &&
              model.params.aux_head.inputs() == in_dim &&
              model.params.keyword_head.outputs() ==
                  static_cast<std::size_t>(model.config.keyword_states) &&
              model.params.aux_head.outputs() == static_cast<std::size_t>(model.config.aux_phones),
          ErrorKind::kUnsupportedFormat, "model: head shapes do not match config");
  Require(model.params.AllFinite(), ErrorKind::kNumerical, "model: non-finite parameter");
  return model;
}

}  // namespace kws
