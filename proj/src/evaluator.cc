// Copyright 2026 The qtab Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qtab/evaluator.h"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "qtab/base64.h"
#include "qtab/error.h"
#include "qtab/parallel.h"

namespace qtab {

std::vector<std::uint8_t> ClassifierEvaluator::judge(const Dataset& dataset,
                                                     std::span<const std::size_t> indices,
                                                     std::span<const RawImage> decoded,
                                                     int threads) {
  if (indices.size() != decoded.size()) throw InvalidArgument("judge: index/image count mismatch");
  const std::vector<int> labels = predict(decoded, threads);
  std::vector<std::uint8_t> correct(indices.size());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    correct[k] = labels[k] == dataset[indices[k]].label;
  }
  return correct;
}

std::string ProxyEvaluator::id() const {
  const ProxyConfig& c = proxy_.config();
  std::ostringstream s;
  s.precision(17);
  s << "proxy:classes=" << c.class_count << ",lf_end=" << c.bands.lf_end()
    << ",mf_end=" << c.bands.mf_end() << ",floor=" << c.noise_floor
    << ",flat=" << c.flat_threshold << ",lf_min=" << c.lf_min << ",lf_max=" << c.lf_max
    << ",hf_share=" << c.hf_share << ",hf_weight=" << c.hf_weight;
  return s.str();
}

std::vector<int> ProxyEvaluator::predict(std::span<const RawImage> images, int threads) {
  std::vector<int> labels(images.size());
  parallel_for(images.size(), threads,
               [&](std::size_t i) { labels[i] = proxy_.classify(images[i]); });
  return labels;
}

std::string PsnrThresholdEvaluator::id() const {
  std::ostringstream s;
  s.precision(17);
  s << "psnr:threshold_db=" << threshold_db_;
  return s.str();
}

std::vector<std::uint8_t> PsnrThresholdEvaluator::judge(const Dataset& dataset,
                                                        std::span<const std::size_t> indices,
                                                        std::span<const RawImage> decoded,
                                                        int threads) {
  if (indices.size() != decoded.size()) throw InvalidArgument("judge: index/image count mismatch");
  std::vector<std::uint8_t> correct(indices.size());
  parallel_for(indices.size(), threads, [&](std::size_t k) {
    correct[k] = psnr(dataset[indices[k]].image, decoded[k]) >= threshold_db_;
  });
  return correct;
}

std::string to_string(EvaluatorKind kind) {
  switch (kind) {
    case EvaluatorKind::kExternalClassifier: return "external";
    case EvaluatorKind::kProxyClassifier: return "proxy";
    case EvaluatorKind::kPsnrThreshold: return "psnr";
  }
  return "unknown";
}

EvaluatorKind parse_evaluator_kind(std::string_view s) {
  if (s == "external" || s == "external_classifier") return EvaluatorKind::kExternalClassifier;
  if (s == "proxy" || s == "proxy_classifier") return EvaluatorKind::kProxyClassifier;
  if (s == "psnr" || s == "psnr_threshold") return EvaluatorKind::kPsnrThreshold;
  throw InvalidArgument("unknown evaluator kind: " + std::string(s));
}

EvaluatorSpec EvaluatorSpec::parse(std::string_view text) {
  EvaluatorSpec spec;
  const auto colon = text.find(':');
  spec.kind = parse_evaluator_kind(text.substr(0, colon));
  if (colon == std::string_view::npos) return spec;
  std::string_view rest = text.substr(colon + 1);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string_view item = rest.substr(0, comma);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos || eq == 0) {
      throw InvalidArgument("evaluator option must be key=value: " + std::string(item));
    }
    spec.config[std::string(item.substr(0, eq))] = std::string(item.substr(eq + 1));
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return spec;
}

std::string EvaluatorSpec::to_string() const {
  std::string s = qtab::to_string(kind);
  char sep = ':';
  for (const auto& [k, v] : config) {
    s += sep + k + "=" + v;
    sep = ',';
  }
  return s;
}

namespace {

double number(const std::map<std::string, std::string>& cfg, const std::string& key) {
  const std::string& v = cfg.at(key);
  std::size_t used = 0;
  double d = 0.0;
  try {
    d = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty()) throw InvalidArgument("evaluator option " + key + " is not a number: " + v);
  return d;
}

int integer(const std::map<std::string, std::string>& cfg, const std::string& key) {
  const double d = number(cfg, key);
  if (d != static_cast<int>(d)) throw InvalidArgument("evaluator option " + key + " must be an integer");
  return static_cast<int>(d);
}

void reject_unknown(const std::map<std::string, std::string>& cfg,
                    std::initializer_list<std::string_view> known) {
  for (const auto& [k, v] : cfg) {
    if (std::find(known.begin(), known.end(), k) == known.end()) {
      throw InvalidArgument("unknown evaluator option: " + k);
    }
  }
}

}  // namespace

std::unique_ptr<Evaluator> make_evaluator(const EvaluatorSpec& spec, int default_class_count) {
  const auto& cfg = spec.config;
  switch (spec.kind) {
    case EvaluatorKind::kProxyClassifier: {
      reject_unknown(cfg, {"classes", "lf_end", "mf_end", "flat", "floor"});
      ProxyConfig pc;
      pc.class_count = cfg.count("classes") ? integer(cfg, "classes") : default_class_count;
      if (cfg.count("lf_end") || cfg.count("mf_end")) {
        pc.bands = FrequencyBands(cfg.count("lf_end") ? integer(cfg, "lf_end") : pc.bands.lf_end(),
                                  cfg.count("mf_end") ? integer(cfg, "mf_end") : pc.bands.mf_end());
      }
      if (cfg.count("flat")) pc.flat_threshold = number(cfg, "flat");
      if (cfg.count("floor")) pc.noise_floor = number(cfg, "floor");
      return std::make_unique<ProxyEvaluator>(pc);
    }
    case EvaluatorKind::kPsnrThreshold:
      reject_unknown(cfg, {"threshold_db"});
      if (!cfg.count("threshold_db")) throw InvalidArgument("psnr evaluator needs threshold_db");
      return std::make_unique<PsnrThresholdEvaluator>(number(cfg, "threshold_db"));
    case EvaluatorKind::kExternalClassifier: {
      reject_unknown(cfg, {"command", "host", "port", "connections", "timeout_ms"});
      ExternalEndpoint ep;
      if (cfg.count("command")) {
        ep.command = cfg.at("command");
      } else if (cfg.count("host") && cfg.count("port")) {
        ep.host = cfg.at("host");
        ep.port = integer(cfg, "port");
      } else {
        throw InvalidArgument("external evaluator needs command, or host and port");
      }
      ExternalOptions opt;
      if (cfg.count("connections")) opt.connections = integer(cfg, "connections");
      if (cfg.count("timeout_ms")) opt.timeout = std::chrono::milliseconds(integer(cfg, "timeout_ms"));
      return std::make_unique<ExternalEvaluator>(ep, opt);
    }
  }
  throw InvalidArgument("unknown evaluator kind");
}

namespace {
constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 3 <= bytes.size(); i += 3) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out += kAlphabet[v >> 18];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += kAlphabet[v & 63];
  }
  if (const std::size_t left = bytes.size() - i; left) {
    std::uint32_t v = bytes[i] << 16;
    if (left == 2) v |= bytes[i + 1] << 8;
    out += kAlphabet[v >> 18];
    out += kAlphabet[(v >> 12) & 63];
    out += left == 2 ? kAlphabet[(v >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

std::optional<std::vector<std::uint8_t>> base64_decode(std::string_view text) {
  if (text.size() % 4) return std::nullopt;
  auto value = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
  };
  std::vector<std::uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    const bool last = i + 4 == text.size();
    int pad = 0;
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) {
      const char c = text[i + k];
      if (c == '=' && last && k >= 2) {
        ++pad;
        v <<= 6;
        continue;
      }
      const int d = value(c);
      if (d < 0 || pad) return std::nullopt;
      v = (v << 6) | static_cast<std::uint32_t>(d);
    }
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    if (pad < 2) out.push_back(static_cast<std::uint8_t>(v >> 8));
    if (pad < 1) out.push_back(static_cast<std::uint8_t>(v));
  }
  return out;
}

}  // namespace qtab
