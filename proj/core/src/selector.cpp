#include "trajprune/selector.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "trajprune/error.hpp"

namespace trajprune {

namespace {

std::uint32_t parse_u32(std::string_view text, const std::string& context) {
  std::uint32_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::InvalidConfig, "bad epoch selector '" + context + "'");
  }
  return v;
}

}  // namespace

EpochSelector EpochSelector::every_k(std::uint32_t k) { return {Mode::EveryK, k, {}}; }
EpochSelector EpochSelector::single(Epoch t) { return {Mode::Single, t, {}}; }
EpochSelector EpochSelector::upto(Epoch t) { return {Mode::UpTo, t, {}}; }

EpochSelector EpochSelector::explicit_epochs(std::vector<Epoch> epochs) {
  std::sort(epochs.begin(), epochs.end());
  epochs.erase(std::unique(epochs.begin(), epochs.end()), epochs.end());
  return {Mode::Explicit, 0, std::move(epochs)};
}

std::vector<Epoch> EpochSelector::resolve(std::uint32_t n_epochs) const {
  std::vector<Epoch> out;
  switch (mode_) {
    case Mode::EveryK:
      if (param_ == 0) throw Error(ErrorCode::SelectorOutOfRange, "every_k needs k >= 1");
      for (Epoch t = param_; t <= n_epochs; t += param_) out.push_back(t);
      break;
    case Mode::Single:
      if (param_ >= 1 && param_ <= n_epochs) out.push_back(param_);
      break;
    case Mode::UpTo:
      if (param_ <= n_epochs) {
        for (Epoch t = 1; t <= param_; ++t) out.push_back(t);
      }
      break;
    case Mode::Explicit:
      for (Epoch t : epochs_) {
        if (t < 1 || t > n_epochs) {
          throw Error(ErrorCode::SelectorOutOfRange,
                      "epoch " + std::to_string(t) + " not in [1, " + std::to_string(n_epochs) + "]");
        }
      }
      out = epochs_;
      break;
  }
  if (out.empty()) {
    throw Error(ErrorCode::SelectorOutOfRange,
                "selector " + to_string() + " selects nothing from " + std::to_string(n_epochs) + " epochs");
  }
  return out;
}

std::string EpochSelector::to_string() const {
  switch (mode_) {
    case Mode::EveryK: return "every_k:" + std::to_string(param_);
    case Mode::Single: return "single:" + std::to_string(param_);
    case Mode::UpTo: return "upto:" + std::to_string(param_);
    case Mode::Explicit: {
      std::string s = "explicit:";
      for (std::size_t i = 0; i < epochs_.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(epochs_[i]);
      }
      return s;
    }
  }
  return {};
}

EpochSelector EpochSelector::parse(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw Error(ErrorCode::InvalidConfig, "bad epoch selector '" + text + "'");
  const std::string kind = text.substr(0, colon);
  const std::string_view rest = std::string_view(text).substr(colon + 1);
  if (kind == "every_k") return every_k(parse_u32(rest, text));
  if (kind == "single") return single(parse_u32(rest, text));
  if (kind == "upto") return upto(parse_u32(rest, text));
  if (kind == "explicit") {
    std::vector<Epoch> epochs;
    std::size_t start = 0;
    while (start <= rest.size()) {
      const auto comma = rest.find(',', start);
      const auto piece = rest.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
      epochs.push_back(parse_u32(piece, text));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    return explicit_epochs(std::move(epochs));
  }
  throw Error(ErrorCode::InvalidConfig, "bad epoch selector '" + text + "'");
}

}  // namespace trajprune
