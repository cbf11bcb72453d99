#include "arg/config.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace arg {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double x;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad number for " + key + ": '" + v + "'");
  }
  if (pos != v.size())
    throw std::invalid_argument("config: bad number for " + key + ": '" + v + "'");
  return x;
}

int to_int(const std::string& key, const std::string& v) {
  return static_cast<int>(to_double(key, v));
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::invalid_argument("config: bad bool for " + key + ": '" + v + "'");
}

}  // namespace

void TrainConfig::validate() const {
  if (modes.empty()) throw std::invalid_argument("config: at least one relation mode required");
  if (embed_dim < 1) throw std::invalid_argument("config: dk must be >= 1");
  if (distance.fraction_of_width) {
    if (!(distance.value > 0 && distance.value <= 1))
      throw std::invalid_argument("config: mu_fraction must be in (0, 1]");
  } else if (!(distance.value > 0)) {
    throw std::invalid_argument("config: mu_pixels must be > 0");
  }
  if (action_loss_weight < 0) throw std::invalid_argument("config: lambda must be >= 0");
  if (batch_size < 1) throw std::invalid_argument("config: batch must be >= 1");
  if (!(learning_rate >= 0)) throw std::invalid_argument("config: lr must be >= 0");
  if (epochs < 0) throw std::invalid_argument("config: epochs must be >= 0");
  if (!(frame_dropout >= 0 && frame_dropout <= 1))
    throw std::invalid_argument("config: frame_dropout must be in [0, 1]");
  if (stage != 1 && stage != 2) throw std::invalid_argument("config: stage must be 1 or 2");
  if (gcn_layers < 1) throw std::invalid_argument("config: gcn_layers must be >= 1");
}

void apply_config_entry(TrainConfig& cfg, const std::string& key,
                        const std::string& value) {
  if (key == "mode") {
    std::vector<RelationMode> modes;
    std::istringstream in(value);
    std::string part;
    while (std::getline(in, part, ','))
      if (!part.empty()) modes.push_back(relation_mode_from_name(part));
    if (modes.empty()) throw std::invalid_argument("config: mode list is empty");
    cfg.modes = std::move(modes);
  } else if (key == "dk") {
    cfg.embed_dim = to_int(key, value);
  } else if (key == "ds") {
    cfg.spatial_dim = to_int(key, value);
  } else if (key == "mu_fraction") {
    cfg.distance = DistanceRule{true, to_double(key, value)};
  } else if (key == "mu_pixels") {
    cfg.distance = DistanceRule{false, to_double(key, value)};
  } else if (key == "lambda") {
    cfg.action_loss_weight = to_double(key, value);
  } else if (key == "batch") {
    cfg.batch_size = to_int(key, value);
  } else if (key == "lr") {
    cfg.learning_rate = to_double(key, value);
  } else if (key == "epochs") {
    cfg.epochs = to_int(key, value);
  } else if (key == "optimizer") {
    if (value == "sgd") cfg.optimizer = Optimizer::Sgd;
    else if (value == "adam") cfg.optimizer = Optimizer::Adam;
    else throw std::invalid_argument("config: optimizer must be sgd or adam");
  } else if (key == "seed") {
    cfg.seed = static_cast<std::uint64_t>(to_double(key, value));
  } else if (key == "frame_dropout") {
    cfg.frame_dropout = to_double(key, value);
  } else if (key == "stage") {
    cfg.stage = to_int(key, value);
  } else if (key == "gcn_layers") {
    cfg.gcn_layers = to_int(key, value);
  } else if (key == "same_frame_only") {
    cfg.same_frame_only = to_bool(key, value);
  } else if (key == "uncentered_ncc") {
    cfg.uncentered_ncc = to_bool(key, value);
  } else {
    throw std::invalid_argument("config: unknown key '" + key + "'");
  }
}

TrainConfig parse_config_text(const std::string& text, TrainConfig base) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::size_t begin = line.find_first_not_of(" \t\r");
    if (begin == std::string::npos) continue;
    std::size_t end = line.find_last_not_of(" \t\r");
    line = line.substr(begin, end - begin + 1);
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected key=value, got '" + line + "'");
    apply_config_entry(base, line.substr(0, eq), line.substr(eq + 1));
  }
  base.validate();
  return base;
}

std::string serialize_config(const TrainConfig& cfg) {
  std::ostringstream out;
  out << "mode=";
  for (std::size_t i = 0; i < cfg.modes.size(); ++i) {
    if (i) out << ',';
    out << relation_mode_name(cfg.modes[i]);
  }
  out << '\n';
  out << "dk=" << cfg.embed_dim << '\n';
  out << "ds=" << cfg.spatial_dim << '\n';
  if (cfg.distance.fraction_of_width)
    out << "mu_fraction=" << fmt_double(cfg.distance.value) << '\n';
  else
    out << "mu_pixels=" << fmt_double(cfg.distance.value) << '\n';
  out << "lambda=" << fmt_double(cfg.action_loss_weight) << '\n';
  out << "batch=" << cfg.batch_size << '\n';
  out << "lr=" << fmt_double(cfg.learning_rate) << '\n';
  out << "epochs=" << cfg.epochs << '\n';
  out << "optimizer=" << (cfg.optimizer == Optimizer::Sgd ? "sgd" : "adam") << '\n';
  out << "seed=" << cfg.seed << '\n';
  out << "frame_dropout=" << fmt_double(cfg.frame_dropout) << '\n';
  out << "stage=" << cfg.stage << '\n';
  out << "gcn_layers=" << cfg.gcn_layers << '\n';
  out << "same_frame_only=" << (cfg.same_frame_only ? "true" : "false") << '\n';
  out << "uncentered_ncc=" << (cfg.uncentered_ncc ? "true" : "false") << '\n';
  return out.str();
}

}  // namespace arg
