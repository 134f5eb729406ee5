#include "qrl/deepq.hpp"

#include <bit>
#include <fstream>

#include "json.hpp"

namespace qrl {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

std::pair<int, int> type_indicator_cell(const StabilizerRecord& stab) {
  // X-type marks the edge cell above its plaquette, Z-type the cell to the
  // left; plaquettes on the top/left grid border mark the opposite side.
  // Same-kind vertical/horizontal neighbours alternate checkerboard colour
  // and the two kinds land on different cell parities, so marks are unique.
  if (stab.kind == StabilizerKind::kXType) {
    const int r = stab.plaquette_row == 0 ? 1 : stab.plaquette_row - 1;
    return {r, stab.plaquette_col};
  }
  const int c = stab.plaquette_col == 0 ? 1 : stab.plaquette_col - 1;
  return {stab.plaquette_row, c};
}

EncodedState encode_state(const CodeLayout& layout, const EnvState& state) {
  const int depth = static_cast<int>(state.volume.slices.size());
  if (depth == 0) {
    throw std::invalid_argument("cannot encode an empty syndrome volume");
  }
  const int n_stab = layout.n_stabilizers();
  const int g = layout.grid_size();
  EncodedState out;
  out.channels = depth + 2;
  out.height = g;
  out.width = g;
  out.bits.assign(static_cast<std::size_t>(out.channels) * g * g, 0);
  auto set = [&](int ch, int r, int c) {
    out.bits[(static_cast<std::size_t>(ch) * g + r) * g + c] = 1;
  };

  for (int k = 0; k < depth; ++k) {
    const Syndrome& slice = state.volume.slices[k];
    if (static_cast<int>(slice.bits.size()) != n_stab) {
      throw std::invalid_argument("syndrome slice does not match the layout");
    }
    for (int si = 0; si < n_stab; ++si) {
      const StabilizerRecord& stab = layout.stabilizers()[si];
      if (slice.bits[si]) set(k, stab.plaquette_row, stab.plaquette_col);
      const auto [ir, ic] = type_indicator_cell(stab);
      set(k, ir, ic);
    }
  }
  for (const Action& a : state.history) {
    if (a.kind != Action::Kind::kFlip) continue;
    if (a.qubit < 0 || a.qubit >= layout.n_qubits()) {
      throw std::invalid_argument("history flip outside the layout");
    }
    const int ch = depth + (a.axis == PauliAxis::kX ? 0 : 1);
    set(ch, 2 * layout.qubit_row(a.qubit) + 1, 2 * layout.qubit_col(a.qubit) + 1);
  }
  return out;
}

ReplayMemory::ReplayMemory(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) {
    throw std::invalid_argument("replay capacity must be positive");
  }
}

void ReplayMemory::push(Experience e) {
  if (buffer_.size() < capacity_) {
    buffer_.push_back(std::move(e));
  } else {
    buffer_[head_] = std::move(e);
    head_ = (head_ + 1) % capacity_;
  }
}

const Experience& ReplayMemory::at(std::size_t i) const {
  if (i >= buffer_.size()) {
    throw std::out_of_range("replay index out of range");
  }
  return buffer_[(head_ + i) % buffer_.size()];
}

std::vector<const Experience*> ReplayMemory::sample(std::size_t batch_size,
                                                    Rng& rng) const {
  if (batch_size == 0) {
    throw std::invalid_argument("batch size must be positive");
  }
  if (buffer_.size() < batch_size) {
    throw std::invalid_argument(
        "replay memory underfilled: " + std::to_string(buffer_.size()) +
        " stored, batch needs " + std::to_string(batch_size));
  }
  std::vector<const Experience*> out(batch_size);
  for (auto& p : out) {
    p = &buffer_[rng.uniform_int(static_cast<std::uint32_t>(buffer_.size()))];
  }
  return out;
}

int select_action(const nn::Network<float>& net, const EncodedState& s,
                  double epsilon, const std::vector<std::uint8_t>& mask,
                  Rng& rng) {
  const int n = net.spec().n_actions;
  if (epsilon < 0.0 || epsilon > 1.0) {
    throw std::invalid_argument("epsilon must be in [0, 1]");
  }
  if (static_cast<int>(mask.size()) != n) {
    throw std::invalid_argument("exploration mask size mismatch");
  }
  std::vector<int> allowed;
  allowed.reserve(mask.size());
  for (int i = 0; i < n; ++i) {
    if (mask[i]) allowed.push_back(i);
  }
  if (allowed.empty()) {
    throw std::invalid_argument("exploration mask allows no actions");
  }
  // epsilon == 0 consumes no randomness, keeping greedy evaluation streams
  // independent of the policy rng.
  if (epsilon > 0.0 && rng.uniform() < epsilon) {
    return allowed[rng.uniform_int(static_cast<std::uint32_t>(allowed.size()))];
  }
  const std::vector<float> q = net.predict(to_network_input<float>(s));
  int best = 0;
  for (int a = 1; a < n; ++a) {
    if (q[a] > q[best]) best = a;  // ties keep the lowest index
  }
  return best;
}

double annealed_epsilon(double initial, double final_value,
                        std::int64_t exploration_steps, std::int64_t step) {
  if (exploration_steps <= 0) {
    throw std::invalid_argument("exploration_steps must be positive");
  }
  if (step <= 0) return initial;
  if (step >= exploration_steps) return final_value;
  const double f = static_cast<double>(step) / static_cast<double>(exploration_steps);
  return initial + (final_value - initial) * f;
}

// --------------------------------------------------------------------------
// Checkpoint I/O.

namespace {

constexpr char kMagic[8] = {'Q', 'R', 'L', 'A', 'G', 'N', 'T', '1'};

template <typename T>
void write_pod(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T read_pod(std::istream& in) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw std::runtime_error("truncated checkpoint");
  return v;
}

void write_state(std::ostream& out, const EncodedState& s) {
  out.write(reinterpret_cast<const char*>(s.bits.data()),
            static_cast<std::streamsize>(s.bits.size()));
}

EncodedState read_state(std::istream& in, int channels, int height, int width) {
  EncodedState s;
  s.channels = channels;
  s.height = height;
  s.width = width;
  s.bits.resize(static_cast<std::size_t>(channels) * height * width);
  in.read(reinterpret_cast<char*>(s.bits.data()),
          static_cast<std::streamsize>(s.bits.size()));
  if (!in) throw std::runtime_error("truncated checkpoint");
  return s;
}

std::string model_name(NoiseModel model) {
  return model == NoiseModel::kBitFlip ? "bitflip" : "depolarizing";
}

NoiseModel model_from_name(const std::string& name) {
  if (name == "bitflip") return NoiseModel::kBitFlip;
  if (name == "depolarizing") return NoiseModel::kDepolarizing;
  throw std::runtime_error("unknown noise model in checkpoint: " + name);
}

nlohmann::json spec_to_json(const nn::NetworkSpec& spec) {
  nlohmann::json convs = nlohmann::json::array();
  for (const auto& c : spec.convs) {
    convs.push_back({c.filters, c.width, c.stride});
  }
  return {{"in_channels", spec.in_channels}, {"in_height", spec.in_height},
          {"in_width", spec.in_width},       {"convs", convs},
          {"dense_units", spec.dense_units}, {"dropout", spec.dropout},
          {"n_actions", spec.n_actions}};
}

nn::NetworkSpec spec_from_json(const nlohmann::json& j) {
  nn::NetworkSpec spec;
  spec.in_channels = j.at("in_channels").get<int>();
  spec.in_height = j.at("in_height").get<int>();
  spec.in_width = j.at("in_width").get<int>();
  for (const auto& c : j.at("convs")) {
    spec.convs.push_back({c.at(0).get<int>(), c.at(1).get<int>(), c.at(2).get<int>()});
  }
  spec.dense_units = j.at("dense_units").get<int>();
  spec.dropout = j.at("dropout").get<double>();
  spec.n_actions = j.at("n_actions").get<int>();
  return spec;
}

}  // namespace

void save_agent(const std::string& path, const CheckpointMeta& meta,
                const nn::Network<float>& online, const ReplayMemory* replay) {
  nlohmann::json manifest;
  manifest["format"] = "qrl-agent";
  manifest["version"] = 1;
  manifest["distance"] = meta.distance;
  manifest["noise_model"] = model_name(meta.model);
  manifest["volume_depth"] = meta.volume_depth;
  manifest["train_steps"] = meta.train_steps;
  manifest["epsilon"] = meta.epsilon;
  manifest["network"] = spec_to_json(online.spec());

  nlohmann::json tensors = nlohmann::json::array();
  const auto params = online.parameters();
  for (const auto& p : params) {
    tensors.push_back({{"name", p.name}, {"count", p.data->size()}});
  }
  manifest["tensors"] = std::move(tensors);

  nlohmann::json replay_meta;
  replay_meta["capacity"] = replay ? replay->capacity() : 0;
  replay_meta["count"] = replay ? replay->size() : 0;
  if (replay && replay->size() > 0) {
    const EncodedState& s0 = replay->at(0).s;
    replay_meta["channels"] = s0.channels;
    replay_meta["height"] = s0.height;
    replay_meta["width"] = s0.width;
    for (std::size_t i = 0; i < replay->size(); ++i) {
      const Experience& e = replay->at(i);
      if (e.s.channels != s0.channels || e.s.height != s0.height ||
          e.s.width != s0.width || e.s_next.bits.size() != e.s.bits.size()) {
        throw std::invalid_argument("replay memory holds mixed state shapes");
      }
    }
  }
  manifest["replay"] = std::move(replay_meta);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  out.write(kMagic, sizeof kMagic);
  const std::string doc = manifest.dump();
  write_pod<std::uint64_t>(out, doc.size());
  out.write(doc.data(), static_cast<std::streamsize>(doc.size()));
  for (const auto& p : params) {
    out.write(reinterpret_cast<const char*>(p.data->data()),
              static_cast<std::streamsize>(p.data->size() * sizeof(float)));
  }
  if (replay) {
    for (std::size_t i = 0; i < replay->size(); ++i) {
      const Experience& e = replay->at(i);
      write_state(out, e.s);
      write_pod<std::int32_t>(out, e.action);
      write_pod<float>(out, e.reward);
      write_state(out, e.s_next);
      write_pod<std::uint8_t>(out, e.terminal ? 1 : 0);
    }
  }
  out.flush();
  if (!out) throw std::runtime_error("failed writing checkpoint: " + path);
}

LoadedAgent load_agent(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || !std::equal(std::begin(magic), std::end(magic), std::begin(kMagic))) {
    throw std::runtime_error("not an agent checkpoint: " + path);
  }
  const auto doc_size = read_pod<std::uint64_t>(in);
  if (doc_size > (1ull << 30)) {
    throw std::runtime_error("implausible checkpoint manifest size");
  }
  std::string doc(doc_size, '\0');
  in.read(doc.data(), static_cast<std::streamsize>(doc_size));
  if (!in) throw std::runtime_error("truncated checkpoint");
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(doc);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(std::string("corrupt checkpoint manifest: ") + e.what());
  }
  if (manifest.value("format", "") != "qrl-agent" ||
      manifest.value("version", 0) != 1) {
    throw std::runtime_error("unsupported checkpoint format/version");
  }

  CheckpointMeta meta;
  meta.distance = manifest.at("distance").get<int>();
  meta.model = model_from_name(manifest.at("noise_model").get<std::string>());
  meta.volume_depth = manifest.at("volume_depth").get<int>();
  meta.train_steps = manifest.at("train_steps").get<std::int64_t>();
  meta.epsilon = manifest.at("epsilon").get<double>();

  const nn::NetworkSpec spec = spec_from_json(manifest.at("network"));
  Rng scratch(0);
  nn::Network<float> net(spec, scratch);
  auto params = net.parameters();
  const auto& tensors = manifest.at("tensors");
  if (tensors.size() != params.size()) {
    throw std::runtime_error("checkpoint tensor list does not match the network");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const std::string name = tensors[i].at("name").get<std::string>();
    const auto count = tensors[i].at("count").get<std::size_t>();
    if (name != params[i].name || count != params[i].data->size()) {
      throw std::runtime_error("checkpoint tensor mismatch at " + params[i].name);
    }
    in.read(reinterpret_cast<char*>(params[i].data->data()),
            static_cast<std::streamsize>(count * sizeof(float)));
    if (!in) throw std::runtime_error("truncated checkpoint");
  }

  std::optional<ReplayMemory> replay;
  const auto& rmeta = manifest.at("replay");
  const auto count = rmeta.at("count").get<std::size_t>();
  const auto capacity = rmeta.at("capacity").get<std::size_t>();
  if (capacity > 0) {
    replay.emplace(capacity);
    if (count > 0) {
      const int ch = rmeta.at("channels").get<int>();
      const int h = rmeta.at("height").get<int>();
      const int w = rmeta.at("width").get<int>();
      for (std::size_t i = 0; i < count; ++i) {
        Experience e;
        e.s = read_state(in, ch, h, w);
        e.action = read_pod<std::int32_t>(in);
        e.reward = read_pod<float>(in);
        e.s_next = read_state(in, ch, h, w);
        e.terminal = read_pod<std::uint8_t>(in) != 0;
        replay->push(std::move(e));
      }
    }
  }
  return {meta, std::move(net), std::move(replay)};
}

}  // namespace qrl
