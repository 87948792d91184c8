/*
 * Copyright 2026 The KAN-MCP Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "kanmcp/checkpoint.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <optional>

#include "kanmcp/error.hpp"

namespace kanmcp::checkpoint {

namespace {

class Writer {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(static_cast<char>(v)); }
  void u16(std::uint16_t v) { uint_le(v, 2); }
  void u32(std::uint32_t v) { uint_le(v, 4); }
  void u64(std::uint64_t v) { uint_le(v, 8); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void reals(std::span<const Scalar> v) {
    u64(v.size());
    for (Scalar x : v) f64(static_cast<double>(x));
  }
  void str(const std::string& s) {
    u64(s.size());
    bytes_ += s;
  }
  void raw(std::string_view s) { bytes_ += s; }
  void section(const char (&tag)[5], const Writer& payload) {
    raw(std::string_view(tag, 4));
    u64(payload.bytes_.size());
    bytes_ += payload.bytes_;
  }
  const std::string& bytes() const { return bytes_; }

 private:
  void uint_le(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  std::string bytes_;
};

[[noreturn]] void corrupt(const std::string& why) { fail(ErrorKind::CorruptCheckpoint, why); }

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  bool done() const { return pos_ == bytes_.size(); }
  std::uint8_t u8() { return static_cast<std::uint8_t>(uint_le(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(uint_le(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(uint_le(4)); }
  std::uint64_t u64() { return uint_le(8); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::vector<Scalar> reals() {
    const std::uint64_t n = u64();
    if (n > (bytes_.size() - pos_) / 8) corrupt("truncated real array");
    std::vector<Scalar> v(n);
    for (Scalar& x : v) x = static_cast<Scalar>(f64());
    return v;
  }
  std::string str() { return std::string(raw(u64())); }
  std::string_view raw(std::uint64_t n) {
    if (n > bytes_.size() - pos_) corrupt("truncated at byte " + std::to_string(pos_));
    const std::string_view s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  std::uint64_t uint_le(int n) {
    const std::string_view s = raw(static_cast<std::uint64_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(s[i])) << (8 * i);
    return v;
  }
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

std::uint32_t crc_of(std::string_view bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  const auto* p = reinterpret_cast<const Bytef*>(bytes.data());
  std::size_t left = bytes.size();
  while (left > 0) {
    const uInt chunk = static_cast<uInt>(std::min<std::size_t>(left, 1u << 30));
    crc = crc32(crc, p, chunk);
    p += chunk;
    left -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

void write_param(Writer& w, const Parameter& p, const model::AdamState& adam) {
  w.str(p.name());
  w.u64(p.shape().size());
  for (std::size_t d : p.shape()) w.u64(d);
  w.reals(p.value().data());
  const auto m = adam.first.find(p.name());
  w.u8(m != adam.first.end() ? 1 : 0);
  if (m != adam.first.end()) {
    w.reals(m->second);
    w.reals(adam.second.at(p.name()));
  }
}

void read_param(Reader& r, model::TrainState& state) {
  const std::string name = r.str();
  Parameter* p = state.model.find(name);
  if (!p) corrupt("unknown parameter '" + name + "'");
  Shape shape(r.u64());
  if (shape.size() > 8) corrupt("parameter '" + name + "' has an implausible rank");
  for (std::size_t& d : shape) d = r.u64();
  if (shape != p->shape()) corrupt("parameter '" + name + "' has shape " + shape_string(shape));
  std::vector<Scalar> values = r.reals();
  if (values.size() != p->numel()) corrupt("parameter '" + name + "' has the wrong element count");
  try {
    p->assign(Tensor(std::move(shape), std::move(values)));
  } catch (const Error& e) {
    corrupt("parameter '" + name + "': " + e.what());
  }
  if (r.u8() != 0) {
    std::vector<Scalar> m = r.reals();
    std::vector<Scalar> v = r.reals();
    if (m.size() != p->numel() || v.size() != p->numel()) corrupt("moment size mismatch for '" + name + "'");
    state.adam.first[name] = std::move(m);
    state.adam.second[name] = std::move(v);
  }
}

}  // namespace

std::string serialize(const model::TrainState& state) {
  const model::KanMcpModel& mdl = state.model;
  Writer out;
  out.raw(std::string_view(kMagic, 4));
  out.u16(kVersion);

  Writer conf;
  conf.str(to_config_text(mdl.config()));
  out.section("CONF", conf);

  Writer dims;
  for (std::size_t d : mdl.input_dims()) dims.u64(d);
  out.section("DIMS", dims);

  for (const pareto::ParamGroup& g : mdl.group_layout()) {
    Writer grp;
    grp.str(g.name);
    grp.u64(g.params.size());
    for (const std::string& name : g.params) write_param(grp, *mdl.find(name), state.adam);
    out.section("PGRP", grp);
  }

  Writer grid;
  grid.u64(mdl.head().layers().size());
  for (const kan::KanLayer& layer : mdl.head().layers()) {
    grid.u32(static_cast<std::uint32_t>(layer.grid().degree()));
    grid.reals(layer.grid().knots());
  }
  out.section("GRID", grid);

  Writer stat;
  for (std::size_t i = 0; i < kNumModalities; ++i) {
    stat.reals(state.standardizer.mean[i]);
    stat.reals(state.standardizer.stddev[i]);
  }
  out.section("STAT", stat);

  Writer optm;
  optm.u64(state.adam.steps);
  optm.u64(state.epoch);
  out.section("OPTM", optm);

  Writer rngs;
  rngs.str(state.rng.state());
  out.section("RNGS", rngs);

  Writer hist;
  hist.reals(state.history.multi);
  for (const auto& u : state.history.unimodal) hist.reals(u);
  out.section("HIST", hist);

  Writer frzn;
  frzn.u64(state.frozen.size());
  for (const std::string& f : state.frozen) frzn.str(f);
  out.section("FRZN", frzn);

  std::string bytes = out.bytes();
  Writer crc;
  crc.u32(crc_of(bytes));
  return bytes + crc.bytes();
}

model::TrainState deserialize(const std::string& bytes) {
  if (bytes.size() < 4 + 2 + 4) corrupt("file too short (" + std::to_string(bytes.size()) + " bytes)");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) corrupt("bad magic, not a checkpoint file");
  {
    Reader head(std::string_view(bytes).substr(4, 2));
    const std::uint16_t version = head.u16();
    if (version != kVersion) {
      corrupt("unsupported version " + std::to_string(version) + " (expected " + std::to_string(kVersion) + ")");
    }
  }
  const std::string_view body(bytes.data(), bytes.size() - 4);
  Reader tail(std::string_view(bytes).substr(bytes.size() - 4));
  if (tail.u32() != crc_of(body)) corrupt("CRC mismatch (truncated or modified file)");

  Reader r(body.substr(6));
  std::optional<RunConfig> config;
  std::optional<PerModality<std::size_t>> dims;
  std::optional<model::TrainState> state;
  bool have_rng = false;

  const auto need_state = [&](const char* tag) -> model::TrainState& {
    if (!state) corrupt(std::string(tag) + " section before CONF/DIMS");
    return *state;
  };

  while (!r.done()) {
    const std::string tag(r.raw(4));
    Reader s(r.raw(r.u64()));
    if (tag == "CONF") {
      try {
        config = parse_config(s.str());
      } catch (const Error& e) {
        corrupt(std::string("embedded config: ") + e.what());
      }
    } else if (tag == "DIMS") {
      dims.emplace();
      for (std::size_t& d : *dims) d = s.u64();
    } else if (tag == "PGRP") {
      model::TrainState& st = need_state("PGRP");
      s.str();
      const std::uint64_t n = s.u64();
      for (std::uint64_t i = 0; i < n; ++i) read_param(s, st);
    } else if (tag == "GRID") {
      model::TrainState& st = need_state("GRID");
      const std::uint64_t n = s.u64();
      if (n != st.model.head().layers().size()) corrupt("GRID layer count mismatch");
      for (kan::KanLayer& layer : st.model.head().layers()) {
        const int degree = static_cast<int>(s.u32());
        try {
          layer.set_grid(spline::Grid::from_knots(s.reals(), degree));
        } catch (const Error& e) {
          corrupt(std::string("GRID: ") + e.what());
        }
      }
    } else if (tag == "STAT") {
      model::TrainState& st = need_state("STAT");
      for (std::size_t i = 0; i < kNumModalities; ++i) {
        st.standardizer.mean[i] = s.reals();
        st.standardizer.stddev[i] = s.reals();
        if (st.standardizer.mean[i].size() != (*dims)[i] || st.standardizer.stddev[i].size() != (*dims)[i]) {
          corrupt("STAT width mismatch");
        }
      }
    } else if (tag == "OPTM") {
      model::TrainState& st = need_state("OPTM");
      st.adam.steps = s.u64();
      st.epoch = s.u64();
    } else if (tag == "RNGS") {
      need_state("RNGS").rng.set_state(s.str());
      have_rng = true;
    } else if (tag == "HIST") {
      model::TrainState& st = need_state("HIST");
      st.history.multi = s.reals();
      for (auto& u : st.history.unimodal) u = s.reals();
    } else if (tag == "FRZN") {
      model::TrainState& st = need_state("FRZN");
      const std::uint64_t n = s.u64();
      for (std::uint64_t i = 0; i < n; ++i) st.frozen.insert(s.str());
    } else {
      corrupt("unknown section '" + tag + "'");
    }
    if (!s.done()) corrupt("section " + tag + " has trailing bytes");
    if (!state && config && dims) {
      try {
        state.emplace(*config, *dims);
      } catch (const Error& e) {
        corrupt(std::string("model: ") + e.what());
      }
    }
  }
  if (!state) corrupt("missing CONF or DIMS section");
  if (!have_rng) corrupt("missing RNGS section");
  if (state->history.epochs() != state->epoch) corrupt("history length differs from the epoch counter");
  return std::move(*state);
}

void save(const model::TrainState& state, const std::filesystem::path& path) {
  const std::string bytes = serialize(state);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::IoError, "cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out.flush()) fail(ErrorKind::IoError, "write to '" + path.string() + "' failed");
}

model::TrainState load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::MissingFile, "cannot open checkpoint '" + path.string() + "'");
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

}  // namespace kanmcp::checkpoint
