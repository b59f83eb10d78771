#include "topicvec/model_io.hpp"

#include <charconv>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace topicvec {

namespace {

constexpr char kMagic[4] = {'T', 'V', 'E', 'C'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void write_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void write_f64(std::ostream& out, double v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t read_u32(std::istream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}
std::uint64_t read_u64(std::istream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}
double read_f64(std::istream& in) {
  double v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

}  // namespace

void save_checkpoint(const ModelState& state, std::uint64_t vocab_hash,
                     const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write checkpoint '" + path + "'");
  }
  int N = 0;
  if (!state.topic_sets.empty()) {
    N = state.topic_sets.begin()->second.dim();
  }
  out.write(kMagic, sizeof(kMagic));
  write_u32(out, kVersion);
  write_u32(out, static_cast<std::uint32_t>(N));
  write_u32(out, static_cast<std::uint32_t>(state.hyper.K));
  write_f64(out, state.hyper.gamma);
  write_u32(out, static_cast<std::uint32_t>(state.hyper.alpha.size()));
  for (Eigen::Index k = 0; k < state.hyper.alpha.size(); ++k) {
    write_f64(out, state.hyper.alpha(k));
  }
  write_u64(out, vocab_hash);
  write_u32(out, static_cast<std::uint32_t>(state.topic_sets.size()));
  for (const auto& [name, ts] : state.topic_sets) {
    write_u32(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    for (int i = 0; i < ts.dim(); ++i) {
      for (int k = 0; k < ts.K(); ++k) {
        write_f64(out, ts.T(i, k));
      }
    }
    for (int k = 0; k < ts.K(); ++k) {
      write_f64(out, ts.r(k));
    }
  }
  if (!out) {
    throw std::runtime_error("failed while writing checkpoint '" + path + "'");
  }
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot read checkpoint '" + path + "'");
  }
  char magic[4];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("'" + path + "' is not a checkpoint file");
  }
  const std::uint32_t version = read_u32(in);
  if (version != kVersion) {
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ckpt;
  const int N = static_cast<int>(read_u32(in));
  const int K = static_cast<int>(read_u32(in));
  ckpt.state.hyper.K = K;
  ckpt.state.hyper.gamma = read_f64(in);
  const int alen = static_cast<int>(read_u32(in));
  ckpt.state.hyper.alpha.resize(alen);
  for (int k = 0; k < alen; ++k) {
    ckpt.state.hyper.alpha(k) = read_f64(in);
  }
  ckpt.vocab_hash = read_u64(in);
  const int nsets = static_cast<int>(read_u32(in));
  for (int s = 0; s < nsets; ++s) {
    const auto name_len = read_u32(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    TopicSet ts = TopicSet::zeros(N, K, name);
    for (int i = 0; i < N; ++i) {
      for (int k = 0; k < K; ++k) {
        ts.T(i, k) = read_f64(in);
      }
    }
    for (int k = 0; k < K; ++k) {
      ts.r(k) = read_f64(in);
    }
    ckpt.state.topic_sets.emplace(std::move(name), std::move(ts));
  }
  if (!in) {
    throw std::runtime_error("checkpoint '" + path + "' is truncated");
  }
  return ckpt;
}

void verify_vocab_hash(const Checkpoint& ckpt, const Vocabulary& vocab) {
  if (ckpt.vocab_hash != vocab.hash()) {
    throw std::runtime_error("checkpoint vocabulary hash does not match the loaded vocabulary");
  }
}

void save_elbo_trace(const std::vector<double>& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write elbo trace '" + path + "'");
  }
  char buf[64];
  for (double v : trace) {
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out << std::string_view(buf, res.ptr - buf) << '\n';
  }
}

}  // namespace topicvec
