#pragma once

// Test-side reference implementations. Everything in here is written from the
// documented contracts (the stream scheme in rng.hpp, the block layout in
// augment.hpp) rather than by calling the library, so agreement between the
// two is evidence, not tautology.

#include <sys/wait.h>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "subaug/augment.hpp"
#include "subaug/graph.hpp"

namespace testref {

// ---------------------------------------------------------------------------
// Reference random streams (splitmix64 finalizer, re-typed from the published
// constants).

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

inline std::uint64_t mix(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

inline std::uint64_t fold(std::uint64_t seed, std::uint64_t word) {
  return mix(seed + kGolden * (word + 1));
}

/// Draw i (0-based) of the stream addressed by `key`.
inline std::uint64_t draw(std::uint64_t key, std::uint64_t i) {
  return mix(key + kGolden * (i + 1));
}

inline double unit(std::uint64_t key, std::uint64_t i) {
  return static_cast<double>(draw(key, i) >> 11) * 0x1.0p-53;
}

/// Mask stream key: fold the MASK domain word (1), then epoch, batch,
/// subgraph, view.
inline std::uint64_t mask_key(std::uint64_t master, std::uint64_t epoch, std::uint64_t batch,
                              std::uint64_t subgraph, std::uint64_t view) {
  std::uint64_t key = fold(master, 1);
  key = fold(key, epoch);
  key = fold(key, batch);
  key = fold(key, subgraph);
  key = fold(key, view);
  return key;
}

/// Replays draw_view_masks: one bernoulli per node (local order), then one per
/// induced edge (canonical order). Returns {node_flags, edge_flags}.
inline std::pair<std::vector<std::uint8_t>, std::vector<std::uint8_t>> mask_flags(
    std::uint64_t key, int num_nodes, int num_edges, double node_rate, double edge_rate) {
  std::vector<std::uint8_t> nodes(num_nodes);
  std::vector<std::uint8_t> edges(num_edges);
  std::uint64_t i = 0;
  for (int n = 0; n < num_nodes; ++n) nodes[n] = unit(key, i++) < node_rate ? 1 : 0;
  for (int e = 0; e < num_edges; ++e) edges[e] = unit(key, i++) < edge_rate ? 1 : 0;
  return {nodes, edges};
}

// ---------------------------------------------------------------------------
// Dense reference graphs.

struct Dense {
  int n = 0;
  std::vector<std::vector<int>> a;

  explicit Dense(int nodes) : n(nodes), a(nodes, std::vector<int>(nodes, 0)) {}

  void add_edge(int u, int v) {
    a[u][v] = 1;
    a[v][u] = 1;
  }
};

inline Dense dense_of(int num_nodes, const std::vector<std::pair<int, int>>& edges) {
  Dense d(num_nodes);
  for (auto [u, v] : edges) d.add_edge(u, v);
  return d;
}

/// Canonical induced edge order: local pairs (i, j), i < j, lexicographic.
inline std::vector<std::pair<int, int>> induced_edges(const Dense& d,
                                                      const std::vector<int>& ids) {
  std::vector<std::pair<int, int>> out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t j = i + 1; j < ids.size(); ++j) {
      if (d.a[ids[i]][ids[j]]) out.emplace_back(static_cast<int>(i), static_cast<int>(j));
    }
  }
  return out;
}

/// Brute-force drop semantics: zero rows+columns of dropped nodes, then both
/// entries of each dropped canonical edge.
inline Dense dense_drop(const Dense& induced, const std::vector<std::uint8_t>& node_flags,
                        const std::vector<std::uint8_t>& edge_flags) {
  Dense out = induced;
  const int m = induced.n;
  for (int i = 0; i < m; ++i) {
    if (!node_flags[i]) continue;
    for (int j = 0; j < m; ++j) {
      out.a[i][j] = 0;
      out.a[j][i] = 0;
    }
  }
  int e = 0;
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      if (!induced.a[i][j]) continue;
      if (edge_flags[e]) {
        out.a[i][j] = 0;
        out.a[j][i] = 0;
      }
      ++e;
    }
  }
  return out;
}

inline Dense dense_induced(const Dense& base, const std::vector<int>& ids) {
  Dense out(static_cast<int>(ids.size()));
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t j = 0; j < ids.size(); ++j) {
      out.a[static_cast<int>(i)][static_cast<int>(j)] = base.a[ids[i]][ids[j]];
    }
  }
  return out;
}

inline Dense dense_of_batch(const subaug::AugmentedBatch& batch) {
  Dense d(batch.total_nodes);
  for (int u = 0; u < batch.total_nodes; ++u) {
    for (int v : batch.node_neighbors(u)) d.a[u][v] = 1;
  }
  return d;
}

/// Per-view drop flags of a multi-view batch, indexed [subgraph][view-1].
using BatchNodeFlags = std::vector<std::vector<std::vector<std::uint8_t>>>;

/// Block-matrix construction of the assembled multi-view adjacency, built
/// from dense pieces and the replayed mask streams only. Clone blocks are
/// appended per subgraph, views 1..k, mirroring the documented layout.
inline Dense dense_multi_view(const Dense& base, const std::vector<std::vector<int>>& subs,
                              int k, double node_rate, double edge_rate, bool mask_cross,
                              std::uint64_t master, std::uint64_t epoch, std::uint64_t batch,
                              BatchNodeFlags* out_flags = nullptr) {
  int total = base.n;
  for (const auto& ids : subs) total += k * static_cast<int>(ids.size());
  Dense out(total);
  for (int i = 0; i < base.n; ++i) out.a[i] = base.a[i];
  for (int i = 0; i < base.n; ++i) out.a[i].resize(total, 0);
  for (int i = base.n; i < total; ++i) out.a[i].assign(total, 0);

  if (out_flags) out_flags->assign(subs.size(), {});
  int next = base.n;
  for (std::size_t s = 0; s < subs.size(); ++s) {
    const auto& ids = subs[s];
    const int m = static_cast<int>(ids.size());
    const Dense induced = dense_induced(base, ids);
    const int num_edges = static_cast<int>(induced_edges(base, ids).size());
    for (int v = 1; v <= k; ++v) {
      const std::uint64_t key = mask_key(master, epoch, batch, s, static_cast<std::uint64_t>(v));
      const auto [node_flags, edge_flags] = mask_flags(key, m, num_edges, node_rate, edge_rate);
      if (out_flags) (*out_flags)[s].push_back(node_flags);
      const Dense dropped = dense_drop(induced, node_flags, edge_flags);
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) out.a[next + i][next + j] = dropped.a[i][j];
      }
      for (int i = 0; i < m; ++i) {
        if (mask_cross && node_flags[i]) continue;
        for (int c = 0; c < base.n; ++c) {
          if (base.a[ids[i]][c]) {
            out.a[next + i][c] = 1;
            out.a[c][next + i] = 1;
          }
        }
      }
      next += m;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Brute-force micro-F1.

struct Counts {
  long long tp = 0;
  long long fp = 0;
  long long fn = 0;
};

inline Counts brute_counts(const std::vector<subaug::Label>& preds,
                           const std::vector<subaug::Label>& truth, int num_classes,
                           bool multiclass) {
  Counts c;
  for (std::size_t s = 0; s < preds.size(); ++s) {
    if (multiclass) {
      if (preds[s][0] == truth[s][0]) {
        ++c.tp;
      } else {
        ++c.fp;
        ++c.fn;
      }
      continue;
    }
    std::set<int> p(preds[s].begin(), preds[s].end());
    std::set<int> t(truth[s].begin(), truth[s].end());
    for (int k = 0; k < num_classes; ++k) {
      const bool in_p = p.count(k) > 0;
      const bool in_t = t.count(k) > 0;
      if (in_p && in_t) ++c.tp;
      if (in_p && !in_t) ++c.fp;
      if (!in_p && in_t) ++c.fn;
    }
  }
  return c;
}

inline double brute_micro_f1(const Counts& c) {
  const long long denom = 2 * c.tp + c.fp + c.fn;
  if (denom == 0) return 1.0;
  return 2.0 * static_cast<double>(c.tp) / static_cast<double>(denom);
}

// ---------------------------------------------------------------------------
// Random test-case generation (std::mt19937_64, independent of the library's
// streams).

inline std::vector<std::pair<int, int>> random_edges(std::mt19937_64& gen, int n,
                                                     double edge_prob) {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<std::pair<int, int>> edges;
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      if (coin(gen) < edge_prob) edges.emplace_back(u, v);
    }
  }
  return edges;
}

inline std::vector<int> random_subset(std::mt19937_64& gen, int n, int size) {
  std::vector<int> ids(n);
  for (int i = 0; i < n; ++i) ids[i] = i;
  for (int i = 0; i < size; ++i) {
    std::uniform_int_distribution<int> pick(i, n - 1);
    std::swap(ids[i], ids[pick(gen)]);
  }
  ids.resize(size);
  std::sort(ids.begin(), ids.end());
  return ids;
}

// ---------------------------------------------------------------------------
// Process / filesystem helpers for CLI tests.

struct TempDir {
  std::filesystem::path path;

  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "subaug_test_XXXXXX").string();
    std::vector<char> buf(tmpl.begin(), tmpl.end());
    buf.push_back('\0');
    if (!mkdtemp(buf.data())) throw std::runtime_error("mkdtemp failed");
    path = buf.data();
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string str() const { return path.string(); }
  std::string sub(const std::string& name) const { return (path / name).string(); }
};

struct CliResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr combined
};

inline std::string cli_binary() { return SUBAUG_CLI_PATH; }

inline CliResult run_cli(const std::string& args) {
  const std::string cmd = cli_binary() + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) throw std::runtime_error("popen failed: " + cmd);
  CliResult result;
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) result.output.append(buf, got);
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

inline int count_lines(const std::string& text) {
  int lines = 0;
  for (char c : text) {
    if (c == '\n') ++lines;
  }
  return lines;
}

}  // namespace testref
