// Copyright (c) 2026 The EdgeFlow Authors
// SPDX-License-Identifier: Apache-2.0

#include "edgeflow/edgeflow.h"

#include <cctype>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "config.hpp"
#include "error.hpp"
#include "latent_graph.hpp"
#include "metrics.hpp"
#include "session.hpp"

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& message) { g_last_error = message; }

ef_status status_of(const std::exception& e) {
  using namespace edgeflow;
  set_error(e.what());
  if (dynamic_cast<const NumericError*>(&e)) return EF_ERROR_NUMERIC;
  if (dynamic_cast<const IoError*>(&e)) return EF_ERROR_IO;
  if (dynamic_cast<const FormatError*>(&e)) return EF_ERROR_IO;
  if (dynamic_cast<const ConfigError*>(&e)) return EF_ERROR_CONFIG;
  if (dynamic_cast<const EnumerationError*>(&e)) return EF_ERROR_CONFIG;
  if (dynamic_cast<const Error*>(&e)) return EF_ERROR_INVALID;
  return EF_ERROR_INVALID;
}

template <typename Fn>
ef_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    return status_of(e);
  } catch (...) {
    set_error("unknown error");
    return EF_ERROR_INVALID;
  }
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw edgeflow::IoError("cannot open for writing: " + path);
  out << content;
}

std::vector<int> parse_edge_list(const char* text) {
  std::vector<int> edges;
  if (!text) return edges;
  std::string cur;
  const std::string s(text);
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == ',') {
      std::string piece;
      for (char c : cur)
        if (!std::isspace(static_cast<unsigned char>(c))) piece += c;
      if (!piece.empty()) {
        try {
          edges.push_back(std::stoi(piece));
        } catch (const std::exception&) {
          throw edgeflow::ConfigError("bad edge index in extra-edges list: " + piece);
        }
      }
      cur.clear();
    } else {
      cur += s[i];
    }
  }
  return edges;
}

}  // namespace

struct ef_session {
  std::unique_ptr<edgeflow::Session> impl;
};

extern "C" {

const char* ef_version(void) { return "1.0.0"; }

const char* ef_last_error(void) { return g_last_error.c_str(); }

uint64_t ef_edge_count(uint32_t num_nodes) {
  try {
    return static_cast<uint64_t>(edgeflow::edge_count(static_cast<int>(num_nodes)));
  } catch (const std::exception& e) {
    set_error(e.what());
    return 0;
  }
}

int64_t ef_step_budget(uint32_t num_nodes, double sparsity) {
  try {
    return static_cast<int64_t>(
        edgeflow::step_budget(static_cast<int>(num_nodes), sparsity));
  } catch (const std::exception& e) {
    set_error(e.what());
    return -1;
  }
}

ef_status ef_session_create(const char* config_path, const char* config_text,
                            int64_t seed_override, ef_session** out_session) {
  return guarded([&]() -> ef_status {
    if (!out_session || (config_path == nullptr) == (config_text == nullptr)) {
      set_error("exactly one of config_path/config_text and a session out-pointer required");
      return EF_ERROR_INVALID;
    }
    edgeflow::TrainConfig cfg = config_path
                                    ? edgeflow::TrainConfig::load(config_path)
                                    : edgeflow::TrainConfig::parse(config_text);
    if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
    auto session = edgeflow::Session::create(cfg);
    *out_session = new ef_session{std::move(session)};
    return EF_OK;
  });
}

ef_status ef_session_open(const char* checkpoint_path, ef_session** out_session) {
  return guarded([&]() -> ef_status {
    if (!out_session || !checkpoint_path) {
      set_error("checkpoint path and session out-pointer required");
      return EF_ERROR_INVALID;
    }
    auto session = edgeflow::Session::open(checkpoint_path);
    *out_session = new ef_session{std::move(session)};
    return EF_OK;
  });
}

void ef_session_close(ef_session* session) { delete session; }

ef_status ef_session_step(const ef_session* session, uint64_t* out_step) {
  if (!session || !out_step) {
    set_error("bad handle");
    return EF_ERROR_INVALID;
  }
  *out_step = session->impl->step();
  return EF_OK;
}

ef_status ef_session_train(ef_session* session, const char* out_dir,
                           uint64_t steps_override) {
  return guarded([&]() -> ef_status {
    if (!session) {
      set_error("bad handle");
      return EF_ERROR_INVALID;
    }
    session->impl->train(out_dir ? out_dir : "", steps_override);
    return EF_OK;
  });
}

ef_status ef_session_save(ef_session* session, const char* path) {
  return guarded([&]() -> ef_status {
    if (!session || !path) {
      set_error("bad handle or path");
      return EF_ERROR_INVALID;
    }
    session->impl->save(path);
    return EF_OK;
  });
}

ef_status ef_session_sample(ef_session* session, uint32_t m_override,
                            const char* extra_edges, uint64_t seed,
                            const char* out_csv_path) {
  return guarded([&]() -> ef_status {
    if (!session || !out_csv_path) {
      set_error("bad handle or output path");
      return EF_ERROR_INVALID;
    }
    const std::vector<int> extras = parse_edge_list(extra_edges);
    const auto rows =
        session->impl->sample(static_cast<int>(m_override), extras, seed);
    write_text(out_csv_path, edgeflow::Session::sample_rows_to_csv(rows));
    return EF_OK;
  });
}

ef_status ef_session_eval(ef_session* session, const char* suite, uint64_t seed,
                          uint32_t num_samples, const char* out_dir) {
  return guarded([&]() -> ef_status {
    if (!session || !suite) {
      set_error("bad handle or suite");
      return EF_ERROR_INVALID;
    }
    const edgeflow::EvalReport report =
        session->impl->eval(suite, seed, static_cast<int>(num_samples));
    if (out_dir && *out_dir) {
      std::filesystem::create_directories(out_dir);
      const std::string dir(out_dir);
      write_text(dir + "/metrics.csv", report.csv);
      write_text(dir + "/metrics.json", report.json);
      if (!report.samples_csv.empty())
        write_text(dir + "/generated.csv", report.samples_csv);
    }
    if (report.failed) {
      set_error("eval suite '" + std::string(suite) + "' failed its threshold");
      return EF_ERROR_ACCEPTANCE;
    }
    return EF_OK;
  });
}

ef_status ef_session_grad_check(ef_session* session, double eps,
                                double* out_max_rel_err) {
  return guarded([&]() -> ef_status {
    if (!session || !out_max_rel_err) {
      set_error("bad handle or out-pointer");
      return EF_ERROR_INVALID;
    }
    *out_max_rel_err = session->impl->grad_check_composite(eps);
    return EF_OK;
  });
}

ef_status ef_session_enumerate_check(ef_session* session, const char* out_json_path) {
  return guarded([&]() -> ef_status {
    if (!session) {
      set_error("bad handle");
      return EF_ERROR_INVALID;
    }
    const edgeflow::EnumerateReport r = session->impl->enumerate_check();
    std::string json = "{\n";
    json += "  \"terminal_sets\": " + std::to_string(r.terminal_sets) + ",\n";
    json += std::string("  \"bijection_ok\": ") + (r.bijection_ok ? "true" : "false") + ",\n";
    json += "  \"probability_sum\": " + edgeflow::format_double(r.probability_sum) + ",\n";
    json += "  \"min_probability\": " + edgeflow::format_double(r.min_probability) + ",\n";
    json += "  \"max_probability\": " + edgeflow::format_double(r.max_probability) + ",\n";
    json += "  \"reward_ratio\": " + edgeflow::format_double(r.reward_ratio) + "\n";
    json += "}\n";
    if (out_json_path && *out_json_path) write_text(out_json_path, json);
    return EF_OK;
  });
}

}  // extern "C"
