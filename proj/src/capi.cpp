#include "wfal.h"

#include <exception>
#include <new>
#include <optional>
#include <string>

#include "wfal/error.hpp"
#include "wfal/experiment.hpp"

struct wfal_session {
  std::optional<wfal::RunConfig> config;
  std::string error;
};

namespace {

wfal_status status_of(const wfal::Error& e) {
  switch (wfal::exit_category(e.code())) {
    case 2: return WFAL_ERR_CONFIG;
    case 4: return WFAL_ERR_EXHAUSTED;
    default: return WFAL_ERR_RUNTIME;
  }
}

template <typename Fn>
wfal_status guarded(wfal_session* session, Fn&& fn) {
  if (session == nullptr) return WFAL_ERR_CONFIG;
  if (!session->config) {
    session->error = "session has no valid configuration";
    return WFAL_ERR_CONFIG;
  }
  session->error.clear();
  try {
    fn(*session->config);
    return WFAL_OK;
  } catch (const wfal::Error& e) {
    session->error = e.what();
    return status_of(e);
  } catch (const std::exception& e) {
    session->error = e.what();
    return WFAL_ERR_RUNTIME;
  }
}

}  // namespace

extern "C" {

const char* wfal_version(void) { return "0.1.0"; }

wfal_status wfal_session_create(const char* config_json, wfal_session** out_session) {
  if (out_session == nullptr) return WFAL_ERR_CONFIG;
  *out_session = nullptr;
  auto* session = new (std::nothrow) wfal_session;
  if (session == nullptr) return WFAL_ERR_RUNTIME;
  *out_session = session;
  if (config_json == nullptr) {
    session->error = "config_json is null";
    return WFAL_ERR_CONFIG;
  }
  try {
    session->config = wfal::parse_run_config(config_json);
    return WFAL_OK;
  } catch (const wfal::Error& e) {
    session->error = e.what();
    return status_of(e);
  } catch (const std::exception& e) {
    session->error = e.what();
    return WFAL_ERR_CONFIG;
  }
}

void wfal_session_destroy(wfal_session* session) { delete session; }

const char* wfal_session_error(const wfal_session* session) {
  if (session == nullptr) return "null session";
  return session->error.c_str();
}

wfal_status wfal_run_simulate(wfal_session* session) {
  return guarded(session, [](const wfal::RunConfig& cfg) { wfal::cmd_simulate(cfg); });
}

wfal_status wfal_run_train(wfal_session* session) {
  return guarded(session, [](const wfal::RunConfig& cfg) { wfal::cmd_train(cfg); });
}

wfal_status wfal_run_report(wfal_session* session) {
  return guarded(session, [](const wfal::RunConfig& cfg) { wfal::cmd_report(cfg); });
}

wfal_status wfal_run_command(wfal_session* session) {
  return guarded(session, [](const wfal::RunConfig& cfg) {
    if (cfg.command == "simulate") {
      wfal::cmd_simulate(cfg);
    } else if (cfg.command == "train") {
      wfal::cmd_train(cfg);
    } else {
      wfal::cmd_report(cfg);
    }
  });
}

}  // extern "C"
