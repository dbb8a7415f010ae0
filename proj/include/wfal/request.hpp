#pragma once

#include <string>
#include <vector>

#include "wfal/graph.hpp"

namespace wfal {

enum class RequestOrigin { burn_in, random, score_guided };

const char* to_string(RequestOrigin origin);

// What the learner asks the data-generating backend for: how many executions
// of which workflow, which anomaly to inject at what magnitude, and which jobs
// to aim it at.
struct ExperimentRequest {
  std::string workflow_name;
  int executions = 1;
  AnomalyClass anomaly;
  std::vector<std::string> job_hints;
  RequestOrigin origin = RequestOrigin::burn_in;

  void validate() const;
};

}  // namespace wfal
