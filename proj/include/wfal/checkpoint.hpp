#pragma once

#include <memory>
#include <string>

#include "wfal/gcn.hpp"
#include "wfal/ssl.hpp"

namespace wfal {

// Shape-tagged JSON checkpoint, value-exact on round trip.
std::string checkpoint_to_json(const Model& model, std::uint64_t seed);
void save_checkpoint(const std::string& path, const Model& model, std::uint64_t seed);

// Rebuilds the model (gcn or ssl) recorded in the checkpoint. The model
// config is restored from the stored shapes and hyperparameters.
std::unique_ptr<Model> checkpoint_from_json(const std::string& text);
std::unique_ptr<Model> load_checkpoint(const std::string& path);

}  // namespace wfal
