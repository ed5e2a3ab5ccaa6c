#pragma once

#include <string>

#include "deligan/gan.hpp"
#include "deligan/metrics.hpp"
#include "deligan/nets.hpp"

namespace deligan::ckpt {

// Versioned JSON checkpoints. Parameter buffers are written with
// shortest-round-trip formatting, so load(save(m)) reproduces every value
// exactly.
void save_gan(const gan::GanModel& m, const std::string& path);
gan::GanModel load_gan(const std::string& path);

void save_classifier(const metrics::Classifier& clf, const std::string& path);
metrics::Classifier load_classifier(const std::string& path);

} // namespace deligan::ckpt
