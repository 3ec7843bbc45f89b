#pragma once

#include <memory>

#include "facemt/gateway.hpp"

namespace facemt::detail {

std::unique_ptr<Classifier> make_line_classifier(const ClassifierEndpoint& endpoint);
std::unique_ptr<Classifier> make_http_classifier(const ClassifierEndpoint& endpoint);

}  // namespace facemt::detail
