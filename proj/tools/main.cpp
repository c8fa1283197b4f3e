#include "cli.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

int main(int argc, char** argv) {
  auto logger = spdlog::stderr_color_mt("debias-kit");
  logger->set_pattern("%^[%l]%$ %v");
  spdlog::set_default_logger(logger);
  return debiaskit::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
