#pragma once

// Minimal ONNX Runtime C API client resolved at run time with dlopen, so the
// library builds and runs without ONNX Runtime headers or a link-time dependency.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace semfilter::ort {

struct Api;

class Runtime {
public:
  /// Loads the shared library (explicit path, $SEMFILTER_ORT_LIB, the configured
  /// default, then the loader search path) and creates the process environment.
  static std::shared_ptr<Runtime> open(const std::optional<std::filesystem::path>& library = {});
  ~Runtime();

  Runtime(const Runtime&) = delete;
  Runtime& operator=(const Runtime&) = delete;

  const Api& api() const { return *api_; }
  void* env() const { return env_; }
  const std::string& library_path() const { return path_; }

private:
  Runtime() = default;
  void* handle_ = nullptr;
  const Api* api_ = nullptr;
  void* env_ = nullptr;
  std::string path_;
};

/// Row-major float output of a single-output run.
struct Tensor {
  std::vector<std::int64_t> shape;
  std::vector<float> values;
};

class Session {
public:
  Session(std::shared_ptr<Runtime> runtime, const std::filesystem::path& model);
  ~Session();

  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  Tensor run(const std::string& input, const std::string& output, const float* data,
             const std::vector<std::int64_t>& shape) const;
  Tensor run(const std::string& input, const std::string& output, const std::int64_t* data,
             const std::vector<std::int64_t>& shape) const;

private:
  Tensor run_raw(const std::string& input, const std::string& output, void* data, std::size_t bytes, int type,
                 const std::vector<std::int64_t>& shape) const;

  std::shared_ptr<Runtime> runtime_;
  void* session_ = nullptr;
  void* memory_info_ = nullptr;
};

}  // namespace semfilter::ort
