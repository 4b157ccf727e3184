#include "onnx_runtime.hpp"

#include <dlfcn.h>

#include <cstdlib>
#include <numeric>

#include "semfilter/error.hpp"

namespace semfilter::ort {

// The C API is a struct of function pointers whose layout only ever grows, so
// entries are addressed by their fixed slot number.
namespace slot {
constexpr int GetErrorMessage = 2;
constexpr int CreateEnv = 3;
constexpr int CreateSession = 7;
constexpr int Run = 9;
constexpr int CreateSessionOptions = 10;
constexpr int CreateTensorWithDataAsOrtValue = 49;
constexpr int GetTensorMutableData = 51;
constexpr int GetTensorElementType = 60;
constexpr int GetDimensionsCount = 61;
constexpr int GetDimensions = 62;
constexpr int GetTensorTypeAndShape = 65;
constexpr int CreateCpuMemoryInfo = 69;
constexpr int ReleaseEnv = 92;
constexpr int ReleaseStatus = 93;
constexpr int ReleaseMemoryInfo = 94;
constexpr int ReleaseSession = 95;
constexpr int ReleaseValue = 96;
constexpr int ReleaseTensorTypeAndShapeInfo = 99;
constexpr int ReleaseSessionOptions = 100;
}  // namespace slot

constexpr std::uint32_t kApiVersion = 16;
constexpr int kLoggingWarning = 2;
constexpr int kArenaAllocator = 1;
constexpr int kMemTypeDefault = 0;
constexpr int kFloat = 1;
constexpr int kInt64 = 7;

using Status = void*;

struct Api {
  void* const* table;

  template <typename Fn>
  Fn get(int index) const {
    return reinterpret_cast<Fn>(table[index]);
  }

  void check(Status status, const char* what) const {
    if (status == nullptr) return;
    const std::string msg = get<const char* (*)(const void*)>(slot::GetErrorMessage)(status);
    get<void (*)(void*)>(slot::ReleaseStatus)(status);
    throw BackendError(std::string("onnxruntime ") + what + ": " + msg);
  }

  void release(int index, void* p) const {
    if (p != nullptr) get<void (*)(void*)>(index)(p);
  }
};

namespace {

struct ApiBase {
  const void* (*GetApi)(std::uint32_t version);
  const char* (*GetVersionString)();
};

std::vector<std::string> candidates(const std::optional<std::filesystem::path>& library) {
  std::vector<std::string> out;
  if (library) out.push_back(library->string());
  if (const char* env = std::getenv("SEMFILTER_ORT_LIB"); env != nullptr && *env != '\0') out.emplace_back(env);
#ifdef SEMFILTER_DEFAULT_ORT_LIB
  out.emplace_back(SEMFILTER_DEFAULT_ORT_LIB);
#endif
  out.emplace_back("libonnxruntime.so");
  out.emplace_back("libonnxruntime.so.1");
  return out;
}

}  // namespace

std::shared_ptr<Runtime> Runtime::open(const std::optional<std::filesystem::path>& library) {
  std::shared_ptr<Runtime> rt(new Runtime());
  std::string tried;
  for (const auto& path : candidates(library)) {
    rt->handle_ = dlopen(path.c_str(), RTLD_NOW | RTLD_LOCAL);
    if (rt->handle_ != nullptr) {
      rt->path_ = path;
      break;
    }
    tried += "\n  " + path + ": " + dlerror();
    // An explicitly requested library must not be silently replaced.
    if (library) break;
  }
  if (rt->handle_ == nullptr) throw BackendError("cannot load ONNX Runtime; tried:" + tried);

  using GetApiBaseFn = const ApiBase* (*)();
  auto get_base = reinterpret_cast<GetApiBaseFn>(dlsym(rt->handle_, "OrtGetApiBase"));
  if (get_base == nullptr) throw BackendError(rt->path_ + " does not export OrtGetApiBase");
  const ApiBase* base = get_base();
  const void* table = base->GetApi(kApiVersion);
  if (table == nullptr) {
    throw BackendError(std::string("ONNX Runtime ") + base->GetVersionString() + " does not provide API version " +
                       std::to_string(kApiVersion));
  }
  rt->api_ = new Api{static_cast<void* const*>(table)};
  const Api& api = *rt->api_;
  api.check(api.get<Status (*)(int, const char*, void**)>(slot::CreateEnv)(kLoggingWarning, "semfilter", &rt->env_),
            "CreateEnv");
  return rt;
}

Runtime::~Runtime() {
  if (api_ != nullptr) api_->release(slot::ReleaseEnv, env_);
  delete api_;
  // The library stays mapped: ONNX Runtime registers process-wide state that
  // does not survive being unloaded.
}

Session::Session(std::shared_ptr<Runtime> runtime, const std::filesystem::path& model)
    : runtime_(std::move(runtime)) {
  const Api& api = runtime_->api();
  void* options = nullptr;
  api.check(api.get<Status (*)(void**)>(slot::CreateSessionOptions)(&options), "CreateSessionOptions");
  const std::string path = model.string();
  Status st = api.get<Status (*)(const void*, const char*, const void*, void**)>(slot::CreateSession)(
      runtime_->env(), path.c_str(), options, &session_);
  api.release(slot::ReleaseSessionOptions, options);
  api.check(st, ("loading " + path).c_str());
  st = api.get<Status (*)(int, int, void**)>(slot::CreateCpuMemoryInfo)(kArenaAllocator, kMemTypeDefault,
                                                                         &memory_info_);
  if (st != nullptr) {
    api.release(slot::ReleaseSession, session_);
    api.check(st, "CreateCpuMemoryInfo");
  }
}

Session::~Session() {
  const Api& api = runtime_->api();
  api.release(slot::ReleaseMemoryInfo, memory_info_);
  api.release(slot::ReleaseSession, session_);
}

Tensor Session::run(const std::string& input, const std::string& output, const float* data,
                    const std::vector<std::int64_t>& shape) const {
  const auto n = std::accumulate(shape.begin(), shape.end(), std::int64_t{1}, std::multiplies<>());
  return run_raw(input, output, const_cast<float*>(data), static_cast<std::size_t>(n) * sizeof(float), kFloat, shape);
}

Tensor Session::run(const std::string& input, const std::string& output, const std::int64_t* data,
                    const std::vector<std::int64_t>& shape) const {
  const auto n = std::accumulate(shape.begin(), shape.end(), std::int64_t{1}, std::multiplies<>());
  return run_raw(input, output, const_cast<std::int64_t*>(data), static_cast<std::size_t>(n) * sizeof(std::int64_t),
                 kInt64, shape);
}

Tensor Session::run_raw(const std::string& input, const std::string& output, void* data, std::size_t bytes, int type,
                        const std::vector<std::int64_t>& shape) const {
  const Api& api = runtime_->api();
  void* in_value = nullptr;
  api.check(api.get<Status (*)(const void*, void*, std::size_t, const std::int64_t*, std::size_t, int, void**)>(
                slot::CreateTensorWithDataAsOrtValue)(memory_info_, data, bytes, shape.data(), shape.size(), type,
                                                      &in_value),
            "CreateTensorWithDataAsOrtValue");
  auto release_value = [&](void* v) { api.release(slot::ReleaseValue, v); };

  const char* in_names[] = {input.c_str()};
  const char* out_names[] = {output.c_str()};
  void* out_value = nullptr;
  Status st = api.get<Status (*)(void*, const void*, const char* const*, const void* const*, std::size_t,
                                 const char* const*, std::size_t, void**)>(slot::Run)(
      session_, nullptr, in_names, &in_value, 1, out_names, 1, &out_value);
  release_value(in_value);
  api.check(st, "Run");

  Tensor result;
  void* info = nullptr;
  try {
    api.check(api.get<Status (*)(const void*, void**)>(slot::GetTensorTypeAndShape)(out_value, &info),
              "GetTensorTypeAndShape");
    int elem_type = 0;
    api.check(api.get<Status (*)(const void*, int*)>(slot::GetTensorElementType)(info, &elem_type),
              "GetTensorElementType");
    if (elem_type != kFloat) throw BackendError("output '" + output + "' is not a float tensor");
    std::size_t rank = 0;
    api.check(api.get<Status (*)(const void*, std::size_t*)>(slot::GetDimensionsCount)(info, &rank),
              "GetDimensionsCount");
    result.shape.resize(rank);
    api.check(api.get<Status (*)(const void*, std::int64_t*, std::size_t)>(slot::GetDimensions)(
                  info, result.shape.data(), rank),
              "GetDimensions");
    const auto n = std::accumulate(result.shape.begin(), result.shape.end(), std::int64_t{1}, std::multiplies<>());
    void* raw = nullptr;
    api.check(api.get<Status (*)(void*, void**)>(slot::GetTensorMutableData)(out_value, &raw),
              "GetTensorMutableData");
    const float* values = static_cast<const float*>(raw);
    result.values.assign(values, values + n);
  } catch (...) {
    api.release(slot::ReleaseTensorTypeAndShapeInfo, info);
    release_value(out_value);
    throw;
  }
  api.release(slot::ReleaseTensorTypeAndShapeInfo, info);
  release_value(out_value);
  return result;
}

}  // namespace semfilter::ort
