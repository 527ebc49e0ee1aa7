#include "boxdistill/service.hpp"

#include <httplib.h>

#include <chrono>
#include <cmath>
#include <cstring>
#include <vector>

#include <json.hpp>

#include "boxdistill/error.hpp"

namespace boxdistill {

namespace {

void append_u32(std::string& buf, std::uint32_t v) {
  char b[4];
  std::memcpy(b, &v, 4);
  buf.append(b, 4);
}

std::uint32_t take_u32(const char* p) {
  std::uint32_t v;
  std::memcpy(&v, p, 4);
  return v;
}

std::string encode_image(const ImageTensor& image) {
  std::string body;
  body.reserve(12 + image.values.size() * 8);
  append_u32(body, static_cast<std::uint32_t>(image.height));
  append_u32(body, static_cast<std::uint32_t>(image.width));
  append_u32(body, static_cast<std::uint32_t>(image.channels));
  for (const double v : image.values) {
    char b[8];
    std::memcpy(b, &v, 8);
    body.append(b, 8);
  }
  return body;
}

std::string encode_map(const SoftLabelMap& map) {
  std::string body;
  body.reserve(12 + map.values.size() * 4);
  append_u32(body, static_cast<std::uint32_t>(map.height));
  append_u32(body, static_cast<std::uint32_t>(map.width));
  append_u32(body, static_cast<std::uint32_t>(map.classes));
  for (const double v : map.values) {
    const float f = static_cast<float>(v);
    char b[4];
    std::memcpy(b, &f, 4);
    body.append(b, 4);
  }
  return body;
}

constexpr std::uint32_t kMaxSide = 8192;

}  // namespace

namespace detail {

class ServerImpl {
public:
  explicit ServerImpl(const BlackBoxPredictor& predictor)
      : predictor_(predictor) {
    server_.Post("/predict", [this](const httplib::Request& req,
                                    httplib::Response& res) {
      handle_predict(req, res);
    });
    server_.Get("/health",
                [this](const httplib::Request&, httplib::Response& res) {
                  nlohmann::json j;
                  j["classes"] = predictor_.num_classes();
                  j["in_channels"] = predictor_.in_channels();
                  res.set_content(j.dump(), "application/json");
                });
  }

  httplib::Server& server() { return server_; }

private:
  void handle_predict(const httplib::Request& req, httplib::Response& res) {
    const std::string& body = req.body;
    if (body.size() < 12) {
      res.status = 400;
      res.set_content("payload too short", "text/plain");
      return;
    }
    const std::uint32_t h = take_u32(body.data());
    const std::uint32_t w = take_u32(body.data() + 4);
    const std::uint32_t c = take_u32(body.data() + 8);
    if (h == 0 || w == 0 || c == 0 || h > kMaxSide || w > kMaxSide ||
        c > 16) {
      res.status = 400;
      res.set_content("bad dimensions", "text/plain");
      return;
    }
    const std::size_t expected = static_cast<std::size_t>(h) * w * c;
    if (body.size() != 12 + expected * 8) {
      res.status = 400;
      res.set_content("payload size does not match dimensions", "text/plain");
      return;
    }
    if (static_cast<int>(c) != predictor_.in_channels()) {
      res.status = 400;
      res.set_content("wrong channel count", "text/plain");
      return;
    }
    ImageTensor image(static_cast<int>(h), static_cast<int>(w),
                      static_cast<int>(c));
    for (std::size_t i = 0; i < expected; ++i) {
      double v;
      std::memcpy(&v, body.data() + 12 + i * 8, 8);
      if (!std::isfinite(v)) {
        res.status = 400;
        res.set_content("non-finite image value", "text/plain");
        return;
      }
      image.values[i] = v;
    }
    image.clamp01();
    try {
      const SoftLabelMap map = predictor_.predict(image);
      res.set_content(encode_map(map), "application/octet-stream");
    } catch (const std::exception& e) {
      res.status = 400;
      res.set_content(std::string("prediction failed: ") + e.what(),
                      "text/plain");
    }
  }

  const BlackBoxPredictor& predictor_;
  httplib::Server server_;
};

}  // namespace detail

PredictorService::PredictorService(const BlackBoxPredictor& predictor,
                                   const std::string& host, int port)
    : impl_(std::make_unique<detail::ServerImpl>(predictor)) {
  auto& server = impl_->server();
  if (port == 0) {
    port_ = server.bind_to_any_port(host);
    if (port_ <= 0) throw TransportError("cannot bind to " + host);
  } else {
    if (!server.bind_to_port(host, port))
      throw TransportError("cannot bind to " + host + ":" +
                           std::to_string(port));
    port_ = port;
  }
  thread_ = std::thread([this] { impl_->server().listen_after_bind(); });
  server.wait_until_ready();
}

PredictorService::~PredictorService() {
  stop();
  if (thread_.joinable()) thread_.join();
}

void PredictorService::stop() { impl_->server().stop(); }

void PredictorService::wait() {
  if (thread_.joinable()) thread_.join();
}

namespace {

class RemotePredictor final : public BlackBoxPredictor {
public:
  RemotePredictor(std::string host, int port)
      : host_(std::move(host)), port_(port) {
    const auto health = request_with_retries([](httplib::Client& cli) {
      return cli.Get("/health");
    });
    nlohmann::json j = nlohmann::json::parse(health, nullptr, false);
    if (j.is_discarded() || !j.contains("classes") ||
        !j.contains("in_channels"))
      throw ProtocolError("remote predictor: malformed health response");
    classes_ = j["classes"].get<int>();
    in_channels_ = j["in_channels"].get<int>();
  }

  SoftLabelMap predict(const ImageTensor& image) const override {
    count_query();
    image.validate();
    const std::string body = encode_image(image);
    const std::string resp = request_with_retries([&](httplib::Client& cli) {
      return cli.Post("/predict", body, "application/octet-stream");
    });
    if (resp.size() < 12)
      throw ProtocolError("remote predictor: response too short");
    const std::uint32_t h = take_u32(resp.data());
    const std::uint32_t w = take_u32(resp.data() + 4);
    const std::uint32_t k = take_u32(resp.data() + 8);
    const std::size_t expected = static_cast<std::size_t>(h) * w * k;
    if (h == 0 || w == 0 || k == 0 || resp.size() != 12 + expected * 4)
      throw ProtocolError("remote predictor: malformed response payload");
    SoftLabelMap map(static_cast<int>(h), static_cast<int>(w),
                     static_cast<int>(k));
    for (std::size_t i = 0; i < expected; ++i) {
      float f;
      std::memcpy(&f, resp.data() + 12 + i * 4, 4);
      map.values[i] = f;
    }
    map.validate();
    return map;
  }

  int num_classes() const override { return classes_; }
  int in_channels() const override { return in_channels_; }
  std::string identity() const override {
    return "remote@" + host_ + ":" + std::to_string(port_);
  }

private:
  template <typename Fn>
  std::string request_with_retries(Fn&& fn) const {
    using namespace std::chrono_literals;
    auto delay = 100ms;
    for (int attempt = 1; attempt <= 3; ++attempt) {
      httplib::Client cli(host_, port_);
      cli.set_read_timeout(60, 0);
      httplib::Result result = fn(cli);
      if (result) {
        if (result->status == 200) return result->body;
        throw ProtocolError("remote predictor: service rejected request (" +
                            std::to_string(result->status) + "): " +
                            result->body);
      }
      if (attempt < 3) {
        std::this_thread::sleep_for(delay);
        delay *= 3;
      }
    }
    throw TransportError("remote predictor: cannot reach " + host_ + ":" +
                         std::to_string(port_) + " after 3 attempts");
  }

  std::string host_;
  int port_;
  int classes_ = 0;
  int in_channels_ = 0;
};

}  // namespace

std::unique_ptr<BlackBoxPredictor> remote_predictor(const std::string& host,
                                                    int port) {
  return std::make_unique<RemotePredictor>(host, port);
}

}  // namespace boxdistill
