#pragma once

#include <memory>
#include <string>
#include <thread>

#include "boxdistill/blackbox.hpp"

namespace boxdistill {

// Wire protocol (little-endian, lengths implied by the HTTP body):
//   POST /predict   u32 h | u32 w | u32 c | float64[h*w*c]
//   200 response    u32 h | u32 w | u32 k | float32[h*w*k]
//   400 response    text diagnostic (malformed payload / wrong shape)
//   GET  /health    json {"classes": K, "in_channels": C}
// Images cross the wire losslessly, so a served predictor answers
// query-for-query like the in-process wrapper; probabilities come back as
// float32, which is exactly the pseudo-label cache precision. Local and
// remote caches are therefore byte-equal and per-probability differences
// stay within 1e-6.

namespace detail {
class ServerImpl;
}

/// Serves a predictor over HTTP until stopped. Requests are independent and
/// handled concurrently; the wrapped predictor is only touched through its
/// const query surface.
class PredictorService {
public:
  /// Binds immediately (port 0 picks a free port); serving starts on a
  /// background thread. Throws TransportError when the address is not
  /// bindable.
  PredictorService(const BlackBoxPredictor& predictor, const std::string& host,
                   int port);
  ~PredictorService();

  PredictorService(const PredictorService&) = delete;
  PredictorService& operator=(const PredictorService&) = delete;

  int port() const { return port_; }
  void stop();
  /// Blocks until stop() (for the serve CLI).
  void wait();

private:
  std::unique_ptr<detail::ServerImpl> impl_;
  std::thread thread_;
  int port_ = 0;
};

/// Client-side predictor handle. predict() retries connection failures
/// (3 attempts, exponential backoff) before raising TransportError;
/// malformed/rejected payloads raise ProtocolError without retry.
/// Safe for concurrent use.
std::unique_ptr<BlackBoxPredictor> remote_predictor(const std::string& host,
                                                    int port);

}  // namespace boxdistill
