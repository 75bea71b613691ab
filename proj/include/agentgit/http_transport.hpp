#pragma once

#include <map>
#include <memory>
#include <string>

namespace agentgit {

struct HttpResponseData {
  int status = 0;
  std::string body;
};

// Thin seam over the HTTP client so tests can substitute canned or
// network-refusing transports.
class HttpTransport {
 public:
  virtual ~HttpTransport() = default;

  virtual HttpResponseData post_json(const std::string& base_url, const std::string& path,
                                     const std::string& body,
                                     const std::map<std::string, std::string>& headers,
                                     int timeout_ms) = 0;

  virtual HttpResponseData get(const std::string& base_url, const std::string& path,
                               int timeout_ms) = 0;
};

// cpp-httplib backed transport; throws TransportError on connection
// failures and timeouts.
std::shared_ptr<HttpTransport> make_httplib_transport();

}  // namespace agentgit
