#include "agentgit/http_transport.hpp"

#include "agentgit/errors.hpp"
#include "httplib.h"

namespace agentgit {

namespace {

class HttplibTransport : public HttpTransport {
 public:
  HttpResponseData post_json(const std::string& base_url, const std::string& path,
                             const std::string& body,
                             const std::map<std::string, std::string>& headers,
                             int timeout_ms) override {
    httplib::Client client(base_url);
    configure(client, timeout_ms);
    httplib::Headers h(headers.begin(), headers.end());
    auto result = client.Post(path, h, body, "application/json");
    if (!result) {
      throw TransportError("POST " + base_url + path + " failed: " +
                           httplib::to_string(result.error()));
    }
    return {result->status, result->body};
  }

  HttpResponseData get(const std::string& base_url, const std::string& path,
                       int timeout_ms) override {
    httplib::Client client(base_url);
    configure(client, timeout_ms);
    auto result = client.Get(path);
    if (!result) {
      throw TransportError("GET " + base_url + path + " failed: " +
                           httplib::to_string(result.error()));
    }
    return {result->status, result->body};
  }

 private:
  static void configure(httplib::Client& client, int timeout_ms) {
    client.set_connection_timeout(0, timeout_ms * 1000);
    client.set_read_timeout(timeout_ms / 1000, (timeout_ms % 1000) * 1000);
    client.set_follow_location(true);
  }
};

}  // namespace

std::shared_ptr<HttpTransport> make_httplib_transport() {
  return std::make_shared<HttplibTransport>();
}

}  // namespace agentgit
