#include "scalemap/cluster/client.hpp"

namespace scalemap::cluster {

JobResult submit(const net::Endpoint& master, const BenchmarkParams& params,
                 std::span<const Stage> stages, std::chrono::milliseconds timeout) {
  net::ignore_sigpipe();
  net::Socket socket = net::Socket::connect(master, timeout);
  SubmitRequest req{params, std::vector<Stage>(stages.begin(), stages.end())};
  net::write_message(socket, encode(req));
  socket.set_recv_timeout(timeout);
  auto reply = net::read_message(socket);
  if (!reply) fail(ErrorCode::JobFailure, "master closed the connection without a result");
  if (reply->tag == net::Tag::Error) {
    const ErrorReport e = decode_error(*reply);
    fail(e.code, e.message);
  }
  return decode_job_result(*reply);
}

}  // namespace scalemap::cluster
