// SPDX-FileCopyrightText: (c) 2026 tilert contributors
// SPDX-License-Identifier: Apache-2.0

#include "tilert/service.hpp"

#include "tilert/bytes.hpp"

namespace tilert {

std::vector<uint8_t> encode_plan_payload(const std::vector<std::vector<uint8_t>>& rcbs,
                                         const ModelManifest& manifest) {
  ByteWriter w;
  w.u32(static_cast<uint32_t>(rcbs.size()));
  for (const auto& rcb : rcbs) {
    w.u32(static_cast<uint32_t>(rcb.size()));
    w.bytes(rcb);
  }
  const std::string json = manifest.to_json();
  w.u32(static_cast<uint32_t>(json.size()));
  w.bytes(reinterpret_cast<const uint8_t*>(json.data()), json.size());
  return w.take();
}

void decode_plan_payload(std::span<const uint8_t> payload,
                         std::vector<std::vector<uint8_t>>& rcbs_out,
                         ModelManifest& manifest_out) {
  ByteReader r(payload);
  const uint32_t count = r.u32();
  std::vector<std::vector<uint8_t>> rcbs;
  rcbs.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    const uint32_t len = r.u32();
    rcbs.push_back(r.bytes(len));
  }
  const uint32_t manifest_len = r.u32();
  const std::vector<uint8_t> json = r.bytes(manifest_len);
  if (r.remaining() != 0)
    throw FormatError(FormatError::Kind::Trailing, r.offset(),
                      "plan payload has trailing bytes");
  manifest_out = ModelManifest::from_json(std::string(json.begin(), json.end()));
  rcbs_out = std::move(rcbs);
}

Server::Server(const ServeOptions& opts) : opts_(opts), listener_(opts.port), session_(opts.sim) {}

Frame Server::handle_request(const Frame& request) {
  const auto nack = [this](NackCode code) {
    session_.note_error(static_cast<uint32_t>(code));
    return make_nack(code);
  };

  try {
    switch (request.type) {
      case MsgType::LoadImage:
        session_.load_image(request.payload);
        return make_ack();

      case MsgType::LoadPlan: {
        std::vector<std::vector<uint8_t>> rcbs;
        ModelManifest manifest;
        decode_plan_payload(request.payload, rcbs, manifest);
        session_.load_plan(rcbs, manifest);
        return make_ack();
      }

      case MsgType::Run: {
        std::vector<uint8_t> out = session_.run(request.payload);
        return Frame{MsgType::Result, 0, std::move(out)};
      }

      case MsgType::TelemetryReq:
        return Frame{MsgType::Telemetry, 0, encode_telemetry(session_.telemetry())};

      default:
        // Reply-only types are not requests.
        return nack(NackCode::BadRequest);
    }
  } catch (const ServiceError& e) {
    return nack(static_cast<NackCode>(e.code));
  } catch (const ExecError&) {
    return nack(NackCode::ExecFailed);
  } catch (const OutOfMemory&) {
    return nack(NackCode::Internal);
  } catch (const PipelineError&) {
    return nack(NackCode::Internal);
  } catch (const Error&) {
    // Everything else a request can trip — bad image/rcb bytes, manifest
    // JSON, plan inconsistencies, wrong RUN payload size — is the client's
    // fault.
    return nack(NackCode::BadRequest);
  }
}

void Server::handle_connection(TcpStream& stream) {
  for (;;) {
    Frame request;
    try {
      if (!read_frame(stream, request)) return;  // clean EOF
    } catch (const IntegrityError&) {
      // Whole frame consumed; the stream is still aligned. Reject and keep
      // serving.
      session_.note_error(static_cast<uint32_t>(NackCode::Integrity));
      try {
        write_frame(stream, make_nack(NackCode::Integrity));
      } catch (const TransportError&) {
        return;
      }
      continue;
    } catch (const FrameError& e) {
      if (e.kind == FrameError::Kind::Type) {
        // decode_frame consumed the exact frame before rejecting the type.
        session_.note_error(static_cast<uint32_t>(NackCode::BadRequest));
        try {
          write_frame(stream, make_nack(NackCode::BadRequest));
        } catch (const TransportError&) {
          return;
        }
        continue;
      }
      // Bad magic or an oversized length claim: framing is lost. Best-effort
      // NACK, then drop the connection.
      const NackCode code = e.kind == FrameError::Kind::TooLarge ? NackCode::TooLarge
                                                                 : NackCode::BadRequest;
      session_.note_error(static_cast<uint32_t>(code));
      try {
        write_frame(stream, make_nack(code));
      } catch (const TransportError&) {
      }
      return;
    } catch (const TransportError&) {
      return;  // peer hung up mid-frame
    }

    try {
      write_frame(stream, handle_request(request));
    } catch (const TransportError&) {
      return;
    }
  }
}

bool Server::serve_one(int timeout_ms) {
  std::optional<TcpStream> client = listener_.accept_client(timeout_ms);
  if (!client) return false;
  handle_connection(*client);
  return true;
}

size_t Server::serve() {
  size_t served = 0;
  while (!stop_.load())
    if (serve_one(opts_.accept_timeout_ms)) ++served;
  return served;
}

Client Client::connect(const std::string& host, uint16_t port) {
  return Client(TcpStream::connect(host, port));
}

Frame Client::roundtrip(const Frame& request) {
  write_frame(stream_, request);
  Frame reply;
  if (!read_frame(stream_, reply))
    throw TransportError("server closed the connection without a reply");
  return reply;
}

Frame Client::expect(MsgType type, const Frame& request) {
  Frame reply = roundtrip(request);
  if (reply.type == MsgType::Nack) {
    uint32_t code = 0;
    if (reply.payload.size() == 4) code = load_u32_le(reply.payload.data());
    throw ServiceError(code, std::string("server rejected ") + msg_type_name(request.type) +
                                 ": " + nack_name(static_cast<NackCode>(code)));
  }
  if (reply.type != type)
    throw ServiceError(0, std::string("expected ") + msg_type_name(type) + " reply, got " +
                              msg_type_name(reply.type));
  return reply;
}

void Client::load_image(std::span<const uint8_t> image) {
  expect(MsgType::Ack, Frame{MsgType::LoadImage, 0, {image.begin(), image.end()}});
}

void Client::load_plan(const std::vector<std::vector<uint8_t>>& rcbs,
                       const ModelManifest& manifest) {
  expect(MsgType::Ack, Frame{MsgType::LoadPlan, 0, encode_plan_payload(rcbs, manifest)});
}

void Client::load_model(const CompiledModel& model) {
  load_image(model.image);
  load_plan(model.rcbs, model.manifest);
}

std::vector<uint8_t> Client::run(std::span<const uint8_t> input) {
  Frame reply = expect(MsgType::Result, Frame{MsgType::Run, 0, {input.begin(), input.end()}});
  return std::move(reply.payload);
}

Telemetry Client::telemetry() {
  Frame reply = expect(MsgType::Telemetry, Frame{MsgType::TelemetryReq, 0, {}});
  return decode_telemetry(reply.payload);
}

}  // namespace tilert
