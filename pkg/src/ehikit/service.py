"""Scoring as a wire protocol, so external training loops can fetch EHI rewards.

One JSON object per line in, one JSON object per line out, over stdio or TCP.
Requests: {"id": str, "method": "score" | "score_batch" | "extract" | "ping",
"params": {...}}. Responses echo the id and carry exactly one of result/error.
Scoring is stateless and identical to the library path; requests may supply
pre-extracted entity lists (entities_source / entities_summary) to bypass the
built-in extractor, e.g. when the caller runs its own NER.
"""

from __future__ import annotations

import json
import socketserver
import sys
import threading
from typing import IO

from . import __version__
from .entities import EntitySet, Gazetteer, extract_entities
from .metric import MetricConfig, report_from_sets
from .text import NormalizesToEmpty

DEFAULT_PORT = 7431
DEFAULT_MAX_BATCH = 1024

METHODS = ("score", "score_batch", "extract", "ping")


class _RpcError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code
        self.message = message


class RewardService:
    """Transport-independent request handler; all state is immutable after init."""

    def __init__(
        self,
        gazetteer: Gazetteer,
        config: MetricConfig = MetricConfig(),
        max_batch: int = DEFAULT_MAX_BATCH,
    ):
        self.gazetteer = gazetteer
        self.config = config
        self.max_batch = max_batch

    def handle_line(self, line: str) -> str:
        """Map one request line to one response line (never raises)."""
        return json.dumps(self.handle_request_line(line), separators=(",", ":"))

    def handle_request_line(self, line: str) -> dict:
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as e:
            return _error_response("", "parse_error", f"invalid JSON: {e.msg}")
        if not isinstance(obj, dict):
            return _error_response("", "parse_error", "request is not a JSON object")
        req_id = obj.get("id")
        if not isinstance(req_id, str) or not req_id:
            return _error_response("", "invalid_request", "missing or empty request id")
        method = obj.get("method")
        if method not in METHODS:
            return _error_response(req_id, "unknown_method", f"unknown method {method!r}")
        params = obj.get("params", {})
        if not isinstance(params, dict):
            return _error_response(req_id, "invalid_params", "params must be an object")
        try:
            result = self._dispatch(method, params)
        except _RpcError as e:
            return _error_response(req_id, e.code, e.message)
        except Exception as e:  # per-request failures must never kill the server
            return _error_response(req_id, "internal_error", f"{type(e).__name__}: {e}")
        return {"id": req_id, "ok": True, "result": result}

    def _dispatch(self, method: str, params: dict) -> dict:
        if method == "ping":
            return {"version": __version__}
        if method == "extract":
            return self._extract(params)
        if method == "score":
            return self._score(params)
        return self._score_batch(params)

    def _extract(self, params: dict) -> dict:
        text = params.get("text")
        if not isinstance(text, str):
            raise _RpcError("invalid_params", "extract requires a string 'text'")
        entity_set = extract_entities(text, self.gazetteer, self.config.heuristics_enabled)
        return {
            "mentions": [
                {
                    "surface": m.surface,
                    "key": m.key,
                    "etype": m.etype.value,
                    "token_span": list(m.token_span),
                }
                for m in entity_set.mentions
            ],
            "counts": entity_set.counts,
        }

    def _score(self, params: dict) -> dict:
        return self._score_one(params).to_dict()

    def _score_one(self, params: dict):
        e_src = self._side(params, "source", "entities_source")
        e_sum = self._side(params, "summary", "entities_summary")
        reference = params.get("reference")
        if reference is not None and not isinstance(reference, str):
            raise _RpcError("invalid_params", "'reference' must be a string")
        e_ref = (
            extract_entities(reference, self.gazetteer, self.config.heuristics_enabled)
            if reference is not None
            else None
        )
        return report_from_sets(e_src, e_sum, e_ref, self.config)

    def _side(self, params: dict, text_field: str, entities_field: str) -> EntitySet:
        """One side of the pair: pre-extracted entity list wins over raw text."""
        entities = params.get(entities_field)
        if entities is not None:
            if not isinstance(entities, list) or not all(isinstance(e, str) for e in entities):
                raise _RpcError("invalid_params", f"{entities_field!r} must be a list of strings")
            try:
                return EntitySet.from_surfaces(entities)
            except NormalizesToEmpty as e:
                raise _RpcError("invalid_params", str(e)) from None
        text = params.get(text_field)
        if not isinstance(text, str):
            raise _RpcError(
                "invalid_params", f"need {text_field!r} text or {entities_field!r} list"
            )
        return extract_entities(text, self.gazetteer, self.config.heuristics_enabled)

    def _score_batch(self, params: dict) -> dict:
        pairs = params.get("pairs")
        if not isinstance(pairs, list):
            raise _RpcError("invalid_params", "'pairs' must be a list")
        if len(pairs) > self.max_batch:
            raise _RpcError(
                "batch_too_large", f"batch of {len(pairs)} exceeds max {self.max_batch}"
            )
        reports = []
        for i, pair in enumerate(pairs):
            if not isinstance(pair, dict):
                raise _RpcError("invalid_params", f"pairs[{i}] is not an object")
            reports.append(self._score_one(pair).to_dict())
        return {"reports": reports}


def _error_response(req_id: str, code: str, message: str) -> dict:
    return {"id": req_id, "ok": False, "error": {"code": code, "message": message}}


def serve_stream(service: RewardService, reader: IO, writer: IO) -> None:
    """Serve newline-delimited requests from reader to writer until EOF."""
    for raw in reader:
        line = raw.decode("utf-8", errors="replace") if isinstance(raw, bytes) else raw
        line = line.rstrip("\n").rstrip("\r")
        writer.write(service.handle_line(line))
        writer.write("\n")
        writer.flush()


class _TcpHandler(socketserver.StreamRequestHandler):
    def handle(self):
        service: RewardService = self.server.reward_service  # type: ignore[attr-defined]
        for raw in self.rfile:
            line = raw.decode("utf-8", errors="replace").rstrip("\n").rstrip("\r")
            self.wfile.write(service.handle_line(line).encode("utf-8") + b"\n")
            self.wfile.flush()


class RewardServer(socketserver.ThreadingTCPServer):
    """TCP front end; connections run concurrently, each one strictly in order."""

    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, address: tuple[str, int], service: RewardService):
        super().__init__(address, _TcpHandler)
        self.reward_service = service


def start_tcp_server(service: RewardService, host: str, port: int) -> tuple[RewardServer, threading.Thread]:
    """Bind and serve in a background thread; returns (server, thread)."""
    server = RewardServer((host, port), service)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return server, thread


def parse_listen_address(address: str) -> tuple[str, int]:
    """'host:port', bare 'host' (default port), or bare port digits."""
    if ":" in address:
        host, _, port_s = address.rpartition(":")
        return host or "127.0.0.1", int(port_s)
    if address.isdigit():
        return "127.0.0.1", int(address)
    return address, DEFAULT_PORT


def serve(
    transport: str,
    gazetteer: Gazetteer,
    config: MetricConfig = MetricConfig(),
    max_batch: int = DEFAULT_MAX_BATCH,
    reader: IO | None = None,
    writer: IO | None = None,
) -> None:
    """Run the service until EOF (stdio) or interrupt (TCP).

    ``transport`` is "stdio" or a listen address. On interrupt the in-flight
    response is flushed before returning (every write already flushes).
    """
    service = RewardService(gazetteer, config, max_batch)
    if transport == "stdio":
        try:
            serve_stream(service, reader or sys.stdin, writer or sys.stdout)
        except KeyboardInterrupt:
            (writer or sys.stdout).flush()
        return
    host, port = parse_listen_address(transport)
    try:
        server = RewardServer((host, port), service)
    except OSError as e:
        raise OSError(f"cannot bind reward service to {host}:{port}: {e}") from e
    bound_host, bound_port = server.server_address[:2]
    print(f"reward service listening on {bound_host}:{bound_port}", file=sys.stderr, flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        # serve_forever has already returned here, so only close the socket;
        # shutdown() is for stopping the loop from another thread and would
        # deadlock in this one.
        server.server_close()
