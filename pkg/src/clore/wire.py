"""Sidecar wire protocol for plugging in an external neural predictor.

All integers are little-endian u32.  A request frame is a 20-byte header
{magic 0x434C5052 "CLPR", version=1, height, width, n_planes=6} followed by
n_planes row-major float32 planes in the order R, G, B, positive clicks,
negative clicks, previous mask.  A response frame is {magic, version,
status, height, width} followed by one float32 plane when status == 0.
Frames travel length-prefixed (u32) over a local stream socket; one request
may be in flight per connection.
"""

from __future__ import annotations

import socket
import socketserver
import struct
import threading

import numpy as np

from .predictor import PredictorCapabilities, PredictorError, PredictorInput

MAGIC = 0x434C5052  # "CLPR"
VERSION = 1
N_PLANES = 6
_HEADER = struct.Struct("<5I")


class ProtocolError(PredictorError):
    """Malformed frame, bad magic/version, or truncated stream."""


class SidecarStatusError(PredictorError):
    """Sidecar answered with a nonzero status."""

    def __init__(self, status: int):
        super().__init__(f"sidecar returned status {status}")
        self.status = status


class PredictorTimeoutError(PredictorError):
    """No response within the configured deadline."""


def encode_request(inp: PredictorInput) -> bytes:
    """Serialize a 6-plane predictor input into one request frame."""
    inp.validate()
    h, w = inp.dims
    planes = [inp.image[:, :, 0], inp.image[:, :, 1], inp.image[:, :, 2],
              inp.clicks.positive, inp.clicks.negative,
              np.asarray(inp.prev_mask, np.float32)]
    header = _HEADER.pack(MAGIC, VERSION, h, w, N_PLANES)
    body = b"".join(np.ascontiguousarray(p, np.float32).tobytes() for p in planes)
    return header + body


def decode_request(frame: bytes) -> tuple[int, int, np.ndarray]:
    """Parse a request frame into (height, width, planes[6, h, w])."""
    if len(frame) < _HEADER.size:
        raise ProtocolError(f"request frame too short ({len(frame)} bytes)")
    magic, version, h, w, n_planes = _HEADER.unpack_from(frame)
    if magic != MAGIC:
        raise ProtocolError(f"bad magic 0x{magic:08X}")
    if version != VERSION:
        raise ProtocolError(f"unsupported version {version}")
    if n_planes != N_PLANES:
        raise ProtocolError(f"expected {N_PLANES} planes, got {n_planes}")
    expected = _HEADER.size + n_planes * h * w * 4
    if len(frame) != expected:
        raise ProtocolError(f"request frame is {len(frame)} bytes, expected {expected}")
    planes = np.frombuffer(frame, np.dtype("<f4"), offset=_HEADER.size)
    return h, w, planes.reshape(n_planes, h, w).copy()


def encode_response(prob: np.ndarray | None, status: int = 0,
                    dims: tuple[int, int] | None = None) -> bytes:
    if status == 0:
        if prob is None:
            raise ValueError("status 0 requires a probability plane")
        h, w = prob.shape
        return (_HEADER.pack(MAGIC, VERSION, 0, h, w)
                + np.ascontiguousarray(prob, np.float32).tobytes())
    h, w = dims if dims is not None else (0, 0)
    return _HEADER.pack(MAGIC, VERSION, status, h, w)


def decode_response(frame: bytes) -> np.ndarray:
    if len(frame) < _HEADER.size:
        raise ProtocolError(f"response frame too short ({len(frame)} bytes)")
    magic, version, status, h, w = _HEADER.unpack_from(frame)
    if magic != MAGIC:
        raise ProtocolError(f"bad magic 0x{magic:08X}")
    if version != VERSION:
        raise ProtocolError(f"unsupported version {version}")
    if status != 0:
        raise SidecarStatusError(status)
    expected = _HEADER.size + h * w * 4
    if len(frame) != expected:
        raise ProtocolError(f"response frame is {len(frame)} bytes, expected {expected}")
    plane = np.frombuffer(frame, np.dtype("<f4"), offset=_HEADER.size)
    return plane.reshape(h, w).copy()


def write_frame(sock: socket.socket, frame: bytes) -> None:
    sock.sendall(struct.pack("<I", len(frame)) + frame)


def _recv_exact(sock: socket.socket, n: int) -> bytes:
    chunks = []
    got = 0
    while got < n:
        chunk = sock.recv(n - got)
        if not chunk:
            raise ProtocolError(f"connection closed after {got}/{n} bytes")
        chunks.append(chunk)
        got += len(chunk)
    return b"".join(chunks)


def read_frame(sock: socket.socket, max_len: int = 1 << 30) -> bytes:
    (length,) = struct.unpack("<I", _recv_exact(sock, 4))
    if length > max_len:
        raise ProtocolError(f"frame length {length} exceeds limit")
    return _recv_exact(sock, length)


class ExternalPredictor:
    """Routes predictions to a sidecar process over the frame protocol.

    The protocol allows one in-flight request per connection, so predict is
    internally serialized; ``concurrent_safe = False`` additionally tells
    engines not to overlap calls.
    """

    def __init__(self, address: str, timeout: float = 10.0):
        host, _, port = address.rpartition(":")
        self.address = (host or "127.0.0.1", int(port))
        self.timeout = timeout
        self.capabilities = PredictorCapabilities(concurrent_safe=False)
        self._sock: socket.socket | None = None
        self._lock = threading.Lock()

    def _connect(self) -> socket.socket:
        if self._sock is None:
            try:
                self._sock = socket.create_connection(self.address, timeout=self.timeout)
            except OSError as e:
                raise PredictorError(f"cannot reach sidecar at {self.address}: {e}") from e
        return self._sock

    def close(self) -> None:
        if self._sock is not None:
            self._sock.close()
            self._sock = None

    def predict(self, inp: PredictorInput) -> np.ndarray:
        request = encode_request(inp)
        with self._lock:
            sock = self._connect()
            try:
                write_frame(sock, request)
                response = read_frame(sock)
            except socket.timeout as e:
                self.close()
                raise PredictorTimeoutError(f"no response within {self.timeout}s") from e
            except OSError as e:
                self.close()
                raise ProtocolError(f"transport failure: {e}") from e
            try:
                prob = decode_response(response)
            except PredictorError:
                self.close()
                raise
        if prob.shape != inp.dims:
            raise ProtocolError(f"sidecar answered {prob.shape} for input {inp.dims}")
        return np.clip(prob, 0.0, 1.0)


class _SidecarHandler(socketserver.BaseRequestHandler):
    def handle(self):
        while True:
            try:
                frame = read_frame(self.request)
            except (ProtocolError, OSError):
                return
            try:
                h, w, planes = decode_request(frame)
                prob = self.server.plane_fn(planes)  # type: ignore[attr-defined]
                reply = encode_response(prob.astype(np.float32))
            except Exception:
                reply = encode_response(None, status=1, dims=(0, 0))
            try:
                write_frame(self.request, reply)
            except OSError:
                return


class SidecarServer(socketserver.ThreadingTCPServer):
    """Minimal protocol server: maps the 6 request planes to one reply plane.

    ``plane_fn`` receives a (6, h, w) float32 array.  The default echoes the
    previous-mask plane back, which makes the server a loopback identity for
    protocol tests.
    """

    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, address=("127.0.0.1", 0), plane_fn=None):
        super().__init__(address, _SidecarHandler)
        self.plane_fn = plane_fn if plane_fn is not None else (lambda planes: planes[5])

    @property
    def port(self) -> int:
        return self.server_address[1]

    def start_background(self) -> threading.Thread:
        thread = threading.Thread(target=self.serve_forever, daemon=True)
        thread.start()
        return thread


def main(argv=None):
    """Run a standalone echo sidecar (handy for manual protocol testing)."""
    import argparse

    parser = argparse.ArgumentParser(description="loopback echo sidecar")
    parser.add_argument("--port", type=int, default=9911)
    args = parser.parse_args(argv)
    server = SidecarServer(("127.0.0.1", args.port))
    print(f"echo sidecar listening on 127.0.0.1:{server.port}")
    server.serve_forever()


if __name__ == "__main__":
    main()
