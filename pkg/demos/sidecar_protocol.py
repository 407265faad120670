"""Round-trip the external-predictor wire protocol against a local sidecar.

Starts the echo sidecar (it answers every request with the previous-mask
plane), sends a 6-plane frame through the socket client, and shows the typed
failure surfaced when the sidecar reports an error status.
"""

import numpy as np

from clore.clicks import Click, encode_clicks
from clore.predictor import PredictorInput
from clore.wire import (ExternalPredictor, SidecarServer, SidecarStatusError,
                        encode_request)


def main():
    rng = np.random.default_rng(0)
    prev = rng.random((64, 64)) < 0.5
    inp = PredictorInput(rng.random((64, 64, 3)).astype(np.float32),
                         encode_clicks([Click(30, 30, True)], (64, 64), 4),
                         prev)
    frame = encode_request(inp)
    print(f"request frame: {len(frame)} bytes "
          f"(20-byte header + 6 x 64 x 64 float32 planes)")

    server = SidecarServer()
    server.start_background()
    print(f"echo sidecar on 127.0.0.1:{server.port}")
    predictor = ExternalPredictor(f"127.0.0.1:{server.port}")
    out = predictor.predict(inp)
    print(f"echo round-trip lossless: {np.array_equal(out, prev.astype(np.float32))}")
    predictor.close()
    server.shutdown()
    server.server_close()

    def refuse(planes):
        raise RuntimeError("model not loaded")

    failing = SidecarServer(plane_fn=refuse)
    failing.start_background()
    predictor = ExternalPredictor(f"127.0.0.1:{failing.port}")
    try:
        predictor.predict(inp)
    except SidecarStatusError as e:
        print(f"failing sidecar surfaced as typed error: {e}")
    predictor.close()
    failing.shutdown()
    failing.server_close()


if __name__ == "__main__":
    main()
