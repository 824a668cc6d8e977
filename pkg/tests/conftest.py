import struct

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def wav_bytes(ints, channels=1, rate=44100, bits=16, fmt_code=1, extra_chunks=(),
              data_size=None, block_align=None):
    """Hand-assembled RIFF/WAVE bytes, independent of the package writer."""
    pcm = np.asarray(ints, dtype="<i2").tobytes()
    if block_align is None:
        block_align = channels * bits // 8
    fmt = struct.pack("<HHIIHH", fmt_code, channels, rate, rate * block_align,
                      block_align, bits)
    body = b"WAVE" + b"fmt " + struct.pack("<I", len(fmt)) + fmt
    for cid, payload in extra_chunks:
        body += cid + struct.pack("<I", len(payload)) + payload
        if len(payload) & 1:
            body += b"\x00"
    size = len(pcm) if data_size is None else data_size
    body += b"data" + struct.pack("<I", size) + pcm
    return b"RIFF" + struct.pack("<I", len(body)) + body


@pytest.fixture
def write_raw_wav(tmp_path):
    def _write(name, ints, **kw):
        p = tmp_path / name
        p.write_bytes(wav_bytes(ints, **kw))
        return p
    return _write
