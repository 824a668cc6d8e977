"""16-bit PCM WAV ingestion, stereo downmix and book manifests.

Only canonical PCM (format code 1) at 16 bits per sample is accepted.
Unknown chunks such as LIST/INFO are skipped.
"""
from __future__ import annotations

import json
import struct
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (DuplicateTrack, EmptyBook, LengthMismatch, ManifestError,
                     MissingFile, NotRiffWave, ParseError, TruncatedData,
                     UnsupportedFormat)

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

PCM_SCALE = 32768.0
WAVE_FORMAT_PCM = 1


@dataclass(frozen=True, eq=False)
class TrackAudio:
    """A mono signal with amplitudes in [-1, 1]."""

    samples: np.ndarray
    sample_rate: int
    track_id: str = ""
    book_id: str = ""

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1 or samples.size == 0:
            raise ValueError("samples must be a non-empty 1-D sequence")
        if int(self.sample_rate) <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        if not np.all(np.abs(samples) <= 1.0):
            raise ValueError("samples must lie in [-1, 1]")
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    @property
    def n_samples(self) -> int:
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate


def downmix_stereo(left, right) -> np.ndarray:
    """Element-wise mean of two channels."""
    left = np.asarray(left, dtype=np.float64)
    right = np.asarray(right, dtype=np.float64)
    if left.shape != right.shape:
        raise LengthMismatch(f"channel lengths differ: {left.shape} vs {right.shape}")
    return (left + right) / 2.0


def _iter_chunks(data: bytes, path):
    pos = 12
    end = len(data)
    while pos + 8 <= end:
        chunk_id = data[pos:pos + 4]
        (size,) = struct.unpack_from("<I", data, pos + 4)
        body_start = pos + 8
        if body_start + size > end:
            raise TruncatedData(
                f"{path}: chunk {chunk_id!r} declares {size} bytes, "
                f"only {end - body_start} present")
        yield chunk_id, data[body_start:body_start + size]
        # chunks are word aligned
        pos = body_start + size + (size & 1)


def load_wav(path, track_id: str | None = None, book_id: str = "") -> TrackAudio:
    """Read a 16-bit PCM WAV file as a mono :class:`TrackAudio`.

    Integer samples are divided by 32768, so -32768 maps to exactly -1.0.
    Stereo files are averaged into one channel.
    """
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"no such file: {path}")
    raw = path.read_bytes()
    if len(raw) < 12 or raw[:4] != b"RIFF" or raw[8:12] != b"WAVE":
        raise NotRiffWave(f"{path}: not a RIFF/WAVE file")

    fmt = None
    pcm = None
    for chunk_id, body in _iter_chunks(raw, path):
        if chunk_id == b"fmt ":
            if len(body) < 16:
                raise NotRiffWave(f"{path}: fmt chunk too short")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
        elif chunk_id == b"data":
            pcm = body
            break
    if fmt is None or pcm is None:
        raise NotRiffWave(f"{path}: missing fmt or data chunk")

    audio_format, channels, rate, _byte_rate, block_align, bits = fmt
    if audio_format != WAVE_FORMAT_PCM:
        raise UnsupportedFormat(f"{path}: format code {audio_format:#06x} is not PCM")
    if bits != 16:
        raise UnsupportedFormat(f"{path}: {bits}-bit samples, need 16")
    if channels not in (1, 2):
        raise UnsupportedFormat(f"{path}: {channels} channels, need 1 or 2")
    if rate == 0:
        raise UnsupportedFormat(f"{path}: zero sample rate")
    if block_align != 2 * channels:
        raise UnsupportedFormat(f"{path}: block align {block_align} inconsistent")
    if len(pcm) % block_align:
        raise TruncatedData(f"{path}: data chunk ends mid-frame")
    if not pcm:
        raise TruncatedData(f"{path}: empty data chunk")

    ints = np.frombuffer(pcm, dtype="<i2").astype(np.float64)
    if channels == 2:
        frames = ints.reshape(-1, 2)
        samples = downmix_stereo(frames[:, 0], frames[:, 1]) / PCM_SCALE
    else:
        samples = ints / PCM_SCALE
    return TrackAudio(samples, rate,
                      track_id=track_id if track_id is not None else path.stem,
                      book_id=book_id)


def encode_pcm16(samples) -> np.ndarray:
    """Quantize amplitudes to little-endian int16, saturating at 32767."""
    scaled = np.rint(np.asarray(samples, dtype=np.float64) * PCM_SCALE)
    return np.clip(scaled, -32768, 32767).astype("<i2")


def write_wav(track: TrackAudio, path) -> None:
    """Write a canonical 44-byte-header mono 16-bit PCM WAV file."""
    pcm = encode_pcm16(track.samples).tobytes()
    rate = track.sample_rate
    header = b"RIFF" + struct.pack("<I", 36 + len(pcm)) + b"WAVE"
    header += b"fmt " + struct.pack("<IHHIIHH", 16, WAVE_FORMAT_PCM, 1,
                                    rate, rate * 2, 2, 16)
    header += b"data" + struct.pack("<I", len(pcm))
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(pcm)
        if len(pcm) & 1:
            fh.write(b"\x00")


@dataclass
class BookManifest:
    """Book ids mapped to ordered lists of track paths."""

    books: dict[str, list[Path]]
    path: Path | None = None
    synth: dict = field(default_factory=dict)

    @property
    def n_tracks(self) -> int:
        return sum(len(v) for v in self.books.values())


def load_manifest(path) -> BookManifest:
    """Parse a TOML manifest.

    Layout::

        [books]
        book1 = ["tracks/01.wav", "tracks/02.wav"]

        [synth]            # optional, consumed by ``specsig synth``
        family = "exponential"
        scale = 100.0

    Relative track paths are resolved against the manifest's directory.
    """
    path = Path(path)
    if not path.is_file():
        raise ManifestError(f"manifest not found: {path}")
    try:
        doc = tomllib.loads(path.read_text(encoding="utf-8"))
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from exc

    books_doc = doc.get("books")
    if not isinstance(books_doc, dict) or not books_doc:
        raise ParseError(f"{path}: missing or empty [books] table")
    base = path.parent
    books: dict[str, list[Path]] = {}
    for book_id, tracks in books_doc.items():
        if not isinstance(tracks, list) or not all(isinstance(t, str) for t in tracks):
            raise ParseError(f"{path}: book {book_id!r} must be an array of path strings")
        if not tracks:
            raise EmptyBook(f"{path}: book {book_id!r} has no tracks")
        resolved = [(base / t).resolve() for t in tracks]
        if len(set(resolved)) != len(resolved):
            raise DuplicateTrack(f"{path}: book {book_id!r} lists a track twice")
        books[book_id] = resolved

    synth = doc.get("synth", {})
    if not isinstance(synth, dict):
        raise ParseError(f"{path}: [synth] must be a table")
    return BookManifest(books=books, path=path, synth=synth)


def write_manifest(books: dict[str, list], path, synth: dict | None = None) -> None:
    """Write a manifest readable by :func:`load_manifest`.

    Paths are written relative to the manifest directory when possible.
    """
    path = Path(path)
    base = path.parent.resolve()

    def rel(p):
        p = Path(p).resolve()
        try:
            return p.relative_to(base).as_posix()
        except ValueError:
            return p.as_posix()

    def toml_value(v):
        if isinstance(v, bool):
            return "true" if v else "false"
        if isinstance(v, (int, float)):
            return repr(v)
        if isinstance(v, str):
            return _toml_str(v)
        if isinstance(v, (list, tuple)):
            return "[" + ", ".join(toml_value(x) for x in v) + "]"
        raise TypeError(f"cannot encode {v!r} as TOML")

    lines = ["[books]"]
    for book_id, tracks in books.items():
        lines.append(f"{_toml_str(book_id)} = {toml_value([rel(t) for t in tracks])}")
    if synth:
        lines += ["", "[synth]"]
        for key, value in synth.items():
            lines.append(f"{key} = {toml_value(value)}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _toml_str(s: str) -> str:
    # JSON string escapes are valid TOML basic strings
    return json.dumps(s, ensure_ascii=False)
