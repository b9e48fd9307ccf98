"""Framewise transientness/tonality analysis of audio."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from . import measures, transforms, wavio
from .measures import DimensionReport

DEFAULT_FRAME = 1024
SILENCE_ENERGY = 1e-10

CSV_HEADER = ("time_s", "i_tr", "i_ton", "d_psi", "d_w", "degenerate")


@dataclass(frozen=True)
class AudioBuffer:
    """Mono samples in [-1, 1] with their sample rate."""

    samples: np.ndarray
    sample_rate: float

    def __post_init__(self):
        x = np.asarray(self.samples, dtype=float)
        if x.ndim != 1:
            raise ValueError("AudioBuffer holds mono samples; average channels first")
        if not np.all(np.isfinite(x)):
            raise ValueError("audio contains NaN or infinite samples")
        if not self.sample_rate > 0:
            raise ValueError(f"sample rate must be positive, got {self.sample_rate!r}")
        object.__setattr__(self, "samples", x)

    def __len__(self):
        return self.samples.shape[0]

    @property
    def duration(self):
        return len(self) / self.sample_rate


@dataclass(frozen=True)
class FrameEntry:
    start_time: float
    report: DimensionReport
    partial: bool = False


@dataclass
class IndexTimeline:
    frame_length: int
    hop: int
    sample_rate: float
    entries: list = field(default_factory=list)

    def __len__(self):
        return len(self.entries)

    def times(self):
        return np.array([e.start_time for e in self.entries])

    def column(self, name):
        return np.array([getattr(e.report, name) for e in self.entries])


def load_audio(path):
    """Read a PCM/float WAV file and collapse it to mono by channel mean."""
    samples, rate = wavio.read_wav(path)
    return AudioBuffer(samples.mean(axis=1), rate)


def frame_starts(n_samples, frame_length, hop):
    """Start offsets of full frames, plus the partial-frame start or None."""
    n_full = (n_samples - frame_length) // hop + 1
    starts = [i * hop for i in range(n_full)]
    nxt = n_full * hop
    partial = nxt if (n_full - 1) * hop + frame_length < n_samples and nxt < n_samples else None
    return starts, partial


def analyze(buffer, frame_length=DEFAULT_FRAME, hop=None, psi_plan=None, w_plan=None, floor=None):
    """Index timeline over rectangular frames of ``buffer``.

    Frames are non-overlapping unless ``hop`` is given. A trailing remainder
    becomes a zero-padded frame flagged ``partial``. Frames with energy
    under ``SILENCE_ENERGY`` are degenerate. ``floor=None`` uses a floor
    relative to each frame's energy, so the indices do not depend on gain.
    """
    hop = frame_length if hop is None else hop
    if hop < 1:
        raise ValueError("hop must be >= 1")
    psi_plan = transforms.wavelet_plan(frame_length) if psi_plan is None else psi_plan
    w_plan = transforms.cosine_plan(frame_length) if w_plan is None else w_plan
    if psi_plan.length != frame_length or w_plan.length != frame_length:
        raise ValueError("plan length must equal the frame length")
    x = buffer.samples
    if frame_length > len(x):
        raise ValueError(f"frame length {frame_length} exceeds buffer length {len(x)}")
    starts, partial = frame_starts(len(x), frame_length, hop)
    jobs = [(s, False) for s in starts]
    if partial is not None:
        jobs.append((partial, True))
    entries = []
    for start, is_partial in jobs:
        frame = x[start:start + frame_length]
        if is_partial:
            frame = np.concatenate((frame, np.zeros(frame_length - frame.shape[0])))
        report = measures.indices_from_signal(
            frame, psi_plan, w_plan, floor=floor, energy_threshold=SILENCE_ENERGY
        )
        entries.append(FrameEntry(start / buffer.sample_rate, report, is_partial))
    return IndexTimeline(frame_length, hop, buffer.sample_rate, entries)


def export_csv(timeline, path, metadata=None):
    """Write one CSV row per frame; ``metadata`` items become ``# key: value`` lines."""
    try:
        with open(path, "w", newline="") as fh:
            for key, value in (metadata or {}).items():
                fh.write(f"# {key}: {value}\n")
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            for e in timeline.entries:
                r = e.report
                writer.writerow(
                    [f"{v:.9g}" for v in (e.start_time, r.i_tr_hat, r.i_ton_hat, r.d_psi, r.d_w)]
                    + [int(r.degenerate)]
                )
    except OSError as exc:
        raise OSError(f"cannot write timeline CSV to {path}: {exc.strerror or exc}") from exc


def read_csv(path):
    """Parse a timeline CSV back into a list of row dicts (comments skipped)."""
    with open(path, newline="") as fh:
        rows = [line for line in fh if not line.startswith("#")]
    reader = csv.DictReader(rows)
    out = []
    for row in reader:
        rec = {k: float(row[k]) for k in CSV_HEADER[:-1]}
        rec["degenerate"] = bool(int(row["degenerate"]))
        out.append(rec)
    return out


def castanet_like(
    duration=3.0,
    sample_rate=44100,
    impulse_period=0.5,
    first_impulse=0.25,
    partials=(440.0, 880.0),
    level_db=-20.0,
):
    """Unit impulses over a sustained harmonic tone ``level_db`` below them.

    Returns ``(AudioBuffer, impulse_sample_positions)``.
    """
    n = int(round(duration * sample_rate))
    t = np.arange(n) / sample_rate
    amp = 10.0 ** (level_db / 20.0)
    x = sum(amp * np.sin(2 * np.pi * f * t) for f in partials)
    positions = np.arange(int(round(first_impulse * sample_rate)), n, int(round(impulse_period * sample_rate)))
    x = np.asarray(x, dtype=float)
    x[positions] += 1.0
    x = x / max(1.0, np.max(np.abs(x)))
    return AudioBuffer(x, sample_rate), positions
