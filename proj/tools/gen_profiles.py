#!/usr/bin/env python3
"""Regenerate the synthetic profiling tables under data/profiles/.

Each profile follows a saturating latency curve: below the knee K(L) the batch
latency grows mildly (15% over the whole pre-knee range), past the knee every
doubling of the batch size nearly doubles latency (ratio 2/1.01), so throughput
gains collapse to ~1% per doubling. The knee latency is exactly 35 ms for every
length, and for audio the knee halves per 2.5 s bucket of sequence length.
"""
import math
import os

BATCHES = [2**i for i in range(9)]  # 1 .. 256
TAIL_US = 35000.0


def knee_for_length(length_s: float, base_knee: int = 32, width_s: float = 2.5) -> int:
    steps = max(0, math.ceil(length_s / width_s) - 1)
    return max(1, base_knee >> steps)


def latency_us(batch: int, knee: int) -> float:
    if batch <= knee:
        return TAIL_US * (0.85 + 0.15 * batch / knee)
    doublings = math.log2(batch / knee)
    return TAIL_US * (2.0 / 1.01) ** doublings


def write_profile(path: str, lengths_and_knees) -> None:
    with open(path, "w") as f:
        f.write("batch,length_s,latency_us\n")
        for b in BATCHES:
            for length, knee in lengths_and_knees:
                f.write(f"{b},{length:g},{latency_us(b, knee):.6f}\n")
    print(f"wrote {path}")


def main() -> None:
    root = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "data", "profiles")
    os.makedirs(root, exist_ok=True)
    write_profile(os.path.join(root, "vision_1g.csv"), [(1.0, 16)])
    audio_lengths = [0.5] + [2.5 * i for i in range(1, 9)]
    write_profile(os.path.join(root, "audio_1g.csv"),
                  [(length, knee_for_length(length)) for length in audio_lengths])


if __name__ == "__main__":
    main()
