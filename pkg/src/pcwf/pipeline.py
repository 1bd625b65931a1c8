"""Frame and group-of-frames enhancement orchestration, plus decoder replay.

Three modes share one machinery:

    bwf   every frame estimates, gates, and transmits its own coefficients
    ciwf  only the first frame of each group estimates and transmits; later
          frames reuse the buffered sets, paying one flag bit per component
    vcwf  chroma as ciwf; luma splits into five variance classes with one
          coefficient set per class, classified afresh on every frame

Both codec sides filter with the dequantized (wire) coefficients, gather
neighbors from the reconstructed frame, and share every rounding rule, so a
decoder replay is bit-identical to the encoder's filtered output.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import classify, rdo, wiener
from .bitstream import (
    COEFF_SET_BITS,
    FLAT_SETS,
    VCWF_SETS,
    FramePayload,
    PayloadError,
    StreamHeader,
    dequantize_taps,
    frame_carries_coeffs,
    quantize_taps,
)
from .cloud import PointCloud, check_same_geometry, sort_by_morton
from .neighbors import build_index, gather_neighbors

# Filtered branch side-information per the RD gate: one flag bit, plus the
# serialized record when the frame transmits coefficients.
ESTIMATED_SET_BITS = COEFF_SET_BITS + 1
INHERITED_SET_BITS = 1

_CHROMA_OF = {"c2": 1, "c3": 2}


@dataclass(frozen=True)
class GofCoefficientBuffer:
    """Dequantized coefficient sets transmitted by a group's first frame."""

    sets: dict
    origin_frame: int


@dataclass(frozen=True)
class FrameResult:
    cloud: PointCloud
    payload: FramePayload
    decisions: dict  # set id -> RdDecision, only for sets that were gated


@dataclass(frozen=True)
class SequenceResult:
    header: StreamHeader
    frames: list
    payloads: list
    decisions: list  # one dict per frame
    buffers: list    # one GofCoefficientBuffer per group


def _prepare(original: PointCloud, reconstructed: PointCloud):
    orig = sort_by_morton(original)
    recon = sort_by_morton(reconstructed)
    check_same_geometry(orig, recon)
    matrix = gather_neighbors(recon, build_index(recon))
    return orig, recon, matrix


def _gate_estimated(rows, target, recon_values, lam):
    """Estimate, quantize, filter, and gate one coefficient set."""
    solved = wiener.solve(wiener.accumulate(rows, target))
    raw, _ = quantize_taps(solved.taps)
    taps = dequantize_taps(raw)
    rounded, _ = wiener.apply(rows, wiener.FilterCoefficients(taps))
    d_unf = wiener.sse(target, recon_values)
    d_fil = wiener.sse(target, rounded.astype(np.float64))
    decision = rdo.decide(d_unf, d_fil, ESTIMATED_SET_BITS, lam)
    return decision, raw, taps, rounded


def _gate_inherited(rows, target, recon_values, taps, lam):
    """Filter with buffered taps and gate on distortion plus the flag bit."""
    rounded, _ = wiener.apply(rows, wiener.FilterCoefficients(taps))
    d_unf = wiener.sse(target, recon_values)
    d_fil = wiener.sse(target, rounded.astype(np.float64))
    decision = rdo.decide(d_unf, d_fil, INHERITED_SET_BITS, lam)
    return decision, rounded


def _encode_flat_estimated(orig, recon, matrix, qp, mode):
    lam = rdo.lagrange_multiplier(qp)
    out = np.array(recon.colors, copy=True)
    flags, coeffs, decisions, transmitted = [], [], {}, {}
    for ci, set_id in enumerate(FLAT_SETS):
        rows = matrix.values[ci]
        target = orig.colors[:, ci].astype(np.float64)
        recon_values = recon.colors[:, ci].astype(np.float64)
        decision, raw, taps, rounded = _gate_estimated(
            rows, target, recon_values, lam
        )
        decisions[set_id] = decision
        flags.append(decision.flag)
        coeffs.append(raw if decision.flag else None)
        if decision.flag:
            out[:, ci] = rounded
            transmitted[set_id] = taps
    payload = FramePayload(mode=mode, flags=tuple(flags), coeffs=tuple(coeffs))
    return recon.with_colors(out), payload, decisions, transmitted


def _encode_flat_inherited(orig, recon, matrix, qp, buffer):
    lam = rdo.lagrange_multiplier(qp)
    out = np.array(recon.colors, copy=True)
    flags, decisions = [], {}
    for ci, set_id in enumerate(FLAT_SETS):
        taps = buffer.sets.get(set_id)
        if taps is None:
            # Never transmitted on the group's first frame: filtering is
            # barred because the decoder has nothing to apply.
            flags.append(False)
            continue
        rows = matrix.values[ci]
        target = orig.colors[:, ci].astype(np.float64)
        recon_values = recon.colors[:, ci].astype(np.float64)
        decision, rounded = _gate_inherited(rows, target, recon_values, taps, lam)
        decisions[set_id] = decision
        flags.append(decision.flag)
        if decision.flag:
            out[:, ci] = rounded
    payload = FramePayload(mode="ciwf", flags=tuple(flags), coeffs=(None,) * 3)
    return recon.with_colors(out), payload, decisions


def _encode_vcwf_frame(orig, recon, matrix, qp, buffer):
    """One vcwf frame; estimates when buffer is None, else inherits."""
    lam = rdo.lagrange_multiplier(qp)
    estimated = buffer is None
    out = np.array(recon.colors, copy=True)
    flags, coeffs, decisions, transmitted = [], [], {}, {}
    classes = classify.classify_rows(matrix.values[0])
    luma_target = orig.colors[:, 0].astype(np.float64)
    luma_recon = recon.colors[:, 0].astype(np.float64)
    for j in range(1, 6):
        set_id = f"cat{j}"
        members = classes == j
        if estimated:
            if not members.any():
                flags.append(False)
                coeffs.append(None)
                continue
            decision, raw, taps, rounded = _gate_estimated(
                matrix.values[0][members],
                luma_target[members],
                luma_recon[members],
                lam,
            )
            decisions[set_id] = decision
            flags.append(decision.flag)
            coeffs.append(raw if decision.flag else None)
            if decision.flag:
                out[members, 0] = rounded
                transmitted[set_id] = taps
        else:
            taps = buffer.sets.get(set_id)
            if taps is None or not members.any():
                flags.append(False)
                coeffs.append(None)
                continue
            decision, rounded = _gate_inherited(
                matrix.values[0][members],
                luma_target[members],
                luma_recon[members],
                taps,
                lam,
            )
            decisions[set_id] = decision
            flags.append(decision.flag)
            coeffs.append(None)
            if decision.flag:
                out[members, 0] = rounded
    for set_id, ci in _CHROMA_OF.items():
        rows = matrix.values[ci]
        target = orig.colors[:, ci].astype(np.float64)
        recon_values = recon.colors[:, ci].astype(np.float64)
        if estimated:
            decision, raw, taps, rounded = _gate_estimated(
                rows, target, recon_values, lam
            )
            decisions[set_id] = decision
            flags.append(decision.flag)
            coeffs.append(raw if decision.flag else None)
            if decision.flag:
                out[:, ci] = rounded
                transmitted[set_id] = taps
        else:
            taps = buffer.sets.get(set_id)
            if taps is None:
                flags.append(False)
                coeffs.append(None)
                continue
            decision, rounded = _gate_inherited(
                rows, target, recon_values, taps, lam
            )
            decisions[set_id] = decision
            flags.append(decision.flag)
            coeffs.append(None)
            if decision.flag:
                out[:, ci] = rounded
    payload = FramePayload(mode="vcwf", flags=tuple(flags), coeffs=tuple(coeffs))
    return recon.with_colors(out), payload, decisions, transmitted


def enhance_frame_bwf(original: PointCloud, reconstructed: PointCloud,
                      qp: int) -> FrameResult:
    """Estimate, gate, and filter one frame independently of any group."""
    orig, recon, matrix = _prepare(original, reconstructed)
    cloud, payload, decisions, _ = _encode_flat_estimated(
        orig, recon, matrix, qp, "bwf"
    )
    return FrameResult(cloud=cloud, payload=payload, decisions=decisions)


def _enhance_gof(originals, recons, qp, mode, origin_frame):
    results = []
    buffer = None
    for i, (original, reconstructed) in enumerate(zip(originals, recons)):
        orig, recon, matrix = _prepare(original, reconstructed)
        if mode == "bwf":
            cloud, payload, decisions, _ = _encode_flat_estimated(
                orig, recon, matrix, qp, "bwf"
            )
        elif mode == "ciwf":
            if i == 0:
                cloud, payload, decisions, sets = _encode_flat_estimated(
                    orig, recon, matrix, qp, "ciwf"
                )
                buffer = GofCoefficientBuffer(sets=sets, origin_frame=origin_frame)
            else:
                cloud, payload, decisions = _encode_flat_inherited(
                    orig, recon, matrix, qp, buffer
                )
        elif mode == "vcwf":
            cloud, payload, decisions, sets = _encode_vcwf_frame(
                orig, recon, matrix, qp, buffer if i else None
            )
            if i == 0:
                buffer = GofCoefficientBuffer(sets=sets, origin_frame=origin_frame)
        else:
            raise ValueError(f"unknown mode '{mode}'")
        results.append(FrameResult(cloud=cloud, payload=payload,
                                   decisions=decisions))
    if buffer is None:
        buffer = GofCoefficientBuffer(sets={}, origin_frame=origin_frame)
    return results, buffer


def enhance_gof_ciwf(originals, recons, qp: int):
    """Treat the input frames as one group: estimate on the first frame,
    inherit on the rest."""
    return _enhance_gof(originals, recons, qp, "ciwf", origin_frame=0)


def enhance_gof_vcwf(originals, recons, qp: int):
    """As enhance_gof_ciwf but with per-class luma sets."""
    return _enhance_gof(originals, recons, qp, "vcwf", origin_frame=0)


def enhance_sequence(originals, recons, qp: int, mode: str,
                     gof_size: int = 8) -> SequenceResult:
    """Run the selected mode over a full sequence, group by group."""
    if len(originals) != len(recons):
        raise ValueError(
            f"{len(originals)} original frames vs {len(recons)} reconstructed"
        )
    header = StreamHeader(qp=qp, gof_size=gof_size, mode=mode)
    frames, payloads, decisions, buffers = [], [], [], []
    for start in range(0, len(originals), gof_size):
        stop = min(start + gof_size, len(originals))
        results, buffer = _enhance_gof(
            originals[start:stop], recons[start:stop], qp, mode,
            origin_frame=start,
        )
        buffers.append(buffer)
        for result in results:
            frames.append(result.cloud)
            payloads.append(result.payload)
            decisions.append(result.decisions)
    return SequenceResult(header=header, frames=frames, payloads=payloads,
                          decisions=decisions, buffers=buffers)


def _decode_frame(recon, payload, header, buffer, frame_index):
    recon = sort_by_morton(recon)
    matrix = gather_neighbors(recon, build_index(recon))
    carries = frame_carries_coeffs(header.mode, header.gof_size, frame_index)
    out = np.array(recon.colors, copy=True)
    if header.mode == "vcwf":
        classes = classify.classify_rows(matrix.values[0])
        for slot, set_id in enumerate(VCWF_SETS):
            if not payload.flags[slot]:
                continue
            taps = _resolve_taps(payload, slot, set_id, carries, buffer,
                                 frame_index)
            if carries:
                buffer.sets[set_id] = taps
            if set_id in _CHROMA_OF:
                ci = _CHROMA_OF[set_id]
                rounded, _ = wiener.apply(
                    matrix.values[ci], wiener.FilterCoefficients(taps)
                )
                out[:, ci] = rounded
            else:
                members = classes == int(set_id[3:])
                if members.any():
                    rounded, _ = wiener.apply(
                        matrix.values[0][members],
                        wiener.FilterCoefficients(taps),
                    )
                    out[members, 0] = rounded
    else:
        for ci, set_id in enumerate(FLAT_SETS):
            if not payload.flags[ci]:
                continue
            taps = _resolve_taps(payload, ci, set_id, carries, buffer,
                                 frame_index)
            if carries:
                buffer.sets[set_id] = taps
            rounded, _ = wiener.apply(
                matrix.values[ci], wiener.FilterCoefficients(taps)
            )
            out[:, ci] = rounded
    return recon.with_colors(out)


def _resolve_taps(payload, slot, set_id, carries, buffer, frame_index):
    if carries:
        raw = payload.coeffs[slot]
        if raw is None:
            raise PayloadError(
                f"flagged set '{set_id}' is missing its coefficient record",
                frame=frame_index,
            )
        return dequantize_taps(raw)
    taps = buffer.sets.get(set_id)
    if taps is None:
        raise PayloadError(
            f"flag references untransmitted coefficient set '{set_id}'",
            frame=frame_index,
        )
    return taps


def decode_replay(recons, payloads, header: StreamHeader) -> list:
    """Decoder-side filtering; bit-identical to the encoder's output."""
    if len(recons) != len(payloads):
        raise PayloadError(
            f"{len(payloads)} payload frames for {len(recons)} reconstructed"
        )
    out = []
    buffer = GofCoefficientBuffer(sets={}, origin_frame=0)
    for index, (recon, payload) in enumerate(zip(recons, payloads)):
        if payload.mode != header.mode:
            raise PayloadError("payload mode does not match header", frame=index)
        if frame_carries_coeffs(header.mode, header.gof_size, index):
            buffer = GofCoefficientBuffer(sets={}, origin_frame=index)
        out.append(_decode_frame(recon, payload, header, buffer, index))
    return out
