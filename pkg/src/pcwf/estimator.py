"""Scikit-learn style front end for the enhancement pipeline.

fit(X, y) plays the encoder: X is the list of reconstructed frames, y the
aligned originals.  The fitted state is exactly the sidecar payload, so
transform(X) is the decoder replay and a freshly constructed estimator can
be rehydrated from payload bytes alone.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import bitstream, pipeline
from .cloud import PointCloud, ValidationError


def check_frame_list(frames, name: str = "X") -> list:
    """Validate a list-like of PointCloud frames."""
    frames = list(frames)
    if not frames:
        raise ValidationError(f"{name} must hold at least one frame")
    for i, frame in enumerate(frames):
        if not isinstance(frame, PointCloud):
            raise ValidationError(
                f"{name}[{i}] is {type(frame).__name__}, expected PointCloud"
            )
    return frames


def check_aligned(x_frames, y_frames) -> None:
    if len(x_frames) != len(y_frames):
        raise ValidationError(
            f"got {len(x_frames)} reconstructed frames but "
            f"{len(y_frames)} originals"
        )


class WienerEnhancer(BaseEstimator, TransformerMixin):
    """Attribute quality enhancer with a fit/transform surface.

    Parameters
    ----------
    mode : {"bwf", "ciwf", "vcwf"}
        Per-frame estimation, group coefficient inheritance, or inheritance
        plus five-way Luma variance classification.
    qp : int
        Quantization parameter of the codec run; sets the RD multiplier.
    gof_size : int
        Frames per group for the inheritance modes.
    """

    def __init__(self, mode: str = "vcwf", qp: int = 34, gof_size: int = 8):
        self.mode = mode
        self.qp = qp
        self.gof_size = gof_size

    def _check_params(self):
        if self.mode not in bitstream.MODES:
            raise ValidationError(
                f"mode must be one of {bitstream.MODES}, got '{self.mode}'"
            )
        if not 0 <= int(self.qp) <= 255:
            raise ValidationError("qp must be in [0, 255]")
        if int(self.gof_size) < 1:
            raise ValidationError("gof_size must be >= 1")

    def fit(self, X, y):
        """Estimate, gate, and record the enhancement payload.

        X: reconstructed frames; y: aligned original frames.
        """
        self._check_params()
        recons = check_frame_list(X, "X")
        originals = check_frame_list(y, "y")
        check_aligned(recons, originals)
        result = pipeline.enhance_sequence(
            originals, recons, qp=int(self.qp), mode=self.mode,
            gof_size=int(self.gof_size),
        )
        self.header_ = result.header
        self.payloads_ = result.payloads
        self.frames_ = result.frames
        self.decisions_ = result.decisions
        self.payload_bytes_ = bitstream.serialize(result.header, result.payloads)
        return self

    def transform(self, X):
        """Decoder replay of the fitted payload against reconstructed frames."""
        check_is_fitted(self, "payloads_")
        recons = check_frame_list(X, "X")
        return pipeline.decode_replay(recons, self.payloads_, self.header_)

    def fit_transform(self, X, y=None, **fit_params):
        if y is None:
            raise ValidationError("fit_transform needs the original frames as y")
        return self.fit(X, y).transform(X)

    def get_payload(self) -> bytes:
        check_is_fitted(self, "payload_bytes_")
        return self.payload_bytes_

    @classmethod
    def from_payload(cls, data: bytes) -> "WienerEnhancer":
        """Rehydrate a decoder-side enhancer from serialized payload bytes."""
        header, payloads = bitstream.parse(data)
        est = cls(mode=header.mode, qp=header.qp, gof_size=header.gof_size)
        est.header_ = header
        est.payloads_ = payloads
        est.payload_bytes_ = bytes(data)
        return est

    def enhancement_bits(self) -> np.ndarray:
        """Pre-padding payload bits per frame, the R term fed to the gate."""
        check_is_fitted(self, "payloads_")
        return np.array(
            [bitstream.payload_bit_count(p) for p in self.payloads_],
            dtype=np.int64,
        )
