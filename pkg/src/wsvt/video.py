"""Frame sequences: grayscale I/O (PGM P2/P5, 8-bit PNG), bilinear
resizing, and the frame-stack <-> matrix vectorization used by the
solvers (column j of the matrix is the column-major vectorization of
frame j)."""

import os
from dataclasses import dataclass, field

import numpy as np
from PIL import Image

FRAME_EXTENSIONS = (".pgm", ".png")


@dataclass(frozen=True)
class FrameSequence:
    """Ordered grayscale frames with optional aligned truth masks.

    frames: (n, height, width) float64 in [0, 255];
    masks: (n, height, width) bool or None; meta: source description.
    """

    frames: np.ndarray
    masks: np.ndarray | None = None
    meta: str = ""

    def __post_init__(self):
        frames = np.asarray(self.frames, dtype=np.float64)
        if frames.ndim != 3 or frames.size == 0:
            raise ValueError("frames must be a nonempty (n, h, w) stack")
        object.__setattr__(self, "frames", frames)
        if self.masks is not None:
            masks = np.asarray(self.masks, dtype=bool)
            if masks.shape != frames.shape:
                raise ValueError(
                    f"masks shape {masks.shape} does not match frames {frames.shape}"
                )
            object.__setattr__(self, "masks", masks)

    @property
    def n_frames(self):
        return self.frames.shape[0]

    @property
    def height(self):
        return self.frames.shape[1]

    @property
    def width(self):
        return self.frames.shape[2]


def read_pgm(path):
    """Read an 8-bit PGM file (plain P2 or binary P5) as a float frame."""
    with open(path, "rb") as fh:
        data = fh.read()

    tokens = []
    pos = 0
    while len(tokens) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ValueError(f"{path}: truncated PGM header")
        tokens.append(data[start:pos])
    magic = tokens[0]
    try:
        width, height, maxval = (int(t) for t in tokens[1:4])
    except ValueError as exc:
        raise ValueError(f"{path}: malformed PGM header") from exc
    if magic not in (b"P2", b"P5"):
        raise ValueError(f"{path}: unsupported magic {magic!r}")
    if not (0 < maxval <= 255):
        raise ValueError(f"{path}: only 8-bit PGM supported (maxval={maxval})")

    if magic == b"P5":
        pos += 1  # single whitespace byte after maxval
        raster = np.frombuffer(data, dtype=np.uint8, count=width * height, offset=pos)
    else:
        values = data[pos:].split()
        if len(values) < width * height:
            raise ValueError(f"{path}: truncated P2 raster")
        raster = np.array([int(v) for v in values[: width * height]], dtype=np.uint8)
    return raster.reshape(height, width).astype(np.float64)


def write_pgm(path, frame, binary=True):
    """Write a frame as 8-bit PGM (P5 by default, P2 if binary=False)."""
    arr = np.clip(np.rint(np.asarray(frame, dtype=np.float64)), 0, 255).astype(np.uint8)
    if arr.ndim != 2:
        raise ValueError("frame must be 2-D")
    h, w = arr.shape
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as fh:
        if binary:
            fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
            fh.write(arr.tobytes())
        else:
            fh.write(f"P2\n{w} {h}\n255\n".encode("ascii"))
            for row in arr:
                fh.write((" ".join(str(int(v)) for v in row) + "\n").encode("ascii"))
    os.replace(tmp, path)


def _read_frame(path):
    if str(path).lower().endswith(".pgm"):
        return read_pgm(path)
    with Image.open(path) as img:
        return np.asarray(img.convert("L"), dtype=np.float64)


def load_sequence(path, mask_path=None, invert_masks=False):
    """Load a directory of grayscale frames, lexicographically ordered.

    Args:
        path: directory of .pgm (P2/P5) or 8-bit .png files.
        mask_path: optional directory of aligned truth masks (nonzero
            pixels mark foreground; invert_masks flips that convention).

    Raises:
        FileNotFoundError: missing directory or no frames in it.
        ValueError: mixed frame dimensions or mask misalignment.
    """
    names = sorted(
        f for f in os.listdir(path) if f.lower().endswith(FRAME_EXTENSIONS)
    )
    if not names:
        raise FileNotFoundError(f"no frames (.pgm/.png) found in {path}")
    frames = [_read_frame(os.path.join(path, f)) for f in names]
    shape = frames[0].shape
    for name, f in zip(names, frames):
        if f.shape != shape:
            raise ValueError(f"{name}: dimensions {f.shape} differ from {shape}")
    stack = np.clip(np.stack(frames), 0.0, 255.0)

    masks = None
    if mask_path is not None:
        mask_names = sorted(
            f for f in os.listdir(mask_path) if f.lower().endswith(FRAME_EXTENSIONS)
        )
        if len(mask_names) != len(names):
            raise ValueError(
                f"mask count {len(mask_names)} does not match frame count {len(names)}"
            )
        mask_frames = [_read_frame(os.path.join(mask_path, f)) for f in mask_names]
        for name, m in zip(mask_names, mask_frames):
            if m.shape != shape:
                raise ValueError(f"mask {name}: dimensions {m.shape} differ from {shape}")
        masks = np.stack(mask_frames) != 0
        if invert_masks:
            masks = ~masks
    return FrameSequence(frames=stack, masks=masks, meta=str(path))


def save_sequence(path, seq, prefix="frame", binary=True):
    """Write seq.frames (and masks, if any) as numbered PGM files."""
    os.makedirs(path, exist_ok=True)
    for i in range(seq.n_frames):
        write_pgm(os.path.join(path, f"{prefix}_{i:04d}.pgm"), seq.frames[i], binary=binary)
    if seq.masks is not None:
        mask_dir = os.path.join(path, "masks")
        os.makedirs(mask_dir, exist_ok=True)
        for i in range(seq.n_frames):
            write_pgm(
                os.path.join(mask_dir, f"{prefix}_{i:04d}.pgm"),
                seq.masks[i] * 255.0,
                binary=binary,
            )


def _resample_axis(stack, new_size, axis):
    """Separable bilinear resampling along one spatial axis."""
    old_size = stack.shape[axis]
    if new_size == old_size:
        return stack
    coords = (np.arange(new_size) + 0.5) * (old_size / new_size) - 0.5
    coords = np.clip(coords, 0.0, old_size - 1.0)
    lo = np.floor(coords).astype(np.int64)
    hi = np.minimum(lo + 1, old_size - 1)
    frac = coords - lo
    shape = [1, 1, 1]
    shape[axis] = new_size
    frac = frac.reshape(shape)
    return np.take(stack, lo, axis=axis) * (1.0 - frac) + np.take(stack, hi, axis=axis) * frac


def resize(seq, height, width):
    """Bilinear resize of every frame (and mask) to height x width.

    Deterministic; an identity resize returns bit-equal frames. Masks
    are interpolated then re-binarized at 0.5.
    """
    if height < 1 or width < 1:
        raise ValueError(f"target size must be >= 1x1, got {height}x{width}")
    frames = _resample_axis(_resample_axis(seq.frames, height, 1), width, 2)
    masks = None
    if seq.masks is not None:
        m = seq.masks.astype(np.float64)
        masks = _resample_axis(_resample_axis(m, height, 1), width, 2) >= 0.5
    return FrameSequence(frames=frames, masks=masks, meta=seq.meta)


def to_matrix(seq):
    """Stack frames as matrix columns (column-major vectorization).

    A h x w frame becomes a column of length h*w; entry order is
    column-by-column, so frame [[1, 2], [3, 4]] maps to (1, 3, 2, 4).
    """
    n, h, w = seq.frames.shape
    return seq.frames.transpose(0, 2, 1).reshape(n, h * w).T.copy()


def from_matrix(M, height, width, meta=""):
    """Inverse of to_matrix: columns back into (n, height, width) frames."""
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != height * width:
        raise ValueError(f"matrix of shape {M.shape} does not hold {height}x{width} frames")
    frames = M.T.reshape(M.shape[1], width, height).transpose(0, 2, 1)
    return FrameSequence(frames=frames.copy(), meta=meta)
