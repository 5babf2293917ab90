"""Dataset ingestion, principal-component features, image serialization.

Pixels are always carried as float64 in [0, 1]; loaders normalize by the
declared or inferred pixel maximum (16 for the 8x8 digits corpus, 255 for
idx dumps).  The PCA here is deliberately small and explicit: mean-center,
covariance with divisor n-1, top-k eigenvectors with a deterministic sign
fix, then a min-max rescale of the training projections so downstream
angle embeddings always see [0, 1] features.
"""

from __future__ import annotations

import json
import math
import struct
import warnings
from dataclasses import dataclass

import numpy as np

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801
QGDS_MAGIC = b"QGDS"
QGDS_VERSION = 1


class BadMagicError(ValueError):
    """File does not start with the expected format magic."""


class TruncatedDataError(ValueError):
    """File ends before its declared payload does."""


class CountMismatchError(ValueError):
    """Paired files declare different record counts."""


@dataclass
class ImageDataset:
    """Labeled grayscale images, pixels flattened row-major into [0, 1]."""

    width: int
    height: int
    pixels: np.ndarray
    labels: np.ndarray

    def __post_init__(self) -> None:
        self.pixels = np.asarray(self.pixels, dtype=float)
        self.labels = np.asarray(self.labels, dtype=int)
        if self.width < 1 or self.height < 1:
            raise ValueError("image dimensions must be positive")
        if self.pixels.ndim != 2 or self.pixels.shape[1] != self.width * self.height:
            raise ValueError(
                f"expected pixels of shape (count, {self.width * self.height}), "
                f"got {self.pixels.shape}"
            )
        if self.labels.shape != (self.pixels.shape[0],):
            raise ValueError("need exactly one label per image")
        if self.pixels.size and (
            float(self.pixels.min()) < -1e-9 or float(self.pixels.max()) > 1.0 + 1e-9
        ):
            raise ValueError("pixels must lie in [0, 1]")

    def __len__(self) -> int:
        return self.pixels.shape[0]

    def image(self, i: int) -> np.ndarray:
        return self.pixels[i].reshape(self.height, self.width)


def _read_exact(fh, size: int, what: str) -> bytes:
    data = fh.read(size)
    if len(data) != size:
        raise TruncatedDataError(
            f"{what}: expected {size} bytes, file ended after {len(data)}"
        )
    return data


def load_idx(images_path, labels_path) -> ImageDataset:
    """Parse the big-endian idx image/label pair (u8 pixels, u8 labels)."""
    with open(images_path, "rb") as fh:
        magic, count, rows, cols = struct.unpack(">IIII", _read_exact(fh, 16, "idx image header"))
        if magic != IDX_IMAGES_MAGIC:
            raise BadMagicError(
                f"image file magic 0x{magic:08x}, expected 0x{IDX_IMAGES_MAGIC:08x}"
            )
        raw = _read_exact(fh, count * rows * cols, "idx image payload")
        pixels = np.frombuffer(raw, dtype=np.uint8).astype(float) / 255.0
    with open(labels_path, "rb") as fh:
        magic, label_count = struct.unpack(">II", _read_exact(fh, 8, "idx label header"))
        if magic != IDX_LABELS_MAGIC:
            raise BadMagicError(
                f"label file magic 0x{magic:08x}, expected 0x{IDX_LABELS_MAGIC:08x}"
            )
        labels = np.frombuffer(
            _read_exact(fh, label_count, "idx label payload"), dtype=np.uint8
        ).astype(int)
    if label_count != count:
        raise CountMismatchError(
            f"{count} images but {label_count} labels"
        )
    return ImageDataset(cols, rows, pixels.reshape(count, rows * cols), labels)


def load_csv(path) -> ImageDataset:
    """Parse "label,p0,p1,..." rows; "#" lines may declare key=value metadata.

    Recognized metadata keys: maxval, width, height.  Without them the pixel
    maximum is inferred (16 if no value exceeds 16, else 255) and the images
    are assumed square.
    """
    meta: dict[str, float] = {}
    rows: list[list[float]] = []
    width = None
    with open(path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                for token in line[1:].replace(",", " ").split():
                    if "=" in token:
                        key, value = token.split("=", 1)
                        meta[key.strip()] = float(value)
                continue
            parts = line.split(",")
            try:
                values = [float(x) for x in parts]
            except ValueError:
                raise ValueError(f"{path}: non-numeric cell on line {lineno}") from None
            if width is None:
                width = len(values)
            elif len(values) != width:
                raise ValueError(
                    f"{path}: ragged row on line {lineno} "
                    f"({len(values)} cells, expected {width})"
                )
            rows.append(values)
    if not rows or width is None or width < 2:
        raise ValueError(f"{path}: no usable label,pixels rows")
    table = np.asarray(rows, dtype=float)
    labels = table[:, 0].astype(int)
    pixels = table[:, 1:]
    n_pixels = pixels.shape[1]
    maxval = meta.get("maxval")
    if maxval is None:
        maxval = 16.0 if float(pixels.max(initial=0.0)) <= 16.0 else 255.0
    if float(pixels.max(initial=0.0)) > maxval + 1e-9:
        raise ValueError(
            f"{path}: pixel value {float(pixels.max())} exceeds maxval {maxval}"
        )
    if "width" in meta and "height" in meta:
        w, h = int(meta["width"]), int(meta["height"])
    else:
        side = int(round(math.sqrt(n_pixels)))
        if side * side != n_pixels:
            raise ValueError(
                f"{path}: {n_pixels} pixels per row is not square; declare "
                "width/height in a # header"
            )
        w = h = side
    if w * h != n_pixels:
        raise ValueError(f"{path}: declared {w}x{h} but rows carry {n_pixels} pixels")
    return ImageDataset(w, h, pixels / maxval, labels)


def filter_classes(dataset: ImageDataset, keep) -> ImageDataset:
    """Subset to the listed labels, preserving order; empty result is an error."""
    keep = set(int(k) for k in keep)
    mask = np.isin(dataset.labels, sorted(keep))
    if not bool(mask.any()):
        raise ValueError(f"no samples with labels {sorted(keep)}")
    return ImageDataset(
        dataset.width, dataset.height, dataset.pixels[mask], dataset.labels[mask]
    )


def downsample_half(dataset: ImageDataset) -> ImageDataset:
    """2x2 mean pooling; both dimensions must be even."""
    if dataset.width % 2 or dataset.height % 2:
        raise ValueError(
            f"cannot halve odd dimensions {dataset.width}x{dataset.height}"
        )
    h, w = dataset.height, dataset.width
    imgs = dataset.pixels.reshape(-1, h // 2, 2, w // 2, 2)
    pooled = imgs.mean(axis=(2, 4)).reshape(len(dataset), (h // 2) * (w // 2))
    return ImageDataset(w // 2, h // 2, pooled, dataset.labels.copy())


def class_average(dataset: ImageDataset, label: int) -> np.ndarray:
    """Mean pixel vector over one class."""
    mask = dataset.labels == int(label)
    if not bool(mask.any()):
        raise ValueError(f"no samples with label {label}")
    return dataset.pixels[mask].mean(axis=0)


# ---------------------------------------------------------------------------
# principal components
# ---------------------------------------------------------------------------


@dataclass
class PcaModel:
    """Frozen projection: mean, top-k components, and training feature range."""

    mean: np.ndarray
    components: np.ndarray
    explained_variance: np.ndarray
    feature_min: np.ndarray
    feature_max: np.ndarray

    def __post_init__(self) -> None:
        self.mean = np.asarray(self.mean, dtype=float)
        self.components = np.asarray(self.components, dtype=float)
        self.explained_variance = np.asarray(self.explained_variance, dtype=float)
        self.feature_min = np.asarray(self.feature_min, dtype=float)
        self.feature_max = np.asarray(self.feature_max, dtype=float)
        k, d = self.components.shape
        if self.mean.shape != (d,):
            raise ValueError("mean must match component dimension")
        for name in ("explained_variance", "feature_min", "feature_max"):
            if getattr(self, name).shape != (k,):
                raise ValueError(f"{name} must have one entry per component")

    @property
    def n_components(self) -> int:
        return self.components.shape[0]


def pca_fit(pixels: np.ndarray, k: int) -> PcaModel:
    """Top-k principal components of the rows of ``pixels``.

    Covariance uses divisor n-1; component signs are fixed by making each
    row's largest-magnitude entry positive; the training projections field
    the min-max range later used to squeeze features into [0, 1].
    """
    x = np.asarray(pixels, dtype=float)
    if x.ndim != 2:
        raise ValueError(f"expected a (count, dim) pixel array, got {x.shape}")
    n, d = x.shape
    if not 1 <= k <= d:
        raise ValueError(f"component count {k} out of range [1, {d}]")
    if n < 2:
        raise ValueError("PCA needs at least two samples")
    mean = x.mean(axis=0)
    centered = x - mean
    cov = centered.T @ centered / (n - 1)
    total_var = float(np.trace(cov))
    if total_var <= 1e-15:
        raise ValueError("degenerate data: zero variance (all images identical)")
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(evals)[::-1][:k]
    components = evecs[:, order].T.copy()
    variances = evals[order].copy()
    for row in components:
        if row[np.argmax(np.abs(row))] < 0.0:
            row *= -1.0
    proj = centered @ components.T
    return PcaModel(
        mean=mean,
        components=components,
        explained_variance=variances,
        feature_min=proj.min(axis=0),
        feature_max=proj.max(axis=0),
    )


def pca_transform(model: PcaModel, pixels: np.ndarray) -> np.ndarray:
    """Project and min-max rescale into [0, 1] (range frozen at fit time).

    Components whose training range collapsed to zero are pinned to 0.5
    with a warning rather than dividing by zero.
    """
    x = np.asarray(pixels, dtype=float)
    single = x.ndim == 1
    x2 = x[None, :] if single else x
    if x2.shape[1] != model.mean.shape[0]:
        raise ValueError(
            f"pixel dimension {x2.shape[1]} does not match model "
            f"dimension {model.mean.shape[0]}"
        )
    proj = (x2 - model.mean) @ model.components.T
    span = model.feature_max - model.feature_min
    out = np.empty_like(proj)
    for j in range(model.n_components):
        if span[j] <= 0.0:
            warnings.warn(
                f"component {j} has zero training range; feature pinned to 0.5",
                stacklevel=2,
            )
            out[:, j] = 0.5
        else:
            out[:, j] = (proj[:, j] - model.feature_min[j]) / span[j]
    out = np.clip(out, 0.0, 1.0)
    return out[0] if single else out


def pca_inverse(model: PcaModel, features: np.ndarray) -> np.ndarray:
    """Map [0, 1] features back to pixel space, clamped into [0, 1]."""
    f = np.asarray(features, dtype=float)
    single = f.ndim == 1
    f2 = f[None, :] if single else f
    if f2.shape[1] != model.n_components:
        raise ValueError(
            f"expected {model.n_components} features, got {f2.shape[1]}"
        )
    raw = f2 * (model.feature_max - model.feature_min) + model.feature_min
    pixels = raw @ model.components + model.mean
    pixels = np.clip(pixels, 0.0, 1.0)
    return pixels[0] if single else pixels


def random_inverse_probe(model: PcaModel, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Unit-norm uniform feature draw pushed through the inverse map.

    Returns (features, pixels); the draw is k uniforms on [0, 1] divided by
    their Euclidean norm, so repeated seeds reproduce the probe exactly.
    """
    rng = np.random.default_rng(seed)
    f = rng.random(model.n_components)
    norm = float(np.linalg.norm(f))
    if norm == 0.0:
        f = np.full(model.n_components, 1.0 / math.sqrt(model.n_components))
    else:
        f = f / norm
    return f, pca_inverse(model, f)


def pca_to_json(model: PcaModel) -> dict:
    return {
        "mean": model.mean.tolist(),
        "components": model.components.tolist(),
        "explained_variance": model.explained_variance.tolist(),
        "feature_min": model.feature_min.tolist(),
        "feature_max": model.feature_max.tolist(),
    }


def pca_from_json(doc: dict) -> PcaModel:
    return PcaModel(
        mean=np.asarray(doc["mean"], dtype=float),
        components=np.asarray(doc["components"], dtype=float),
        explained_variance=np.asarray(doc["explained_variance"], dtype=float),
        feature_min=np.asarray(doc["feature_min"], dtype=float),
        feature_max=np.asarray(doc["feature_max"], dtype=float),
    )


def save_pca(path, model: PcaModel) -> None:
    with open(path, "w", encoding="ascii") as fh:
        json.dump(pca_to_json(model), fh, sort_keys=True)
        fh.write("\n")


def load_pca(path) -> PcaModel:
    with open(path, "r", encoding="ascii") as fh:
        return pca_from_json(json.load(fh))


# ---------------------------------------------------------------------------
# image and container serialization
# ---------------------------------------------------------------------------


def write_pgm(path, image: np.ndarray, binary: bool = True) -> None:
    """Write a [0, 1] grayscale image as PGM (P5 binary or P2 ascii), maxval 255."""
    img = np.asarray(image, dtype=float)
    if img.ndim != 2:
        raise ValueError(f"expected a 2-d image, got shape {img.shape}")
    levels = np.clip(np.rint(np.clip(img, 0.0, 1.0) * 255.0), 0, 255).astype(np.uint8)
    h, w = levels.shape
    if binary:
        with open(path, "wb") as fh:
            fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
            fh.write(levels.tobytes())
    else:
        lines = [" ".join(str(v) for v in row) for row in levels]
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(f"P2\n{w} {h}\n255\n")
            fh.write("\n".join(lines) + "\n")


def read_pgm(path) -> np.ndarray:
    """Read P2/P5 PGM back into a [0, 1] float image."""
    with open(path, "rb") as fh:
        data = fh.read()
    tokens: list[bytes] = []
    pos = 0
    while len(tokens) < 4 and pos < len(data):
        # tokenize the header, skipping whitespace and # comments
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    if len(tokens) < 4 or tokens[0] not in (b"P2", b"P5"):
        raise BadMagicError(f"{path}: not a P2/P5 PGM file")
    w, h, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    if maxval < 1 or maxval > 255:
        raise ValueError(f"{path}: unsupported maxval {maxval}")
    if tokens[0] == b"P5":
        payload = data[pos + 1 : pos + 1 + w * h]
        if len(payload) != w * h:
            raise TruncatedDataError(f"{path}: short P5 payload")
        levels = np.frombuffer(payload, dtype=np.uint8).astype(float)
    else:
        values = data[pos:].split()
        if len(values) != w * h:
            raise TruncatedDataError(
                f"{path}: P2 carries {len(values)} values, expected {w * h}"
            )
        levels = np.array([int(v) for v in values], dtype=float)
    return (levels / float(maxval)).reshape(h, w)


def save_dataset(path, dataset: ImageDataset) -> None:
    """Write the versioned little-endian container (f64 pixels, u8 labels)."""
    if dataset.labels.size and (
        int(dataset.labels.min()) < 0 or int(dataset.labels.max()) > 255
    ):
        raise ValueError("container labels must fit in a byte")
    with open(path, "wb") as fh:
        fh.write(QGDS_MAGIC)
        fh.write(
            struct.pack(
                "<HIHH", QGDS_VERSION, len(dataset), dataset.width, dataset.height
            )
        )
        fh.write(np.ascontiguousarray(dataset.pixels, dtype="<f8").tobytes())
        fh.write(dataset.labels.astype(np.uint8).tobytes())


def load_dataset(path) -> ImageDataset:
    """Read a container written by :func:`save_dataset`."""
    with open(path, "rb") as fh:
        magic = _read_exact(fh, 4, "container magic")
        if magic != QGDS_MAGIC:
            raise BadMagicError(f"bad container magic {magic!r}")
        version, count, width, height = struct.unpack(
            "<HIHH", _read_exact(fh, 10, "container header")
        )
        if version != QGDS_VERSION:
            raise ValueError(f"unsupported container version {version}")
        n_pixels = count * width * height
        pixels = np.frombuffer(
            _read_exact(fh, 8 * n_pixels, "container pixels"), dtype="<f8"
        ).reshape(count, width * height)
        labels = np.frombuffer(
            _read_exact(fh, count, "container labels"), dtype=np.uint8
        ).astype(int)
        trailing = fh.read(1)
        if trailing:
            raise ValueError("container has trailing bytes after payload")
    return ImageDataset(width, height, pixels.copy(), labels)
