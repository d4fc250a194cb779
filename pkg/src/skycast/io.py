"""File formats: 8-bit rasters (PNG, binary PPM), the NFLO flow container,
accuracy CSV/SVG reports and false-color flow maps.

8-bit samples map to [0, 1] by division by 255; encoding clamps to [0, 1]
and rounds to the nearest 8-bit value.  PNG encoding parameters are pinned
so repeated runs produce identical bytes.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np
from PIL import Image as PILImage

from .errors import InvalidInputError
from .flow import FlowField
from .image import Image
from .segment import AccuracyReport, BinaryMask

__all__ = [
    "read_image",
    "write_image",
    "read_mask",
    "write_mask",
    "read_flow",
    "write_flow",
    "write_false_color",
    "format_accuracy_csv",
    "write_accuracy_csv",
    "render_accuracy_svg",
    "write_accuracy_svg",
]

NFLO_MAGIC = b"NFLO"
_PNG_COMPRESS_LEVEL = 6


def _to_bytes(img: Image) -> np.ndarray:
    scaled = np.rint(np.clip(img.to_interleaved(), 0.0, 1.0) * 255.0)
    return scaled.astype(np.uint8)


def _from_bytes(arr: np.ndarray) -> Image:
    return Image.from_interleaved(arr.astype(np.float64) / 255.0)


def read_image(path) -> Image:
    """Decode an 8-bit RGB raster (PNG or binary PPM) to a [0, 1] image."""
    path = Path(path)
    if path.suffix.lower() in (".ppm", ".pnm"):
        return _from_bytes(_read_ppm(path))
    with PILImage.open(path) as im:
        rgb = im.convert("RGB")
        return _from_bytes(np.asarray(rgb))


def write_image(path, img: Image) -> None:
    path = Path(path)
    data = _to_bytes(img)
    if path.suffix.lower() in (".ppm", ".pnm"):
        _write_ppm(path, data)
        return
    if img.channels == 1:
        pil = PILImage.fromarray(data[:, :, 0], mode="L")
    else:
        pil = PILImage.fromarray(data, mode="RGB")
    pil.save(path, format="PNG", compress_level=_PNG_COMPRESS_LEVEL)


def _read_ppm(path: Path) -> np.ndarray:
    raw = path.read_bytes()
    fields = []
    pos = 0

    def next_token():
        nonlocal pos
        while pos < len(raw):
            if raw[pos : pos + 1].isspace():
                pos += 1
            elif raw[pos : pos + 1] == b"#":
                while pos < len(raw) and raw[pos : pos + 1] != b"\n":
                    pos += 1
            else:
                break
        start = pos
        while pos < len(raw) and not raw[pos : pos + 1].isspace():
            pos += 1
        return raw[start:pos]

    magic = next_token()
    if magic != b"P6":
        raise InvalidInputError(f"{path}: not a binary PPM (magic {magic!r})")
    for _ in range(3):
        fields.append(next_token())
    width, height, maxval = (int(f) for f in fields)
    if maxval != 255:
        raise InvalidInputError(f"{path}: only maxval 255 supported, got {maxval}")
    pos += 1  # single whitespace after header
    pixels = np.frombuffer(raw, dtype=np.uint8, count=width * height * 3, offset=pos)
    return pixels.reshape(height, width, 3)


def _write_ppm(path: Path, data: np.ndarray) -> None:
    if data.shape[2] == 1:
        data = np.repeat(data, 3, axis=2)
    header = f"P6\n{data.shape[1]} {data.shape[0]}\n255\n".encode("ascii")
    path.write_bytes(header + data.tobytes())


def read_mask(path) -> BinaryMask:
    """Load a mask raster; any pixel brighter than mid-gray counts as sky."""
    with PILImage.open(path) as im:
        gray = np.asarray(im.convert("L"))
    return BinaryMask(gray > 127)


def write_mask(path, mask: BinaryMask) -> None:
    """Write a 1-bit PNG, sky rendered white."""
    pil = PILImage.fromarray(mask.sky)
    pil.save(Path(path), format="PNG", compress_level=_PNG_COMPRESS_LEVEL)


def write_flow(path, flow: FlowField) -> None:
    """NFLO container: magic, u32 width/height, f32 u-plane then v-plane (LE)."""
    header = NFLO_MAGIC + struct.pack("<II", flow.width, flow.height)
    body = flow.u.astype("<f4").tobytes() + flow.v.astype("<f4").tobytes()
    Path(path).write_bytes(header + body)


def read_flow(path) -> FlowField:
    raw = Path(path).read_bytes()
    if raw[:4] != NFLO_MAGIC:
        raise InvalidInputError(f"{path}: not an NFLO file (magic {raw[:4]!r})")
    width, height = struct.unpack("<II", raw[4:12])
    n = width * height
    expected = 12 + 8 * n
    if len(raw) != expected:
        raise InvalidInputError(f"{path}: expected {expected} bytes, got {len(raw)}")
    planes = np.frombuffer(raw, dtype="<f4", count=2 * n, offset=12).astype(np.float64)
    u = planes[:n].reshape(height, width)
    v = planes[n:].reshape(height, width)
    return FlowField(u, v)


def _diverging_map(norm: np.ndarray) -> np.ndarray:
    """Linear blue -> white -> red map on [0, 1] values."""
    t = norm[..., np.newaxis]
    blue = np.array([0.12, 0.25, 0.85])
    white = np.array([1.0, 1.0, 1.0])
    red = np.array([0.80, 0.15, 0.12])
    low = blue + (white - blue) * (2.0 * t)
    high = white + (red - white) * (2.0 * t - 1.0)
    return np.where(t < 0.5, low, high)


def write_false_color(path, field: np.ndarray, sidecar=None, label: str = "value") -> None:
    """Render a scalar field with a linear color map spanning its range.

    The min/max of the linear mapping go to a sidecar text file
    (default: `<path>.txt`).
    """
    field = np.asarray(field, dtype=np.float64)
    lo = float(field.min())
    hi = float(field.max())
    span = hi - lo if hi > lo else 1.0
    rgb = _diverging_map((field - lo) / span)
    write_image(path, Image.from_interleaved(rgb))
    sidecar = Path(sidecar) if sidecar is not None else Path(str(path) + ".txt")
    sidecar.write_text(f"{label}_min = {lo:.6f}\n{label}_max = {hi:.6f}\n", encoding="ascii")


def _format_number(x: float) -> str:
    return format(x, ".10g")


def format_accuracy_csv(report: AccuracyReport) -> str:
    lines = ["lead_minutes,accuracy,n_frames"]
    for row in report.rows:
        lines.append(f"{_format_number(row.lead_minutes)},{row.accuracy:.6f},{row.n_frames}")
    return "\n".join(lines) + "\n"


def write_accuracy_csv(path, report: AccuracyReport) -> None:
    Path(path).write_text(format_accuracy_csv(report), encoding="ascii")


def render_accuracy_svg(report: AccuracyReport, width: int = 640, height: int = 480) -> str:
    """Accuracy-vs-lead-time line chart as a deterministic SVG string."""
    margin_l, margin_r, margin_t, margin_b = 70, 20, 20, 60
    plot_w = width - margin_l - margin_r
    plot_h = height - margin_t - margin_b
    leads = [row.lead_minutes for row in report.rows]
    lead_max = max(leads)

    def px(lead: float) -> float:
        return margin_l + plot_w * lead / lead_max

    def py(acc: float) -> float:
        return margin_t + plot_h * (1.0 - acc)

    points = " ".join(f"{px(r.lead_minutes):.2f},{py(r.accuracy):.2f}" for r in report.rows)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{margin_l}" y1="{margin_t + plot_h}" x2="{margin_l + plot_w}" '
        f'y2="{margin_t + plot_h}" stroke="black"/>',
        f'<line x1="{margin_l}" y1="{margin_t}" x2="{margin_l}" y2="{margin_t + plot_h}" '
        f'stroke="black"/>',
    ]
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        y = py(frac)
        parts.append(f'<line x1="{margin_l - 5}" y1="{y:.2f}" x2="{margin_l}" y2="{y:.2f}" stroke="black"/>')
        parts.append(
            f'<text x="{margin_l - 10}" y="{y + 4:.2f}" text-anchor="end" font-size="12">'
            f"{frac * 100:.0f}</text>"
        )
    for lead in leads:
        x = px(lead)
        parts.append(
            f'<line x1="{x:.2f}" y1="{margin_t + plot_h}" x2="{x:.2f}" '
            f'y2="{margin_t + plot_h + 5}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{x:.2f}" y="{margin_t + plot_h + 20}" text-anchor="middle" font-size="12">'
            f"{_format_number(lead)}</text>"
        )
    parts.append(
        f'<text x="{margin_l + plot_w / 2:.0f}" y="{height - 15}" text-anchor="middle" '
        f'font-size="14">lead time (minutes)</text>'
    )
    parts.append(
        f'<text x="18" y="{margin_t + plot_h / 2:.0f}" text-anchor="middle" font-size="14" '
        f'transform="rotate(-90 18 {margin_t + plot_h / 2:.0f})">accuracy (percent)</text>'
    )
    parts.append(f'<polyline points="{points}" fill="none" stroke="#1f4e9c" stroke-width="2"/>')
    for row in report.rows:
        parts.append(
            f'<circle cx="{px(row.lead_minutes):.2f}" cy="{py(row.accuracy):.2f}" r="3" fill="#1f4e9c"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_accuracy_svg(path, report: AccuracyReport) -> None:
    Path(path).write_text(render_accuracy_svg(report), encoding="ascii")
