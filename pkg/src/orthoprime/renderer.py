"""Stimulus rendering: augmented training images and canonical prime images.

Training images follow the seven-step recipe: random font and even size in
[18, 36], per-letter rotation drawn from N(0, 2*pi/45), per-letter
translation sampled uniformly inside the bounding-circle constraint
(offset magnitude at most 0.8 * sqrt(h^2 + w^2) of the glyph box), then
grayscale conversion and a bilinear resize to 224 x 224.

Prime images are deterministic: one fixed face at size 26, ink bounding box
centred on the 224 x 224 canvas, no augmentation.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import random
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw, ImageFont

IMAGE_SIZE = 224
ROTATION_SIGMA = 2.0 * math.pi / 45.0
TRANSLATION_FACTOR = 0.8
PRIME_FONT_SIZE = 26
TRAINING_SIZES = tuple(range(18, 38, 2))  # {x in 2Z : 18 <= x < 38}

FONT_DIR_ENV = "ORTHOPRIME_FONT_DIR"

# Default face list: ten faces with full A-Z coverage.  The first entry is
# also the face used for deterministic prime images.
DEFAULT_FONT_FILES = (
    "DejaVuSans.ttf",
    "DejaVuSans-Bold.ttf",
    "DejaVuSans-Oblique.ttf",
    "DejaVuSans-BoldOblique.ttf",
    "DejaVuSerif.ttf",
    "DejaVuSerif-Bold.ttf",
    "DejaVuSerif-Italic.ttf",
    "DejaVuSansMono.ttf",
    "DejaVuSansMono-Bold.ttf",
    "DejaVuSansMono-Oblique.ttf",
)

_FALLBACK_FONT_DIRS = (
    "/usr/share/fonts/truetype/dejavu",
    "/usr/local/lib/python3.10/dist-packages/matplotlib/mpl-data/fonts/ttf",
)


class RenderError(RuntimeError):
    """Raised when fonts are missing or rendering preconditions fail."""


def font_search_dirs() -> list[Path]:
    dirs = []
    env = os.environ.get(FONT_DIR_ENV)
    if env:
        dirs.append(Path(env))
    dirs.extend(Path(d) for d in _FALLBACK_FONT_DIRS)
    try:
        from matplotlib import font_manager  # noqa: F401  (optional)
    except ImportError:
        pass
    return [d for d in dirs if d.is_dir()]


def resolve_font(filename: str) -> Path:
    for d in font_search_dirs():
        candidate = d / filename
        if candidate.is_file():
            return candidate
    raise RenderError(
        f"font file {filename!r} not found in {[str(d) for d in font_search_dirs()]}; "
        f"set {FONT_DIR_ENV} to a directory containing it"
    )


@dataclass(frozen=True)
class RenderConfig:
    fonts: tuple[str, ...] = DEFAULT_FONT_FILES
    sizes: tuple[int, ...] = TRAINING_SIZES
    rotation_sigma: float = ROTATION_SIGMA
    translation_factor: float = TRANSLATION_FACTOR
    background: float = 1.0
    ink: float = 0.0

    def __post_init__(self) -> None:
        if len(self.fonts) == 0:
            raise RenderError("font list must be non-empty")


@dataclass(frozen=True)
class LetterPlacement:
    """Placement metadata for one letter; Eq. 2 is checkable from fields.

    (b, a) is the nominal top-left paste origin (x, y); (x, y) the origin
    actually used after translation; rotation in radians; (width_letter,
    height_letter) the glyph bounding-box size in pixels.
    """

    letter: str
    a: float  # nominal y
    b: float  # nominal x
    x: float  # applied x
    y: float  # applied y
    rotation: float
    height_letter: float
    width_letter: float

    def offset_radius(self) -> float:
        return math.hypot(self.x - self.b, self.y - self.a)

    def max_radius(self) -> float:
        return TRANSLATION_FACTOR * math.hypot(self.height_letter, self.width_letter)

    def satisfies_constraint(self) -> bool:
        return self.offset_radius() ** 2 <= self.max_radius() ** 2 + 1e-9


@dataclass(frozen=True)
class StimulusImage:
    pixels: np.ndarray  # 224 x 224 float in [0, 1]
    placements: tuple[LetterPlacement, ...]
    word: str
    font_name: str
    font_size: int
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.pixels.shape != (IMAGE_SIZE, IMAGE_SIZE):
            raise RenderError(f"image must be {IMAGE_SIZE}x{IMAGE_SIZE}")

    def to_pil(self) -> Image.Image:
        return Image.fromarray(
            np.clip(self.pixels * 255.0, 0, 255).astype(np.uint8), mode="L"
        )

    def save_png(self, path: str | Path) -> None:
        self.to_pil().save(path, format="PNG")


def _glyph_tile(letter: str, font: ImageFont.FreeTypeFont) -> tuple[Image.Image, int, int]:
    """Rasterize one letter tightly; returns (tile, width, height)."""
    left, top, right, bottom = font.getbbox(letter)
    w, h = right - left, bottom - top
    if w <= 0 or h <= 0:
        raise RenderError(f"glyph {letter!r} missing from font")
    tile = Image.new("L", (w, h), 0)
    ImageDraw.Draw(tile).text((-left, -top), letter, fill=255, font=font)
    return tile, w, h


def _sample_disc_offset(rng: random.Random, radius: float) -> tuple[float, float]:
    """Uniform point in a disc via rejection sampling from the square."""
    while True:
        dx = rng.uniform(-radius, radius)
        dy = rng.uniform(-radius, radius)
        if dx * dx + dy * dy <= radius * radius:
            return dx, dy


def render_training_image(
    word: str,
    config: RenderConfig,
    rng: random.Random,
    seed: int | None = None,
) -> StimulusImage:
    """One augmented training image with recorded per-letter placements."""
    if not word:
        raise RenderError("word must be non-empty")
    word = word.upper()
    font_file = rng.choice(list(config.fonts))
    size = rng.choice(list(config.sizes))
    font = ImageFont.truetype(str(resolve_font(font_file)), size)

    tiles = [_glyph_tile(ch, font) for ch in word]
    spacing = max(1, size // 10)
    word_w = sum(w for _, w, _ in tiles) + spacing * (len(tiles) - 1)
    word_h = max(h for _, _, h in tiles)
    max_diag = max(math.hypot(w, h) for _, w, h in tiles)
    # margin covers worst-case rotation expansion plus translation radius
    margin = int(math.ceil(max_diag * (1.0 + config.translation_factor)))
    side = max(word_w, word_h) + 2 * margin
    canvas = Image.new("L", (side, side), int(round(config.background * 255)))

    placements: list[LetterPlacement] = []
    cursor_x = (side - word_w) / 2.0
    base_y = (side - word_h) / 2.0
    for (tile, w, h), ch in zip(tiles, word):
        nominal_x = cursor_x
        nominal_y = base_y + (word_h - h)  # sit glyphs on a common baseline
        rotation = rng.gauss(0.0, config.rotation_sigma)
        radius = config.translation_factor * math.hypot(h, w)
        dx, dy = _sample_disc_offset(rng, radius)
        x, y = nominal_x + dx, nominal_y + dy

        rotated = tile.rotate(
            math.degrees(rotation), resample=Image.BILINEAR, expand=True, fillcolor=0
        )
        # keep the glyph centre fixed under rotation expansion
        px = int(round(x - (rotated.width - w) / 2.0))
        py = int(round(y - (rotated.height - h) / 2.0))
        ink_tile = Image.new("L", rotated.size, int(round(config.ink * 255)))
        canvas.paste(ink_tile, (px, py), mask=rotated)

        placements.append(
            LetterPlacement(
                letter=ch, a=nominal_y, b=nominal_x, x=x, y=y,
                rotation=rotation, height_letter=float(h), width_letter=float(w),
            )
        )
        cursor_x += w + spacing

    resized = canvas.resize((IMAGE_SIZE, IMAGE_SIZE), resample=Image.BILINEAR)
    pixels = np.asarray(resized, dtype=np.float64) / 255.0
    return StimulusImage(
        pixels=pixels, placements=tuple(placements), word=word,
        font_name=font_file, font_size=size, seed=seed,
    )


def render_prime_image(text: str, config: RenderConfig | None = None) -> StimulusImage:
    """Deterministic centred prime/target image at the fixed prime font size."""
    if not text:
        raise RenderError("text must be non-empty")
    text = text.upper()
    config = config or RenderConfig()
    font_file = config.fonts[0]
    font = ImageFont.truetype(str(resolve_font(font_file)), PRIME_FONT_SIZE)

    scratch = Image.new("L", (IMAGE_SIZE * 2, IMAGE_SIZE), 0)
    ImageDraw.Draw(scratch).text((10, IMAGE_SIZE // 2), text, fill=255, font=font)
    bbox = scratch.getbbox()
    if bbox is None:
        raise RenderError(f"no ink produced for {text!r}")
    ink = scratch.crop(bbox)
    if ink.width > IMAGE_SIZE or ink.height > IMAGE_SIZE:
        raise RenderError(f"text {text!r} too wide for prime canvas")

    canvas = Image.new("L", (IMAGE_SIZE, IMAGE_SIZE), int(round(config.background * 255)))
    px = (IMAGE_SIZE - ink.width) // 2
    py = (IMAGE_SIZE - ink.height) // 2
    ink_fill = Image.new("L", ink.size, int(round(config.ink * 255)))
    canvas.paste(ink_fill, (px, py), mask=ink)

    # translation-free placements: applied position equals nominal
    placements = tuple(
        LetterPlacement(
            letter=ch, a=float(py), b=float(px), x=float(px), y=float(py),
            rotation=0.0, height_letter=float(ink.height), width_letter=float(ink.width),
        )
        for ch in text
    )
    pixels = np.asarray(canvas, dtype=np.float64) / 255.0
    return StimulusImage(
        pixels=pixels, placements=placements, word=text,
        font_name=font_file, font_size=PRIME_FONT_SIZE, seed=None,
    )


def image_stream_seed(global_seed: int, word: str, index: int) -> int:
    payload = f"render-v1|{global_seed}|{word.upper()}|{index}"
    return int.from_bytes(hashlib.sha256(payload.encode("ascii")).digest()[:8], "little")


def render_training_set(
    words: list[str],
    per_word: int,
    config: RenderConfig,
    seed: int,
    out_dir: str | Path,
    write_images: bool = True,
) -> dict:
    """Render per_word images per word; returns (and writes) a JSON manifest.

    Every sixth image is assigned to the validation split (5:1 train/val).
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    for word in words:
        word = word.upper()
        for index in range(per_word):
            s = image_stream_seed(seed, word, index)
            rng = random.Random(s)
            image = render_training_image(word, config, rng, seed=s)
            rel = f"{word}/{word}_{index:05d}.png"
            if write_images:
                path = out_dir / rel
                path.parent.mkdir(parents=True, exist_ok=True)
                image.save_png(path)
            entries.append({
                "word": word,
                "path": rel,
                "split": "val" if index % 6 == 5 else "train",
                "seed": s,
                "font": image.font_name,
                "size": image.font_size,
            })
    manifest = {"seed": seed, "per_word": per_word, "images": entries}
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=1, sort_keys=True) + "\n", encoding="utf-8"
    )
    return manifest
