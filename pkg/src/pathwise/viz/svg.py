"""
Minimal deterministic SVG builder.

Documents are built with ``xml.etree.ElementTree``; attributes are written in
the order they are given, coordinates are formatted with two decimals and the
output is indented with two spaces. Identical calls give identical bytes.
"""

import xml.etree.ElementTree as ET
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

from src.pathwise.utils.formatting import atomic_write_text

SVG_NS = "http://www.w3.org/2000/svg"

# Okabe-Ito colour-blind-safe qualitative palette.
OKABE_ITO = (
    "#E69F00",
    "#56B4E9",
    "#009E73",
    "#F0E442",
    "#0072B2",
    "#D55E00",
    "#CC79A7",
    "#000000",
)

PALETTES = {"okabe_ito": OKABE_ITO}

# Blue, near-white, red; used for z-scores in [-3, 3].
DIVERGING = ("#2166AC", "#F7F7F7", "#B2182B")

# Advance widths as fractions of the font size (Arial-like metrics).
_NARROW = set("iljtfI.,;:!|'`()[] ")
_WIDE = set("mwMW@%")
_CAPITAL = 0.67
_LOWER = 0.52
_DIGIT = 0.56


def char_width(ch: str) -> float:
    if ch in _NARROW:
        return 0.28
    if ch in _WIDE:
        return 0.85
    if ch.isdigit():
        return _DIGIT
    if ch.isupper():
        return _CAPITAL
    return _LOWER


def text_width(text: str, font_size: float) -> float:
    """Estimated rendered width of ``text`` in pixels."""
    return sum(char_width(ch) for ch in text) * font_size


def truncate_to_width(text: str, max_width: float, font_size: float) -> str:
    if text_width(text, font_size) <= max_width:
        return text
    ellipsis = "..."
    budget = max_width - text_width(ellipsis, font_size)
    out = ""
    for ch in text:
        if text_width(out + ch, font_size) > budget:
            break
        out += ch
    return out.rstrip() + ellipsis


def num(value: float) -> str:
    return f"{value:.2f}"


def hex_to_rgb(color: str) -> tuple[int, int, int]:
    color = color.lstrip("#")
    return int(color[0:2], 16), int(color[2:4], 16), int(color[4:6], 16)


def rgb_to_hex(rgb: Sequence[float]) -> str:
    return "#" + "".join(f"{int(round(c)):02X}" for c in rgb)


def interpolate(start: str, end: str, t: float) -> str:
    a, b = hex_to_rgb(start), hex_to_rgb(end)
    t = min(max(t, 0.0), 1.0)
    return rgb_to_hex([x + (y - x) * t for x, y in zip(a, b)])


def diverging_color(value: float, limit: float = 3.0) -> str:
    """Colour of ``value`` on the diverging scale, clipped at +/- ``limit``."""
    z = min(max(value, -limit), limit) / limit
    low, mid, high = DIVERGING
    if z < 0:
        return interpolate(mid, low, -z)
    return interpolate(mid, high, z)


def palette_colors(name: str, n: int) -> list[str]:
    colors = PALETTES[name]
    return [colors[i % len(colors)] for i in range(n)]


class SvgCanvas:
    """An SVG document under construction."""

    def __init__(self, width: float, height: float, font_family: str, font_size: float):
        self.width = width
        self.height = height
        self.font_size = font_size
        self.root = ET.Element(
            "svg",
            {
                "xmlns": SVG_NS,
                "version": "1.1",
                "width": str(int(round(width))),
                "height": str(int(round(height))),
                "viewBox": f"0 0 {int(round(width))} {int(round(height))}",
                "font-family": font_family,
                "font-size": num(font_size),
            },
        )
        self.rect(0, 0, width, height, fill="#FFFFFF", cls="background")

    def group(self, cls: Optional[str] = None, parent: Optional[ET.Element] = None, **attrs) -> ET.Element:
        attrib = {"class": cls} if cls else {}
        attrib.update({k.replace("_", "-"): str(v) for k, v in attrs.items()})
        return ET.SubElement(parent if parent is not None else self.root, "g", attrib)

    def _add(self, tag: str, attrib: dict, cls: Optional[str], parent: Optional[ET.Element], extra: dict) -> ET.Element:
        if cls:
            attrib = {"class": cls, **attrib}
        attrib.update({k.replace("_", "-"): str(v) for k, v in extra.items()})
        return ET.SubElement(parent if parent is not None else self.root, tag, attrib)

    def rect(self, x, y, width, height, fill, cls=None, parent=None, **extra) -> ET.Element:
        attrib = {
            "x": num(x),
            "y": num(y),
            "width": num(max(width, 0.0)),
            "height": num(max(height, 0.0)),
            "fill": fill,
        }
        return self._add("rect", attrib, cls, parent, extra)

    def line(self, x1, y1, x2, y2, stroke="#000000", width=1.0, cls=None, parent=None, **extra) -> ET.Element:
        attrib = {
            "x1": num(x1),
            "y1": num(y1),
            "x2": num(x2),
            "y2": num(y2),
            "stroke": stroke,
            "stroke-width": num(width),
        }
        return self._add("line", attrib, cls, parent, extra)

    def circle(self, cx, cy, r, fill, cls=None, parent=None, **extra) -> ET.Element:
        attrib = {"cx": num(cx), "cy": num(cy), "r": num(r), "fill": fill}
        return self._add("circle", attrib, cls, parent, extra)

    def polyline(
        self, points: Iterable[tuple[float, float]], stroke: str, width=1.5, cls=None, parent=None, **extra
    ) -> ET.Element:
        attrib = {
            "points": " ".join(f"{num(x)},{num(y)}" for x, y in points),
            "fill": "none",
            "stroke": stroke,
            "stroke-width": num(width),
        }
        return self._add("polyline", attrib, cls, parent, extra)

    def text(
        self,
        x,
        y,
        content: str,
        anchor: str = "start",
        size: Optional[float] = None,
        weight: Optional[str] = None,
        cls=None,
        parent=None,
        **extra,
    ) -> ET.Element:
        attrib = {"x": num(x), "y": num(y), "text-anchor": anchor}
        if size is not None:
            attrib["font-size"] = num(size)
        if weight is not None:
            attrib["font-weight"] = weight
        element = self._add("text", attrib, cls, parent, extra)
        element.text = content
        return element

    def to_string(self) -> str:
        tree = ET.ElementTree(self.root)
        ET.indent(tree, space="  ")
        return ET.tostring(self.root, encoding="unicode") + "\n"


def save_svg(document: str, path: Union[str, Path]) -> Path:
    path = Path(path)
    atomic_write_text(path, document)
    return path
