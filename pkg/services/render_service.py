"""
Рендеринг патчей, супертайлов и сеток полос в SVG

Координаты берутся из сертифицированных вложений (RENDER_BITS бит),
масштабируются и округляются к фиксированному числу знаков по правилу
round-half-even. Плитки выводятся в порядке точного ключа, поэтому одинаковые
входы дают побайтно одинаковый документ.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from decimal import ROUND_HALF_EVEN, Decimal
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from lxml import etree

import config
from .exactnum import FieldElement, Vec
from .tiling import Patch


logger = logging.getLogger(__name__)

SVG_NAMESPACE = "http://www.w3.org/2000/svg"
DECIMALS = 4

# Палитра по номеру прототайла (по кругу)
PALETTE = (
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
    "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
)

INTERVAL_HEIGHT = Fraction(1, 4)


def svg_ns(tag: str) -> str:
    """Имя тега с пространством имен SVG."""
    return "{%s}%s" % (SVG_NAMESPACE, tag)


def exact_value(x: FieldElement, bits: Optional[int] = None) -> Fraction:
    """Середина сертифицированного интервала ширины ≤ 2^-bits."""
    lo, hi = x.embed(bits or config.RENDER_BITS)
    return (lo + hi) / 2


def fixed(value: Fraction, decimals: int = DECIMALS) -> str:
    """Десятичная запись с округлением half-even, без экспоненты."""
    quantum = Decimal(1).scaleb(-decimals)
    number = (Decimal(value.numerator) / Decimal(value.denominator)).quantize(quantum, rounding=ROUND_HALF_EVEN)
    if number == 0:
        number = abs(number)
    return format(number, "f")


@dataclass(frozen=True)
class BandOverlay:
    """
    Сетка полос anchor + B(0, R₀) + Ker χ_a

    Attributes:
        a: Собственное значение
        r0_2: R₀²
        anchor: Опорная точка
        style: Цвет заливки полос
        scale_m: Полоса сжата φ^{-m} (только для подписи)
    """

    a: Vec
    r0_2: FieldElement
    anchor: Vec
    style: str = "#d62728"
    scale_m: int = 0


@dataclass(frozen=True)
class RenderSpec:
    """
    Attributes:
        scale: Пикселей на единицу
        colors: Цвет по номеру прототайла; по умолчанию PALETTE
        overlays: Сетки полос
        view_box: Явные границы ((x0, y0), (x1, y1)); по умолчанию по патчу
        bits: Точность вложений
    """

    scale: Fraction = Fraction(20)
    colors: Dict[int, str] = field(default_factory=dict)
    overlays: Tuple[BandOverlay, ...] = ()
    view_box: Optional[Tuple[Tuple[Fraction, Fraction], Tuple[Fraction, Fraction]]] = None
    bits: Optional[int] = None
    stroke: str = "#222222"

    def color(self, proto: int) -> str:
        return self.colors.get(proto, PALETTE[proto % len(PALETTE)])


def _points(patch: Patch, bits: int) -> List[Tuple[int, List[Tuple[Fraction, Fraction]]]]:
    """Вершины плиток в точных рациональных координатах (y вверх)."""
    shapes = []
    for tile in patch.sorted_tiles():
        polygon = patch.polygon(tile)
        if polygon.dim == 1:
            lo = exact_value(polygon.vertices[0][0], bits)
            hi = exact_value(polygon.vertices[1][0], bits)
            pts = [(lo, Fraction(0)), (hi, Fraction(0)), (hi, INTERVAL_HEIGHT), (lo, INTERVAL_HEIGHT)]
        else:
            pts = [(exact_value(v[0], bits), exact_value(v[1], bits)) for v in polygon.vertices]
        shapes.append((tile.proto, pts))
    return shapes


def _bounds(shapes) -> Tuple[Tuple[Fraction, Fraction], Tuple[Fraction, Fraction]]:
    xs = [p[0] for _, pts in shapes for p in pts]
    ys = [p[1] for _, pts in shapes for p in pts]
    return (min(xs), min(ys)), (max(xs), max(ys))


def _stripes(
    overlay: BandOverlay,
    bounds: Tuple[Tuple[Fraction, Fraction], Tuple[Fraction, Fraction]],
    bits: int,
) -> List[List[Tuple[Fraction, Fraction]]]:
    """
    Четырехугольники полос, пересекающих прямоугольник bounds

    Полоса k: точки v с |⟨a, v - anchor⟩ - k| ≤ R₀‖a‖. Длина полосы равна
    диагонали прямоугольника, лишнее отсекает clipPath.
    """
    (x0, y0), (x1, y1) = bounds
    ax, ay = exact_value(overlay.a[0], bits), exact_value(overlay.a[1], bits)
    px, py = exact_value(overlay.anchor[0], bits), exact_value(overlay.anchor[1], bits)
    norm2 = ax * ax + ay * ay
    norm = Fraction(math.sqrt(norm2))
    half_width = Fraction(math.sqrt(exact_value(overlay.r0_2, bits)))
    # единичные векторы вдоль a и вдоль полосы
    ux, uy = ax / norm, ay / norm
    vx, vy = -uy, ux
    corners = [(x0, y0), (x0, y1), (x1, y0), (x1, y1)]
    phases = [ax * (cx - px) + ay * (cy - py) for cx, cy in corners]
    length = Fraction(math.sqrt((x1 - x0) ** 2 + (y1 - y0) ** 2)) + 1
    mid_x, mid_y = (x0 + x1) / 2, (y0 + y1) / 2
    result = []
    for k in range(math.floor(min(phases)) - 1, math.ceil(max(phases)) + 2):
        # центр полосы на прямой через anchor вдоль a
        cx = px + ax * k / norm2
        cy = py + ay * k / norm2
        # сдвиг центра к середине окна вдоль полосы
        t = (mid_x - cx) * vx + (mid_y - cy) * vy
        cx, cy = cx + vx * t, cy + vy * t
        result.append([
            (cx - ux * half_width - vx * length, cy - uy * half_width - vy * length),
            (cx + ux * half_width - vx * length, cy + uy * half_width - vy * length),
            (cx + ux * half_width + vx * length, cy + uy * half_width + vy * length),
            (cx - ux * half_width + vx * length, cy - uy * half_width + vy * length),
        ])
    return result


def render_svg(patch: Patch, spec: Optional[RenderSpec] = None) -> bytes:
    """
    SVG-документ патча: по одному <polygon> на плитку

    Args:
        patch: Конечный патч (d = 1 рисуется полосками высоты 1/4)
        spec: Параметры рендеринга

    Returns:
        Байты документа (UTF-8, с XML-декларацией)
    """
    spec = spec or RenderSpec()
    bits = spec.bits or config.RENDER_BITS
    scale = spec.scale
    shapes = _points(patch, bits)

    if spec.view_box is not None:
        bounds = spec.view_box
    elif shapes:
        bounds = _bounds(shapes)
    else:
        bounds = ((Fraction(0), Fraction(0)), (Fraction(1), Fraction(1)))
    (x0, y0), (x1, y1) = bounds

    def sx(x: Fraction) -> str:
        return fixed((x - x0) * scale)

    def sy(y: Fraction) -> str:
        return fixed((y1 - y) * scale)

    width, height = fixed((x1 - x0) * scale), fixed((y1 - y0) * scale)
    root = etree.Element(svg_ns("svg"), nsmap={None: SVG_NAMESPACE})
    root.set("width", width)
    root.set("height", height)
    root.set("viewBox", f"0 0 {width} {height}")

    tiles_group = etree.SubElement(root, svg_ns("g"), {"id": "tiles"})
    for proto, pts in shapes:
        etree.SubElement(tiles_group, svg_ns("polygon"), {
            "points": " ".join(f"{sx(x)},{sy(y)}" for x, y in pts),
            "fill": spec.color(proto),
            "stroke": spec.stroke,
            "stroke-width": "0.5",
            "data-proto": str(proto),
        })

    if spec.overlays and shapes and patch.prototiles[0].dim == 2:
        defs = etree.Element(svg_ns("defs"))
        root.insert(0, defs)
        clip = etree.SubElement(defs, svg_ns("clipPath"), {"id": "view"})
        etree.SubElement(clip, svg_ns("rect"), {"x": "0", "y": "0", "width": width, "height": height})
        for i, overlay in enumerate(spec.overlays):
            group = etree.SubElement(root, svg_ns("g"), {
                "id": f"bands-{i}",
                "clip-path": "url(#view)",
                "fill": overlay.style,
                "fill-opacity": "0.35",
                "data-scale-m": str(overlay.scale_m),
            })
            for stripe in _stripes(overlay, bounds, bits):
                etree.SubElement(group, svg_ns("polygon"), {
                    "points": " ".join(f"{sx(x)},{sy(y)}" for x, y in stripe),
                })

    logger.info(f"🖼️ SVG: {len(shapes)} плиток, {len(spec.overlays)} сеток полос")
    return etree.tostring(root, xml_declaration=True, encoding="UTF-8", pretty_print=True)


def supertile_outline(patch: Patch, spec: Optional[RenderSpec] = None) -> RenderSpec:
    """RenderSpec с явными границами по патчу, чтобы несколько уровней шли в одном масштабе."""
    spec = spec or RenderSpec()
    shapes = _points(patch, spec.bits or config.RENDER_BITS)
    if not shapes:
        return spec
    return RenderSpec(spec.scale, spec.colors, spec.overlays, _bounds(shapes), spec.bits, spec.stroke)


def overlays_from_verdicts(verdicts: Sequence, styles: Sequence[str] = ("#d62728", "#1f77b4")) -> Tuple[BandOverlay, ...]:
    """
    Сетки полос из прошедших проверку вердиктов forbidden_verify

    Запрещенная полоса лежит в anchor₀ + a/(2‖a‖²) + B(0, R₀) + Ker χ_a,
    anchor₀ = x(p1) - x(p2).
    """
    result = []
    for i, verdict in enumerate(verdicts):
        if verdict.status != "pass" or verdict.anchors is None:
            continue
        x1, x2 = verdict.anchors
        a = verdict.a
        anchor = (x1 - x2) + a.scale(Fraction(1, 2) / a.norm2())
        result.append(BandOverlay(a, verdict.r0_2, anchor, styles[i % len(styles)], verdict.scale_m))
    return tuple(result)
