"""
Подстановки на словах и корреляции подсдвигов

- seq_language - точное множество факторов L_{ζ,m}
- correlation_set - множество n с [W₁] ∩ T^{-n}[W₂] ≠ ∅
- gap_density, union_gap_set - плотность пропусков J(W₁, W₂) и J(W)

Подсдвиг двусторонний, но для языка это неважно: факторы берутся
из конечных слов ζ^k(b).
"""
from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Any, Dict, FrozenSet, List, Optional, Tuple

import numpy as np

from .errors import NotStabilized, SchemaError, WordNotInLanguage
from .subst import primitive_exponent


logger = logging.getLogger(__name__)

MAX_ITER = 10_000


@dataclass(frozen=True)
class WordSubstitution:
    """
    ζ: A → A⁺

    Attributes:
        alphabet: Символы (по одному знаку)
        images: ζ(b) для b в порядке alphabet
    """

    alphabet: Tuple[str, ...]
    images: Tuple[str, ...]
    name: str = "word"
    digest: str = ""

    def __post_init__(self):
        if len(self.alphabet) != len(self.images):
            raise SchemaError("Число образов не совпадает с алфавитом")
        if len(set(self.alphabet)) != len(self.alphabet) or any(len(b) != 1 for b in self.alphabet):
            raise SchemaError("Символы алфавита должны быть различными одиночными знаками")
        for b, image in zip(self.alphabet, self.images):
            if not image:
                raise SchemaError(f"Пустой образ символа {b!r}")
            if any(c not in self.alphabet for c in image):
                raise SchemaError(f"Образ {b!r} содержит символ вне алфавита", {"image": image})

    @classmethod
    def of(cls, images: Dict[str, str], name: str = "word") -> WordSubstitution:
        return cls(tuple(images), tuple(images[b] for b in images), name)

    def image(self, symbol: str) -> str:
        return self.images[self.alphabet.index(symbol)]

    def apply(self, word: str) -> str:
        table = dict(zip(self.alphabet, self.images))
        return "".join(table[c] for c in word)

    def power(self, word: str, k: int) -> str:
        for _ in range(k):
            word = self.apply(word)
        return word

    def matrix(self) -> np.ndarray:
        """Матрица абелианизации: M[i][j] - число символов i в ζ(j)."""
        m = np.zeros((len(self.alphabet), len(self.alphabet)), dtype=np.int64)
        for j, image in enumerate(self.images):
            for c in image:
                m[self.alphabet.index(c), j] += 1
        return m

    def reversed(self) -> WordSubstitution:
        """ζ̃(b) = ζ(b) задом наперед; его язык - развороты слов L_ζ."""
        return WordSubstitution(self.alphabet, tuple(w[::-1] for w in self.images), f"{self.name}~", self.digest)

    def summary(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "digest": self.digest,
            "kind": "word",
            "images": dict(zip(self.alphabet, self.images)),
        }


def seq_primitive(zeta: WordSubstitution) -> bool:
    return primitive_exponent(zeta.matrix()) is not None


@lru_cache(maxsize=64)
def _factor_closure(zeta: WordSubstitution, m: int, max_iter: int) -> FrozenSet[str]:
    """
    Все факторы длины ≤ m слов ζ^n(b)

    Фактор длины ≤ m слова ζ(u) лежит в ζ(v) для фактора v слова u длины ≤ m,
    поэтому замыкание по v ↦ факторы ζ(v) дает ровно язык.
    """
    known = set(zeta.alphabet)
    frontier = set(known)
    rounds = 0
    while frontier:
        rounds += 1
        if rounds > max_iter:
            raise NotStabilized(f"Язык длины {m} не стабилизировался", {"max_iter": max_iter})
        fresh = set()
        for v in frontier:
            image = zeta.apply(v)
            for length in range(1, m + 1):
                for i in range(len(image) - length + 1):
                    u = image[i:i + length]
                    if u not in known:
                        fresh.add(u)
        known |= fresh
        frontier = fresh
    return frozenset(known)


def seq_language(zeta: WordSubstitution, m: int, max_iter: int = MAX_ITER) -> FrozenSet[str]:
    """
    L_{ζ,m} - слова длины m, являющиеся факторами некоторого ζ^n(b)

    Raises:
        NotStabilized: Замыкание не сошлось за max_iter раундов
    """
    if m < 1:
        raise SchemaError("Длина слова должна быть ≥ 1", {"m": m})
    return frozenset(u for u in _factor_closure(zeta, m, max_iter) if len(u) == m)


def covering_words(zeta: WordSubstitution, length: int, max_iter: int = 64) -> List[str]:
    """
    Слова, содержащие все факторы длины ≤ length

    Берется k с min |ζ^k(c)| ≥ length; тогда окно длины length в ζ^n(b), n ≥ k,
    лежит внутри ζ^k(cd) для cd ∈ L_{ζ,2}, а случаи n < k покрыты словами ζ^n(b).

    Raises:
        NotStabilized: Некоторый символ не растет до нужной длины
    """
    words: List[str] = list(zeta.alphabet)
    current = {b: b for b in zeta.alphabet}
    k = 0
    while min(len(w) for w in current.values()) < length:
        k += 1
        if k > max_iter:
            raise NotStabilized(
                f"Образы ζ^k не достигают длины {length}",
                {"max_iter": max_iter, "length": length},
            )
        current = {b: zeta.apply(w) for b, w in current.items()}
        words.extend(current.values())
    pairs = sorted(seq_language(zeta, 2)) if len(zeta.alphabet) else []
    words.extend(current[u[0]] + current[u[1]] for u in pairs)
    logger.debug(f"Покрывающие слова: k={k}, {len(words)} слов")
    return words


def _positions(text: str, word: str) -> int:
    """Битовая маска позиций вхождений word в text."""
    mask = 0
    start = text.find(word)
    while start != -1:
        mask |= 1 << start
        start = text.find(word, start + 1)
    return mask


@dataclass(frozen=True)
class CorrelationSet:
    w1: str
    w2: str
    horizon: int
    hits: FrozenSet[int]
    exact: bool = True

    def gaps(self) -> List[int]:
        return [n for n in range(self.horizon + 1) if n not in self.hits]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "w1": self.w1,
            "w2": self.w2,
            "N": self.horizon,
            "hits": sorted(self.hits),
            "exact": self.exact,
        }

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["n", "hit"])
        for n in range(self.horizon + 1):
            writer.writerow([n, int(n in self.hits)])
        return buffer.getvalue()


def _require_word(zeta: WordSubstitution, w: str) -> None:
    if not w or w not in seq_language(zeta, len(w)):
        raise WordNotInLanguage(f"Слово {w!r} не лежит в языке", {"word": w})


def _hits(words: List[str], w1: str, w2: str, horizon: int) -> FrozenSet[int]:
    found = set()
    masks = [(_positions(text, w1), _positions(text, w2)) for text in words]
    for n in range(horizon + 1):
        if any(p1 & (p2 >> n) for p1, p2 in masks if p1 and p2):
            found.add(n)
    return frozenset(found)


def correlation_set(zeta: WordSubstitution, w1: str, w2: str, horizon: int) -> CorrelationSet:
    """
    Множество n ∈ [0, N] с [W₁] ∩ T^{-n}[W₂] ≠ ∅

    n попадает в hits, если есть слово u ∈ L_ζ с префиксом w1 и вхождением
    w2 с позиции n; при n < |w1| вхождения перекрываются и обязаны
    согласоваться на перекрытии.

    Raises:
        WordNotInLanguage: w1 или w2 не лежат в L_ζ
    """
    if horizon < 0:
        raise SchemaError("Горизонт N должен быть ≥ 0", {"N": horizon})
    _require_word(zeta, w1)
    _require_word(zeta, w2)
    length = max(horizon + len(w2), len(w1))
    hits = _hits(covering_words(zeta, length), w1, w2, horizon)
    logger.info(f"📊 Корреляция {w1}→{w2}: {len(hits)} из {horizon + 1}")
    return CorrelationSet(w1, w2, horizon, hits)


@dataclass(frozen=True)
class GapDensity:
    """
    Attributes:
        density: |[0, N] \\ hits| / (N + 1)
        running_max: Для каждого k - максимум плотности префиксов [0, j], j ≥ k
    """

    density: Fraction
    running_max: Tuple[Fraction, ...]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "density": str(self.density),
            "limsup_estimate": str(self.running_max[len(self.running_max) // 2]) if self.running_max else "0",
        }


def gap_density(c: CorrelationSet) -> GapDensity:
    prefix: List[Fraction] = []
    missing = 0
    for n in range(c.horizon + 1):
        if n not in c.hits:
            missing += 1
        prefix.append(Fraction(missing, n + 1))
    running: List[Fraction] = [Fraction(0)] * len(prefix)
    best: Optional[Fraction] = None
    for k in range(len(prefix) - 1, -1, -1):
        best = prefix[k] if best is None or prefix[k] > best else best
        running[k] = best
    return GapDensity(prefix[-1], tuple(running))


@dataclass(frozen=True)
class UnionGapSet:
    """J(W) = ⋃_{W′ ∈ L_{ζ,|W|}} J(W, W′) на отрезке [0, N]."""

    w: str
    horizon: int
    partners: Tuple[str, ...]
    gaps: FrozenSet[int]

    def as_correlation(self) -> CorrelationSet:
        hits = frozenset(range(self.horizon + 1)) - self.gaps
        return CorrelationSet(self.w, "*", self.horizon, hits)

    def to_dict(self) -> Dict[str, Any]:
        return {"w": self.w, "N": self.horizon, "partners": list(self.partners), "gaps": sorted(self.gaps)}


def union_gap_set(zeta: WordSubstitution, w: str, horizon: int) -> UnionGapSet:
    _require_word(zeta, w)
    partners = tuple(sorted(seq_language(zeta, len(w))))
    words = covering_words(zeta, horizon + len(w))
    gaps = set()
    for other in partners:
        hits = _hits(words, w, other, horizon)
        gaps.update(n for n in range(horizon + 1) if n not in hits)
    return UnionGapSet(w, horizon, partners, frozenset(gaps))
