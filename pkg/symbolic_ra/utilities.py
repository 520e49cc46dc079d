from __future__ import annotations

from fractions import Fraction
from typing import Dict, Hashable, Iterable, Mapping, TypeVar

import regex

K = TypeVar('K', bound=Hashable)
V = TypeVar('V')

# Accepts 3, -3, 0.5, 0,5 (decimal comma) and 1/3
FRACTION_PATTERN = regex.compile(r'\s*(?P<sign>[-+−]?)\s*(?P<whole>\d+)(?:[.,](?P<decimals>\d+))?(?:/(?P<denominator>\d+))?\s*')

# Denominators beyond this many decimal places are printed as n/d
MAX_DECIMAL_PLACES = 12


def is_injective(mapping: Mapping) -> bool:
    values = list(mapping.values())
    return len(values) == len(set(values))


def compose(outer: Mapping[V, object], inner: Mapping[K, V]) -> Dict[K, object]:
    """
    The composition outer ∘ inner of two partial maps.
    Defined exactly where inner is defined and its image lies in the domain of outer.
    """
    return {key: outer[middle] for key, middle in inner.items() if middle in outer}


def first_appearance_ids(keys: Iterable[K]) -> Dict[K, int]:
    """Numbers each distinct key 0, 1, 2, ... in the order it first shows up."""
    ids: Dict[K, int] = {}
    for key in keys:
        if key not in ids:
            ids[key] = len(ids)
    return ids


def parse_fraction(text: str) -> Fraction:
    match = FRACTION_PATTERN.fullmatch(text)
    if match is None:
        raise ValueError(f'"{text}" is not a rational literal. Use forms like 3, -0.5, 0,5 or 1/3.')
    value = Fraction(int(match['whole']))
    if match['decimals']:
        value += Fraction(int(match['decimals']), 10 ** len(match['decimals']))
    if match['denominator']:
        denominator = int(match['denominator'])
        if denominator == 0:
            raise ValueError(f'"{text}" divides by zero.')
        value /= denominator
    if match['sign'] in ('-', '−'):
        value = -value
    return value


def format_fraction(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    for places in range(1, MAX_DECIMAL_PLACES + 1):
        scale = 10 ** places
        if scale % value.denominator == 0:
            digits = str(abs(value.numerator) * (scale // value.denominator)).rjust(places + 1, '0')
            sign = '-' if value < 0 else ''
            return f'{sign}{digits[:-places]}.{digits[-places:]}'
    return f'{value.numerator}/{value.denominator}'

