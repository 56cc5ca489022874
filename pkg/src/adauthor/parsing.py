"""Extraction of structured arrays from free-form provider replies."""

from __future__ import annotations

import json
from typing import Callable, Optional


def first_json_array(raw: str, is_record: Callable[[dict], bool]) -> Optional[list]:
    """First well-formed JSON array in raw whose elements all satisfy
    is_record. An empty array qualifies. Returns None if no array matches."""
    decoder = json.JSONDecoder()
    idx = raw.find("[")
    while idx != -1:
        try:
            value, _ = decoder.raw_decode(raw, idx)
        except ValueError:
            value = None
        if isinstance(value, list) and all(
            isinstance(rec, dict) and is_record(rec) for rec in value
        ):
            return value
        idx = raw.find("[", idx + 1)
    return None
