"""Input validation helpers shared by entities, services and the CLI"""

import re
from typing import Optional, Sequence

import numpy as np

from domain.entities.exceptions import ValidationException


def validate_bits(bits, expected_len: Optional[int] = None, field_name: str = "bits") -> np.ndarray:
    """
    Validate a 0/1 vector (or a batch of them, last axis = bits)

    Returns:
        uint8 array with the same shape

    Raises:
        ValidationException: If entries are not binary or the length is wrong
    """
    arr = np.asarray(bits)
    if arr.ndim == 0:
        raise ValidationException(f"{field_name} must be a sequence of bits")
    if arr.size and not np.isin(arr, (0, 1)).all():
        raise ValidationException(f"{field_name} must contain only 0 and 1")
    if expected_len is not None and arr.shape[-1] != expected_len:
        raise ValidationException(
            f"{field_name} has length {arr.shape[-1]}, expected {expected_len}"
        )
    return arr.astype(np.uint8)


def validate_permutation(perm: Sequence[int], size: int, field_name: str = "permutation") -> tuple:
    """Check that perm is a bijection on {0..size-1}"""
    values = tuple(int(p) for p in perm)
    if len(values) != size:
        raise ValidationException(f"{field_name} has length {len(values)}, expected {size}")
    if sorted(values) != list(range(size)):
        raise ValidationException(f"{field_name} is not a permutation of 0..{size - 1}")
    return values


def validate_positive(value: float, field_name: str) -> float:
    if value is None or not value > 0:
        raise ValidationException(f"{field_name} must be positive, got {value}")
    return value


def parse_bit_string(text: str, expected_len: Optional[int] = None) -> np.ndarray:
    """
    Parse a codeword/message given as 0/1 text or as packed hex ("0x" prefix)

    Hex strings are unpacked most significant bit first and then cut to
    expected_len from the left (leading pad bits dropped).
    """
    if not isinstance(text, str):
        raise ValidationException("bit string must be a string")
    text = text.strip().replace(" ", "").replace("_", "")
    if text.lower().startswith("0x"):
        digits = text[2:]
        if not re.fullmatch(r"[0-9a-fA-F]+", digits):
            raise ValidationException("hex bit string contains invalid characters")
        width = len(digits) * 4
        value = int(digits, 16)
        bits = [(value >> (width - 1 - i)) & 1 for i in range(width)]
        if expected_len is not None:
            if expected_len > width:
                raise ValidationException(f"hex string too short for {expected_len} bits")
            bits = bits[width - expected_len:]
        return np.asarray(bits, dtype=np.uint8)
    if not re.fullmatch(r"[01]*", text):
        raise ValidationException("bit string must contain only 0 and 1")
    return validate_bits([int(c) for c in text], expected_len, field_name="bit string")


def format_bits(bits) -> str:
    return "".join(str(int(b)) for b in np.asarray(bits).ravel())
