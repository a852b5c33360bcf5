"""Small input validation helpers shared by the estimator-style classes."""

from __future__ import annotations

from collections.abc import Iterable


def check_text_sequence(X) -> list[str]:
    """Materialize X as a list of strings.

    Rejects a bare string (a common slip: pass ["text"], not "text") and
    any non-string element.
    """
    if isinstance(X, (str, bytes)):
        raise TypeError("expected an iterable of strings, got a single string")
    if not isinstance(X, Iterable):
        raise TypeError(f"expected an iterable of strings, got {type(X).__name__}")
    out = []
    for i, item in enumerate(X):
        if not isinstance(item, str):
            raise TypeError(f"element {i} is {type(item).__name__}, expected str")
        out.append(item)
    return out


def check_min_tokens(value) -> int:
    """Validate a minimum sentence length; two is the hard floor."""
    if not isinstance(value, int) or isinstance(value, bool):
        raise TypeError(f"min_tokens must be an int, got {type(value).__name__}")
    if value < 2:
        raise ValueError(f"min_tokens must be >= 2, got {value}")
    return value
