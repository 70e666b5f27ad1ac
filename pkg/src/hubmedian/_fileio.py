"""Small helpers for functions that accept either paths or open text files."""

from __future__ import annotations

import contextlib
import io
from pathlib import Path
from typing import IO, Iterator, Union

TextSource = Union[str, Path, IO[str]]


@contextlib.contextmanager
def open_text_read(source: TextSource) -> Iterator[IO[str]]:
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8", newline="") as fh:
            yield fh
    else:
        yield source


@contextlib.contextmanager
def open_text_write(sink: TextSource) -> Iterator[IO[str]]:
    if isinstance(sink, (str, Path)):
        with open(sink, "w", encoding="utf-8", newline="") as fh:
            yield fh
    else:
        yield sink


def source_name(source: TextSource) -> str:
    if isinstance(source, (str, Path)):
        return str(source)
    return getattr(source, "name", "<stream>")


def is_stringio(obj) -> bool:
    return isinstance(obj, io.StringIO)
