"""Load, validate, and index a vtk.js example corpus.

An example corpus is a directory of per-example folders:

    <root>/<example_id>/code.html          (required, UTF-8)
    <root>/<example_id>/description.txt    (required, UTF-8)
    <root>/<example_id>/meta.json          (optional)

Module references are recognized with line-local pattern matching, which
covers both UMD-style dotted access (``vtk.Rendering.Core.vtkActor``) and
ES-module imports, without a full JavaScript parser.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DuplicateIdError, MetaMismatchError, MissingFileError

CATEGORIES = ("io", "filter", "rendering")

# vtk.js module identifier: "vtk" followed by an uppercase letter.
_IDENT = r"vtk[A-Z][A-Za-z0-9]*"

# Dotted chain rooted at the `vtk` global, e.g. vtk.Rendering.Core.vtkActor.
_DOTTED = re.compile(rf"\bvtk(?:\.[A-Za-z_][A-Za-z0-9_]*)*\.({_IDENT})\b")

# Identifiers bound by an import/require statement on one line.
_IMPORT_DEFAULT = re.compile(rf"\bimport\s+({_IDENT})\b")
_IMPORT_NAMED = re.compile(r"\bimport\s*\{([^}]*)\}")
_REQUIRE = re.compile(rf"\b(?:const|let|var)\s+({_IDENT})\s*=\s*require\b")

# Module-path segment inside a quoted import path, e.g. '.../Core/vtkActor'.
_PATH_SEGMENT = re.compile(rf"['\"][^'\"]*/({_IDENT})(?:\.js)?['\"]")

_NAMED_IDENT = re.compile(rf"\b({_IDENT})\b")


def extract_modules(code: str) -> list[str]:
    """Return all distinct vtk.js module names referenced in ``code``.

    Names are returned in first-occurrence order. Matching is line-local:
    a reference split across lines is not recognized. Unrecognizable text
    yields an empty list.
    """
    seen: dict[str, None] = {}
    offset = 0
    for line in code.split("\n"):
        hits: list[tuple[int, str]] = []
        for m in _DOTTED.finditer(line):
            hits.append((offset + m.start(1), m.group(1)))
        for m in _IMPORT_DEFAULT.finditer(line):
            hits.append((offset + m.start(1), m.group(1)))
        for m in _IMPORT_NAMED.finditer(line):
            for ident in _NAMED_IDENT.finditer(m.group(1)):
                hits.append((offset + m.start(1) + ident.start(1), ident.group(1)))
        for m in _REQUIRE.finditer(line):
            hits.append((offset + m.start(1), m.group(1)))
        for m in _PATH_SEGMENT.finditer(line):
            hits.append((offset + m.start(1), m.group(1)))
        for _, name in sorted(hits):
            seen.setdefault(name, None)
        offset += len(line) + 1
    return list(seen)


@dataclass(frozen=True)
class CorpusEntry:
    """One validated corpus example."""

    id: str
    code: str
    description: str
    modules: tuple[str, ...]
    category: str
    title: str
    source_path: str

    def summary(self) -> dict:
        return {
            "id": self.id,
            "title": self.title,
            "category": self.category,
            "modules": list(self.modules),
        }

    def to_dict(self) -> dict:
        return {
            **self.summary(),
            "description": self.description,
            "code": self.code,
            "source_path": self.source_path,
        }


@dataclass
class Corpus:
    """Immutable set of entries plus a module -> entry-id inverted index."""

    entries: list[CorpusEntry] = field(default_factory=list)
    module_index: dict[str, set[str]] = field(default_factory=dict)

    @classmethod
    def from_entries(cls, entries: list[CorpusEntry]) -> "Corpus":
        index: dict[str, set[str]] = {}
        seen_ids: set[str] = set()
        for entry in entries:
            if entry.id in seen_ids:
                raise DuplicateIdError(f"duplicate corpus entry id '{entry.id}'")
            seen_ids.add(entry.id)
            for module in entry.modules:
                index.setdefault(module, set()).add(entry.id)
        return cls(entries=list(entries), module_index=index)

    def get(self, entry_id: str) -> CorpusEntry | None:
        for entry in self.entries:
            if entry.id == entry_id:
                return entry
        return None

    def __len__(self) -> int:
        return len(self.entries)


def lookup(corpus: Corpus, module: str) -> set[str]:
    """Entry ids whose module set contains ``module`` (empty if unknown)."""
    return set(corpus.module_index.get(module, set()))


def _read_text(path: Path, entry_id: str) -> str:
    if not path.is_file():
        raise MissingFileError(f"example '{entry_id}' is missing {path.name}")
    return path.read_text(encoding="utf-8")


def _validate_meta(entry_id: str, meta: dict, extracted: list[str]) -> dict:
    out: dict = {}
    title = meta.get("title")
    if isinstance(title, str) and title:
        out["title"] = title
    category = meta.get("category")
    if category is not None:
        if category not in CATEGORIES:
            raise MetaMismatchError(entry_id, [f"category={category!r}"], list(CATEGORIES))
        out["category"] = category
    modules = meta.get("modules")
    if modules is not None:
        if not isinstance(modules, list) or any(not isinstance(m, str) for m in modules):
            raise MetaMismatchError(entry_id, [repr(modules)], extracted)
        # Meta order is advisory; membership must agree with extraction.
        if sorted(set(modules)) != sorted(extracted):
            raise MetaMismatchError(entry_id, list(modules), extracted)
        out["modules"] = extracted
    return out


def load_corpus(root: str | Path) -> Corpus:
    """Build a :class:`Corpus` from the on-disk layout under ``root``.

    Modules come from ``meta.json`` when present and consistent with
    extraction; a disagreement raises :class:`MetaMismatchError` rather than
    silently preferring either side.
    """
    root = Path(root)
    entries: list[CorpusEntry] = []
    for directory in sorted(p for p in root.iterdir() if p.is_dir()):
        entry_id = directory.name
        code = _read_text(directory / "code.html", entry_id)
        description = _read_text(directory / "description.txt", entry_id)
        extracted = extract_modules(code)

        title = entry_id.replace("_", " ")
        category = "rendering"
        meta_path = directory / "meta.json"
        if meta_path.is_file():
            meta = json.loads(meta_path.read_text(encoding="utf-8"))
            validated = _validate_meta(entry_id, meta, extracted)
            title = validated.get("title", title)
            category = validated.get("category", category)

        entries.append(
            CorpusEntry(
                id=entry_id,
                code=code,
                description=description,
                modules=tuple(extracted),
                category=category,
                title=title,
                source_path=directory.name,
            )
        )
    return Corpus.from_entries(entries)
