"""Structure-aware selection of corpus examples by weighted module matching.

Candidates are corpus entries sharing at least one module with any plan node;
each candidate scores the sum over nodes of (module overlap x node weight).
Raw node weights are the default; normalized weights divide every score by
the same constant, so the ranking is identical in both modes.

A semantic baseline that asks a model to pick entries by description is kept
for comparison; its rank-position scores are an artifact convention and are
flagged by ``method`` in the result.
"""

from __future__ import annotations

import json
import re
import time
from dataclasses import dataclass, field

from .corpus import Corpus
from .errors import BaselineParseError, EmptyCorpusError
from .llm import LlmClient
from .planner import PipelinePlan, normalize_weights

_FENCED_BLOCK = re.compile(r"```[a-zA-Z0-9_-]*\s*\n(.*?)```", re.DOTALL)

WEIGHT_MODES = ("raw", "normalized")


@dataclass(frozen=True)
class ScoredCandidate:
    """One ranked corpus entry with its per-node hit breakdown."""

    entry_id: str
    score: float
    node_hits: tuple[tuple[int, int], ...]

    def to_dict(self) -> dict:
        return {
            "entry_id": self.entry_id,
            "score": self.score,
            "node_hits": [[i, h] for i, h in self.node_hits],
        }


@dataclass
class RetrievalResult:
    candidates: list[ScoredCandidate]
    k: int
    weight_mode: str
    plan_digest: str
    method: str = "module-match"

    def entry_ids(self) -> list[str]:
        return [c.entry_id for c in self.candidates]

    def to_dict(self) -> dict:
        return {
            "plan_digest": self.plan_digest,
            "k": self.k,
            "weight_mode": self.weight_mode,
            "method": self.method,
            "candidates": [c.to_dict() for c in self.candidates],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RetrievalResult":
        return cls(
            candidates=[
                ScoredCandidate(
                    entry_id=c["entry_id"],
                    score=c["score"],
                    node_hits=tuple((int(i), int(h)) for i, h in c.get("node_hits", [])),
                )
                for c in data["candidates"]
            ],
            k=int(data["k"]),
            weight_mode=data["weight_mode"],
            plan_digest=data.get("plan_digest", ""),
            method=data.get("method", "module-match"),
        )


def count_hits(entry_modules, node_modules) -> int:
    """Cardinality of the overlap; duplicates in the node list are ignored."""
    return len(set(entry_modules) & set(node_modules))


def retrieve(
    corpus: Corpus,
    plan: PipelinePlan,
    k: int = 3,
    weight_mode: str = "raw",
    exclude: set[str] | None = None,
) -> RetrievalResult:
    """Top-``k`` corpus entries by weighted module overlap with ``plan``.

    ``exclude`` removes entry ids from the candidate pool before ranking
    (the UI's rejection mechanism). Zero-hit entries never appear; a plan
    matching nothing yields an empty candidate list, not an error.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if weight_mode not in WEIGHT_MODES:
        raise ValueError(f"weight_mode must be one of {WEIGHT_MODES}, got {weight_mode!r}")
    if not corpus.entries:
        raise EmptyCorpusError("corpus has zero entries")
    excluded = exclude or set()

    if weight_mode == "raw":
        weights = [float(node.weight) for node in plan.nodes]
    else:
        weights = normalize_weights(plan)

    candidate_ids: set[str] = set()
    for node in plan.nodes:
        for module in node.modules:
            candidate_ids.update(corpus.module_index.get(module, ()))
    candidate_ids -= excluded

    node_module_sets = [set(node.modules) for node in plan.nodes]
    scored: list[ScoredCandidate] = []
    for entry in corpus.entries:
        if entry.id not in candidate_ids:
            continue
        entry_modules = set(entry.modules)
        hits = tuple(
            (i, len(entry_modules & node_modules))
            for i, node_modules in enumerate(node_module_sets)
        )
        score = sum(h * weights[i] for i, h in hits)
        scored.append(ScoredCandidate(entry_id=entry.id, score=score, node_hits=hits))

    scored.sort(key=lambda c: (-c.score, c.entry_id))
    return RetrievalResult(
        candidates=scored[:k],
        k=k,
        weight_mode=weight_mode,
        plan_digest=plan.digest(),
    )


def timed_retrieve(
    corpus: Corpus,
    plan: PipelinePlan,
    k: int = 3,
    weight_mode: str = "raw",
    exclude: set[str] | None = None,
) -> tuple[RetrievalResult, float]:
    """:func:`retrieve` plus monotonic-clock elapsed seconds."""
    start = time.perf_counter()
    result = retrieve(corpus, plan, k=k, weight_mode=weight_mode, exclude=exclude)
    return result, time.perf_counter() - start


def build_baseline_prompt(corpus: Corpus, query: str, k: int) -> str:
    listing = "\n".join(f"- {entry.id}: {entry.description.strip()}" for entry in corpus.entries)
    return (
        "You select reference examples for a vtk.js code-generation task.\n"
        f"From the corpus entries below, pick the {k} most relevant to the request, "
        "best first.\nRespond with a single fenced JSON array of entry ids and "
        "nothing else.\n\n"
        f"Corpus entries:\n{listing}\n\nRequest:\n{query}\n"
    )


def semantic_retrieve_baseline(
    corpus: Corpus,
    query: str,
    llm: LlmClient,
    k: int = 3,
) -> RetrievalResult:
    """LLM-driven baseline: rank entries by prompting over their descriptions.

    Scores are assigned by rank position (k, k-1, ...); ids the model invents
    are dropped silently.
    """
    if not corpus.entries:
        raise EmptyCorpusError("corpus has zero entries")
    response = llm.complete([("user", build_baseline_prompt(corpus, query, k))])
    raw = response.content
    m = _FENCED_BLOCK.search(raw)
    block = m.group(1) if m else raw.strip()
    try:
        ranked = json.loads(block)
    except json.JSONDecodeError as exc:
        raise BaselineParseError(f"baseline output is not a JSON array: {exc}", raw_output=raw) from exc
    if not isinstance(ranked, list) or not all(isinstance(x, str) for x in ranked):
        raise BaselineParseError("baseline output must be a JSON array of entry ids", raw_output=raw)

    known = {entry.id for entry in corpus.entries}
    kept: list[str] = []
    for entry_id in ranked:
        if entry_id in known and entry_id not in kept:
            kept.append(entry_id)
    if not kept:
        raise BaselineParseError("baseline selected no known entry ids", raw_output=raw)

    candidates = [
        ScoredCandidate(entry_id=entry_id, score=float(k - rank), node_hits=())
        for rank, entry_id in enumerate(kept[:k])
    ]
    return RetrievalResult(
        candidates=candidates,
        k=k,
        weight_mode="raw",
        plan_digest="",
        method="semantic-baseline",
    )
