"""Turn a natural-language visualization request into a weighted pipeline plan.

The planning model receives the node schema and the three weight tiers in its
prompt and must answer with a single fenced JSON block. Plans are validated
against the node invariants before anything downstream sees them; edited
plans coming back from the UI pass through the same :func:`validate_plan`.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field

from .errors import OutOfRangeError, PlanParseError, PlanValidationError
from .llm import LlmClient
from .templates import load_template

_MODULE_IDENT = re.compile(r"^vtk[A-Z][A-Za-z0-9]*$")

_FENCED_BLOCK = re.compile(r"```[a-zA-Z0-9_-]*\s*\n(.*?)```", re.DOTALL)


@dataclass(frozen=True)
class WeightTier:
    """One of the three node-priority layers, with its inclusive weight range."""

    tier: str
    range: tuple[int, int]


WEIGHT_TIERS = (
    WeightTier("core_process", (8, 10)),
    WeightTier("contextual_configuration", (5, 7)),
    WeightTier("scene_management", (1, 4)),
)


def tier_of(weight: int) -> WeightTier:
    """Map an integer weight in [1, 10] to its tier."""
    for tier in WEIGHT_TIERS:
        lo, hi = tier.range
        if lo <= weight <= hi:
            return tier
    raise OutOfRangeError(f"weight {weight} outside [1, 10]")


@dataclass
class PipelineNode:
    """One planned step: candidate modules plus an integer priority weight."""

    phase: str
    name: str
    modules: list[str]
    weight: int
    description: str = ""

    def to_dict(self) -> dict:
        return {
            "phase": self.phase,
            "name": self.name,
            "modules": list(self.modules),
            "weight": self.weight,
            "description": self.description,
        }


@dataclass
class PipelinePlan:
    """Ordered decomposition of a user request into pipeline nodes."""

    query: str
    nodes: list[PipelineNode] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"query": self.query, "nodes": [n.to_dict() for n in self.nodes]}

    def digest(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True)
class PlanViolation:
    """One invariant violation found by :func:`validate_plan`."""

    node_index: int | None
    field: str
    message: str

    def __str__(self) -> str:
        where = "plan" if self.node_index is None else f"node {self.node_index}"
        return f"{where}/{self.field}: {self.message}"

    def to_dict(self) -> dict:
        return {"node_index": self.node_index, "field": self.field, "message": self.message}


def validate_plan(plan: PipelinePlan) -> list[PlanViolation]:
    """Return every invariant violation in ``plan`` (empty list = valid)."""
    violations: list[PlanViolation] = []
    if not plan.nodes:
        violations.append(PlanViolation(None, "nodes", "plan has no nodes"))
    for i, node in enumerate(plan.nodes):
        if not isinstance(node.phase, str) or not node.phase.strip():
            violations.append(PlanViolation(i, "phase", "must be a nonempty string"))
        if not isinstance(node.name, str) or not node.name.strip():
            violations.append(PlanViolation(i, "name", "must be a nonempty string"))
        if not node.modules:
            violations.append(PlanViolation(i, "modules", "must list at least one candidate module"))
        else:
            for module in node.modules:
                if not isinstance(module, str) or not _MODULE_IDENT.match(module):
                    violations.append(
                        PlanViolation(i, "modules", f"{module!r} is not a vtk.js module name")
                    )
        if not isinstance(node.weight, int) or isinstance(node.weight, bool):
            violations.append(PlanViolation(i, "weight", "must be an integer"))
        elif not 1 <= node.weight <= 10:
            violations.append(PlanViolation(i, "weight", f"{node.weight} outside [1, 10]"))
        if not isinstance(node.description, str):
            violations.append(PlanViolation(i, "description", "must be a string"))
    return violations


def normalize_weights(plan: PipelinePlan) -> list[float]:
    """Each node's weight divided by the sum of all weights (sums to 1)."""
    total = sum(node.weight for node in plan.nodes)
    return [node.weight / total for node in plan.nodes]


def plan_from_dict(data: dict, query: str | None = None) -> PipelinePlan:
    """Build a plan from its document form; raises on missing structure."""
    if not isinstance(data, dict):
        raise PlanParseError(f"plan document must be an object, got {type(data).__name__}")
    raw_nodes = data.get("nodes")
    if not isinstance(raw_nodes, list):
        raise PlanParseError("plan document has no 'nodes' list")
    nodes = []
    for raw in raw_nodes:
        if not isinstance(raw, dict):
            raise PlanParseError(f"node entry is not an object: {raw!r}")
        try:
            nodes.append(
                PipelineNode(
                    phase=raw.get("phase", ""),
                    name=raw.get("name", ""),
                    modules=list(raw.get("modules") or []),
                    weight=raw.get("weight", 0),
                    description=raw.get("description", ""),
                )
            )
        except TypeError as exc:
            raise PlanParseError(f"malformed node entry: {exc}") from exc
    return PipelinePlan(query=query or data.get("query", ""), nodes=nodes)


def parse_plan_output(raw: str, query: str) -> PipelinePlan:
    """Extract the first fenced JSON block from model output and parse it."""
    block = None
    m = _FENCED_BLOCK.search(raw)
    if m:
        block = m.group(1)
    else:
        stripped = raw.strip()
        if stripped.startswith("{"):
            block = stripped
    if block is None:
        raise PlanParseError("no fenced JSON block in planner output", raw_output=raw)
    try:
        data = json.loads(block)
    except json.JSONDecodeError as exc:
        raise PlanParseError(f"planner output is not valid JSON: {exc}", raw_output=raw) from exc
    return plan_from_dict(data, query=query)


@dataclass
class PlanningConfig:
    """Options for the planning call."""

    max_parse_retries: int = 1


def build_planning_prompt(query: str) -> str:
    return load_template("planning_prompt.txt").format(query=query)


def plan(query: str, llm: LlmClient, config: PlanningConfig | None = None) -> PipelinePlan:
    """Plan ``query`` with the given client and validate the result.

    Retries once on a parse failure, appending the failure to the
    conversation, then surfaces the error.
    """
    if not query.strip():
        raise PlanValidationError([PlanViolation(None, "query", "query is empty")])
    config = config or PlanningConfig()
    prompt = build_planning_prompt(query)
    messages = [("user", prompt)]
    attempts = config.max_parse_retries + 1
    for attempt in range(attempts):
        response = llm.complete(messages)
        try:
            parsed = parse_plan_output(response.content, query=query)
        except PlanParseError as exc:
            if attempt + 1 >= attempts:
                raise
            messages = messages + [
                ("assistant", response.content),
                (
                    "user",
                    f"The previous reply could not be parsed ({exc}). "
                    "Respond again with a single fenced JSON block matching the schema.",
                ),
            ]
            continue
        violations = validate_plan(parsed)
        if violations:
            raise PlanValidationError(violations)
        return parsed
    raise PlanParseError("planner produced no parseable output")  # pragma: no cover
