"""Prompt construction for the six generation actions, plus response parsing.

Actions: i1 designs from scratch; e1 asks for a totally different form given
several representatives; e2 blends an elite reference into a parent; m1 and
m2 mutate one candidate (new mechanisms, new parameter settings); s1 reasons
over a leaf-to-root path.  A second, separate prompt re-describes a freshly
generated function ("alignment").
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from random import Random

from evotree.problems import ProblemSpec
from evotree.search import SearchNode

ACTIONS = ("i1", "e1", "e2", "m1", "m2", "s1")

# Context arity accepted per action.  e1 admits a single candidate because
# the second initial generation can only reference the first one.
_ARITY = {"i1": (0, 0), "e1": (1, 5), "e2": (2, 2), "m1": (1, 1), "m2": (1, 1), "s1": (2, None)}

_GENERIC_DESCRIPTION = (
    "Solving a black-box combinatorial optimization problem by designing a "
    "scoring heuristic that is called inside a fixed solution framework."
)
_GENERIC_FRAMEWORK = (
    "The function is called repeatedly by a fixed framework; it receives the "
    "listed inputs and must return the listed outputs."
)


class PromptError(ValueError):
    """Unknown action, wrong context arity, or a missing template asset."""


class GenerationParseError(ValueError):
    """Model response unusable; `kind` is 'NoCode' or 'NoFunctionName'."""

    def __init__(self, kind: str, message: str) -> None:
        super().__init__(message)
        self.kind = kind


@dataclass(frozen=True)
class ContextCandidate:
    """One in-prompt exemplar; objective is the to-minimize value (-score)."""

    code: str
    description: str
    objective: float | None = None


@dataclass(frozen=True)
class ParsedGeneration:
    description_draft: str
    code: str


def context_from_node(node: SearchNode) -> ContextCandidate:
    objective = None if node.performance is None else -node.performance
    return ContextCandidate(code=node.code, description=node.description, objective=objective)


@lru_cache(maxsize=None)
def _load_template(name: str) -> str:
    try:
        ref = resources.files("evotree").joinpath("templates", f"{name}.txt")
        return ref.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise PromptError(f"missing template asset {name!r}") from None


def _render(template: str, slots: dict[str, str]) -> str:
    # single pass so slot values are never rescanned for markers
    def fill(match: re.Match) -> str:
        key = match.group(1)
        if key not in slots:
            raise PromptError(f"unfilled template slot {match.group()}")
        return slots[key]

    return re.sub(r"\{\{([a-z_]+)\}\}", fill, template).rstrip("\n")


def _candidate_blocks(context: list[ContextCandidate], scored: bool) -> str:
    blocks = []
    for rank, cand in enumerate(context, start=1):
        if scored:
            block = _load_template("candidate_scored")
            if cand.objective is None:
                block = block.replace("Objective value:\n{{objective}}\n", "")
            block = _render(
                block,
                {
                    "rank": str(rank),
                    "description": cand.description,
                    "code": cand.code,
                    "objective": "" if cand.objective is None else f"{cand.objective:.5f}",
                },
            )
        else:
            block = _render(
                _load_template("candidate_plain"),
                {"description": cand.description, "code": cand.code},
            )
        blocks.append(block)
    return "\n\n".join(blocks)


def _common_slots(spec: ProblemSpec, black_box: bool) -> dict[str, str]:
    if black_box:
        description = _GENERIC_DESCRIPTION
        framework = _GENERIC_FRAMEWORK
        inputs = tuple(f"input_{i}" for i in range(1, len(spec.input_names) + 1))
        outputs = tuple(f"output_{i}" for i in range(1, len(spec.output_names) + 1))
    else:
        description = spec.description
        framework = spec.framework_description
        inputs = spec.input_names
        outputs = spec.output_names
    return {
        "problem_description": description,
        "framework_description": framework,
        "function_name": spec.function_name,
        "input_count": str(len(inputs)),
        "input_names": ", ".join(f"'{name}'" for name in inputs),
        "output_count": str(len(outputs)),
        "output_names": ", ".join(f"'{name}'" for name in outputs),
    }


def render_prompt(
    action: str,
    spec: ProblemSpec,
    context: list[ContextCandidate],
    black_box: bool = False,
) -> str:
    if action not in ACTIONS:
        raise PromptError(f"unknown action {action!r}")
    lo, hi = _ARITY[action]
    if len(context) < lo or (hi is not None and len(context) > hi):
        raise PromptError(f"action {action} takes {lo}..{hi if hi is not None else 'n'} context candidates, got {len(context)}")
    slots = _common_slots(spec, black_box)
    if action in ("e1", "s1"):
        slots["candidate_count"] = str(len(context))
    if action != "i1":
        slots["candidates"] = _candidate_blocks(context, scored=action not in ("m1", "m2"))
    return _render(_load_template(action), slots)


def render_alignment_prompt(spec: ProblemSpec, design_idea: str, code: str, black_box: bool = False) -> str:
    if not design_idea.strip():
        raise PromptError("alignment needs a non-empty design idea")
    if not code.strip():
        raise PromptError("alignment needs non-empty code")
    slots = _common_slots(spec, black_box)
    slots["design_idea"] = design_idea
    slots["code"] = code
    return _render(_load_template("align"), slots)


def _fence_spans(text: str) -> list[tuple[int, int, str]]:
    """(start, end, inner_code) spans of triple-backtick fences."""
    spans = []
    pos = 0
    while True:
        start = text.find("```", pos)
        if start == -1:
            break
        end = text.find("```", start + 3)
        if end == -1:
            break
        inner = text[start + 3 : end]
        first_line, nl, rest = inner.partition("\n")
        tag = first_line.strip()
        if nl and (not tag or re.fullmatch(r"[A-Za-z][A-Za-z0-9_+-]*", tag)):
            inner = rest  # drop the info string ("python") or the empty opener line
        spans.append((start, end + 3, inner.strip("\n")))
        pos = end + 3
    return spans


def _mask_spans(text: str, spans: list[tuple[int, int, str]]) -> str:
    chars = list(text)
    for start, end, _ in spans:
        for i in range(start, end):
            if chars[i] != "\n":
                chars[i] = " "
    return "".join(chars)


def _brace_group(masked: str) -> str | None:
    start = masked.find("{")
    if start == -1:
        return None
    depth = 0
    for i in range(start, len(masked)):
        if masked[i] == "{":
            depth += 1
        elif masked[i] == "}":
            depth -= 1
            if depth == 0:
                return masked[start + 1 : i].strip()
    return None


def _def_block(text: str) -> str | None:
    """Longest run of lines starting at a `def` and staying inside the function."""
    lines = text.split("\n")
    blocks = []
    i = 0
    while i < len(lines):
        if lines[i].lstrip().startswith("def "):
            j = i + 1
            while j < len(lines):
                line = lines[j]
                stripped = line.strip()
                if not stripped or line[0] in " \t" or re.match(r"(def |import |from |@|#)", stripped):
                    j += 1
                else:
                    break
            blocks.append("\n".join(lines[i:j]).strip())
            i = j
        else:
            i += 1
    if not blocks:
        return None
    return max(blocks, key=len)


def parse_generation(text: str, function_name: str) -> ParsedGeneration:
    """Split a model response into the brace-wrapped idea and the code body."""
    spans = _fence_spans(text)
    masked = _mask_spans(text, spans)

    description = _brace_group(masked)
    if description is None or not description:
        lines = [ln.strip() for ln in masked.split("\n") if ln.strip()]
        description = lines[0] if lines else "No description provided."

    if spans:
        code = spans[0][2].strip()
    else:
        code = _def_block(text) or ""
    if not code:
        raise GenerationParseError("NoCode", "response contains no code fence or function body")
    if function_name not in code:
        raise GenerationParseError("NoFunctionName", f"code does not define {function_name!r}")
    return ParsedGeneration(description_draft=description, code=code)


def collect_path_candidates(node: SearchNode) -> list[ContextCandidate]:
    """Leaf-to-root candidates, deduplicated by exact code (deepest kept)."""
    out: list[ContextCandidate] = []
    seen: set[str] = set()
    cur: SearchNode | None = node
    while cur is not None and cur.code is not None:
        if cur.code not in seen:
            seen.add(cur.code)
            out.append(context_from_node(cur))
        cur = cur.parent
    return out


def _subtree_best(root_child: SearchNode) -> SearchNode:
    best = None
    for node in root_child.subtree():
        if node.performance is None:
            continue
        if (
            best is None
            or node.performance > best.performance
            or (node.performance == best.performance and node.id < best.id)
        ):
            best = node
    if best is None:
        raise ValueError("subtree holds no evaluated candidate")
    return best


def sample_subtree_representatives(root: SearchNode, rng: Random) -> list[ContextCandidate]:
    """Best candidate from each of 2 to 5 distinct root subtrees."""
    if len(root.children) < 2:
        raise ValueError("need at least two root subtrees to sample representatives")
    count = min(rng.randint(2, 5), len(root.children))
    picked = rng.sample(root.children, count)
    return [context_from_node(_subtree_best(child)) for child in picked]
