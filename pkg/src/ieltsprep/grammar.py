"""Pluggable grammar checking.

Two backends: a hermetic builtin rule set (used by all tests) and an
HTTP adapter for a LanguageTool-compatible proofreading service. The
builtin rule table is documented in docs/grammar_rules.md.
"""

from __future__ import annotations

import re
import threading
from dataclasses import dataclass
from importlib import resources


class BackendUnavailableError(RuntimeError):
    """The grammar backend could not be reached; distinct from zero issues."""


@dataclass(frozen=True)
class GrammarIssue:
    span: tuple[int, int]
    category: str  # grammar | spelling | punctuation
    message: str
    suggestion: str | None = None

    def __post_init__(self):
        start, end = self.span
        if not (0 <= start < end):
            raise ValueError(f"invalid issue span {self.span}")


def _load_misspellings() -> dict[str, str]:
    text = resources.files("ieltsprep.data").joinpath("misspellings.tsv").read_text("utf-8")
    table = {}
    for line in text.splitlines():
        if line.strip():
            wrong, right = line.split("\t")
            table[wrong.strip().lower()] = right.strip()
    return table


# Third-person-singular agreement: base form -> -s form.
_SVA_VERBS = {
    "go": "goes", "do": "does", "have": "has", "want": "wants", "need": "needs",
    "like": "likes", "make": "makes", "take": "takes", "get": "gets", "think": "thinks",
    "know": "knows", "say": "says", "see": "sees", "come": "comes", "work": "works",
    "live": "lives", "play": "plays", "study": "studies", "try": "tries", "feel": "feels",
    "believe": "believes", "seem": "seems", "look": "looks", "give": "gives",
    "find": "finds", "tell": "tells", "become": "becomes", "leave": "leaves",
    "keep": "keeps", "help": "helps", "talk": "talks", "start": "starts",
    "show": "shows", "hear": "hears", "run": "runs", "move": "moves", "bring": "brings",
    "happen": "happens", "write": "writes", "provide": "provides", "learn": "learns",
    "change": "changes", "understand": "understands", "watch": "watches",
    "follow": "follows", "stop": "stops", "create": "creates", "speak": "speaks",
    "read": "reads", "spend": "spends", "grow": "grows", "open": "opens",
    "walk": "walks", "win": "wins", "offer": "offers", "remember": "remembers",
    "love": "loves", "consider": "considers", "buy": "buys", "wait": "waits",
    "expect": "expects", "build": "builds", "stay": "stays", "cause": "causes",
    "enjoy": "enjoys", "eat": "eats", "cost": "costs", "require": "requires",
    "suggest": "suggests", "agree": "agrees", "argue": "argues", "improve": "improves",
    "reduce": "reduces", "increase": "increases", "allow": "allows", "prefer": "prefers",
}
_SVA_INVERSE = {v: k for k, v in _SVA_VERBS.items()}

_SVA_SING_RE = re.compile(
    r"\b(he|she|it)\s+(" + "|".join(sorted(_SVA_VERBS)) + r")\b", re.IGNORECASE
)
_SVA_PLUR_RE = re.compile(
    r"\b(I|we|they|you)\s+(" + "|".join(sorted(_SVA_INVERSE)) + r")\b", re.IGNORECASE
)
_REPEAT_RE = re.compile(r"\b([A-Za-z]+)(\s+)\1\b", re.IGNORECASE)
_DOUBLE_PUNCT_RE = re.compile(r"([!?,;:])\1+|(?<!\.)\.\.(?!\.)")
_WORD_RE = re.compile(r"[A-Za-z]+(?:'[A-Za-z]+)*")


class BuiltinGrammarBackend:
    """Deterministic rule-based checker: agreement, repeats, doubled
    punctuation, and table-driven spelling."""

    name = "builtin"

    def __init__(self):
        self._misspellings = _load_misspellings()

    def check(self, text: str) -> list[GrammarIssue]:
        if not text:
            raise ValueError("empty text")
        issues: list[GrammarIssue] = []
        for match in _SVA_SING_RE.finditer(text):
            verb = match.group(2)
            start = match.start(2)
            fixed = _SVA_VERBS[verb.lower()]
            if verb[0].isupper():
                fixed = fixed.capitalize()
            issues.append(GrammarIssue(
                span=(start, start + len(verb)),
                category="grammar",
                message=f'Subject-verb agreement: "{match.group(1)} {verb}" should use "{fixed}".',
                suggestion=fixed,
            ))
        for match in _SVA_PLUR_RE.finditer(text):
            verb = match.group(2)
            start = match.start(2)
            fixed = _SVA_INVERSE[verb.lower()]
            if verb[0].isupper():
                fixed = fixed.capitalize()
            issues.append(GrammarIssue(
                span=(start, start + len(verb)),
                category="grammar",
                message=f'Subject-verb agreement: "{match.group(1)} {verb}" should use "{fixed}".',
                suggestion=fixed,
            ))
        for match in _REPEAT_RE.finditer(text):
            issues.append(GrammarIssue(
                span=(match.start(), match.end()),
                category="grammar",
                message=f'Repeated word "{match.group(1)}".',
                suggestion=match.group(1),
            ))
        for match in _DOUBLE_PUNCT_RE.finditer(text):
            issues.append(GrammarIssue(
                span=(match.start(), match.end()),
                category="punctuation",
                message="Doubled punctuation mark.",
                suggestion=text[match.start()],
            ))
        for match in _WORD_RE.finditer(text):
            fixed = self._misspellings.get(match.group(0).lower())
            if fixed is not None:
                if match.group(0)[0].isupper():
                    fixed = fixed.capitalize()
                issues.append(GrammarIssue(
                    span=(match.start(), match.end()),
                    category="spelling",
                    message=f'Possible spelling mistake: "{match.group(0)}".',
                    suggestion=fixed,
                ))
        issues.sort(key=lambda i: (i.span, i.category, i.message))
        return issues


class LanguageToolBackend:
    """Adapter for a LanguageTool-compatible HTTP proofreading service.

    Calls are serialized internally so callers may invoke concurrently.
    """

    name = "languagetool"

    _CATEGORY_MAP = {"TYPOS": "spelling", "PUNCTUATION": "punctuation"}

    def __init__(self, base_url: str, language: str = "en-US", timeout: float = 10.0):
        self.base_url = base_url.rstrip("/")
        self.language = language
        self.timeout = timeout
        self._lock = threading.Lock()

    def check(self, text: str) -> list[GrammarIssue]:
        if not text:
            raise ValueError("empty text")
        import httpx

        with self._lock:
            try:
                response = httpx.post(
                    f"{self.base_url}/v2/check",
                    data={"text": text, "language": self.language},
                    timeout=self.timeout,
                )
                response.raise_for_status()
            except Exception as exc:
                raise BackendUnavailableError(
                    f"grammar service at {self.base_url} unavailable: {exc}"
                ) from exc
        issues = []
        for match in response.json().get("matches", []):
            start = match["offset"]
            end = start + match["length"]
            category_id = match.get("rule", {}).get("category", {}).get("id", "")
            replacements = match.get("replacements", [])
            issues.append(GrammarIssue(
                span=(start, end),
                category=self._CATEGORY_MAP.get(category_id, "grammar"),
                message=match.get("message", ""),
                suggestion=replacements[0]["value"] if replacements else None,
            ))
        issues.sort(key=lambda i: (i.span, i.category, i.message))
        return issues


def make_backend(name: str, **kwargs):
    if name == "builtin":
        return BuiltinGrammarBackend()
    if name == "languagetool":
        return LanguageToolBackend(**kwargs)
    raise ValueError(f"unknown grammar backend {name!r}")
