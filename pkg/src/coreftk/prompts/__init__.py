"""Versioned prompt templates and their rendering helpers.

Templates are plain text files in this package, split into a system and
a user section by ``=== system ===`` / ``=== user ===`` markers, with
``{{placeholder}}`` slots. They are injected by name so experiments can
pin and hash the exact wording used.
"""

from __future__ import annotations

import hashlib
import json
import re
from importlib import resources

from ..errors import ValidationError

PAIR_TEMPLATE = "pair_classify_v1"
METAPHOR_SINGLE_TEMPLATE = "metaphor_single_v1"
METAPHOR_MULTI_TEMPLATE = "metaphor_multi_v1"

_PLACEHOLDER = re.compile(r"\{\{(\w+)\}\}")
_SECTION = re.compile(r"^=== (system|user) ===$", re.MULTILINE)


def template_bytes(name: str) -> bytes:
    path = resources.files(__package__).joinpath(f"{name}.txt")
    try:
        return path.read_bytes()
    except FileNotFoundError:
        raise ValidationError(f"unknown prompt template: {name!r}") from None


def template_hash(name: str) -> str:
    return hashlib.sha256(template_bytes(name)).hexdigest()


def load_template(name: str) -> tuple[str, str]:
    """Return (system, user) sections of a template."""
    text = template_bytes(name).decode("utf-8")
    parts = _SECTION.split(text)
    # split yields ['', 'system', <system text>, 'user', <user text>]
    if len(parts) != 5 or parts[1] != "system" or parts[3] != "user":
        raise ValidationError(f"template {name!r} lacks system/user sections")
    return parts[2].strip(), parts[4].strip()


def fill(template: str, values: dict[str, str]) -> str:
    """Substitute ``{{name}}`` slots; any slot left unfilled is an error."""
    def sub(match):
        key = match.group(1)
        if key not in values:
            raise ValidationError(f"template placeholder left unfilled: {key!r}")
        return values[key]

    return _PLACEHOLDER.sub(sub, template)


def mark_span(tokens: list[str], start: int, end: int) -> str:
    """Sentence text with the [start, end) token span wrapped in <m> tags."""
    out = list(tokens)
    out[start] = "<m> " + out[start]
    out[end - 1] = out[end - 1] + " </m>"
    return " ".join(out)


def render_pair_prompt(corpus, pair, template: str | None = None) -> tuple[str, str]:
    """System+user messages asking for a Yes/No coreference verdict on a
    marked mention pair (sentence-level context)."""
    name = template or PAIR_TEMPLATE
    system, user = load_template(name)
    ma = corpus.mention(pair.a)
    mb = corpus.mention(pair.b)
    sent_a = corpus.sentence_of(ma)
    sent_b = corpus.sentence_of(mb)
    values = {
        "sentence_a": mark_span([t.text for t in sent_a.tokens],
                                ma.token_start, ma.token_end_exclusive),
        "sentence_b": mark_span([t.text for t in sent_b.tokens],
                                mb.token_start, mb.token_end_exclusive),
    }
    return fill(system, values), fill(user, values)


def render_metaphor_prompt(sentence: str, triggers: list[str], mode: str,
                           candidate_count: int = 5) -> tuple[str, str, str]:
    """System+user messages for constrained metaphoric paraphrasing, plus
    the template hash for provenance.

    Every trigger must occur verbatim in the sentence; that is checked
    here, before any network traffic.
    """
    if not triggers:
        raise ValidationError("no triggers to transform")
    for trig in triggers:
        if trig not in sentence:
            raise ValidationError(f"trigger {trig!r} not found in sentence")
    if mode == "single-word":
        name = METAPHOR_SINGLE_TEMPLATE
    elif mode == "multi-word":
        name = METAPHOR_MULTI_TEMPLATE
    else:
        raise ValidationError(f"unknown paraphrase mode: {mode!r}")
    system, user = load_template(name)
    values = {
        "sentence": sentence,
        "trigger_list": json.dumps(triggers, ensure_ascii=False),
        "candidate_count": str(candidate_count),
    }
    return fill(system, values), fill(user, values), template_hash(name)
