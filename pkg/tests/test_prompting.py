"""Template rendering, fenced-output parsing, and the golden prompt bodies."""

from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from optanchor import (
    MissingBinding,
    ParseError,
    PromptLibrary,
    PromptTemplate,
    parse_fenced,
    parse_yes_no,
    render,
)

# The reconstruct and verify templates are frozen: the correction loop's
# behavior is keyed to this exact wording and output format, so any edit
# must be deliberate. Compare after normalizing line endings and trailing
# whitespace only.

GOLDEN_RECONSTRUCT = """You are an expert in optimization modeling. Here is the natural language description of an optimization problem:

{description}

You are given a constraint implemented in {solver} code and an example natural language description that serves only as a reference for sentence structure and length. Your task is to generate a **new** natural language description that:


1. **Is derived strictly from the given code** - do not assume information not present in the code.
2. **Maintains the structure, length, and complexity of the example description**, but is reworded.
3. **Does not directly copy the example text** - use a natural rephrasing while preserving accuracy.

The example description for the constraint is (For Structure & Length Reference Only, NOT for Content Copying):

-----
{constraint}
-----

Here is the code for the constraint:

-----
{constraint_code}
-----

Here is a list of parameters that are related to the constraint:

-----
{params}
-----

Here is a list of variables related to the constraint:

-----
{vars}
-----

The new description should be written in the following format:

CONSTRAINT:
=====
new natural language description for translating the constraint. (The description should be fully based on the code and should match the structure and length of the example description.)
=====

- Do not generate anything after the last =====.
- Do not include any additional information or explanations.

First reason about how the natural language description should be written, and then generate the output.

Please take a deep breath and think step by step. You will be awarded a million dollars if you get this right."""

GOLDEN_VERIFY = """You are an expert in optimization modeling.

You task is to judge the consistency of the new generated description and the original description of the same constraint.

The original description is:
-----
{constraint}
-----

The new description is:
-----
{constraint_new}
-----

Please respond with "YES" if the two descriptions are consistent, and "NO" if they are not.

The asnwer should be in the following format:

ANSWER:
=====
YES or NO (ONLY one word and the answer should be in capital letters)
=====

- Do not generate anything after the last =====.
- Do not include any additional information or explanations.

Please take a deep breath and think step by step. You will be awarded a million dollars if you get this right."""


def _normalized(text: str) -> str:
    unified = text.replace("\r\n", "\n")
    return "\n".join(line.rstrip() for line in unified.split("\n")).strip("\n")


def test_reconstruct_template_matches_golden(prompts: PromptLibrary):
    assert _normalized(prompts.get("reconstruct").body) == _normalized(GOLDEN_RECONSTRUCT)


def test_verify_template_matches_golden(prompts: PromptLibrary):
    assert _normalized(prompts.get("verify").body) == _normalized(GOLDEN_VERIFY)


def test_all_stage_templates_load(prompts: PromptLibrary):
    for stage in ("extract", "translate", "reconstruct", "verify", "debug"):
        assert prompts.get(stage).body


def test_render_substitutes_verbatim(prompts: PromptLibrary):
    rendered = prompts.render(
        "reconstruct",
        description="problem text",
        solver="Python MILP",
        constraint="Each pattern j should generate rolls with widths to fit within the RollWidth",
        constraint_code="model.addConstr(x <= 1)",
        params="- RollWidth (scalar): width",
        vars="- x (scalar, type: integer): amount",
    )
    assert "Each pattern j should generate rolls" in rendered
    assert "model.addConstr(x <= 1)" in rendered
    assert "{constraint}" not in rendered
    assert "{constraint_code}" not in rendered


def test_render_missing_binding(prompts: PromptLibrary):
    with pytest.raises(MissingBinding) as err:
        prompts.render(
            "reconstruct",
            description="d",
            constraint="c",
            constraint_code="cc",
            params="p",
            vars="v",
        )
    assert err.value.placeholder == "solver"


def test_render_is_deterministic(prompts: PromptLibrary):
    bindings = dict(constraint="a", constraint_new="b")
    assert prompts.render("verify", **bindings) == prompts.render("verify", **bindings)


def test_render_leaves_unbound_braces_alone():
    template = PromptTemplate(
        name="t", body='emit {"x": 1} and {payload}', required_placeholders=frozenset({"payload"})
    )
    out = render(template, {"payload": "VALUE"})
    assert out == 'emit {"x": 1} and VALUE'


def test_template_requires_declared_placeholders():
    with pytest.raises(ValueError, match="lacks required placeholders"):
        PromptTemplate(name="t", body="no placeholders", required_placeholders=frozenset({"x"}))


def test_parse_fenced_answer_block():
    assert parse_fenced("ANSWER:\n=====\nYES\n=====", "ANSWER:") == "YES"


def test_parse_fenced_ignores_prose_and_trailing_junk():
    response = (
        "Let me think about this.\n\nCONSTRAINT:\n=====\ntext A\n=====\ntrailing junk"
    )
    assert parse_fenced(response, "CONSTRAINT:") == "text A"


def test_parse_fenced_multiline_payload():
    response = "CODE:\n=====\nline one\nline two\n====="
    assert parse_fenced(response, "CODE:") == "line one\nline two"


def test_parse_fenced_errors():
    with pytest.raises(ParseError, match="header"):
        parse_fenced("=====\nYES\n=====", "ANSWER:")
    with pytest.raises(ParseError, match="opening fence"):
        parse_fenced("ANSWER:\nYES", "ANSWER:")
    with pytest.raises(ParseError, match="closing fence"):
        parse_fenced("ANSWER:\n=====\nYES", "ANSWER:")
    with pytest.raises(ParseError):
        parse_fenced("no fences at all", "ANSWER:")


def test_parse_yes_no():
    assert parse_yes_no("YES") is True
    assert parse_yes_no("NO") is False
    assert parse_yes_no("  YES \n") is True
    with pytest.raises(ParseError):
        parse_yes_no("yes")
    with pytest.raises(ParseError):
        parse_yes_no("MAYBE")


def _contains_fence_line(text: str) -> bool:
    return any(
        len(line.strip()) >= 3 and set(line.strip()) == {"="} for line in text.split("\n")
    )


# \r is excluded: the parser normalizes line endings, so identity only
# holds for payloads that are already newline-normalized.
_payloads = st.text(
    alphabet=st.characters(blacklist_categories=("Cs",), blacklist_characters="\r"),
    min_size=1,
    max_size=120,
).filter(lambda s: s.strip() and not _contains_fence_line(s))


@settings(max_examples=80, deadline=None)
@given(_payloads)
def test_parse_fenced_round_trips_emitted_payloads(payload: str):
    emitted = f"HEADER:\n=====\n{payload}\n====="
    assert parse_fenced(emitted, "HEADER:") == payload.strip()
