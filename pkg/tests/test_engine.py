"""Correction-loop behavior: termination, selectivity, convergence traces."""

from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cutting_stock_fixture import (
    CUTTING_STOCK_FRAGMENTS,
    CUTTING_STOCK_RECONSTRUCTIONS,
)
from loop_fixtures import scripted_run, synthetic_problem

from optanchor import (
    Cassette,
    CorrectionEngine,
    EngineConfig,
    Gateway,
    ReplayMiss,
    RunTrace,
    StageError,
    VerifierConfig,
    default_dialect,
)
from optanchor.engine import reconstruct_prompt
from optanchor.scripting import AnchorRound, CassetteScript


def run_engine(schedule, t_max=5, freeze_aligned=True, prompts=None, method="llm"):
    problem, context, gateway, _ = scripted_run(
        schedule, t_max=t_max, prompts=prompts, verifier_method=method
    )
    engine = CorrectionEngine(gateway.session(), prompts)
    cfg = EngineConfig(
        t_max=t_max,
        verifier=VerifierConfig(method="similarity", tau=0.75)
        if method == "similarity"
        else VerifierConfig(method="llm"),
        freeze_aligned=freeze_aligned,
    )
    model, trace = engine.run(context, default_dialect(), cfg)
    return context, model, trace


def test_all_aligned_first_pass_exits_immediately(prompts):
    context, model, trace = run_engine({0: 1, 1: 1, 2: 1, 3: 1}, prompts=prompts)
    assert trace.error_set_sizes == [0]
    assert trace.corrections_total == 0
    assert all(a.status == "aligned" for a in context.anchors)
    assert set(model.sem_fragments) == {0, 1, 2, 3}


def test_single_anchor_corrected_once(prompts):
    context, model, trace = run_engine({0: 2, 1: 1}, prompts=prompts)
    assert trace.error_set_sizes == [1, 0]
    assert trace.corrections_total == 1
    assert context.anchors[0].code.endswith("# final")
    assert context.anchors[0].error_flag == "NO"


def test_never_aligning_anchor_hits_iteration_cap(prompts):
    context, model, trace = run_engine({0: None, 1: 1}, t_max=5, prompts=prompts)
    assert trace.error_set_sizes == [1, 1, 1, 1, 1]
    assert trace.iterations == 5
    assert trace.corrections_total == 5
    assert trace.residual_errors == 1
    assert context.anchors[0].status == "misaligned"
    assert context.anchors[0].error_flag == "YES"
    # best-effort model still contains code for every anchor
    assert all(model.sem_fragments.values())


def test_descending_error_schedule(prompts):
    # 8 anchors: two align at each of t=2..5; all are misaligned at t=1
    schedule = {0: 2, 1: 2, 2: 3, 3: 3, 4: 4, 5: 4, 6: 5, 7: 5}
    context, model, trace = run_engine(schedule, prompts=prompts)
    assert trace.error_set_sizes == [8, 6, 4, 2, 0]
    assert trace.corrections_total == 8 + 6 + 4 + 2


def test_selectivity_codes_untouched_outside_error_set(prompts):
    problem, context, gateway, _ = scripted_run({0: 3, 1: 1, 2: 1}, prompts=prompts)
    engine = CorrectionEngine(gateway.session(), prompts)

    snapshots: list[dict[int, str]] = []
    original_reconstruct = engine.reconstruct_anchor

    def snapshotting_reconstruct(anchor, ctx, dialect):
        # capture the code of every anchor at each reconstruction
        snapshots.append({a.anchor_id: a.code for a in ctx.anchors})
        return original_reconstruct(anchor, ctx, dialect)

    engine.reconstruct_anchor = snapshotting_reconstruct
    engine.run(context, default_dialect(), EngineConfig())
    # anchors 1 and 2 aligned at t=1: their code never changes afterwards
    final_codes = {a.anchor_id: a.code for a in context.anchors}
    for snap in snapshots[3:]:  # after the first full iteration's snapshots
        for anchor_id in (1, 2):
            if anchor_id in snap and snap[anchor_id] is not None:
                assert snap[anchor_id] == final_codes[anchor_id]


def test_trace_conservation_and_events(prompts):
    _, _, trace = run_engine({0: 2, 1: 3, 2: 1}, prompts=prompts)
    regenerated = [e for e in trace.anchor_events if e[2] == "regenerated"]
    assert trace.corrections_total == len(regenerated)
    assert trace.corrections_total == sum(trace.error_set_sizes)
    translated = [e for e in trace.anchor_events if e[2] == "translated"]
    assert [e[0] for e in translated] == [0, 0, 0]
    verified = [e for e in trace.anchor_events if e[2] == "verified"]
    assert all(e[0] >= 1 for e in verified)


def test_monotone_error_sets_under_freeze(prompts):
    _, _, trace = run_engine({0: 2, 1: 4, 2: 3, 3: 1, 4: None}, prompts=prompts)
    sizes = trace.error_set_sizes
    assert all(a >= b for a, b in zip(sizes, sizes[1:]))


def test_freeze_disabled_reverifies_aligned_anchors(prompts):
    # anchor 1 aligns at t=1 but is re-reconstructed at t=2 because
    # freeze is off; sticky replay re-serves its aligned verdict.
    _, _, trace = run_engine({0: 2, 1: 1}, freeze_aligned=False, prompts=prompts)
    assert trace.error_set_sizes == [1, 0]
    reconstructed_anchor_1 = [
        e for e in trace.anchor_events if e[2] == "reconstructed" and e[1] == 1
    ]
    assert len(reconstructed_anchor_1) == 2


def test_always_aligned_verifier_degenerates_to_single_pass(prompts):
    context, model, trace = run_engine({0: 1, 1: 1, 2: 1}, prompts=prompts)
    translated = [e for e in trace.anchor_events if e[2] == "translated"]
    assert len(translated) == len(context.anchors)
    assert trace.corrections_total == 0
    assert trace.iterations == 1


def test_similarity_method_is_visible_in_trace(prompts):
    _, _, trace = run_engine({0: 2, 1: 1}, prompts=prompts, method="similarity")
    verified = [e for e in trace.anchor_events if e[2] == "verified"]
    assert verified and all("similarity" in e[3] for e in verified)
    assert all("score=" in e[3] for e in verified)
    assert trace.error_set_sizes == [1, 0]


def test_reconstruct_anchor_requires_code(prompts, cutting_stock_structured, dialect):
    engine = CorrectionEngine(Gateway(mode="replay", cassette=Cassette()), prompts)
    with pytest.raises(ValueError):
        engine.reconstruct_anchor(cutting_stock_structured.anchors[0], cutting_stock_structured, dialect)


def test_reconstruct_anchor_replay_deterministic(
    prompts, dialect, cutting_stock_problem, cutting_stock_json
):
    script = CassetteScript(prompts=prompts, dialect=dialect)
    context = script.script_extract(cutting_stock_problem, cutting_stock_json)
    anchor = context.anchors[1]
    anchor.code = CUTTING_STOCK_FRAGMENTS[1]
    prompt = reconstruct_prompt(prompts, anchor, context, dialect)
    script.add_completion(
        "reconstruct", prompt, script.fenced("reconstruct", CUTTING_STOCK_RECONSTRUCTIONS[1])
    )
    gateway = Gateway(mode="replay", cassette=script.cassette)
    engine = CorrectionEngine(gateway, prompts)
    first = engine.reconstruct_anchor(anchor, context, dialect)
    second = engine.reconstruct_anchor(anchor, context, dialect)
    assert first == second == CUTTING_STOCK_RECONSTRUCTIONS[1]


def test_stage_error_carries_context(prompts):
    problem, structured_json = synthetic_problem(1)
    script = CassetteScript(prompts=prompts)
    context = script.script_extract(problem, structured_json)
    # only anchor 0 is scripted; anchor 1 (objective) will miss on replay
    script.script_anchor(context, context.anchors[0], [AnchorRound(code="model.addConstr(True)")])
    gateway = Gateway(mode="replay", cassette=script.cassette)
    engine = CorrectionEngine(gateway, prompts)
    with pytest.raises(StageError) as err:
        engine.run(context, default_dialect(), EngineConfig())
    assert err.value.stage == "translate"
    assert err.value.iteration == 0
    assert err.value.anchor_id == 1
    assert isinstance(err.value.cause, ReplayMiss)


def test_trace_json_round_trip(tmp_path, prompts):
    _, _, trace = run_engine({0: 2, 1: 1}, prompts=prompts)
    path = tmp_path / "trace.json"
    trace.write(path)
    loaded = RunTrace.load(path)
    assert loaded.error_set_sizes == trace.error_set_sizes
    assert loaded.anchor_events == trace.anchor_events
    assert loaded.corrections_total == trace.corrections_total


# -- randomized schedules ------------------------------------------------------

_schedules = st.lists(
    st.one_of(st.none(), st.integers(min_value=1, max_value=5)), min_size=1, max_size=6
)


@settings(max_examples=100, deadline=None)
@given(_schedules)
def test_selective_correction_property(schedule_list):
    schedule = dict(enumerate(schedule_list))
    t_max = 5
    problem, context, gateway, _ = scripted_run(schedule, t_max=t_max)
    engine = CorrectionEngine(gateway.session())
    model, trace = engine.run(context, default_dialect(), EngineConfig(t_max=t_max))

    # Termination bound: never more than t_max correction iterations.
    assert trace.iterations <= t_max
    # Conservation: total corrections equal the error-set mass and the
    # number of regeneration events.
    assert trace.corrections_total == sum(trace.error_set_sizes)
    regen_events = [e for e in trace.anchor_events if e[2] == "regenerated"]
    assert len(regen_events) == trace.corrections_total
    # Monotone error sets under freeze.
    sizes = trace.error_set_sizes
    assert all(a >= b for a, b in zip(sizes, sizes[1:]))
    # Every anchor that was scheduled to align within t_max ends aligned
    # with its final-round code; never-aligning anchors end misaligned.
    for anchor in context.anchors:
        expected = schedule[anchor.anchor_id]
        if expected is not None:
            assert anchor.status == "aligned"
            assert anchor.code.endswith("# final")
        else:
            assert anchor.status == "misaligned"
    # Selectivity: regenerations only ever touch anchors while they are
    # misaligned; an anchor aligned at iteration k is never regenerated at
    # or after k.
    for iteration, anchor_id, event, _detail in trace.anchor_events:
        if event == "regenerated":
            expected = schedule[anchor_id]
            assert expected is None or iteration < expected
