import pytest

from adauthor.errors import ProviderFailure
from adauthor.generation import SceneContext
from adauthor.model import Gap, MediaAsset, Track, track_errors
from adauthor.providers import RuleVlm, ScriptedVlm
from adauthor.scheduling import (DurationModel, InlineFailure, ScheduleDecision,
                                 SchedulerParams, estimate_speech_duration,
                                 filter_extended, merge_howto, optimize_inline,
                                 retry_shorten, schedule)
from adauthor.segmentation import Scene, SceneList

from conftest import make_event, make_track

NO_SLEEP = lambda _: None

EMPTY_CTX = SceneContext(metadata_text="", cumulative_transcript="",
                         cumulative_descriptions="", scene_transcript="",
                         scene_duration=0.0)


def words(n):
    return " ".join(f"w{i}" for i in range(n))


def test_estimate_empty():
    assert estimate_speech_duration("") == 0.0


def test_estimate_ten_words_at_150wpm():
    assert estimate_speech_duration(words(10)) == pytest.approx(4.0)


def test_estimate_paper_sentence():
    text = "A butterfly flutters across the frame."
    assert estimate_speech_duration(text) == pytest.approx(2.4)


def test_estimate_char_floor():
    model = DurationModel(words_per_minute=150.0, per_char_floor=0.1)
    assert model.estimate("abcdefghij") == pytest.approx(1.0)


def test_estimate_monotone_in_word_count():
    model = DurationModel()
    durations = [model.estimate(words(n)) for n in range(20)]
    assert durations == sorted(durations)


def raw_event(event_id, start, text, event_type="visual"):
    ev = make_event(event_id, start, text=text, event_type=event_type,
                    delivery=None, duration=0.0)
    return ev


def test_optimize_inline_fit_first_try():
    gap = Gap(10.0, 12.5)
    provider = ScriptedVlm(replies=["Olaf waves happily."])
    decision = optimize_inline([raw_event("e1", 10.5, words(12))], gap,
                               provider, sleep=NO_SLEEP)
    assert isinstance(decision, ScheduleDecision)
    assert decision.attempts == 1
    assert decision.assigned_gap == gap
    assert estimate_speech_duration(decision.final_text) <= gap.length
    assert "AVAILABLE TIME: 2.50 seconds" in provider.calls[0][0]


def test_optimize_inline_exhausts_retries():
    gap = Gap(10.0, 11.0)
    long_reply = words(20)
    provider = ScriptedVlm(replies=[], default=long_reply)
    params = SchedulerParams(max_retries=2)
    outcome = optimize_inline([raw_event("e1", 10.0, words(30))], gap,
                              provider, params, sleep=NO_SLEEP)
    assert isinstance(outcome, InlineFailure)
    assert outcome.attempts == 3
    assert len(provider.calls) == 3  # 1 condense + 2 retries
    assert "PREVIOUS ATTEMPT" in provider.calls[1][0]


def test_optimize_inline_short_gap_short_circuits():
    provider = ScriptedVlm(replies=["never asked"])
    outcome = optimize_inline([raw_event("e1", 1.0, "hi")], Gap(1.0, 1.2),
                              provider, sleep=NO_SLEEP)
    assert isinstance(outcome, InlineFailure)
    assert outcome.attempts == 0
    assert provider.calls == []


def test_optimize_inline_provider_failure():
    class Down:
        name = "down"

        def generate(self, prompt, images=()):
            raise ProviderFailure("no route")

    outcome = optimize_inline([raw_event("e1", 1.0, "hi")], Gap(1.0, 5.0),
                              Down(), sleep=NO_SLEEP)
    assert isinstance(outcome, InlineFailure)


def test_retry_shorten_prompt_deficit():
    provider = ScriptedVlm(replies=["shorter text"])
    got = retry_shorten("a long draft", 5.0, 3.5, provider, sleep=NO_SLEEP)
    assert got == "shorter text"
    assert "reduce it by 1.50 seconds" in provider.calls[0][0]


def test_retry_shorten_noop_reply_is_returned():
    provider = ScriptedVlm(replies=["same text"])
    assert retry_shorten("same text", 4.0, 2.0, provider,
                         sleep=NO_SLEEP) == "same text"


def test_retry_shorten_empty_reply_fails():
    provider = ScriptedVlm(replies=["  "], default="  ")
    with pytest.raises(ProviderFailure):
        retry_shorten("text", 4.0, 2.0, provider, sleep=NO_SLEEP)


def candidates3():
    return [
        raw_event("c0", 5.0, "Two baboons in close-up"),
        raw_event("c1", 6.0, "A title card", event_type="text_on_screen"),
        raw_event("c2", 7.0, "A butterfly flutters"),
    ]


def test_filter_marks_all_false():
    provider = ScriptedVlm(replies=[
        '[{"id": 0, "necessary": false, "reason": "audio covers it"},'
        ' {"id": 1, "necessary": false, "reason": "redundant"},'
        ' {"id": 2, "necessary": false, "reason": "redundant"}]'])
    assert filter_extended(candidates3(), EMPTY_CTX, provider,
                           sleep=NO_SLEEP) == []


def test_filter_keeps_lowest_visual_id():
    provider = ScriptedVlm(replies=[
        '[{"id": 0, "necessary": true, "reason": "silent action"},'
        ' {"id": 2, "necessary": true, "reason": "novel element"}]'])
    kept = filter_extended(candidates3(), EMPTY_CTX, provider, sleep=NO_SLEEP)
    assert [e.event_id for e in kept] == ["c0"]


def test_filter_text_candidates_not_capped():
    provider = ScriptedVlm(replies=[
        '[{"id": 0, "necessary": true}, {"id": 1, "necessary": true},'
        ' {"id": 2, "necessary": true}]'])
    kept = filter_extended(candidates3(), EMPTY_CTX, provider, sleep=NO_SLEEP)
    assert [e.event_id for e in kept] == ["c0", "c1"]


def test_filter_missing_reason_accepted():
    provider = ScriptedVlm(replies=['[{"id": 2, "necessary": true}]'])
    kept = filter_extended(candidates3(), EMPTY_CTX, provider, sleep=NO_SLEEP)
    assert [e.event_id for e in kept] == ["c2"]


def test_filter_unparseable_reasks_then_drops():
    provider = ScriptedVlm(replies=["nope", "still nope"], default="nope")
    assert filter_extended(candidates3(), EMPTY_CTX, provider,
                           sleep=NO_SLEEP) == []
    assert len(provider.calls) == 2
    assert "Return only the JSON array." in provider.calls[1][0]


def test_filter_prompt_carries_context():
    ctx = SceneContext(metadata_text="", cumulative_transcript="spoken so far",
                       cumulative_descriptions="described so far",
                       scene_transcript="current words", scene_duration=5.0)
    provider = ScriptedVlm(replies=["[]"])
    filter_extended(candidates3(), ctx, provider, sleep=NO_SLEEP)
    prompt = provider.calls[0][0]
    assert "CURRENT SCENE TRANSCRIPT:\ncurrent words" in prompt
    assert "CUMULATIVE TRANSCRIPT:\nspoken so far" in prompt
    assert "CUMULATIVE DESCRIPTION:\ndescribed so far" in prompt
    assert "0: Two baboons in close-up" in prompt


def howto_events():
    return [
        raw_event("t0", 5.0, "1 cup vinegar", event_type="text_on_screen"),
        raw_event("v0", 6.0, "pours brine into the jar"),
    ]


def test_merge_howto_keeps_measurements():
    provider = ScriptedVlm(replies=[
        "Pours 1 cup vinegar brine into the jar."])
    merged = merge_howto(howto_events(), 6.0, provider, sleep=NO_SLEEP)
    assert len(merged) == 1
    assert "1 cup" in merged[0].text
    assert merged[0].event_type == "visual"
    assert merged[0].start_time == 5.0
    assert "fit within 6.00 seconds" in provider.calls[0][0]


def test_merge_howto_reasks_then_falls_back():
    provider = ScriptedVlm(replies=["Cuts them into spears.",
                                    "Cuts the cucumbers lengthwise."])
    events = [
        raw_event("t0", 1.0, "4-5 inches", event_type="text_on_screen"),
        raw_event("v0", 2.0, "cuts cucumbers into spears"),
    ]
    merged = merge_howto(events, 5.0, provider, sleep=NO_SLEEP)
    assert len(provider.calls) == 2
    assert [e.event_id for e in merged] == ["t0", "v0"]


def test_merge_howto_requires_both_types():
    with pytest.raises(ValueError):
        merge_howto([raw_event("v0", 1.0, "only visual")], 5.0,
                    ScriptedVlm(), sleep=NO_SLEEP)


def test_merge_howto_provider_failure_falls_back():
    class Down:
        name = "down"

        def generate(self, prompt, images=()):
            raise ProviderFailure("offline")

    merged = merge_howto(howto_events(), 5.0, Down(), sleep=NO_SLEEP)
    assert [e.event_id for e in merged] == ["t0", "v0"]


def edu_asset(duration=60.0):
    return MediaAsset("vid-1", "t", "education", duration, 25.0)


def test_schedule_inline_at_gap_start():
    asset = edu_asset()
    raw = make_track([raw_event("e1", 11.0, words(4))])
    gaps = [Gap(10.0, 20.0)]
    provider = RuleVlm(rules=[("ORIGINAL DESCRIPTIONS", "short line")])
    final = schedule(raw, gaps, asset, provider, sleep=NO_SLEEP)
    assert len(final.events) == 1
    ev = final.events[0]
    assert ev.delivery == "inline"
    assert ev.start_time == 10.0
    assert ev.text == "short line"
    assert track_errors(final, asset) == []


def test_schedule_dialogue_everywhere_keeps_one_extended():
    asset = edu_asset()
    raw = make_track([
        raw_event("e1", 5.0, "first candidate"),
        raw_event("e2", 15.0, "second candidate"),
        raw_event("e3", 25.0, "third candidate"),
    ])
    provider = RuleVlm(rules=[
        ("accessibility expert", '[{"id": 1, "necessary": true, "reason": "r"}]'),
    ])
    final = schedule(raw, [], asset, provider, sleep=NO_SLEEP)
    assert len(final.events) == 1
    ev = final.events[0]
    assert ev.delivery == "extended"
    assert ev.event_id == "e2"
    assert ev.start_time == 15.0
    log_free = track_errors(final, asset)
    assert log_free == []


def test_schedule_empty_track():
    final = schedule(make_track([]), [Gap(0.0, 5.0)], edu_asset(),
                     ScriptedVlm(), sleep=NO_SLEEP)
    assert final.events == ()


def test_schedule_window_groups_nearby_events():
    asset = edu_asset()
    raw = make_track([
        raw_event("e1", 9.5, "Rey runs"),
        raw_event("e2", 10.5, "A ship lands"),
    ])
    gaps = [Gap(10.0, 18.0)]
    provider = RuleVlm(rules=[("ORIGINAL DESCRIPTIONS", "Rey runs as a ship lands")])
    final = schedule(raw, gaps, asset, provider, sleep=NO_SLEEP)
    assert len(final.events) == 1
    assert final.events[0].event_id == "e1"
    prompt = provider.calls[0][0]
    assert "Rey runs\nA ship lands" in prompt


def test_schedule_failure_routes_window_to_filter():
    asset = edu_asset()
    raw = make_track([raw_event("e1", 2.0, words(40))])
    gaps = [Gap(1.0, 2.0)]  # too small for anything
    provider = RuleVlm(rules=[
        ("ORIGINAL DESCRIPTIONS", words(40)),
        ("PREVIOUS ATTEMPT", words(40)),
        ("accessibility expert", '[{"id": 0, "necessary": true, "reason": "r"}]'),
    ])
    log = []
    final = schedule(raw, gaps, asset, provider, decision_log=log, sleep=NO_SLEEP)
    assert [e.delivery for e in final.events] == ["extended"]
    assert final.events[0].start_time == 2.0
    outcomes = [entry["outcome"] for entry in log]
    assert outcomes == ["inline_failed", "extended"]
    attempts = [entry["attempts"] for entry in log if entry["outcome"] == "inline_failed"]
    assert attempts == [3]


def test_schedule_monotone_in_gap_size():
    asset = edu_asset()
    raw = make_track([raw_event("e1", 10.0, words(8))])
    provider_text = words(5)  # 2.0 s estimated

    def run(gap_end):
        provider = RuleVlm(rules=[("ORIGINAL DESCRIPTIONS", provider_text)],
                           default='[]')
        final = schedule(raw, [Gap(10.0, gap_end)], asset, provider,
                         sleep=NO_SLEEP)
        return final.events[0].delivery if final.events else "dropped"

    small = run(12.5)   # 2.5 s gap, fits
    large = run(30.0)   # larger gap must stay inline
    assert small == "inline"
    assert large == "inline"


def test_schedule_howto_merges_then_places():
    asset = MediaAsset("vid-1", "t", "howto", 60.0, 25.0)
    scenes = SceneList((Scene(0, 0.0, 30.0, 15), Scene(1, 30.0, 60.0, 45)))
    raw = make_track([
        raw_event("t0", 5.0, "1 cup vinegar", event_type="text_on_screen"),
        raw_event("v0", 6.0, "pours brine into the jar"),
        raw_event("v1", 40.0, "seals the lid"),
    ])
    gaps = [Gap(4.0, 12.0), Gap(38.0, 48.0)]
    provider = RuleVlm(rules=[
        ("Combine the text on screen", "Pours 1 cup vinegar brine into the jar."),
        ("ORIGINAL DESCRIPTIONS", "condensed"),
    ])
    log = []
    final = schedule(raw, gaps, asset, provider, scenes=scenes,
                     decision_log=log, sleep=NO_SLEEP)
    assert len(final.events) == 2
    assert all(e.delivery == "inline" for e in final.events)
    merged_log = [entry for entry in log if entry["outcome"] == "merged"]
    assert [entry["event_id"] for entry in merged_log] == ["v0"]
    assert track_errors(final, asset) == []


def test_schedule_deterministic():
    asset = edu_asset()
    raw = make_track([
        raw_event("e1", 3.0, "alpha beta"),
        raw_event("e2", 21.0, "gamma delta"),
    ])
    gaps = [Gap(2.0, 8.0), Gap(20.0, 26.0)]

    def run():
        provider = RuleVlm(rules=[("ORIGINAL DESCRIPTIONS", "condensed text")])
        log = []
        final = schedule(raw, gaps, asset, provider, decision_log=log,
                         sleep=NO_SLEEP)
        return final, log

    first_track, first_log = run()
    second_track, second_log = run()
    assert first_track == second_track
    assert first_log == second_log
