import pytest

from adauthor.errors import NoFrames, Unavailable
from adauthor.model import MediaAsset
from adauthor.providers import MockTts, ScriptedVlm
from adauthor.queries import (AdaptContext, FrameStamp, answer_question,
                              describe_now, scene_info_text, select_frames,
                              truncate_sentence)
from adauthor.segmentation import Scene, SceneList
from adauthor.transcripts import MergedTranscript, TranscriptWord

from conftest import make_event, make_track

NO_SLEEP = lambda _: None


def stamps(n, dt=1.0):
    return tuple(FrameStamp(i, i * dt) for i in range(n))


def scenes_fixture():
    return SceneList((
        Scene(0, 0.0, 30.0, keyframe_index=15),
        Scene(1, 30.0, 75.0, keyframe_index=52),
        Scene(2, 75.0, 120.0, keyframe_index=97),
    ))


def context_fixture():
    asset = MediaAsset("vid-1", "Gombe Documentary", "education", 120.0, 25.0)
    words = MergedTranscript((
        TranscriptWord("chimpanzees", 10.0, 10.6),
        TranscriptWord("swing", 40.0, 40.4),
        TranscriptWord("overhead", 41.0, 41.5),
        TranscriptWord("spoiler", 100.0, 100.5),
    ))
    track = make_track([
        make_event("e1", 12.0, text="A chimpanzee climbs a palm"),
        make_event("e2", 45.0, text="Two baboons in close-up",
                   delivery="extended"),
        make_event("e3", 110.0, text="A leopard appears at dusk",
                   delivery="extended"),
    ])
    return AdaptContext(asset=asset, scenes=scenes_fixture(),
                        frames=stamps(121), words=words, track=track)


def test_truncate_sentence():
    assert truncate_sentence("Olaf the snowman. He smiles.") == "Olaf the snowman."
    assert truncate_sentence("Is it a bird? Maybe.") == "Is it a bird?"
    assert truncate_sentence("no terminator here") == "no terminator here"
    assert truncate_sentence("They are 4.5 inches long.") == "They are 4.5 inches long."
    assert truncate_sentence("  padded sentence.  ") == "padded sentence."


def test_select_frames_inside_scene():
    exact, keyframe = select_frames(40.3, scenes_fixture(), stamps(121))
    assert exact.frame_index == 40
    assert keyframe.frame_index == 52


def test_select_frames_on_keyframe_uses_previous_scene():
    exact, keyframe = select_frames(52.0, scenes_fixture(), stamps(121))
    assert exact.frame_index == 52
    assert keyframe.frame_index == 15


def test_select_frames_single_scene_time_zero():
    scenes = SceneList((Scene(0, 0.0, 120.0, keyframe_index=60),))
    exact, keyframe = select_frames(0.0, scenes, stamps(121))
    assert exact.frame_index == 0
    assert keyframe.frame_index == 60


def test_select_frames_requires_frames():
    with pytest.raises(NoFrames):
        select_frames(1.0, scenes_fixture(), ())


def test_scene_info_excludes_future_material():
    ctx = context_fixture()
    info = scene_info_text(ctx, 46.0)
    assert "chimpanzees" in info
    assert "A chimpanzee climbs a palm" in info
    assert "Two baboons in close-up" in info
    assert "spoiler" not in info
    assert "A leopard appears at dusk" not in info


def test_describe_now_truncates_and_reports_frames():
    ctx = context_fixture()
    provider = ScriptedVlm(replies=["Olaf the snowman. He grins broadly."])
    reply = describe_now(ctx, 40.0, provider, sleep=NO_SLEEP)
    assert reply.text == "Olaf the snowman."
    prompt, images = provider.calls[0]
    assert "USER QUERY: describe the scene" in prompt
    assert "keyframe captured near timestamp 52.00s" in prompt
    assert "exact frame captured at timestamp 40.00s" in prompt
    assert images == ("frame:000052", "frame:000040")


def test_describe_now_with_tts_reply_audio():
    ctx = context_fixture()
    provider = ScriptedVlm(replies=["A butterfly flutters across the frame."])
    reply = describe_now(ctx, 40.0, provider, tts=MockTts(), sleep=NO_SLEEP)
    assert reply.audio_uri and reply.audio_uri.startswith("mock://tts/")


def test_describe_now_empty_context_still_answers():
    asset = MediaAsset("vid-2", "Clip", "education", 10.0, 25.0)
    ctx = AdaptContext(asset=asset,
                       scenes=SceneList((Scene(0, 0.0, 10.0, 0),)),
                       frames=stamps(11), words=MergedTranscript(()),
                       track=make_track([], asset_id="vid-2"))
    provider = ScriptedVlm(replies=["A blank studio."])
    reply = describe_now(ctx, 0.0, provider, sleep=NO_SLEEP)
    assert reply.text == "A blank studio."
    prompt = provider.calls[0][0]
    assert "VIDEO METADATA:" in prompt
    assert "CUMULATIVE TRANSCRIPT:" not in prompt


def test_describe_now_unavailable_on_failure():
    ctx = context_fixture()

    class Down:
        name = "down"

        def generate(self, prompt, images=()):
            raise __import__("adauthor.errors", fromlist=["ProviderFailure"]
                             ).ProviderFailure("offline")

    with pytest.raises(Unavailable):
        describe_now(ctx, 40.0, Down(), sleep=NO_SLEEP)


def test_answer_question_concise():
    ctx = context_fixture()
    provider = ScriptedVlm(replies=["Gombe National Park, Tanzania."])
    reply = answer_question(ctx, 40.0, "Where are the chimpanzees?", provider,
                            sleep=NO_SLEEP)
    assert reply.text == "Gombe National Park, Tanzania."
    assert "USER QUERY: Where are the chimpanzees?" in provider.calls[0][0]


def test_answer_question_reasks_on_frame_leak():
    ctx = context_fixture()
    provider = ScriptedVlm(replies=[
        "At frame 1520, the chimps appear.",
        "They appear near the river.",
    ])
    reply = answer_question(ctx, 40.0, "Where?", provider, sleep=NO_SLEEP)
    assert reply.text == "They appear near the river."
    assert len(provider.calls) == 2


def test_answer_question_reasks_on_timestamp_leak():
    ctx = context_fixture()
    provider = ScriptedVlm(replies=[
        "The timestamp shows a dusk scene.",
        "It is dusk in the park.",
    ])
    reply = answer_question(ctx, 40.0, "When is this?", provider, sleep=NO_SLEEP)
    assert reply.text == "It is dusk in the park."


def test_answer_question_requires_text():
    ctx = context_fixture()
    with pytest.raises(ValueError):
        answer_question(ctx, 40.0, "   ", ScriptedVlm(), sleep=NO_SLEEP)


def test_single_sentence_invariant():
    ctx = context_fixture()
    provider = ScriptedVlm(replies=["One. Two. Three."])
    reply = answer_question(ctx, 40.0, "How many?", provider, sleep=NO_SLEEP)
    terminators = [ch for ch in reply.text if ch in ".!?"]
    assert terminators == ["."]
