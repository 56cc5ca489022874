import pytest
from hypothesis import settings

from adauthor.model import ADEvent, MediaAsset, Track, voice_for_event_type

settings.register_profile("suite", max_examples=50, deadline=None)
settings.load_profile("suite")


@pytest.fixture
def asset():
    return MediaAsset(asset_id="vid-1", title="Fixture Video",
                      category="education", duration=120.0, fps=25.0,
                      metadata={"summary": "a short fixture clip"})


def make_event(event_id, start, text="something happens", event_type="visual",
               delivery="inline", duration=1.0, source="ai", audio_uri=None,
               voice=None):
    return ADEvent(
        event_id=event_id,
        start_time=start,
        event_type=event_type,
        text=text,
        voice=voice if voice is not None else voice_for_event_type(event_type),
        estimated_duration=duration,
        delivery=delivery,
        source=source,
        audio_uri=audio_uri,
    )


def make_track(events, track_id="t-1", asset_id="vid-1"):
    return Track(track_id=track_id, asset_id=asset_id, events=tuple(events))


@pytest.fixture
def event_factory():
    return make_event


@pytest.fixture
def track_factory():
    return make_track
