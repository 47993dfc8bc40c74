"""
Standard MIDI File ingestion.

Reads format 0 and 1 files into a Score of note events and converts scores
into melody sequences, chord sequences and rhythm onset cycles. The reader is
bounds-checked by hand so every error carries a byte offset; a small writer
built on mido exists for test fixtures and the parse/write round trip.
"""
import io
import logging
import struct
from collections import Counter, defaultdict, deque
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

import mido

from errors import DomainError, EmptyInputError, MidiParseError
from metrics import ChordClass, CirclePoint, RhythmPattern, pitch_class_of_key

logger = logging.getLogger(__name__)

DEFAULT_CHORD_WINDOW = Fraction(1, 32)

# Data bytes following each channel-message status nibble
CHANNEL_MESSAGE_LENGTHS = {
    0x80: 2,  # Note Off
    0x90: 2,  # Note On
    0xA0: 2,  # Polyphonic Key Pressure
    0xB0: 2,  # Control Change
    0xC0: 1,  # Program Change
    0xD0: 1,  # Channel Pressure
    0xE0: 2,  # Pitch Bend
}


@dataclass(frozen=True)
class NoteEvent:
    """One sounded note. Onset and duration are in beats (ticks / division)."""

    onset: Fraction
    duration: Fraction
    key: int
    velocity: int = 64
    track: int = 0
    channel: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'onset', Fraction(self.onset))
        object.__setattr__(self, 'duration', Fraction(self.duration))
        if self.onset < 0:
            raise DomainError(f"note onset must be >= 0, got {self.onset}")
        if self.duration <= 0:
            raise DomainError(f"note duration must be > 0, got {self.duration}")
        if not 0 <= self.key <= 127:
            raise DomainError(f"key out of range: {self.key}")
        if not 0 <= self.velocity <= 127:
            raise DomainError(f"velocity out of range: {self.velocity}")
        if not 0 <= self.channel <= 15:
            raise DomainError(f"channel out of range: {self.channel}")

    @property
    def sort_key(self):
        return (self.onset, self.track, self.key, self.channel, self.duration, self.velocity)


@dataclass(frozen=True)
class Score:
    """Parsed MIDI content: note events sorted by (onset, track, key)."""

    division: int
    events: Tuple[NoteEvent, ...]
    format: int = 1

    def __post_init__(self):
        if self.division <= 0:
            raise DomainError(f"division must be positive, got {self.division}")
        if self.format not in (0, 1):
            raise DomainError(f"only formats 0 and 1 are supported, got {self.format}")
        object.__setattr__(self, 'events', tuple(sorted(self.events, key=lambda e: e.sort_key)))

    @property
    def tracks(self) -> List[int]:
        return sorted({e.track for e in self.events})


@dataclass(frozen=True)
class Selector:
    """Track/channel filter. None means 'any'."""

    tracks: Optional[FrozenSet[int]] = None
    channels: Optional[FrozenSet[int]] = None

    def matches(self, event: NoteEvent) -> bool:
        if self.tracks is not None and event.track not in self.tracks:
            return False
        if self.channels is not None and event.channel not in self.channels:
            return False
        return True

    @classmethod
    def of(cls, tracks: Optional[Iterable[int]] = None,
           channels: Optional[Iterable[int]] = None) -> "Selector":
        return cls(
            tracks=frozenset(tracks) if tracks is not None else None,
            channels=frozenset(channels) if channels is not None else None,
        )


ALL_NOTES = Selector()


@dataclass(frozen=True)
class MelodySequence:
    """Chronological pitch classes, one per sounded note."""

    pitches: Tuple[CirclePoint, ...]

    def __len__(self) -> int:
        return len(self.pitches)


@dataclass(frozen=True)
class ChordSequence:
    """
    Chords in time order, one per onset slot.

    keys holds the sorted MIDI keys behind each chord so voices can be
    selected by register; onsets holds the start beat of each slot.
    """

    chords: Tuple[ChordClass, ...]
    keys: Tuple[Tuple[int, ...], ...] = ()
    onsets: Tuple[Fraction, ...] = ()
    cardinalities: Dict[int, int] = field(default_factory=dict, compare=False)

    def __len__(self) -> int:
        return len(self.chords)

    @property
    def ragged(self) -> bool:
        """True when chords have different numbers of notes (compare with Hausdorff)."""
        return len({len(c) for c in self.chords}) > 1

    @property
    def chord_size(self) -> Optional[int]:
        sizes = {len(c) for c in self.chords}
        return sizes.pop() if len(sizes) == 1 else None

    def top_voices(self, k: int) -> "ChordSequence":
        """Keep the k highest notes of every chord (shorter chords are kept whole)."""
        if k < 1:
            raise DomainError("voice count must be >= 1")
        keys = tuple(tuple(sorted(slot)[-k:]) for slot in self.keys)
        chords = tuple(ChordClass.from_keys(slot) for slot in keys)
        return ChordSequence(chords, keys, self.onsets, dict(Counter(len(c) for c in chords)))


class _ByteReader:
    """Bounds-checked cursor over the raw file bytes."""

    def __init__(self, data: bytes, start: int = 0, end: Optional[int] = None):
        self.data = data
        self.pos = start
        self.end = len(data) if end is None else end

    def remaining(self) -> int:
        return self.end - self.pos

    def read(self, n: int, what: str) -> bytes:
        if self.pos + n > self.end:
            raise MidiParseError(f"truncated {what}: need {n} bytes, {self.remaining()} left", self.pos)
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def u8(self, what: str) -> int:
        return self.read(1, what)[0]

    def u16(self, what: str) -> int:
        return struct.unpack('>H', self.read(2, what))[0]

    def u32(self, what: str) -> int:
        return struct.unpack('>I', self.read(4, what))[0]

    def varlength(self, what: str) -> int:
        start = self.pos
        value = 0
        for _ in range(4):
            byte = self.u8(what)
            value = (value << 7) | (byte & 0x7F)
            if not byte & 0x80:
                return value
        raise MidiParseError(f"variable-length quantity longer than 4 bytes in {what}", start)


def parse_midi(data: bytes) -> Score:
    """
    Parse a Standard MIDI File (format 0 or 1).

    Running status is honoured, a NoteOn with velocity 0 ends a note, and tempo,
    meta and SysEx events are skipped.

    Args:
        data: Raw file contents.

    Returns:
        Score with every matched note.

    Raises:
        MidiParseError: on a malformed header or chunk, format 2 or SMPTE
            timing, or a NoteOn that is never released. The error carries the
            byte offset.
    """
    reader = _ByteReader(bytes(data))
    if reader.read(4, "header tag") != b'MThd':
        raise MidiParseError("missing 'MThd' header chunk", 0)
    header_length = reader.u32("header length")
    if header_length < 6:
        raise MidiParseError(f"header chunk too short ({header_length} bytes)", 4)
    header_start = reader.pos
    fmt = reader.u16("format")
    ntracks = reader.u16("track count")
    division = reader.u16("division")
    reader.read(header_length - 6, "header padding")

    if fmt == 2:
        raise MidiParseError("SMF format 2 (independent sequences) is not supported", header_start)
    if fmt not in (0, 1):
        raise MidiParseError(f"unknown SMF format {fmt}", header_start)
    if division & 0x8000:
        raise MidiParseError("SMPTE time division is not supported", header_start + 4)
    if division == 0:
        raise MidiParseError("division of 0 ticks per quarter note", header_start + 4)

    events: List[NoteEvent] = []
    track_index = 0
    while track_index < ntracks:
        chunk_start = reader.pos
        tag = reader.read(4, "chunk tag")
        length = reader.u32("chunk length")
        if reader.remaining() < length:
            raise MidiParseError(
                f"truncated chunk {tag!r}: declares {length} bytes, {reader.remaining()} available",
                chunk_start,
            )
        if tag != b'MTrk':
            # Alien chunks are skipped per the SMF rules
            logger.debug("Skipping unknown chunk %r at %d", tag, chunk_start)
            reader.pos += length
            continue
        track_reader = _ByteReader(reader.data, reader.pos, reader.pos + length)
        events.extend(_parse_track(track_reader, track_index, division))
        reader.pos += length
        track_index += 1

    logger.debug("Parsed %d note events from %d tracks", len(events), ntracks)
    return Score(division=division, events=tuple(events), format=fmt)


def _parse_track(reader: _ByteReader, track: int, division: int) -> List[NoteEvent]:
    tick = 0
    running_status: Optional[int] = None
    # (channel, key) -> queue of (start tick, velocity, byte offset)
    sounding: Dict[Tuple[int, int], deque] = defaultdict(deque)
    notes: List[NoteEvent] = []

    while reader.remaining() > 0:
        tick += reader.varlength("delta time")
        event_offset = reader.pos
        status = reader.u8("event status")

        if status == 0xFF:
            meta_type = reader.u8("meta type")
            length = reader.varlength("meta length")
            reader.read(length, "meta data")
            running_status = None
            if meta_type == 0x2F:
                break
            continue
        if status in (0xF0, 0xF7):
            length = reader.varlength("sysex length")
            reader.read(length, "sysex data")
            running_status = None
            continue
        if status >= 0xF0:
            raise MidiParseError(f"unexpected system status byte 0x{status:02X}", event_offset)

        if status < 0x80:
            if running_status is None:
                raise MidiParseError("data byte without running status", event_offset)
            first = status
            status = running_status
        else:
            running_status = status
            first = reader.u8("event data")

        length = CHANNEL_MESSAGE_LENGTHS[status & 0xF0]
        payload = [first]
        if length == 2:
            payload.append(reader.u8("event data"))
        if any(b & 0x80 for b in payload):
            raise MidiParseError("data byte with high bit set", event_offset)

        kind = status & 0xF0
        channel = status & 0x0F
        if kind == 0x90 and payload[1] > 0:
            sounding[(channel, payload[0])].append((tick, payload[1], event_offset))
        elif kind == 0x80 or kind == 0x90:
            queue = sounding.get((channel, payload[0]))
            if not queue:
                logger.debug("Ignoring NoteOff without NoteOn (key %d) at %d", payload[0], event_offset)
                continue
            start, velocity, _ = queue.popleft()
            if tick == start:
                logger.debug("Dropping zero-length note (key %d) at %d", payload[0], event_offset)
                continue
            notes.append(NoteEvent(
                onset=Fraction(start, division),
                duration=Fraction(tick - start, division),
                key=payload[0],
                velocity=velocity,
                track=track,
                channel=channel,
            ))

    for (channel, key), queue in sounding.items():
        if queue:
            _, _, offset = queue[0]
            raise MidiParseError(f"NoteOn for key {key} on channel {channel} is never released", offset)
    return notes


def load_midi(path: Union[str, Path]) -> Score:
    """Read and parse a MIDI file from disk."""
    return parse_midi(Path(path).read_bytes())


def _ticks(beats: Fraction, division: int) -> int:
    ticks = beats * division
    if ticks.denominator != 1:
        raise DomainError(f"{beats} beats is not a whole number of ticks at division {division}")
    return int(ticks)


def write_midi(score: Score, tempo: Optional[int] = 500000) -> bytes:
    """
    Serialize a Score as a Standard MIDI File (used for fixtures).

    Every track index from 0 to the highest used becomes one MTrk chunk. At
    equal ticks NoteOffs are written before NoteOns so repeated keys re-strike.

    Args:
        score: Score to write. Format 0 requires all events on track 0.
        tempo: Microseconds per quarter note for a Set Tempo event in track 0,
            or None to omit it.
    """
    ntracks = max(score.tracks, default=0) + 1
    if score.format == 0 and ntracks > 1:
        raise DomainError("format 0 scores must keep every event on track 0")

    by_track: Dict[int, List[Tuple[int, int, mido.Message]]] = defaultdict(list)
    for event in score.events:
        start = _ticks(event.onset, score.division)
        end = _ticks(event.onset + event.duration, score.division)
        by_track[event.track].append((start, 1, mido.Message(
            'note_on', channel=event.channel, note=event.key, velocity=event.velocity)))
        by_track[event.track].append((end, 0, mido.Message(
            'note_off', channel=event.channel, note=event.key, velocity=0x40)))

    midi = mido.MidiFile(type=score.format, ticks_per_beat=score.division)
    for track in range(ntracks):
        messages = mido.MidiTrack()
        if track == 0 and tempo is not None:
            messages.append(mido.MetaMessage('set_tempo', tempo=tempo, time=0))
        last = 0
        for tick, _, message in sorted(by_track.get(track, []), key=lambda m: (m[0], m[1], m[2].bytes())):
            messages.append(message.copy(time=tick - last))
            last = tick
        messages.append(mido.MetaMessage('end_of_track', time=0))
        midi.tracks.append(messages)

    buffer = io.BytesIO()
    midi.save(file=buffer)
    return buffer.getvalue()


def build_score(notes: Sequence[Tuple], division: int = 96, format: int = 1) -> Score:
    """
    Build a Score from (onset, duration, key[, track[, channel]]) tuples in beats.
    """
    events = []
    for note in notes:
        onset, duration, key = note[:3]
        track = note[3] if len(note) > 3 else 0
        channel = note[4] if len(note) > 4 else 0
        events.append(NoteEvent(Fraction(onset), Fraction(duration), key, track=track, channel=channel))
    return Score(division=division, events=tuple(events), format=format)


def _select(score: Score, selector: Optional[Selector]) -> List[NoteEvent]:
    selector = selector or ALL_NOTES
    return [e for e in score.events if selector.matches(e)]


def extract_melody(score: Score, selector: Optional[Selector] = None) -> MelodySequence:
    """
    Pitch classes of the selected notes in time order.

    Simultaneous onsets are ordered by ascending key; repeated pitches are kept.

    Raises:
        EmptyInputError: if the selector matches no notes.
    """
    selected = _select(score, selector)
    if not selected:
        raise EmptyInputError("selection contains no notes")
    selected.sort(key=lambda e: (e.onset, e.key))
    return MelodySequence(tuple(pitch_class_of_key(e.key) for e in selected))


def extract_chords(score: Score, window: Fraction = DEFAULT_CHORD_WINDOW,
                   selector: Optional[Selector] = None) -> ChordSequence:
    """
    Group notes whose onsets fall in the same window-quantized slot into chords.

    Args:
        score: Parsed score.
        window: Slot width in beats.
        selector: Optional track/channel filter.

    Returns:
        ChordSequence in slot order, with a cardinality histogram attached;
        empty when the selector matches no notes.
    """
    window = Fraction(window)
    if window <= 0:
        raise DomainError(f"chord window must be > 0, got {window}")
    slots: Dict[int, List[int]] = defaultdict(list)
    for event in _select(score, selector):
        slots[int(event.onset // window)].append(event.key)

    order = sorted(slots)
    keys = tuple(tuple(sorted(slots[s])) for s in order)
    chords = tuple(ChordClass.from_keys(k) for k in keys)
    cardinalities = dict(Counter(len(c) for c in chords))
    logger.debug("Extracted %d chords, cardinalities %s", len(chords), cardinalities)
    return ChordSequence(chords, keys, tuple(s * window for s in order), cardinalities)


def extract_onsets(score: Score, cycle: Fraction, selector: Optional[Selector] = None) -> RhythmPattern:
    """
    Cycle-relative onset positions: onset / cycle mod 1, deduplicated and sorted.

    Durations and velocities play no part.

    Raises:
        EmptyInputError: if no onsets remain.
    """
    cycle = Fraction(cycle)
    if cycle <= 0:
        raise DomainError(f"cycle must be > 0, got {cycle}")
    positions = sorted({(e.onset / cycle) % 1 for e in _select(score, selector)})
    if not positions:
        raise EmptyInputError("no onsets to build a rhythm from")
    return RhythmPattern(tuple(float(p) for p in positions))
