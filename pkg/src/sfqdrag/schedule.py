"""Binary pulse schedules: ramp cycles, mirroring, expansion, compact encoding.

A schedule is ``on-ramp cycles + plain train + off-ramp cycles``, all on the
global clock tick grid (``multiplier`` ticks per qubit period).  The off-ramp
is never stored: it is always the deterministic mirror of the on-ramp
(cycle order reversed, kick slot k -> (S - k) mod S), which preserves each
kick's y-quadrature weight cos(2 pi k / S) and negates its x-quadrature
weight sin(2 pi k / S).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import DecodeError, InvalidSpecError

#: On-ramp cycle alphabets per clock multiplier, in canonical (encoding) order.
#: The 4x alphabet holds identity, a y kick, a -x kick, and their combination;
#: the 8x alphabet allows kicks in the first three slots only.  Excluded
#: patterns would push against the targeted rotation or the wrong quadrature.
RAMP_ALPHABETS: dict[int, tuple[str, ...]] = {
    4: ("0000", "1000", "0100", "1100"),
    8: (
        "00000000",
        "10000000",
        "01000000",
        "00100000",
        "11000000",
        "10100000",
        "01100000",
        "11100000",
    ),
}

#: Fixed-width bits per on-ramp cycle index in the compact encoding.
CYCLE_INDEX_BITS = {4: 2, 8: 3}

#: Width of the header field that records the train-length field width.
_WIDTH_HEADER_BITS = 4

#: Register-width cap on the train length.
MAX_TRAIN_LENGTH = 2**16 - 1

#: Hard cap on on-ramp length accepted by schedules and the search layer.
MAX_RAMP_CYCLES = 8


@dataclass(frozen=True)
class ClockConfig:
    """Global clock geometry: ``multiplier`` ticks per qubit period."""

    multiplier: int
    qubit_period: float

    def __post_init__(self):
        if self.multiplier not in RAMP_ALPHABETS:
            raise InvalidSpecError(f"clock multiplier must be 4 or 8, got {self.multiplier}")
        if self.qubit_period <= 0:
            raise InvalidSpecError("qubit period must be positive")

    @property
    def clock_period(self) -> float:
        return self.qubit_period / self.multiplier

    @classmethod
    def for_model(cls, model, multiplier: int) -> "ClockConfig":
        return cls(multiplier=multiplier, qubit_period=model.qubit_period)


@dataclass(frozen=True, order=True)
class RampCycle:
    """One qubit period of clock slots; slot k fires a kick at offset k*T_c."""

    bits: str

    def __post_init__(self):
        if len(self.bits) not in RAMP_ALPHABETS or set(self.bits) - {"0", "1"}:
            raise InvalidSpecError(f"malformed cycle bits {self.bits!r}")

    @property
    def multiplier(self) -> int:
        return len(self.bits)

    @property
    def kick_slots(self) -> tuple[int, ...]:
        return tuple(k for k, b in enumerate(self.bits) if b == "1")

    @property
    def kick_count(self) -> int:
        return self.bits.count("1")

    def mirrored(self) -> "RampCycle":
        s = self.multiplier
        out = ["0"] * s
        for k in self.kick_slots:
            out[(s - k) % s] = "1"
        return RampCycle("".join(out))


def ramp_alphabet(multiplier: int) -> tuple[RampCycle, ...]:
    return tuple(RampCycle(b) for b in RAMP_ALPHABETS[multiplier])


def mirror_off_ramp(on_ramp: tuple[RampCycle, ...]) -> tuple[RampCycle, ...]:
    """Off-ramp for a given on-ramp: reverse cycle order, mirror each cycle."""
    return tuple(c.mirrored() for c in reversed(on_ramp))


def train_cycle(multiplier: int) -> RampCycle:
    """The plain train cycle: one kick at slot 0 per qubit period."""
    return RampCycle("1" + "0" * (multiplier - 1))


@dataclass(frozen=True)
class PulseSchedule:
    """Structured binary schedule: on-ramp, train of length N, mirrored off-ramp."""

    clock: ClockConfig
    on_ramp: tuple[RampCycle, ...]
    train_length: int
    kick_angle: float = 0.03

    def __post_init__(self):
        alphabet = set(RAMP_ALPHABETS[self.clock.multiplier])
        for c in self.on_ramp:
            if c.multiplier != self.clock.multiplier:
                raise InvalidSpecError(f"cycle {c.bits!r} does not fit a {self.clock.multiplier}x clock")
            if c.bits not in alphabet:
                raise InvalidSpecError(f"cycle {c.bits!r} is not in the on-ramp alphabet")
        if len(self.on_ramp) > MAX_RAMP_CYCLES:
            raise InvalidSpecError(f"on-ramp longer than {MAX_RAMP_CYCLES} cycles")
        if not 0 <= self.train_length <= MAX_TRAIN_LENGTH:
            raise InvalidSpecError(f"train_length must be in [0, {MAX_TRAIN_LENGTH}]")
        if not 0.0 < self.kick_angle < 0.5:
            raise InvalidSpecError("kick_angle must be in (0, 0.5)")

    @classmethod
    def from_strings(cls, clock: ClockConfig, on_ramp: list[str], train_length: int,
                     kick_angle: float = 0.03) -> "PulseSchedule":
        return cls(clock, tuple(RampCycle(b) for b in on_ramp), train_length, kick_angle)

    @property
    def off_ramp(self) -> tuple[RampCycle, ...]:
        return mirror_off_ramp(self.on_ramp)

    @property
    def cycle_count(self) -> int:
        return 2 * len(self.on_ramp) + self.train_length

    @property
    def total_duration(self) -> float:
        return self.cycle_count * self.clock.qubit_period

    @property
    def kick_count(self) -> int:
        ramp_kicks = sum(c.kick_count for c in self.on_ramp)
        return self.train_length + 2 * ramp_kicks


def expand_bits(schedule: PulseSchedule) -> str:
    """Flatten a schedule to its full tick string, left to right in time."""
    s = schedule.clock.multiplier
    train = ("1" + "0" * (s - 1)) * schedule.train_length
    on = "".join(c.bits for c in schedule.on_ramp)
    off = "".join(c.bits for c in schedule.off_ramp)
    return on + train + off


def kick_slot_indices(bits: str) -> list[int]:
    """Absolute tick indices of the kicks in an expanded bit string."""
    return [i for i, b in enumerate(bits) if b == "1"]


@dataclass(frozen=True)
class CompactEncoding:
    """Register image of a schedule.

    ``bit_string`` is ``[4-bit width header][cycle indices][train length]``.
    ``bit_count`` counts the payload only (ramp bits + train-length bits),
    which is the hardware storage the ramp/train registers need; the header
    makes the image self-describing.
    """

    bit_string: str
    bit_count: int

    @property
    def total_bits(self) -> int:
        return len(self.bit_string)

    @property
    def register_hex(self) -> str:
        width = (len(self.bit_string) + 3) // 4
        return format(int(self.bit_string, 2), f"0{width}x")

    @classmethod
    def from_hex(cls, register_hex: str, total_bits: int) -> "CompactEncoding":
        bits = format(int(register_hex, 16), f"0{total_bits}b")
        if len(bits) != total_bits:
            raise DecodeError("register image wider than declared total_bits")
        return cls(bit_string=bits, bit_count=total_bits - _WIDTH_HEADER_BITS)


def _train_field_width(n: int) -> int:
    # ceil(log2 N) except at exact powers of two, where one more bit is
    # needed to actually store the value; N in {0, 1} fits one bit.
    return max(1, int(n).bit_length())


def encode_compact(schedule: PulseSchedule) -> CompactEncoding:
    """Pack a schedule into its compact register image."""
    s = schedule.clock.multiplier
    alphabet = RAMP_ALPHABETS[s]
    cbits = CYCLE_INDEX_BITS[s]
    width = _train_field_width(schedule.train_length)
    parts = [format(width, f"0{_WIDTH_HEADER_BITS}b")]
    parts += [format(alphabet.index(c.bits), f"0{cbits}b") for c in schedule.on_ramp]
    parts.append(format(schedule.train_length, f"0{width}b"))
    bit_string = "".join(parts)
    return CompactEncoding(bit_string=bit_string, bit_count=len(bit_string) - _WIDTH_HEADER_BITS)


def decode_compact(encoding: CompactEncoding | str, clock: ClockConfig,
                   kick_angle: float = 0.03) -> PulseSchedule:
    """Exact inverse of :func:`encode_compact`."""
    bits = encoding.bit_string if isinstance(encoding, CompactEncoding) else encoding
    if set(bits) - {"0", "1"}:
        raise DecodeError("register image must be a 0/1 string")
    if len(bits) < _WIDTH_HEADER_BITS + 1:
        raise DecodeError("register image shorter than header + train field")
    width = int(bits[:_WIDTH_HEADER_BITS], 2)
    if width < 1:
        raise DecodeError("train-length field width must be at least 1")
    payload = bits[_WIDTH_HEADER_BITS:]
    cbits = CYCLE_INDEX_BITS[clock.multiplier]
    ramp_bits = len(payload) - width
    if ramp_bits < 0 or ramp_bits % cbits != 0:
        raise DecodeError(f"payload length {len(payload)} does not split into "
                          f"{cbits}-bit cycles plus a {width}-bit train field")
    n_cycles = ramp_bits // cbits
    if n_cycles > MAX_RAMP_CYCLES:
        raise DecodeError(f"decoded on-ramp of {n_cycles} cycles exceeds the cap")
    alphabet = RAMP_ALPHABETS[clock.multiplier]
    on_ramp = tuple(
        RampCycle(alphabet[int(payload[i * cbits:(i + 1) * cbits], 2)])
        for i in range(n_cycles)
    )
    train_length = int(payload[ramp_bits:], 2)
    return PulseSchedule(clock=clock, on_ramp=on_ramp, train_length=train_length,
                         kick_angle=kick_angle)


def schedule_to_dict(schedule: PulseSchedule) -> dict:
    """JSON form; clock geometry is carried as the multiplier only."""
    return {
        "clock_multiplier": schedule.clock.multiplier,
        "on_ramp": [c.bits for c in schedule.on_ramp],
        "train_length": schedule.train_length,
        "kick_angle": schedule.kick_angle,
    }


def schedule_from_dict(doc: dict, qubit_period: float) -> PulseSchedule:
    clock = ClockConfig(multiplier=int(doc["clock_multiplier"]), qubit_period=qubit_period)
    return PulseSchedule.from_strings(
        clock,
        list(doc["on_ramp"]),
        int(doc["train_length"]),
        float(doc.get("kick_angle", 0.03)),
    )


def encoding_to_dict(encoding: CompactEncoding, schedule: PulseSchedule) -> dict:
    return {
        "register_hex": encoding.register_hex,
        "bit_count": encoding.bit_count,
        "total_bits": encoding.total_bits,
        "clock_multiplier": schedule.clock.multiplier,
        "kick_angle": schedule.kick_angle,
    }
