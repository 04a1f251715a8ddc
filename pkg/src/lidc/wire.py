"""Deterministic TLV encoding of Interest and Data packets.

Record types: 0x05 Interest, 0x06 Data, 0x07 name, 0x08 name component,
0x0A nonce (4 bytes big-endian), 0x0C lifetime, 0x14 freshness, 0x15 content,
0x17 digest (SHA-256 over encoded name || content). Lengths are one byte below
253, otherwise 0xFD followed by a 16-bit big-endian length; that caps a single
TLV value at 65535 bytes, and the overall packet bound is 1 MiB. Unsigned
integers are minimal-length big-endian, with zero written as one 0x00 byte;
the decoder rejects non-minimal forms so every value has exactly one encoding.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from .names import Name

TT_INTEREST = 0x05
TT_DATA = 0x06
TT_NAME = 0x07
TT_COMPONENT = 0x08
TT_NONCE = 0x0A
TT_LIFETIME = 0x0C
TT_FRESHNESS = 0x14
TT_CONTENT = 0x15
TT_DIGEST = 0x17

MAX_PACKET = 1 << 20
_MAX_TLV_VALUE = 0xFFFF
DEFAULT_LIFETIME_MS = 4000
DIGEST_LEN = 32


class WireError(ValueError):
    pass


class TruncatedPacket(WireError):
    pass


class UnknownTlvType(WireError):
    pass


class LengthMismatch(WireError):
    pass


class DigestMismatch(WireError):
    pass


class PacketTooLarge(WireError):
    pass


@dataclass(frozen=True)
class Interest:
    name: Name
    nonce: int
    lifetime_ms: int = DEFAULT_LIFETIME_MS

    def __post_init__(self) -> None:
        if not 0 <= self.nonce <= 0xFFFFFFFF:
            raise WireError("nonce must fit in 32 bits")
        if self.lifetime_ms <= 0:
            raise WireError("lifetime_ms must be positive")


@dataclass(frozen=True)
class DataPacket:
    name: Name
    content: bytes
    freshness_ms: int
    digest: bytes

    def __post_init__(self) -> None:
        if self.freshness_ms < 0:
            raise WireError("freshness_ms must be non-negative")
        if len(self.digest) != DIGEST_LEN:
            raise WireError("digest must be 32 bytes")

    @classmethod
    def build(cls, name: Name, content: bytes, freshness_ms: int = 0) -> "DataPacket":
        return cls(name, content, freshness_ms, content_digest(name, content))


def content_digest(name: Name, content: bytes) -> bytes:
    return hashlib.sha256(encode_name(name) + content).digest()


def _encode_len(n: int) -> bytes:
    if n < 253:
        return bytes([n])
    if n <= _MAX_TLV_VALUE:
        return b"\xfd" + n.to_bytes(2, "big")
    raise PacketTooLarge(f"TLV value of {n} bytes exceeds the 3-byte length form")


def _tlv(type_: int, value: bytes) -> bytes:
    return bytes([type_]) + _encode_len(len(value)) + value


def _encode_uint(n: int) -> bytes:
    if n == 0:
        return b"\x00"
    return n.to_bytes((n.bit_length() + 7) // 8, "big")


def encode_name(n: Name) -> bytes:
    inner = b"".join(_tlv(TT_COMPONENT, c) for c in n.components)
    return _tlv(TT_NAME, inner)


def encode_interest(i: Interest) -> bytes:
    body = (
        encode_name(i.name)
        + _tlv(TT_NONCE, i.nonce.to_bytes(4, "big"))
        + _tlv(TT_LIFETIME, _encode_uint(i.lifetime_ms))
    )
    packet = _tlv(TT_INTEREST, body)
    if len(packet) > MAX_PACKET:
        raise PacketTooLarge(f"packet of {len(packet)} bytes exceeds 1 MiB")
    return packet


def encode_data(d: DataPacket) -> bytes:
    body = (
        encode_name(d.name)
        + _tlv(TT_FRESHNESS, _encode_uint(d.freshness_ms))
        + _tlv(TT_CONTENT, d.content)
        + _tlv(TT_DIGEST, d.digest)
    )
    packet = _tlv(TT_DATA, body)
    if len(packet) > MAX_PACKET:
        raise PacketTooLarge(f"packet of {len(packet)} bytes exceeds 1 MiB")
    return packet


class _Cursor:
    def __init__(self, buf: bytes, pos: int = 0, end: int | None = None):
        self.buf = buf
        self.pos = pos
        self.end = len(buf) if end is None else end

    def done(self) -> bool:
        return self.pos >= self.end

    def _take(self, n: int) -> bytes:
        if self.pos + n > self.end:
            raise TruncatedPacket("record extends past the end of the buffer")
        out = self.buf[self.pos : self.pos + n]
        self.pos += n
        return out

    def read_header(self) -> tuple[int, int]:
        type_ = self._take(1)[0]
        first = self._take(1)[0]
        if first < 253:
            length = first
        elif first == 0xFD:
            length = int.from_bytes(self._take(2), "big")
            if length < 253:
                raise LengthMismatch("non-minimal length encoding")
        else:
            raise LengthMismatch(f"unsupported length marker 0x{first:02X}")
        return type_, length

    def read_record(self, expected_type: int) -> bytes:
        type_, length = self.read_header()
        if type_ != expected_type:
            raise UnknownTlvType(
                f"expected TLV type 0x{expected_type:02X}, got 0x{type_:02X}"
            )
        return self._take(length)


def _decode_uint(raw: bytes) -> int:
    if len(raw) == 0:
        raise LengthMismatch("empty unsigned integer")
    if len(raw) > 1 and raw[0] == 0:
        raise LengthMismatch("non-minimal unsigned integer encoding")
    return int.from_bytes(raw, "big")


def _decode_name(raw: bytes) -> Name:
    cur = _Cursor(raw)
    components = []
    while not cur.done():
        components.append(cur.read_record(TT_COMPONENT))
        if components[-1] == b"":
            raise LengthMismatch("empty name component")
    return Name(tuple(components))


def _outer(buf: bytes, expected_type: int) -> _Cursor:
    if len(buf) == 0:
        raise TruncatedPacket("empty input")
    if len(buf) > MAX_PACKET:
        raise PacketTooLarge(f"packet of {len(buf)} bytes exceeds 1 MiB")
    cur = _Cursor(buf)
    type_, length = cur.read_header()
    if type_ != expected_type:
        raise UnknownTlvType(f"expected outer type 0x{expected_type:02X}, got 0x{type_:02X}")
    if cur.pos + length != len(buf):
        if cur.pos + length > len(buf):
            raise TruncatedPacket("declared packet length exceeds buffer")
        raise LengthMismatch("trailing bytes after packet")
    return cur


def decode_interest(buf: bytes) -> Interest:
    cur = _outer(buf, TT_INTEREST)
    name = _decode_name(cur.read_record(TT_NAME))
    nonce_raw = cur.read_record(TT_NONCE)
    if len(nonce_raw) != 4:
        raise LengthMismatch("nonce must be exactly 4 bytes")
    lifetime = _decode_uint(cur.read_record(TT_LIFETIME))
    if not cur.done():
        raise LengthMismatch("unexpected extra records in Interest")
    if lifetime == 0:
        raise LengthMismatch("lifetime must be positive")
    return Interest(name, int.from_bytes(nonce_raw, "big"), lifetime)


def decode_data(buf: bytes) -> DataPacket:
    cur = _outer(buf, TT_DATA)
    name_raw = cur.read_record(TT_NAME)
    name = _decode_name(name_raw)
    freshness = _decode_uint(cur.read_record(TT_FRESHNESS))
    content = cur.read_record(TT_CONTENT)
    digest = cur.read_record(TT_DIGEST)
    if len(digest) != DIGEST_LEN:
        raise LengthMismatch("digest must be exactly 32 bytes")
    if not cur.done():
        raise LengthMismatch("unexpected extra records in Data")
    if content_digest(name, content) != digest:
        raise DigestMismatch("content digest does not verify")
    return DataPacket(name, content, freshness, digest)


def packet_type(buf: bytes) -> int:
    """Peek at the outer TLV type without decoding (0x05 or 0x06)."""
    if len(buf) == 0:
        raise TruncatedPacket("empty input")
    return buf[0]


def write_capture(path: str, packets: list[bytes]) -> None:
    """Write packets as a capture file: 4-byte big-endian length prefix each."""
    with open(path, "wb") as fh:
        for p in packets:
            fh.write(len(p).to_bytes(4, "big"))
            fh.write(p)


def read_capture(path: str) -> list[bytes]:
    packets = []
    with open(path, "rb") as fh:
        raw = fh.read()
    pos = 0
    while pos < len(raw):
        if pos + 4 > len(raw):
            raise TruncatedPacket("truncated capture length prefix")
        n = int.from_bytes(raw[pos : pos + 4], "big")
        pos += 4
        if pos + n > len(raw):
            raise TruncatedPacket("truncated capture record")
        packets.append(raw[pos : pos + n])
        pos += n
    return packets
