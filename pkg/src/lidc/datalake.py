"""Named data repository: publishes payloads under /ndn/k8s/data, serves
manifests and fixed-size segments, and persists to a directory tree.

A dataset's manifest may declare a size larger than what is stored; large
simulated outputs keep a truncated synthetic payload plus the declared size.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass

from .names import (
    DATA_PREFIX,
    Name,
    escape_bytes,
    is_prefix_of,
    parse_uri,
    to_uri,
)
from .wire import DataPacket

DEFAULT_SEGMENT_SIZE = 8192
DEFAULT_FRESHNESS_MS = 60_000

MANIFEST_COMPONENT = b"manifest"
SEGMENT_PREFIX = b"seg="


class DataLakeError(Exception):
    pass


class NameCollision(DataLakeError):
    pass


class NamespaceViolation(DataLakeError):
    pass


class NotFound(DataLakeError):
    pass


class SegmentOutOfRange(DataLakeError):
    pass


class CorruptStore(DataLakeError):
    pass


@dataclass(frozen=True)
class DatasetManifest:
    name: Name
    declared_size: int
    stored_size: int
    segment_size: int
    segment_count: int
    digest: bytes

    def to_text(self) -> str:
        return (
            f"name={to_uri(self.name)}\n"
            f"declared_size={self.declared_size}\n"
            f"stored_size={self.stored_size}\n"
            f"segment_size={self.segment_size}\n"
            f"segment_count={self.segment_count}\n"
            f"digest={self.digest.hex()}\n"
        )

    @classmethod
    def from_text(cls, text: str) -> "DatasetManifest":
        fields = {}
        for line in text.splitlines():
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise CorruptStore(f"bad manifest line {line!r}")
            fields[key] = value
        try:
            return cls(
                name=parse_uri(fields["name"]),
                declared_size=int(fields["declared_size"]),
                stored_size=int(fields["stored_size"]),
                segment_size=int(fields["segment_size"]),
                segment_count=int(fields["segment_count"]),
                digest=bytes.fromhex(fields["digest"]),
            )
        except (KeyError, ValueError) as exc:
            raise CorruptStore(f"bad manifest: {exc}") from exc


class DataLake:
    def __init__(self, segment_size: int = DEFAULT_SEGMENT_SIZE) -> None:
        if segment_size < 1:
            raise ValueError("segment_size must be >= 1")
        self.segment_size = segment_size
        self.datasets: dict[Name, tuple[DatasetManifest, bytes]] = {}

    def publish(
        self,
        name: Name,
        payload: bytes,
        declared_size: int | None = None,
        overwrite: bool = False,
    ) -> DatasetManifest:
        if not is_prefix_of(DATA_PREFIX, name):
            raise NamespaceViolation(f"{to_uri(name)} is outside {to_uri(DATA_PREFIX)}")
        if name in self.datasets and not overwrite:
            raise NameCollision(f"{to_uri(name)} is already published")
        declared = len(payload) if declared_size is None else declared_size
        if declared < len(payload):
            raise ValueError("declared_size must be >= stored payload size")
        manifest = DatasetManifest(
            name=name,
            declared_size=declared,
            stored_size=len(payload),
            segment_size=self.segment_size,
            segment_count=-(-len(payload) // self.segment_size),
            digest=hashlib.sha256(payload).digest(),
        )
        self.datasets[name] = (manifest, payload)
        return manifest

    def get_manifest(self, name: Name) -> DatasetManifest:
        try:
            return self.datasets[name][0]
        except KeyError:
            raise NotFound(f"{to_uri(name)} is not published") from None

    def get_segment(self, name: Name, index: int) -> bytes:
        manifest, payload = self._dataset(name)
        if not 0 <= index < manifest.segment_count:
            raise SegmentOutOfRange(
                f"segment {index} of {to_uri(name)} (count {manifest.segment_count})"
            )
        start = index * manifest.segment_size
        return payload[start : start + manifest.segment_size]

    def _dataset(self, name: Name) -> tuple[DatasetManifest, bytes]:
        try:
            return self.datasets[name]
        except KeyError:
            raise NotFound(f"{to_uri(name)} is not published") from None

    def serve(self, name: Name, freshness_ms: int = DEFAULT_FRESHNESS_MS) -> DataPacket:
        """Answer a request name: <dataset>/manifest or <dataset>/seg=<i>.

        Raises NotFound / SegmentOutOfRange; callers translate those into
        error Data packets.
        """
        if len(name) == 0:
            raise NotFound("root name")
        last = name.components[-1]
        base = name.prefix(len(name) - 1)
        if last == MANIFEST_COMPONENT:
            manifest = self.get_manifest(base)
            return DataPacket.build(name, manifest.to_text().encode(), freshness_ms)
        if last.startswith(SEGMENT_PREFIX):
            text = last[len(SEGMENT_PREFIX) :]
            if not text.isdigit():
                raise NotFound(f"bad segment component {last!r}")
            return DataPacket.build(name, self.get_segment(base, int(text)), freshness_ms)
        raise NotFound(f"{to_uri(name)} is not a manifest or segment name")

    def persist(self, root_dir: str) -> None:
        """One directory per dataset (escaped URI), holding manifest + payload."""
        os.makedirs(root_dir, exist_ok=True)
        for name in sorted(self.datasets):
            manifest, payload = self.datasets[name]
            d = os.path.join(root_dir, escape_bytes(to_uri(name).encode()))
            os.makedirs(d, exist_ok=True)
            with open(os.path.join(d, "manifest"), "w") as fh:
                fh.write(manifest.to_text())
            with open(os.path.join(d, "payload"), "wb") as fh:
                fh.write(payload)

    def load(self, root_dir: str) -> None:
        """Reconstruct state from persist() layout, verifying every digest."""
        self.datasets.clear()
        for entry in sorted(os.listdir(root_dir)):
            d = os.path.join(root_dir, entry)
            if not os.path.isdir(d):
                continue
            with open(os.path.join(d, "manifest")) as fh:
                manifest = DatasetManifest.from_text(fh.read())
            with open(os.path.join(d, "payload"), "rb") as fh:
                payload = fh.read()
            if hashlib.sha256(payload).digest() != manifest.digest:
                raise CorruptStore(f"payload digest mismatch for {to_uri(manifest.name)}")
            if len(payload) != manifest.stored_size:
                raise CorruptStore(f"stored size mismatch for {to_uri(manifest.name)}")
            self.datasets[manifest.name] = (manifest, payload)
