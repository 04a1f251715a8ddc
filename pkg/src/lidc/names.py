"""Semantic name grammar: hierarchical names, compute specs, and request classification.

Names are ordered tuples of non-empty byte components, rendered as percent-escaped
URIs ("/ndn/k8s/compute/app=BLAST&cpu=6&mem=4"). URI rendering escapes '/', '%' and
every byte outside 0x21-0x7E; values embedded in the '&'-separated compute component
additionally escape '&', '=', ',' so both layers stay unambiguous and reversible.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field


class NameGrammarError(ValueError):
    """Base class for name/compute-spec parse failures."""


class MalformedUri(NameGrammarError):
    pass


class MissingKey(NameGrammarError):
    pass


class BadValue(NameGrammarError):
    pass


class DuplicateKey(NameGrammarError):
    pass


# URI components only need '/' and '%' escaped (plus non-printables); values
# inside the '&'-separated compute component additionally escape '&', '=', ','.
_URI_SAFE = frozenset(range(0x21, 0x7F)) - {0x25, 0x2F}
_VALUE_SAFE = frozenset(range(0x21, 0x7F)) - {0x25, 0x26, 0x2C, 0x2F, 0x3D}
_HEX = "0123456789abcdefABCDEF"

_TOKEN_RE = re.compile(r"^[A-Za-z0-9_.+-]+$")

# Keys of the compute component that map to ComputeSpec fields.
_RESERVED_KEYS = ("app", "cpu", "data", "mem")


def _escape(raw: bytes, safe: frozenset[int]) -> str:
    out = []
    for b in raw:
        if b in safe:
            out.append(chr(b))
        else:
            out.append("%%%02X" % b)
    return "".join(out)


def escape_component(raw: bytes) -> str:
    """Percent-escape one URI name component."""
    return _escape(raw, _URI_SAFE)


def escape_bytes(raw: bytes) -> str:
    """Percent-escape with the strict set, for key=value values and filenames."""
    return _escape(raw, _VALUE_SAFE)


def unescape_text(text: str) -> bytes:
    """Inverse of escape_bytes; accepts lowercase hex digits and literal safe text."""
    out = bytearray()
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "%":
            if i + 2 >= len(text):
                raise MalformedUri(f"truncated percent escape in {text!r}")
            hi, lo = text[i + 1], text[i + 2]
            if hi not in _HEX or lo not in _HEX:
                raise MalformedUri(f"invalid percent escape in {text!r}")
            out.append(int(hi + lo, 16))
            i += 3
        else:
            out.extend(ch.encode("utf-8"))
            i += 1
    return bytes(out)


@dataclass(frozen=True)
class Name:
    """Hierarchical name; empty component tuple is the root name '/'."""

    components: tuple[bytes, ...] = ()

    def __post_init__(self) -> None:
        for c in self.components:
            if not isinstance(c, bytes) or len(c) == 0:
                raise MalformedUri("name components must be non-empty byte strings")

    def __len__(self) -> int:
        return len(self.components)

    def __lt__(self, other: "Name") -> bool:
        # Component-by-component bytewise compare; a proper prefix sorts first.
        return self.components < other.components

    def __le__(self, other: "Name") -> bool:
        return self.components <= other.components

    def child(self, component: bytes) -> "Name":
        return Name(self.components + (component,))

    def prefix(self, k: int) -> "Name":
        return Name(self.components[:k])

    def __str__(self) -> str:
        return to_uri(self)

    def __repr__(self) -> str:
        return f"Name({to_uri(self)!r})"


def name_of(*parts: str) -> Name:
    """Convenience constructor from literal (unescaped) text components."""
    return Name(tuple(p.encode("utf-8") for p in parts))


def parse_uri(text: str) -> Name:
    """Parse a URI string into a Name, normalizing percent escapes."""
    if not text.startswith("/"):
        raise MalformedUri(f"name URI must start with '/': {text!r}")
    if text == "/":
        return Name()
    components = []
    for piece in text[1:].split("/"):
        if piece == "":
            raise MalformedUri(f"empty name component in {text!r}")
        components.append(unescape_text(piece))
    return Name(tuple(components))


def to_uri(n: Name) -> str:
    """Render a Name in canonical URI form; inverse of parse_uri."""
    if not n.components:
        return "/"
    return "".join("/" + escape_component(c) for c in n.components)


def is_prefix_of(p: Name, n: Name) -> bool:
    """True iff every component of p equals the corresponding leading component of n."""
    return n.components[: len(p.components)] == p.components


COMPUTE_PREFIX = name_of("ndn", "k8s", "compute")
DATA_PREFIX = name_of("ndn", "k8s", "data")
STATUS_PREFIX = name_of("ndn", "k8s", "status")
RESULTS_PREFIX = name_of("ndn", "k8s", "data", "results")


@dataclass(frozen=True)
class ComputeSpec:
    """Parsed compute parameters: application, resources, app params, input datasets."""

    app: str
    mem_gb: int
    cpu: int
    params: tuple[tuple[str, str], ...] = ()
    datasets: tuple[Name, ...] = ()

    def __post_init__(self) -> None:
        if not self.app:
            raise BadValue("app must be non-empty")
        if not isinstance(self.mem_gb, int) or self.mem_gb < 1:
            raise BadValue("mem_gb must be an integer >= 1")
        if not isinstance(self.cpu, int) or self.cpu < 1:
            raise BadValue("cpu must be an integer >= 1")
        seen = set()
        for k, _ in self.params:
            if not _TOKEN_RE.match(k):
                raise BadValue(f"bad parameter key {k!r}")
            if k in _RESERVED_KEYS:
                raise DuplicateKey(f"parameter key {k!r} is reserved")
            if k in seen:
                raise DuplicateKey(f"duplicate parameter key {k!r}")
            seen.add(k)
        # Canonical form keeps params sorted by key.
        object.__setattr__(self, "params", tuple(sorted(self.params)))

    @classmethod
    def make(
        cls,
        app: str,
        mem_gb: int,
        cpu: int,
        params: dict[str, str] | None = None,
        datasets: list[Name] | tuple[Name, ...] = (),
    ) -> "ComputeSpec":
        return cls(app, mem_gb, cpu, tuple((params or {}).items()), tuple(datasets))

    def param(self, key: str, default: str | None = None) -> str | None:
        for k, v in self.params:
            if k == key:
                return v
        return default


def parse_compute_component(component: bytes) -> ComputeSpec:
    """Decode the final '&'-separated key=value component of a compute name."""
    try:
        text = component.decode("ascii")
    except UnicodeDecodeError as exc:
        raise BadValue(f"compute component is not ASCII: {component!r}") from exc
    fields: dict[str, str] = {}
    for pair in text.split("&"):
        key, sep, value = pair.partition("=")
        if not sep:
            raise BadValue(f"expected key=value, got {pair!r}")
        if not _TOKEN_RE.match(key):
            raise BadValue(f"bad key {key!r}")
        if key in fields:
            raise DuplicateKey(f"duplicate key {key!r}")
        fields[key] = value
    for required in ("app", "mem", "cpu"):
        if required not in fields:
            raise MissingKey(f"missing key {required!r}")
    app = unescape_text(fields.pop("app")).decode("utf-8")
    mem_text, cpu_text = fields.pop("mem"), fields.pop("cpu")
    if not mem_text.isdigit():
        raise BadValue(f"mem must be a positive integer, got {mem_text!r}")
    if not cpu_text.isdigit():
        raise BadValue(f"cpu must be a positive integer, got {cpu_text!r}")
    datasets: list[Name] = []
    data_field = fields.pop("data", None)
    if data_field is not None:
        if data_field == "":
            raise BadValue("data key present but empty")
        for piece in data_field.split(","):
            uri = unescape_text(piece).decode("utf-8")
            datasets.append(parse_uri(uri))
    params = []
    for k, v in fields.items():
        params.append((k, unescape_text(v).decode("utf-8")))
    return ComputeSpec(
        app=app,
        mem_gb=int(mem_text),
        cpu=int(cpu_text),
        params=tuple(params),
        datasets=tuple(datasets),
    )


def build_compute_component(spec: ComputeSpec) -> bytes:
    """Serialize a ComputeSpec into its canonical '&'-joined component."""
    items = {
        "app": escape_bytes(spec.app.encode("utf-8")),
        "mem": str(spec.mem_gb),
        "cpu": str(spec.cpu),
    }
    if spec.datasets:
        items["data"] = ",".join(
            escape_bytes(to_uri(d).encode("utf-8")) for d in spec.datasets
        )
    for k, v in spec.params:
        items[k] = escape_bytes(v.encode("utf-8"))
    joined = "&".join(f"{k}={items[k]}" for k in sorted(items))
    return joined.encode("ascii")


def build_compute_name(spec: ComputeSpec) -> Name:
    """Canonical compute request name: /ndn/k8s/compute/<component>."""
    return COMPUTE_PREFIX.child(build_compute_component(spec))


@dataclass(frozen=True)
class ComputeRequest:
    spec: ComputeSpec


@dataclass(frozen=True)
class DataRequest:
    name: Name


@dataclass(frozen=True)
class StatusRequest:
    job_id: str


ParsedRequest = ComputeRequest | DataRequest | StatusRequest


def classify_request(name: Name) -> ParsedRequest:
    """Map a request name onto its handler variant by prefix.

    Raises MalformedUri for names outside the three handled prefixes or with
    a malformed shape under them.
    """
    if is_prefix_of(COMPUTE_PREFIX, name):
        if len(name) != len(COMPUTE_PREFIX) + 1:
            raise MalformedUri("compute names carry exactly one parameter component")
        return ComputeRequest(parse_compute_component(name.components[-1]))
    if is_prefix_of(STATUS_PREFIX, name):
        if len(name) != len(STATUS_PREFIX) + 1:
            raise MalformedUri("status names carry exactly one job id component")
        try:
            job_id = name.components[-1].decode("ascii")
        except UnicodeDecodeError as exc:
            raise MalformedUri("job id must be ASCII") from exc
        return StatusRequest(job_id)
    if is_prefix_of(DATA_PREFIX, name):
        return DataRequest(name)
    raise MalformedUri(f"unrecognized request prefix: {to_uri(name)}")
