"""Location-independent, name-based compute placement over a simulated
multi-cluster overlay: semantic names route compute requests to gateways that
admit jobs into mock orchestrators and publish results into named data lakes.
"""

from .names import (
    ComputeSpec,
    Name,
    build_compute_name,
    is_prefix_of,
    parse_compute_component,
    parse_uri,
    to_uri,
)
from .wire import DataPacket, Interest, decode_data, decode_interest, encode_data, encode_interest

__version__ = "0.1.0"

__all__ = [
    "ComputeSpec",
    "DataPacket",
    "Interest",
    "Name",
    "build_compute_name",
    "decode_data",
    "decode_interest",
    "encode_data",
    "encode_interest",
    "is_prefix_of",
    "parse_compute_component",
    "parse_uri",
    "to_uri",
    "__version__",
]
