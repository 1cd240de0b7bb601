"""Per-link message payloads and their exact bit costs.

Two wire shapes exist.  Flag messages carry a 2-bit tag and nothing
else; they are what the constant-bandwidth clique protocol sends.  ID
messages carry the tag, two length fields, and the announced node IDs at
a fixed width.  A message never mixes the two shapes, and the absence of
a message costs zero bits.
"""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class EncodingParams:
    """Fixed widths used to meter messages: ``id_bits`` per node ID and
    ``count_bits`` per length field."""

    id_bits: int = 32
    count_bits: int = 8


@dataclass(frozen=True)
class Message:
    new_ids: frozenset[int] = frozenset()
    del_ids: frozenset[int] = frozenset()
    plain_new: bool = False
    plain_del: bool = False

    def __post_init__(self):
        object.__setattr__(self, "new_ids", frozenset(self.new_ids))
        object.__setattr__(self, "del_ids", frozenset(self.del_ids))

    @property
    def is_empty(self) -> bool:
        return not (self.new_ids or self.del_ids or self.plain_new or self.plain_del)

    @property
    def uses_flags(self) -> bool:
        return self.plain_new or self.plain_del

    @property
    def id_count(self) -> int:
        return len(self.new_ids) + len(self.del_ids)

    def merge(self, other: "Message") -> "Message":
        """Concatenate two logical sends over the same ordered link:
        union of ID sets, OR of flags."""
        return Message(
            new_ids=self.new_ids | other.new_ids,
            del_ids=self.del_ids | other.del_ids,
            plain_new=self.plain_new or other.plain_new,
            plain_del=self.plain_del or other.plain_del,
        )


def message_bits(m: Message, enc: EncodingParams) -> int:
    """Exact size of one delivered message under the fixed encoding.

    Flag messages are always 2 bits (tag only).  ID messages pay the
    2-bit tag, a count field per direction, and ``id_bits`` per carried
    ID.  An empty message is never sent and costs 0.
    """
    if m.uses_flags:
        if m.new_ids or m.del_ids:
            raise ValueError("flag and ID payloads are mutually exclusive in one message")
        return 2
    if m.is_empty:
        return 0
    capacity = (1 << enc.count_bits) - 1
    if len(m.new_ids) > capacity or len(m.del_ids) > capacity:
        raise ValueError(f"ID count exceeds {enc.count_bits}-bit length field")
    return 2 + 2 * enc.count_bits + m.id_count * enc.id_bits
