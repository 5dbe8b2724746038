"""
Utility functions for baseline processing
"""

import hashlib
import math
import os
import re
import tempfile
from typing import Tuple, Union

MINUTES_PER_DAY = 1440
SUPPORTED_RESOLUTIONS = (1, 5, 15, 30)

_CLOCK_PATTERN = re.compile(r'^(\d{1,2}):(\d{2})$')


def derive_seed(seed: int, purpose: str, index: int = 0) -> int:
    """Derive a subsystem seed from the top-level seed by fixed hashing"""
    digest = hashlib.sha256(f"{int(seed)}:{purpose}:{int(index)}".encode('utf-8')).digest()
    return int.from_bytes(digest[:8], 'big')


def parse_clock(value: Union[str, int]) -> int:
    """Parse 'HH:MM' into minutes after midnight; '24:00' is the end of day"""
    if isinstance(value, int):
        minutes = value
    else:
        match = _CLOCK_PATTERN.match(str(value).strip())
        if not match:
            raise ValueError(f"Invalid clock time '{value}', expected HH:MM")
        hours, mins = int(match.group(1)), int(match.group(2))
        if mins >= 60:
            raise ValueError(f"Invalid clock time '{value}', minutes must be < 60")
        minutes = hours * 60 + mins

    if not 0 <= minutes <= MINUTES_PER_DAY:
        raise ValueError(f"Clock time {value} is outside the day")
    return minutes


def format_clock(minutes: int) -> str:
    """Format minutes after midnight as 'HH:MM'"""
    return f"{minutes // 60:02d}:{minutes % 60:02d}"


def clock_to_slots(start_minute: int, end_minute: int, slot_minutes: int,
                   offset_minute: int = 0) -> Tuple[int, int]:
    """
    Convert a clock interval [start, end) into inclusive 0-based slot indices.
    Slots are counted from offset_minute (the tensor span start).
    """
    if end_minute <= start_minute:
        raise ValueError("Clock interval end must be after its start")
    start_slot = (start_minute - offset_minute) // slot_minutes
    end_slot = math.ceil((end_minute - offset_minute) / slot_minutes) - 1
    return start_slot, end_slot



def atomic_write(path: str, content: Union[str, bytes]) -> str:
    """Write a file atomically: temp file in the same directory, then rename"""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)

    mode = 'wb' if isinstance(content, bytes) else 'w'
    fd, temp_path = tempfile.mkstemp(dir=directory, prefix='.tmp-', suffix=os.path.basename(path))
    try:
        kwargs = {} if mode == 'wb' else {'encoding': 'utf-8', 'newline': ''}
        with os.fdopen(fd, mode, **kwargs) as handle:
            handle.write(content)
        os.replace(temp_path, path)
    except Exception:
        if os.path.exists(temp_path):
            os.remove(temp_path)
        raise

    return path
